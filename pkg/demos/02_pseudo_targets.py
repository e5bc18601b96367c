"""The 180 deg maneuver, with and without pseudo-targets.

Starting exactly half a turn away, both plain controllers produce no moment
and the body never moves. With substitution switched on the controller acts
as if the error were 90 deg until the state leaves the unstable set, then
hands over to the ordinary law.
"""
from dataclasses import replace

import numpy as np

from pseudotarget import reference_scenario, run_scenario

for rep in ("quaternion", "so3"):
    s = reference_scenario(rep)                         # noise off, 20 s at dt = 1e-3
    on, r_on = run_scenario(s)
    off, r_off = run_scenario(s.replace(pseudo=replace(s.pseudo, enabled=False)))
    last = on.last_pseudo_step()
    print(f"[{rep}]")
    print(f"  pseudo off: max |M| = {off.M_norm.max():.1e}, converged = {r_off.converged}")
    print(f"  pseudo on : converged at t = {r_on.t_converge:.3f} s, "
          f"substitution active for {on.pseudo_active.sum()} steps (last at t = {on.t[last]:.3f} s)")
    print(f"  V non-increasing after that: {bool(np.all(np.diff(on.V[last + 1:]) <= 1e-9))}")
    for t in (0.0, 0.5, 1.0, 2.0, 4.0):
        k = int(round(t / s.integrator.dt))
        print(f"    t = {t:3.1f}  psi = {on.psi[k]:.4f}  |M| = {on.M_norm[k]:.4f}  V = {on.V[k]:.3e}")
