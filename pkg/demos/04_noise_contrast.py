"""Measurement noise versus the unstable equilibrium.

With noise the plain controller does eventually leave the 180 deg state, but
only once the noise has kicked it far enough off; pseudo-targets act at once.
A small Monte Carlo (10 seeds, about 40 s) compares convergence times.
"""
from dataclasses import replace

from pseudotarget import reference_scenario, run_monte_carlo

s = reference_scenario("quaternion", noise=True)
on = run_monte_carlo(s, 10)
off = run_monte_carlo(s.replace(pseudo=replace(s.pseudo, enabled=False)), 10)
print("seed   t_on    t_off")
for seed, a, b in zip(on.seeds, on.t_converge, off.t_converge):
    print(f"{seed:4d}  {a:6.3f}  {b:6.3f}")
print(f"median: on {on.median:.3f} s, off {off.median:.3f} s")
