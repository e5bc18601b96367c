"""
Built-in reproductions of the 180 deg maneuver comparisons.

Each preset is the published setup (see :func:`reference_scenario`) run twice,
with and without pseudo-targets, and reduced to the columns its figure plots.
Columns of the run without pseudo-targets carry a ``_wpe`` suffix.

=======  ==============  =================================
preset   representation  plotted quantity
=======  ==============  =================================
fig2     quaternion      error quaternion components
fig3     so3             configuration error Psi
fig4     so3             attitude error vector norm |e_R|
=======  ==============  =================================
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable, NamedTuple

import numpy as np

from .harness import Scenario, TrajectoryLog, reference_scenario, run_scenario


class Preset(NamedTuple):
    representation: str
    columns: Callable[[TrajectoryLog], dict[str, np.ndarray]]
    description: str


def _qe(log: TrajectoryLog) -> dict[str, np.ndarray]:
    return {f"qe{i}": log.q_e[:, i] for i in range(4)}


PRESETS = {
    "fig2": Preset("quaternion", _qe, "error quaternion, 180 deg about e3"),
    "fig3": Preset("so3", lambda log: {"psi": log.psi}, "configuration error, 180 deg about e3"),
    "fig4": Preset("so3", lambda log: {"eR_norm": log.eR_norm}, "|e_R|, 180 deg about e3"),
}


def preset_scenario(name: str, *, noise: bool = True, **overrides) -> Scenario:
    """Scenario behind a preset. Noise is on by default, as in the published runs.

    ``overrides`` are :class:`Scenario` field replacements applied last.
    """
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    s = reference_scenario(PRESETS[name].representation, noise=noise)
    return s.replace(**overrides) if overrides else s


def compare_pseudo(name: str, s: Scenario) -> dict[str, np.ndarray]:
    """Run ``s`` with pseudo-targets on and off; return the preset's columns side by side."""
    p = PRESETS[name]
    on, _ = run_scenario(s.replace(pseudo=replace(s.pseudo, enabled=True)))
    off, _ = run_scenario(s.replace(pseudo=replace(s.pseudo, enabled=False)))
    cols = {"t": on.t}
    cols.update(p.columns(on))
    cols["M_norm"] = on.M_norm
    cols["pseudo_active"] = on.pseudo_active
    cols.update({f"{k}_wpe": v for k, v in p.columns(off).items()})
    cols["M_norm_wpe"] = off.M_norm
    return cols
