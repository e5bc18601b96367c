"""
Scenario files and CSV export.

Scenario files are TOML with flat sections mirroring the :class:`Scenario`
fields. Every section and key is optional; anything not recognised is
rejected so a typo cannot silently fall back to a default::

    [scenario]
    representation = "quaternion"   # or "so3"
    duration = 20.0
    seed = 0
    feedback = "zoh"                # or "continuous"

    [initial]
    axis = [0, 0, 1]                # with angle_deg, or give quaternion = [q0, q1, q2, q3]
    angle_deg = 0.0
    omega = [0, 0, 0]
    perturbation = [0, 0, 0]        # rotation vector (rad) applied on top

    [desired]
    axis = [0, 0, 1]
    angle_deg = 180.0
    spin_axis = [0, 0, 1]           # optional constant-rate spin of the target
    spin_rate = 0.0

    [inertia]
    J = [0.0125, 0.0125, 0.025]     # diagonal or a full 3x3 list

    [gains]
    k_q = 10.0
    k_omega_q = 1.5
    k_R = 5.0
    k_omega_R = 2.1

    [weights]
    K = [1, 2, 3]

    [pseudo]
    enabled = true
    epsilon = 0.01
    sign_policy = "plus"

    [noise]
    enabled = false
    sigma_attitude = 0.01
    sigma_omega = 0.01

    [integrator]
    dt = 0.001
    scheme = "rk4"
    renormalize_every = 1

    [convergence]
    psi = 0.01
    quat = 1e-4
    omega = 0.01
    omega_noisy = 0.1
"""

from __future__ import annotations

import io
import math
import os
import tempfile
from pathlib import Path
from typing import IO, Any, Iterable, Sequence

import numpy as np
import tomli

from .algebra import quat_from_axis_angle
from .control import ControllerGains
from .dynamics import Inertia, IntegratorConfig
from .error_kinematics import DesiredTrajectory, WeightMatrix
from .exceptions import ScenarioError
from .harness import (
    ConvergenceTolerance,
    MonteCarloSummary,
    NoiseConfig,
    Scenario,
    SweepTable,
    TrajectoryLog,
)
from .pseudo import PseudoConfig

_SCHEMA = {
    "scenario": {"representation", "duration", "seed", "feedback"},
    "initial": {"axis", "angle_deg", "quaternion", "omega", "perturbation"},
    "desired": {"axis", "angle_deg", "quaternion", "spin_axis", "spin_rate"},
    "inertia": {"J"},
    "gains": {"k_q", "k_omega_q", "k_R", "k_omega_R"},
    "weights": {"K"},
    "pseudo": {"enabled", "epsilon", "sign_policy"},
    "noise": {"enabled", "sigma_attitude", "sigma_omega"},
    "integrator": {"dt", "scheme", "renormalize_every"},
    "convergence": {"psi", "quat", "omega", "omega_noisy"},
}

FLOAT_FMT = "%.17g"


def _check_keys(doc: dict) -> None:
    for section, body in doc.items():
        if section not in _SCHEMA:
            raise ScenarioError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ScenarioError(f"[{section}] must be a table")
        extra = sorted(set(body) - _SCHEMA[section])
        if extra:
            raise ScenarioError(f"unknown key(s) in [{section}]: {', '.join(extra)}")


def _vec(v: Any, n: int, where: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (n,):
        raise ScenarioError(f"{where} must be a list of {n} numbers")
    return a


def _attitude(sec: dict, where: str, default: np.ndarray) -> np.ndarray:
    has_q = "quaternion" in sec
    has_aa = "axis" in sec or "angle_deg" in sec
    if has_q and has_aa:
        raise ScenarioError(f"[{where}] gives both quaternion and axis/angle_deg")
    if has_q:
        q = _vec(sec["quaternion"], 4, f"{where}.quaternion")
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ScenarioError(f"{where}.quaternion is not unit norm")
        return q
    if has_aa:
        axis = _vec(sec.get("axis", [0.0, 0.0, 1.0]), 3, f"{where}.axis")
        return quat_from_axis_angle(axis, math.radians(float(sec.get("angle_deg", 0.0))))
    return default


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a :class:`Scenario` from a parsed scenario document.

    Raises
    ------
    ScenarioError
        On unknown sections/keys or any invalid value.
    """
    _check_keys(doc)
    base = Scenario()
    try:
        sc = doc.get("scenario", {})
        ini = doc.get("initial", {})
        des = doc.get("desired", {})
        q0 = _attitude(ini, "initial", base.initial_q)
        qd = _attitude(des, "desired", base.desired.q_start)
        if float(des.get("spin_rate", 0.0)) != 0.0:
            desired = DesiredTrajectory.spin(
                qd, _vec(des.get("spin_axis", [0.0, 0.0, 1.0]), 3, "desired.spin_axis"),
                float(des["spin_rate"]))
        else:
            desired = DesiredTrajectory.setpoint(qd)
        J = doc.get("inertia", {}).get("J")
        K = doc.get("weights", {}).get("K")
        return Scenario(
            representation=str(sc.get("representation", base.representation)),
            initial_q=q0,
            initial_omega=_vec(ini.get("omega", [0.0, 0.0, 0.0]), 3, "initial.omega"),
            initial_perturbation=_vec(ini.get("perturbation", [0.0, 0.0, 0.0]), 3,
                                      "initial.perturbation"),
            desired=desired,
            inertia=base.inertia if J is None else Inertia(J),
            gains=ControllerGains(**doc.get("gains", {})),
            weights=base.weights if K is None else WeightMatrix.from_diagonal(_vec(K, 3, "weights.K")),
            pseudo=PseudoConfig(**doc.get("pseudo", {})),
            noise=NoiseConfig(**doc.get("noise", {})),
            integrator=IntegratorConfig(**doc.get("integrator", {})),
            duration=float(sc.get("duration", base.duration)),
            seed=int(sc.get("seed", base.seed)),
            feedback=str(sc.get("feedback", base.feedback)),
            tolerance=ConvergenceTolerance(**doc.get("convergence", {})),
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path: str | os.PathLike) -> Scenario:
    """Read a TOML scenario file. Missing files and bad contents raise :class:`ScenarioError`."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ScenarioError(f"scenario file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    return scenario_from_dict(doc)


def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "[" + ", ".join(_toml_value(x) for x in np.asarray(v).tolist()) + "]"


def scenario_to_dict(s: Scenario) -> dict:
    """Inverse of :func:`scenario_from_dict` (attitudes written as quaternions)."""
    d = s.desired
    desired = {"quaternion": d.q_start}
    if d.rate != 0.0:
        desired.update(spin_axis=d.axis, spin_rate=d.rate)
    J = s.inertia.J
    return {
        "scenario": {"representation": s.representation, "duration": s.duration,
                     "seed": s.seed, "feedback": s.feedback},
        "initial": {"quaternion": s.initial_q, "omega": s.initial_omega,
                    "perturbation": s.initial_perturbation},
        "desired": desired,
        "inertia": {"J": np.diag(J) if np.count_nonzero(J - np.diag(np.diag(J))) == 0 else J},
        "gains": vars(s.gains),
        "weights": {"K": s.weights.diagonal},
        "pseudo": vars(s.pseudo),
        "noise": vars(s.noise),
        "integrator": vars(s.integrator),
        "convergence": vars(s.tolerance),
    }


def dump_scenario(s: Scenario) -> str:
    """Scenario as TOML text that :func:`load_scenario` reads back to an equal scenario."""
    out = []
    for section, body in scenario_to_dict(s).items():
        out.append(f"[{section}]")
        out.extend(f"{k} = {_toml_value(v)}" for k, v in body.items())
        out.append("")
    return "\n".join(out)


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def _write_table(fh: IO[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")


def log_to_csv(log: TrajectoryLog) -> str:
    """Full trajectory log, one row per step, 17 significant digits."""
    buf = io.StringIO()
    _write_table(buf, TrajectoryLog.COLUMNS,
                 (nums + [region, str(flag)] for nums, region, flag in log.rows()))
    return buf.getvalue()


def sweep_to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    _write_table(buf, ("beta_deg", "qnorm", "ernorm"), zip(*table))
    return buf.getvalue()


def columns_to_csv(columns: dict[str, np.ndarray]) -> str:
    """Equal-length named columns as CSV; boolean columns are written as 0/1."""
    names = list(columns)
    cols = [np.asarray(columns[c]) for c in names]
    rows = ([str(int(c[i])) if c.dtype == bool else float(c[i]) for c in cols]
            for i in range(len(cols[0])))
    buf = io.StringIO()
    _write_table(buf, names, rows)
    return buf.getvalue()


def monte_carlo_to_csv(summaries: dict[str, MonteCarloSummary]) -> str:
    """One row per (label, seed): converged flag, convergence time (inf if never) and final V."""
    buf = io.StringIO()
    rows = []
    for label, m in summaries.items():
        for seed, r in zip(m.seeds, m.reports):
            rows.append([label, str(seed), str(int(r.converged)), r.t_converge, r.final_V])
    _write_table(buf, ("label", "seed", "converged", "t_converge", "final_V"), rows)
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename, so
    readers never observe a partially written file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
