"""
Command-line front end.

Exit codes: 0 on success, 2 on usage or scenario-file errors (nothing is
written), 1 when a simulation fails at run time (the failing step is
reported on stderr). Output files are written atomically once the whole
result is available.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Sequence

import numpy as np

from . import __version__
from .error_kinematics import WeightMatrix
from .exceptions import NonFiniteState, ScenarioError
from .harness import Scenario, run_monte_carlo, run_scenario, sweep_error_norms
from .io import (
    columns_to_csv,
    load_scenario,
    log_to_csv,
    monte_carlo_to_csv,
    sweep_to_csv,
    write_atomic,
)
from .presets import PRESETS, compare_pseudo, preset_scenario

_REPR = {"quat": "quaternion", "quaternion": "quaternion", "so3": "so3"}


class UsageError(Exception):
    pass


def _triple(text: str) -> np.ndarray:
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    if v.shape != (3,):
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return v


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    out = _Parser(add_help=False)
    out.add_argument("--out", metavar="PATH", help="output CSV path (default: standard output)")

    sim = _Parser(add_help=False)
    sim.add_argument("--dt", type=_positive, help="integration and control step (s)")
    sim.add_argument("--duration", type=_positive, help="simulated time (s)")
    sim.add_argument("--pseudo", type=_on_off, metavar="on|off", help="pseudo-target substitution")
    sim.add_argument("--noise", type=_on_off, metavar="on|off", help="measurement noise")
    sim.add_argument("--representation", choices=sorted(_REPR), help="controller attitude representation")
    sim.add_argument("--seed", type=int, help="noise seed (first seed for montecarlo)")

    p = _Parser(prog="pseudotarget",
                description="Attitude stabilization with pseudo-target error shaping.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("simulate", parents=[out, sim],
                       help="run one scenario file and write the full trajectory log")
    c.add_argument("scenario", help="TOML scenario file")

    c = sub.add_parser("sweep", parents=[out],
                       help="proportional-term magnitudes versus error angle on [0, 180] deg")
    c.add_argument("--axis", type=_triple, default=np.array([0.0, 0.0, 1.0]),
                   help="unit rotation axis, e.g. 0,0,1 (default)")
    c.add_argument("--points", type=int, default=181, help="number of angles (>= 2, default 181)")
    c.add_argument("--K", type=_triple, default=np.array([1.0, 2.0, 3.0]),
                   help="weight diagonal k1,k2,k3 (default 1,2,3)")

    c = sub.add_parser("montecarlo", parents=[out, sim],
                       help="convergence times over many noise seeds")
    c.add_argument("scenario", help="TOML scenario file")
    c.add_argument("--seeds", type=int, required=True, help="number of seeds (>= 1)")
    c.add_argument("--compare-pseudo", action="store_true",
                   help="run every seed with pseudo-targets on and off")
    c.add_argument("--workers", type=int, default=1, help="parallel processes (default 1)")

    c = sub.add_parser("preset", parents=[out, sim],
                       help="built-in 180 deg maneuver; compares pseudo on/off unless --pseudo is given")
    c.add_argument("name", choices=sorted(PRESETS))
    return p


def _apply_overrides(s: Scenario, a: argparse.Namespace) -> Scenario:
    changes = {}
    if a.representation is not None:
        changes["representation"] = _REPR[a.representation]
    if a.duration is not None:
        changes["duration"] = a.duration
    if a.seed is not None:
        changes["seed"] = a.seed
    if a.dt is not None:
        changes["integrator"] = replace(s.integrator, dt=a.dt)
    if a.pseudo is not None:
        changes["pseudo"] = replace(s.pseudo, enabled=a.pseudo)
    if a.noise is not None:
        changes["noise"] = replace(s.noise, enabled=a.noise)
    try:
        return s.replace(**changes)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def _run(a: argparse.Namespace) -> tuple[str, str]:
    """Return ``(csv_text, summary_line)``."""
    if a.command == "sweep":
        if a.points < 2:
            raise UsageError("--points must be >= 2")
        if abs(np.linalg.norm(a.axis) - 1.0) > 1e-9:
            raise UsageError("--axis must be a unit vector")
        try:
            K = WeightMatrix.from_diagonal(a.K)
        except ValueError as exc:
            raise UsageError(f"--K: {exc}")
        table = sweep_error_norms(K, a.axis, a.points)
        return sweep_to_csv(table), f"{a.points} angles"

    if a.command == "preset":
        s = _apply_overrides(preset_scenario(a.name), a)
        if a.pseudo is None:
            return columns_to_csv(compare_pseudo(a.name, s)), f"preset {a.name}, pseudo on and off"
        log, rep = run_scenario(s)
        return log_to_csv(log), _report_line(rep)

    if a.command == "montecarlo":
        if a.seeds < 1:
            raise UsageError("--seeds must be >= 1")
        if a.workers < 1:
            raise UsageError("--workers must be >= 1")
        if a.compare_pseudo and a.pseudo is not None:
            raise UsageError("--compare-pseudo and --pseudo are mutually exclusive")
    s = _apply_overrides(load_scenario(a.scenario), a)
    if a.command == "simulate":
        log, rep = run_scenario(s)
        return log_to_csv(log), _report_line(rep)

    # montecarlo
    if a.compare_pseudo:
        runs = {"pseudo_on": s.replace(pseudo=replace(s.pseudo, enabled=True)),
                "pseudo_off": s.replace(pseudo=replace(s.pseudo, enabled=False))}
    else:
        runs = {"pseudo_on" if s.pseudo.enabled else "pseudo_off": s}
    res = {k: run_monte_carlo(v, a.seeds, a.workers) for k, v in runs.items()}
    line = "; ".join(f"{k}: median t_converge {m.median:.4g} s, converged {m.fraction_converged:.0%}"
                     for k, m in res.items())
    return monte_carlo_to_csv(res), line


def _report_line(rep) -> str:
    if rep.converged:
        return f"converged at t = {rep.t_converge:.6g} s, final V = {rep.final_V:.3g}"
    return f"not converged, final V = {rep.final_V:.6g}"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        text, summary = _run(a)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ScenarioError) as exc:
        msg = str(exc)
        if not msg.startswith(parser.prog):
            msg = f"{parser.prog}: error: {msg}"
        print(msg, file=sys.stderr)
        return 2
    except NonFiniteState as exc:
        print(f"{parser.prog}: simulation failed at step {exc.step}: {exc}", file=sys.stderr)
        return 1

    if a.out:
        try:
            write_atomic(a.out, text)
        except OSError as exc:
            print(f"{parser.prog}: cannot write {a.out}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
