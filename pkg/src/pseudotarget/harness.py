"""
Closed-loop simulation driver.

One control step is: measure (truth plus optional noise), form the error for
the chosen representation, apply the pseudo-target substitution, evaluate the
moment law, integrate one ``dt``. The moment is held over the step by
default; ``feedback="continuous"`` re-evaluates the law at every Runge-Kutta
stage instead (the noise sample stays fixed over the step).

Everything logged is computed from the *true* state, except the region label
and the pseudo flag, which reflect what the controller saw.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike

from .algebra import (
    E3,
    IDENTITY_QUAT,
    quat_conjugate,
    quat_from_axis_angle,
    quat_multiply,
    quat_to_rotmat,
    rotmat_from_axis_angle,
    rotvec_to_quat,
)
from .control import (
    ControllerGains,
    feedback_terms,
    lyapunov_quat_arrays,
    lyapunov_rot_arrays,
)
from .dynamics import Inertia, IntegratorConfig, flat_derivative, integrate_flat
from .error_kinematics import (
    DesiredTrajectory,
    WeightMatrix,
    error_vector_of_error,
    psi_of_error,
    weight_diagonal,
)
from .exceptions import NonFiniteState
from .pseudo import PseudoConfig, Region, classify_quat, pseudo_quat_error, pseudo_rotation

REPRESENTATIONS = ("quaternion", "so3")
FEEDBACK_MODES = ("zoh", "continuous")

REFERENCE_INERTIA = (0.0125, 0.0125, 0.025)


@dataclass(frozen=True)
class NoiseConfig:
    """Measurement noise.

    Attitude: ``q_meas = q (x) exp(n)`` with ``n ~ N(0, sigma_attitude^2 I)``
    (rad); rate: ``w_meas = w + N(0, sigma_omega^2 I)`` (rad/s). A fresh draw
    is taken every control step.
    """

    sigma_attitude: float = 0.01
    sigma_omega: float = 0.01
    enabled: bool = False

    def __post_init__(self):
        if self.sigma_attitude < 0.0 or self.sigma_omega < 0.0:
            raise ValueError("noise standard deviations must be nonnegative")


@dataclass(frozen=True)
class ConvergenceTolerance:
    """A step counts as converged when the attitude error and ``|e_w|`` are both small.

    Attitude test: ``Psi < psi`` (SO(3) runs) or ``1 - |q_e0| < quat``
    (quaternion runs). Rate test: ``|e_w| < omega``, or ``|e_w| < omega_noisy``
    when measurement noise is on; feedback on noisy measurements keeps the
    true rate error jittering at a few 1e-2 rad/s even after the attitude has
    settled to ~1e-7, so the noise-free threshold would never be met.
    """

    psi: float = 0.01
    quat: float = 1e-4
    omega: float = 0.01
    omega_noisy: float = 0.1


@dataclass(frozen=True, eq=False)
class Scenario:
    representation: str = "quaternion"
    initial_q: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())
    initial_omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    # rotation vector (rad) composed on the right of initial_q; offsets an exact equilibrium
    initial_perturbation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    desired: DesiredTrajectory = field(
        default_factory=lambda: DesiredTrajectory.setpoint(quat_from_axis_angle(E3, math.pi)))
    inertia: Inertia = field(default_factory=lambda: Inertia(REFERENCE_INERTIA))
    gains: ControllerGains = field(default_factory=ControllerGains)
    weights: WeightMatrix = field(default_factory=WeightMatrix)
    pseudo: PseudoConfig = field(default_factory=PseudoConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    duration: float = 20.0
    seed: int = 0
    feedback: str = "zoh"
    tolerance: ConvergenceTolerance = field(default_factory=ConvergenceTolerance)

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"representation must be one of {REPRESENTATIONS}")
        if self.feedback not in FEEDBACK_MODES:
            raise ValueError(f"feedback must be one of {FEEDBACK_MODES}")
        if not self.duration > 0.0:
            raise ValueError("duration must be positive")
        q = np.array(self.initial_q, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ValueError("initial_q must be a unit quaternion")
        object.__setattr__(self, "initial_q", q)
        object.__setattr__(self, "initial_omega", np.array(self.initial_omega, dtype=float).reshape(3))
        object.__setattr__(self, "initial_perturbation",
                           np.array(self.initial_perturbation, dtype=float).reshape(3))
        if not isinstance(self.inertia, Inertia):
            object.__setattr__(self, "inertia", Inertia(self.inertia))
        if self.representation == "so3" and self.pseudo.enabled:
            self.pseudo.check_weights(self.weights)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.integrator.dt))

    def initial_quaternion(self) -> np.ndarray:
        if not np.any(self.initial_perturbation):
            return self.initial_q.copy()
        return quat_multiply(self.initial_q, rotvec_to_quat(self.initial_perturbation))

    def replace(self, **changes) -> Scenario:
        return replace(self, **changes)


def reference_scenario(representation: str = "quaternion", *, pseudo: bool = True,
                   noise: bool = False, duration: float = 20.0, seed: int = 0,
                   dt: float = 1e-3) -> Scenario:
    """The 180 deg rest-to-rest maneuver about e3 with the published parameters.

    Initial attitude identity, desired attitude 180 deg about e3, ``w = w_d = 0``,
    ``J = diag(0.0125, 0.0125, 0.025)``, ``k_q = 10``, ``k_wq = 1.5``,
    ``k_R = 5``, ``k_wR = 2.1``, ``K = diag(1, 2, 3)``, ``epsilon = 0.01``.
    """
    return Scenario(
        representation=representation,
        pseudo=PseudoConfig(epsilon=0.01, enabled=pseudo),
        noise=NoiseConfig(enabled=noise),
        integrator=IntegratorConfig(dt=dt),
        duration=duration,
        seed=seed,
    )


@dataclass(eq=False)
class TrajectoryLog:
    """Per-step record of a run; row ``k`` is time ``k * dt``.

    ``M[k]`` is the moment applied over ``[t_k, t_k + dt]`` (for the last row,
    the moment that would be applied next). ``q_e``, ``psi``, ``eR_norm``,
    ``ew_norm`` and ``V`` are true (noise-free, pseudo-free) errors.
    """

    t: np.ndarray
    q: np.ndarray
    R: np.ndarray
    omega: np.ndarray
    q_e: np.ndarray
    psi: np.ndarray
    eR_norm: np.ndarray
    ew_norm: np.ndarray
    M: np.ndarray
    V: np.ndarray
    region: np.ndarray
    pseudo_active: np.ndarray

    COLUMNS = (
        ["t", "q0", "q1", "q2", "q3"]
        + [f"R{i}{j}" for i in range(3) for j in range(3)]
        + ["wx", "wy", "wz", "qe0", "qe1", "qe2", "qe3", "psi", "eR_norm", "ew_norm",
           "Mx", "My", "Mz", "V", "region", "pseudo_active"]
    )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def M_norm(self) -> np.ndarray:
        return np.linalg.norm(self.M, axis=1)

    def last_pseudo_step(self) -> int:
        """Index of the last row with an active substitution, or -1."""
        idx = np.flatnonzero(self.pseudo_active)
        return int(idx[-1]) if idx.size else -1

    def rows(self):
        for k in range(len(self.t)):
            yield ([self.t[k], *self.q[k], *self.R[k].ravel(), *self.omega[k], *self.q_e[k],
                    self.psi[k], self.eR_norm[k], self.ew_norm[k], *self.M[k], self.V[k]],
                   str(self.region[k]), int(self.pseudo_active[k]))


class ConvergenceReport(NamedTuple):
    converged: bool
    t_converge: float  # inf when not converged
    final_V: float


class _Buffers:
    def __init__(self, n: int):
        self.t = np.empty(n)
        self.y = np.empty((n, 16))
        self.q_e = np.empty((n, 4))
        self.psi = np.empty(n)
        self.eR_norm = np.empty(n)
        self.ew_norm = np.empty(n)
        self.M = np.empty((n, 3))
        self.V = np.empty(n)
        self.region = np.empty(n, dtype=object)
        self.pseudo_active = np.zeros(n, dtype=bool)

    def to_log(self) -> TrajectoryLog:
        return TrajectoryLog(
            t=self.t, q=self.y[:, 0:4], R=self.y[:, 4:13].reshape(-1, 3, 3), omega=self.y[:, 13:16],
            q_e=self.q_e, psi=self.psi, eR_norm=self.eR_norm, ew_norm=self.ew_norm, M=self.M,
            V=self.V, region=self.region.astype(str), pseudo_active=self.pseudo_active)


class _Controller:
    """Measured-state feedback for one scenario: error, pseudo stage, moment law."""

    def __init__(self, s: Scenario):
        self.quat = s.representation == "quaternion"
        self.g = s.gains
        self.k = s.weights.diagonal
        self.J = s.inertia.J
        self.pseudo = s.pseudo
        self.traj = s.desired

    def __call__(self, q, R, omega, t):
        """Return ``(M, region, substituted)`` for a measured attitude and rate."""
        d = self.traj(t)
        cfg = self.pseudo
        e_w, ff = feedback_terms(omega, R, d, self.J)
        if self.quat:
            q_e = quat_multiply(quat_conjugate(d.q_d), q)
            region = classify_quat(q_e, cfg)
            sub = cfg.enabled and region is not Region.NOMINAL
            if sub:
                q_e = pseudo_quat_error(q_e, cfg)
            M = -self.g.k_q * q_e[0] * q_e[1:] - self.g.k_omega_q * e_w + ff
        else:
            R_used, region = pseudo_rotation(d.R_d.T @ R, self.k, cfg)
            sub = cfg.enabled and region is not Region.NOMINAL
            e_R = error_vector_of_error(R_used, self.k)
            M = -self.g.k_R * e_R - self.g.k_omega_R * e_w + ff
        return M, region, sub


def _noise_rotation(n_att: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dq = rotvec_to_quat(n_att)
    return dq, quat_to_rotmat(dq)


def _simulate(s: Scenario, record: bool) -> tuple[TrajectoryLog | None, ConvergenceReport]:
    dt = s.integrator.dt
    n = s.n_steps
    rng = np.random.default_rng(s.seed)
    ctrl = _Controller(s)
    traj = s.desired
    J = s.inertia.J
    quat_rep = s.representation == "quaternion"
    g, k, tol = s.gains, s.weights.diagonal, s.tolerance
    noisy = s.noise.enabled and (s.noise.sigma_attitude > 0.0 or s.noise.sigma_omega > 0.0)
    continuous = s.feedback == "continuous"
    omega_tol = tol.omega_noisy if noisy else tol.omega

    q0 = s.initial_quaternion()
    y = np.concatenate((q0, quat_to_rotmat(q0).ravel(), s.initial_omega))
    buf = _Buffers(n + 1) if record else None
    converged_flags = np.empty(n + 1, dtype=bool)
    V = 0.0

    for i in range(n + 1):
        t = i * dt
        q, R, omega = y[0:4], y[4:13].reshape(3, 3), y[13:16]
        if noisy:
            n_att = rng.normal(0.0, s.noise.sigma_attitude, 3)
            n_w = rng.normal(0.0, s.noise.sigma_omega, 3)
            dq, dR = _noise_rotation(n_att)
            M, region, sub = ctrl(quat_multiply(q, dq), R @ dR, omega + n_w, t)
        else:
            dq = dR = n_w = None
            M, region, sub = ctrl(q, R, omega, t)

        # true errors
        d = traj(t)
        R_e = d.R_d.T @ R
        psi_val = psi_of_error(R_e, k)
        e_w = omega - R.T @ (d.R_d @ d.omega_d)
        ew2 = float(e_w @ e_w)
        if quat_rep:
            q_e = quat_multiply(quat_conjugate(d.q_d), q)
            V = lyapunov_quat_arrays(q, omega, d, g, J)
            att_ok = 1.0 - abs(q_e[0]) < tol.quat
        else:
            V = lyapunov_rot_arrays(R, omega, d, g, k, J)
            att_ok = psi_val < tol.psi
        converged_flags[i] = att_ok and math.sqrt(ew2) < omega_tol

        if record:
            if not quat_rep:
                q_e = quat_multiply(quat_conjugate(d.q_d), q)
            buf.t[i] = t
            buf.y[i] = y
            buf.q_e[i] = q_e
            buf.psi[i] = psi_val
            buf.eR_norm[i] = np.linalg.norm(error_vector_of_error(R_e, k))
            buf.ew_norm[i] = math.sqrt(ew2)
            buf.M[i] = M
            buf.V[i] = V
            buf.region[i] = region.value
            buf.pseudo_active[i] = sub

        if i == n:
            break
        if not np.all(np.isfinite(M)):
            raise NonFiniteState("non-finite moment", i)
        if continuous:
            def moment(z, tau, dq=dq, dR=dR, n_w=n_w, t=t):
                qz, Rz, wz = z[0:4], z[4:13].reshape(3, 3), z[13:16]
                if dq is not None:
                    qz, Rz, wz = quat_multiply(qz, dq), Rz @ dR, wz + n_w
                return ctrl(qz, Rz, wz, t + tau)[0]
            y = integrate_flat(y, moment, s.inertia, s.integrator, i)
        else:
            y = integrate_flat(y, M, s.inertia, s.integrator, i)

    report = _convergence(converged_flags, dt, float(V))
    return (buf.to_log() if record else None), report


def _convergence(flags: np.ndarray, dt: float, final_V: float) -> ConvergenceReport:
    if not flags[-1]:
        return ConvergenceReport(False, math.inf, final_V)
    bad = np.flatnonzero(~flags)
    first = 0 if bad.size == 0 else int(bad[-1]) + 1
    return ConvergenceReport(True, first * dt, final_V)


def run_scenario(s: Scenario) -> tuple[TrajectoryLog, ConvergenceReport]:
    """Simulate one scenario; deterministic for a given ``s.seed``.

    Raises
    ------
    NonFiniteState
        With the index of the failing step.
    """
    return _simulate(s, record=True)


def convergence_only(s: Scenario) -> ConvergenceReport:
    """Like :func:`run_scenario` but without keeping the per-step log."""
    return _simulate(s, record=False)[1]


@dataclass
class MonteCarloSummary:
    seeds: list[int]
    reports: list[ConvergenceReport]

    @property
    def t_converge(self) -> np.ndarray:
        return np.array([r.t_converge for r in self.reports])

    @property
    def median(self) -> float:
        return float(np.median(self.t_converge))

    def quantile(self, p: float) -> float:
        """Quantile of the convergence times; runs that never converged count as inf."""
        return float(np.quantile(self.t_converge, p, method="lower"))

    @property
    def fraction_converged(self) -> float:
        return float(np.mean([r.converged for r in self.reports]))


def run_monte_carlo(s: Scenario, n_seeds: int, workers: int = 1) -> MonteCarloSummary:
    """Run ``n_seeds`` copies of ``s`` with seeds ``s.seed, s.seed + 1, ...``.

    Results are ordered by seed regardless of ``workers``.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    seeds = [s.seed + i for i in range(n_seeds)]
    runs = [s.replace(seed=sd) for sd in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(convergence_only, runs))
    else:
        reports = [convergence_only(r) for r in runs]
    return MonteCarloSummary(seeds, reports)


def closed_loop_flow(s: Scenario, y: ArrayLike, t: float, h: float) -> np.ndarray:
    """One RK4 step of length ``h`` (may be negative) of the noise-free closed loop.

    The moment law is re-evaluated at every stage and no projection is
    applied, so for small ``|h|`` this is a smooth local flow map; useful for
    finite-difference checks that must not depend on the simulation step.
    """
    ctrl = _Controller(s)
    J = s.inertia
    y = np.asarray(y, dtype=float)

    def f(z, tau):
        M = ctrl(z[0:4], z[4:13].reshape(3, 3), z[13:16], t + tau)[0]
        return flat_derivative(z, M, J.J, J.J_inv)

    k1 = f(y, 0.0)
    k2 = f(y + 0.5 * h * k1, 0.5 * h)
    k3 = f(y + 0.5 * h * k2, 0.5 * h)
    k4 = f(y + h * k3, h)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def lyapunov_rate_probe(s: Scenario, y: ArrayLike, t: float, h: float = 1e-5) -> tuple[float, float]:
    """Central finite difference of V along the closed-loop flow at a state.

    ``y`` is a flat ``[q, R, w]`` state (e.g. a row of a log). Returns
    ``(fd, predicted)`` where ``predicted = -k_w |e_w|^2``. The probe step
    ``h`` is independent of the simulation step, so the comparison is not
    limited by how finely the trajectory was logged.
    """
    y = np.asarray(y, dtype=float)
    g, k, J = s.gains, s.weights.diagonal, s.inertia.J

    def V(z, tz):
        d = s.desired(tz)
        if s.representation == "quaternion":
            return lyapunov_quat_arrays(z[0:4], z[13:16], d, g, J)
        return lyapunov_rot_arrays(z[4:13].reshape(3, 3), z[13:16], d, g, k, J)

    fd = (V(closed_loop_flow(s, y, t, h), t + h) - V(closed_loop_flow(s, y, t, -h), t - h)) / (2.0 * h)
    d = s.desired(t)
    R = y[4:13].reshape(3, 3)
    e_w = y[13:16] - R.T @ (d.R_d @ d.omega_d)
    k_w = g.k_omega_q if s.representation == "quaternion" else g.k_omega_R
    return float(fd), -k_w * float(e_w @ e_w)


class SweepTable(NamedTuple):
    beta_deg: np.ndarray
    qnorm: np.ndarray
    ernorm: np.ndarray


def sweep_error_norms(K=WeightMatrix(), axis: ArrayLike = E3, n_points: int = 181) -> SweepTable:
    """Proportional-term magnitudes ``|q_e0 q_ev|`` and ``|e_R|`` versus error angle.

    The error angle runs uniformly over [0, 180] deg about ``axis``; both
    norms vanish at the two ends.
    """
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValueError("axis must be a unit vector")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    k = weight_diagonal(K)
    betas = np.linspace(0.0, math.pi, n_points)
    qn = np.empty(n_points)
    en = np.empty(n_points)
    for i, b in enumerate(betas):
        q_e = quat_from_axis_angle(axis, b)
        qn[i] = np.linalg.norm(q_e[0] * q_e[1:])
        en[i] = np.linalg.norm(error_vector_of_error(rotmat_from_axis_angle(axis, b), k))
    return SweepTable(np.degrees(betas), qn, en)
