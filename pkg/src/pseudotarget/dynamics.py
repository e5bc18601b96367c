"""
Rigid-body rotational dynamics.

The quaternion and the rotation matrix are propagated side by side so each
controller can read its native representation; their agreement is an
integration sanity check rather than something enforced by re-deriving one
from the other.

Internally a state is a flat 16-vector ``[q (4), R row-major (9), w (3)]``,
which lets the Runge-Kutta stages combine with single array operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from numpy.typing import ArrayLike

from .algebra import (
    cross,
    hat,
    quat_from_axis_angle,
    quat_to_rotmat,
    renormalize,
    reorthonormalize,
)
from .exceptions import NonFiniteState

STATE_TOL = 1e-6

MomentLike = Union[ArrayLike, Callable[[np.ndarray, float], np.ndarray]]


@dataclass(frozen=True, eq=False)
class Inertia:
    """Symmetric positive-definite inertia tensor (kg m^2), inverted once."""

    J: np.ndarray

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        if J.ndim == 1:
            J = np.diag(J)
        if J.shape != (3, 3):
            raise ValueError(f"inertia must be 3x3, got shape {J.shape}")
        if np.max(np.abs(J - J.T)) > 1e-12:
            raise ValueError("inertia tensor is not symmetric")
        if np.min(np.linalg.eigvalsh(J)) <= 0.0:
            raise ValueError("inertia tensor is not positive definite")
        J_inv = np.linalg.inv(J)
        J.flags.writeable = False
        J_inv.flags.writeable = False
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "J_inv", J_inv)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.J, dtype=dtype or float)


def as_inertia(J) -> Inertia:
    return J if isinstance(J, Inertia) else Inertia(J)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    scheme: str = "rk4"
    renormalize_every: int = 1

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("rk4", "euler"):
            raise ValueError(f"unknown scheme {self.scheme!r}; expected 'rk4' or 'euler'")
        if int(self.renormalize_every) < 1:
            raise ValueError("renormalize_every must be >= 1")


@dataclass(frozen=True, eq=False)
class BodyState:
    """Attitude in both representations plus body angular velocity (rad/s)."""

    q: np.ndarray
    R: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(4)
        R = np.array(self.R, dtype=float).reshape(3, 3)
        omega = np.array(self.omega, dtype=float).reshape(3)
        if abs(q @ q - 1.0) > STATE_TOL:
            raise ValueError("quaternion is not unit norm")
        if np.max(np.abs(R.T @ R - np.eye(3))) > STATE_TOL:
            raise ValueError("R is not orthogonal")
        if np.max(np.abs(quat_to_rotmat(q) - R)) > STATE_TOL:
            raise ValueError("quaternion and rotation matrix disagree")
        for a in (q, R, omega):
            a.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def from_quaternion(cls, q: ArrayLike, omega: ArrayLike = (0.0, 0.0, 0.0)) -> BodyState:
        q = np.asarray(q, dtype=float)
        return cls(q, quat_to_rotmat(q), omega)

    @classmethod
    def from_axis_angle(cls, axis: ArrayLike, angle: float,
                        omega: ArrayLike = (0.0, 0.0, 0.0)) -> BodyState:
        return cls.from_quaternion(quat_from_axis_angle(axis, angle), omega)

    @classmethod
    def from_flat(cls, y: np.ndarray) -> BodyState:
        return cls(y[0:4], y[4:13].reshape(3, 3), y[13:16])

    def to_flat(self) -> np.ndarray:
        return np.concatenate((self.q, self.R.ravel(), self.omega))

    def consistency_error(self) -> float:
        """Max-abs entry of ``quat_to_rotmat(q) - R``."""
        return float(np.max(np.abs(quat_to_rotmat(self.q) - self.R)))

    def kinetic_energy(self, J) -> float:
        J = as_inertia(J).J
        return 0.5 * float(self.omega @ J @ self.omega)

    def inertial_momentum(self, J) -> np.ndarray:
        """Angular momentum ``R J w`` expressed in the inertial frame."""
        return self.R @ (as_inertia(J).J @ self.omega)


def flat_derivative(y: np.ndarray, M: np.ndarray, J: np.ndarray, J_inv: np.ndarray) -> np.ndarray:
    q0, q1, q2, q3 = y[0:4]
    w = y[13:16]
    wx, wy, wz = w
    out = np.empty(16)
    out[0] = -0.5 * (q1 * wx + q2 * wy + q3 * wz)
    out[1] = 0.5 * (q0 * wx + q2 * wz - q3 * wy)
    out[2] = 0.5 * (q0 * wy + q3 * wx - q1 * wz)
    out[3] = 0.5 * (q0 * wz + q1 * wy - q2 * wx)
    out[4:13] = (y[4:13].reshape(3, 3) @ hat(w)).ravel()
    out[13:16] = J_inv @ (M - cross(w, J @ w))
    return out


def state_derivative(s: BodyState, M: ArrayLike, J) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Time derivatives ``(q_dot, R_dot, w_dot)`` under applied moment ``M``.

    ``q_dot = 0.5 q (x) [0, w]``, ``R_dot = R hat(w)`` and
    ``J w_dot = -w x J w + M``.
    """
    J = as_inertia(J)
    d = flat_derivative(s.to_flat(), np.asarray(M, dtype=float), J.J, J.J_inv)
    return d[0:4], d[4:13].reshape(3, 3), d[13:16]


def project_flat(y: np.ndarray) -> np.ndarray:
    """Return ``y`` with q renormalized and R reorthonormalized."""
    out = y.copy()
    out[0:4] = renormalize(y[0:4])
    out[4:13] = reorthonormalize(y[4:13].reshape(3, 3)).ravel()
    return out


def integrate_flat(y: np.ndarray, moment: MomentLike, J: Inertia, cfg: IntegratorConfig,
                   step_index: int = 0) -> np.ndarray:
    """Advance a flat state by one step of ``cfg.dt``.

    ``moment`` is either a fixed 3-vector held over the step or a callable
    ``moment(y, tau) -> M`` evaluated at every stage, where ``tau`` is the
    stage time measured from the start of the step.
    """
    dt = cfg.dt
    Jm, Ji = J.J, J.J_inv
    if callable(moment):
        def f(z, tau):
            return flat_derivative(z, moment(z, tau), Jm, Ji)
    else:
        M = np.asarray(moment, dtype=float)

        def f(z, tau):
            return flat_derivative(z, M, Jm, Ji)

    # overflow/NaN is reported below as NonFiniteState rather than as warnings
    with np.errstate(over="ignore", invalid="ignore"):
        if cfg.scheme == "rk4":
            h = 0.5 * dt
            k1 = f(y, 0.0)
            k2 = f(y + h * k1, h)
            k3 = f(y + h * k2, h)
            k4 = f(y + dt * k3, dt)
            y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            y_next = y + dt * f(y, 0.0)

    if not np.all(np.isfinite(y_next)):
        raise NonFiniteState("non-finite state after integration", step_index)
    if (step_index + 1) % cfg.renormalize_every == 0:
        y_next = project_flat(y_next)
    return y_next


def step(s: BodyState, M: MomentLike, J, cfg: IntegratorConfig = IntegratorConfig(),
         step_index: int = 0) -> BodyState:
    """One fixed-step integration of the rigid-body equations.

    Raises
    ------
    NonFiniteState
        If any state component becomes NaN or Inf.
    """
    if not callable(M) and not np.all(np.isfinite(np.asarray(M, dtype=float))):
        raise NonFiniteState("non-finite moment", step_index)
    y = integrate_flat(s.to_flat(), M, as_inertia(J), cfg, step_index)
    return BodyState.from_flat(y)
