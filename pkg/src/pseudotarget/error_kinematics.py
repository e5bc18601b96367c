"""
Tracking-error quantities shared by the controllers and the pseudo-target logic.

Conventions: ``q_e = q_d* (x) q``, ``R_e = R_d^T R``, and the angular-velocity
error ``e_w = w - R^T R_d w_d`` is expressed in the body frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from .algebra import (
    canonical_axis_angle,
    hat,
    quat_conjugate,
    quat_multiply,
    quat_to_rotmat,
    rotvec_to_quat,
)


@dataclass(frozen=True)
class WeightMatrix:
    """``K = diag(k1, k2, k3)`` with ``0 < k1 < k2 < k3``.

    Distinct weights make the three 180 deg principal-axis rotations the only
    critical points of the configuration error besides the identity, each with
    its own error value (see :attr:`critical_values`).
    """

    k1: float = 1.0
    k2: float = 2.0
    k3: float = 3.0

    def __post_init__(self):
        if not 0.0 < self.k1 < self.k2 < self.k3:
            raise ValueError(
                f"weights must satisfy 0 < k1 < k2 < k3, got {(self.k1, self.k2, self.k3)}")

    @classmethod
    def from_diagonal(cls, k: ArrayLike) -> WeightMatrix:
        k1, k2, k3 = (float(v) for v in np.asarray(k, dtype=float).ravel())
        return cls(k1, k2, k3)

    @property
    def diagonal(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3])

    @property
    def K(self) -> np.ndarray:
        return np.diag(self.diagonal)

    @property
    def critical_values(self) -> tuple[float, float, float]:
        """Error-function values at 180 deg about e1, e2, e3."""
        return (self.k2 + self.k3, self.k1 + self.k3, self.k1 + self.k2)

    def min_critical_gap(self) -> float:
        c = sorted(self.critical_values)
        return min(c[1] - c[0], c[2] - c[1])


def weight_diagonal(K) -> np.ndarray:
    if isinstance(K, WeightMatrix):
        return K.diagonal
    K = np.asarray(K, dtype=float)
    return np.diag(K).copy() if K.ndim == 2 else K


class DesiredSample(NamedTuple):
    q_d: np.ndarray
    R_d: np.ndarray
    omega_d: np.ndarray
    omega_d_dot: np.ndarray


@dataclass(frozen=True, eq=False)
class DesiredTrajectory:
    """Commanded attitude as a function of time.

    Two variants: a constant setpoint (``rate == 0``) and a constant-rate spin
    ``q_d(t) = q_start (x) exp(rate * t * axis)`` about a body-fixed axis.
    Both have ``w_d_dot = 0`` exactly.
    """

    q_start: np.ndarray
    axis: np.ndarray
    rate: float = 0.0

    def __post_init__(self):
        q = np.array(self.q_start, dtype=float)
        q /= np.linalg.norm(q)
        axis, _ = canonical_axis_angle(self.axis, 0.0)
        omega_d = float(self.rate) * axis
        for a in (q, axis, omega_d):
            a.flags.writeable = False
        object.__setattr__(self, "q_start", q)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "_omega_d", omega_d)
        object.__setattr__(self, "_R_start", quat_to_rotmat(q))

    @classmethod
    def setpoint(cls, q_d: ArrayLike) -> DesiredTrajectory:
        return cls(np.asarray(q_d, dtype=float), np.array([0.0, 0.0, 1.0]), 0.0)

    @classmethod
    def spin(cls, q_start: ArrayLike, axis: ArrayLike, rate: float) -> DesiredTrajectory:
        return cls(np.asarray(q_start, dtype=float), np.asarray(axis, dtype=float), rate)

    @property
    def kind(self) -> str:
        return "setpoint" if self.rate == 0.0 else "spin"

    def __call__(self, t: float) -> DesiredSample:
        if self.rate == 0.0:
            return DesiredSample(self.q_start, self._R_start, self._omega_d, np.zeros(3))
        q_d = quat_multiply(self.q_start, rotvec_to_quat(self._omega_d * t))
        return DesiredSample(q_d, quat_to_rotmat(q_d), self._omega_d, np.zeros(3))

    evaluate = __call__


def quat_error(q_d: ArrayLike, q: ArrayLike) -> np.ndarray:
    """``q_e = q_d* (x) q``."""
    return quat_multiply(quat_conjugate(q_d), q)


def rotation_error(R: ArrayLike, R_d: ArrayLike) -> np.ndarray:
    """``R_e = R_d^T R``."""
    return np.asarray(R_d, dtype=float).T @ np.asarray(R, dtype=float)


def psi_of_error(R_e: ArrayLike, K) -> float:
    """Configuration error ``0.5 tr(K (I - R_e))`` from the error matrix alone."""
    R_e = np.asarray(R_e, dtype=float)
    return 0.5 * float(weight_diagonal(K) @ (1.0 - np.diag(R_e)))


def psi(R: ArrayLike, R_d: ArrayLike, K) -> float:
    """``Psi(R, R_d) = 0.5 tr(K (I - R_d^T R))``, nonnegative, zero iff ``R == R_d``."""
    return psi_of_error(rotation_error(R, R_d), K)


def error_vector_of_error(R_e: ArrayLike, K) -> np.ndarray:
    """``0.5 vee(K R_e - R_e^T K)`` evaluated from the error matrix."""
    A = weight_diagonal(K)[:, None] * np.asarray(R_e, dtype=float)
    return 0.5 * np.array([A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]])


def attitude_error_vector(R: ArrayLike, R_d: ArrayLike, K) -> np.ndarray:
    """``e_R = 0.5 vee(K R_d^T R - R^T R_d K)``, the gradient of Psi in body coordinates."""
    return error_vector_of_error(rotation_error(R, R_d), K)


def omega_error(omega: ArrayLike, R: ArrayLike, R_d: ArrayLike, omega_d: ArrayLike) -> np.ndarray:
    """``e_w = w - R^T R_d w_d``."""
    R = np.asarray(R, dtype=float)
    return np.asarray(omega, dtype=float) - R.T @ (np.asarray(R_d, dtype=float) @ np.asarray(omega_d, dtype=float))


def finite_difference_check_eR(R: ArrayLike, R_d: ArrayLike, K, eta: ArrayLike,
                               h: float = 1e-6) -> tuple[float, float]:
    """Directional derivative of Psi along ``R exp(h hat(eta))``, two ways.

    Returns ``(forward_difference, e_R . eta)``. The perturbation uses
    :func:`scipy.linalg.expm`, independent of this package's exponential map.
    """
    eta = np.asarray(eta, dtype=float)
    if abs(np.linalg.norm(eta) - 1.0) > 1e-9:
        raise ValueError("eta must be a unit vector")
    if not 1e-7 <= h <= 1e-4:
        raise ValueError("h must lie in [1e-7, 1e-4]")
    R = np.asarray(R, dtype=float)
    R_h = R @ scipy.linalg.expm(h * hat(eta))
    fd = (psi(R_h, R_d, K) - psi(R, R_d, K)) / h
    return fd, float(attitude_error_vector(R, R_d, K) @ eta)

