"""
Almost-globally stabilizing attitude moment laws.

Both laws share the same damping and feed-forward structure and differ only
in the proportional term: ``-k_q q_e0 q_ev`` on S^3 or ``-k_R e_R`` on SO(3).
The proportional error can be replaced through an override argument, which is
how the pseudo-target stage plugs in; feed-forward terms always use the true
attitude.

Every public function also has an ``*_arrays`` core used by the simulation
loop, which avoids building :class:`BodyState` objects per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import cross, quat_to_rotmat
from .dynamics import BodyState, as_inertia
from .error_kinematics import (
    DesiredSample,
    DesiredTrajectory,
    error_vector_of_error,
    psi_of_error,
    quat_error,
    weight_diagonal,
)


@dataclass(frozen=True)
class ControllerGains:
    k_q: float = 10.0
    k_omega_q: float = 1.5
    k_R: float = 5.0
    k_omega_R: float = 2.1

    def __post_init__(self):
        for name in ("k_q", "k_omega_q", "k_R", "k_omega_R"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"gain {name} must be strictly positive")


def _transport(R: np.ndarray, d: DesiredSample) -> tuple[np.ndarray, np.ndarray]:
    # desired rate and acceleration carried into the current body frame by R^T R_d
    T = R.T @ d.R_d
    return T @ d.omega_d, T @ d.omega_d_dot


def feedback_terms(omega: np.ndarray, R: np.ndarray, d: DesiredSample,
                   J: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Angular-velocity error and the feed-forward part of the moment.

    Returns ``(e_w, w x J w - J hat(e_w) R^T R_d w_d + J R^T R_d w_d_dot)``.
    """
    w_t, a_t = _transport(R, d)
    e_w = omega - w_t
    ff = cross(omega, J @ omega) - J @ cross(e_w, w_t) + J @ a_t
    return e_w, ff


def moment_quaternion_arrays(q: np.ndarray, omega: np.ndarray, d: DesiredSample,
                             g: ControllerGains, J: np.ndarray,
                             q_e: np.ndarray | None = None) -> np.ndarray:
    if q_e is None:
        q_e = quat_error(d.q_d, q)
    e_w, ff = feedback_terms(omega, quat_to_rotmat(q), d, J)
    return -g.k_q * q_e[0] * q_e[1:] - g.k_omega_q * e_w + ff


def moment_rotation_arrays(R: np.ndarray, omega: np.ndarray, d: DesiredSample,
                           g: ControllerGains, k: np.ndarray, J: np.ndarray,
                           e_R: np.ndarray | None = None) -> np.ndarray:
    if e_R is None:
        e_R = error_vector_of_error(d.R_d.T @ R, k)
    e_w, ff = feedback_terms(omega, R, d, J)
    return -g.k_R * e_R - g.k_omega_R * e_w + ff


def moment_quaternion(s: BodyState, traj: DesiredTrajectory, t: float, g: ControllerGains,
                      J, q_e_override=None) -> np.ndarray:
    """Quaternion moment law.

    ``M = -k_q q_e0 q_ev - k_wq e_w + w x J w - J hat(e_w) R^T R_d w_d + J R^T R_d w_d_dot``

    The proportional term is even in ``q_e``, so ``q`` and ``-q`` produce the
    same moment and the law does not unwind. ``q_e_override`` replaces the
    error quaternion in that term only.
    """
    q_e = None if q_e_override is None else np.asarray(q_e_override, dtype=float)
    return moment_quaternion_arrays(s.q, s.omega, traj(t), g, as_inertia(J).J, q_e)


def moment_rotation(s: BodyState, traj: DesiredTrajectory, t: float, g: ControllerGains,
                    K, J, e_R_override=None) -> np.ndarray:
    """SO(3) moment law ``M = -k_R e_R - k_wR e_w + (feed-forward)``.

    ``e_R_override`` replaces the attitude error vector (pseudo-target hook).
    """
    e_R = None if e_R_override is None else np.asarray(e_R_override, dtype=float)
    return moment_rotation_arrays(s.R, s.omega, traj(t), g, weight_diagonal(K), as_inertia(J).J, e_R)


def error_rate_times_inertia(omega: np.ndarray, R: np.ndarray, d: DesiredSample,
                             M: np.ndarray, J: np.ndarray) -> np.ndarray:
    """``J e_w_dot`` from the open-loop error dynamics.

    ``J e_w_dot = -w x J w + M + J hat(e_w) R^T R_d w_d - J R^T R_d w_d_dot``
    """
    w_t, a_t = _transport(R, d)
    e_w = omega - w_t
    return -cross(omega, J @ omega) + M + J @ cross(e_w, w_t) - J @ a_t


def closed_loop_residual_quat(s: BodyState, traj: DesiredTrajectory, t: float,
                              g: ControllerGains, J, q_e_override=None) -> np.ndarray:
    """``J e_w_dot + k_wq e_w + k_q q_e0 q_ev`` with the quaternion law applied.

    Identically zero without an override. With an override it equals
    ``k_q (q_e0 q_ev - p0 pv)`` where ``p`` is the substituted error.
    """
    Jm = as_inertia(J).J
    d = traj(t)
    M = moment_quaternion(s, traj, t, g, Jm, q_e_override)
    R = quat_to_rotmat(s.q)
    Je_dot = error_rate_times_inertia(s.omega, R, d, M, Jm)
    e_w = s.omega - _transport(R, d)[0]
    q_e = quat_error(d.q_d, s.q)
    return Je_dot + g.k_omega_q * e_w + g.k_q * q_e[0] * q_e[1:]


def closed_loop_residual_rot(s: BodyState, traj: DesiredTrajectory, t: float,
                             g: ControllerGains, K, J, e_R_override=None) -> np.ndarray:
    """``J e_w_dot + k_wR e_w + k_R e_R`` with the SO(3) law applied."""
    Jm = as_inertia(J).J
    d = traj(t)
    M = moment_rotation(s, traj, t, g, K, Jm, e_R_override)
    Je_dot = error_rate_times_inertia(s.omega, s.R, d, M, Jm)
    e_w = s.omega - _transport(s.R, d)[0]
    e_R = error_vector_of_error(d.R_d.T @ s.R, weight_diagonal(K))
    return Je_dot + g.k_omega_R * e_w + g.k_R * e_R


def lyapunov_quat_arrays(q: np.ndarray, omega: np.ndarray, d: DesiredSample,
                         g: ControllerGains, J: np.ndarray) -> float:
    q_e = quat_error(d.q_d, q)
    e_w = omega - _transport(quat_to_rotmat(q), d)[0]
    return g.k_q * (1.0 - q_e[0] ** 2) + 0.5 * float(e_w @ J @ e_w)


def lyapunov_rot_arrays(R: np.ndarray, omega: np.ndarray, d: DesiredSample,
                        g: ControllerGains, k: np.ndarray, J: np.ndarray) -> float:
    e_w = omega - _transport(R, d)[0]
    return g.k_R * psi_of_error(d.R_d.T @ R, k) + 0.5 * float(e_w @ J @ e_w)


def lyapunov_value_quat(s: BodyState, traj: DesiredTrajectory, t: float,
                        g: ControllerGains, J) -> float:
    """``V_q = k_q (1 - q_e0^2) + 0.5 e_w^T J e_w``."""
    return lyapunov_quat_arrays(s.q, s.omega, traj(t), g, as_inertia(J).J)


def lyapunov_value_rot(s: BodyState, traj: DesiredTrajectory, t: float,
                       g: ControllerGains, K, J) -> float:
    """``V_R = k_R Psi + 0.5 e_w^T J e_w``."""
    return lyapunov_rot_arrays(s.R, s.omega, traj(t), g, weight_diagonal(K), as_inertia(J).J)
