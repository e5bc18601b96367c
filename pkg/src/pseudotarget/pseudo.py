"""
Pseudo-target error shaping.

Near an unstable equilibrium of the closed loop the proportional action of
either moment law vanishes. These functions detect that situation and hand the
controller a substitute error that sits where the proportional term is
largest (a 90 deg error), so the body is pushed off the equilibrium at full
authority. They are memoryless: every call looks only at its input.

Quaternion side: the unstable set is ``{q_e0 = 0}``; inside the band
``|q_e0| < epsilon`` the scalar part is forced to +-1 and the result is
renormalized, which keeps the rotation axis and gives ``|q0 qv| ~ 0.5``.

SO(3) side: the three 180 deg principal-axis rotations are recognised by the
value of the configuration error, which equals ``k2+k3``, ``k1+k3`` or
``k1+k2`` there. Inside a band of half-width ``epsilon`` around one of those
values the error matrix is replaced by +90 deg about the matching axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .error_kinematics import error_vector_of_error, psi_of_error, weight_diagonal


class Region(str, enum.Enum):
    NOMINAL = "nominal"
    NEAR_A = "near_A"
    NEAR_S1 = "near_S1"
    NEAR_S2 = "near_S2"
    NEAR_S3 = "near_S3"

    def __str__(self):
        return self.value


# +90 deg about e1, e2, e3
PSEUDO_ROTATIONS = (
    np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
    np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
    np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
)
_BANDS = (Region.NEAR_S1, Region.NEAR_S2, Region.NEAR_S3)

SIGN_POLICIES = ("plus", "sign_of_q_e0")


@dataclass(frozen=True)
class PseudoConfig:
    """Pseudo-target settings.

    ``epsilon`` is the band half-width, used both for ``|q_e0|`` and for the
    distance of the configuration error from a critical value.
    ``sign_policy`` picks the forced scalar part: always +1 (``"plus"``) or
    the sign of the current ``q_e0`` with zero mapped to +1.
    """

    epsilon: float = 0.01
    enabled: bool = True
    sign_policy: str = "plus"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.sign_policy not in SIGN_POLICIES:
            raise ValueError(f"sign_policy must be one of {SIGN_POLICIES}")

    def check_weights(self, K) -> None:
        """Raise ``ValueError`` unless the three SO(3) bands are pairwise disjoint for ``K``."""
        k = weight_diagonal(K)
        c = np.sort([k[1] + k[2], k[0] + k[2], k[0] + k[1]])
        gap = min(c[1] - c[0], c[2] - c[1])
        if not self.epsilon < 0.5 * gap:
            raise ValueError(
                f"epsilon={self.epsilon} must be below half the critical-value gap ({0.5 * gap})")


def classify_quat(q_e: ArrayLike, cfg: PseudoConfig) -> Region:
    return Region.NEAR_A if abs(float(np.asarray(q_e)[0])) < cfg.epsilon else Region.NOMINAL


def classify_rotation(R_e: ArrayLike, K, cfg: PseudoConfig) -> Region:
    return _band(psi_of_error(R_e, K), weight_diagonal(K), cfg.epsilon)


def _band(psi_value: float, k: np.ndarray, eps: float) -> Region:
    crit = (k[1] + k[2], k[0] + k[2], k[0] + k[1])
    for region, c in zip(_BANDS, crit):
        if abs(psi_value - c) < eps:
            return region
    return Region.NOMINAL


def classify_error_region(error, cfg: PseudoConfig, K=None) -> Region:
    """Label an error quaternion (4-vector) or error matrix (3x3, needs ``K``).

    The pseudo-target functions substitute exactly when the label is not
    ``Region.NOMINAL`` (and the config is enabled).
    """
    e = np.asarray(error, dtype=float)
    if e.shape == (4,):
        return classify_quat(e, cfg)
    if e.shape == (3, 3):
        if K is None:
            raise ValueError("classifying a rotation error needs the weight matrix K")
        return classify_rotation(e, K, cfg)
    raise ValueError(f"expected a 4-vector or 3x3 matrix, got shape {e.shape}")


def pseudo_quat_error(q_e: ArrayLike, cfg: PseudoConfig) -> np.ndarray:
    """Error quaternion the controller should use.

    Returns ``q_e`` unchanged when ``|q_e0| >= epsilon`` (or when disabled).
    Otherwise returns ``[s, q_ev] / |[s, q_ev]|`` with ``s = +-1``. The output
    always has ``|q0| >= 1/sqrt(2) > epsilon``, so one pass is enough and the
    map is idempotent.
    """
    q_e = np.array(q_e, dtype=float)
    if not cfg.enabled or abs(q_e[0]) >= cfg.epsilon:
        return q_e
    s = -1.0 if (cfg.sign_policy == "sign_of_q_e0" and q_e[0] < 0.0) else 1.0
    q_int = np.concatenate(([s], q_e[1:]))
    return q_int / math.sqrt(q_int @ q_int)


def pseudo_rotation(R_e: ArrayLike, K, cfg: PseudoConfig) -> tuple[np.ndarray, Region]:
    """Error matrix the controller should use, plus the region label."""
    R_e = np.asarray(R_e, dtype=float)
    k = weight_diagonal(K)
    region = _band(psi_of_error(R_e, k), k, cfg.epsilon)
    if not cfg.enabled or region is Region.NOMINAL:
        return R_e, region
    return PSEUDO_ROTATIONS[_BANDS.index(region)], region


def pseudo_rotation_error(R_e: ArrayLike, K, cfg: PseudoConfig) -> np.ndarray:
    """Attitude error vector ``e_R`` after pseudo substitution.

    Inside band i the result is ``0.5 vee(K P_i - P_i^T K)`` for the +90 deg
    rotation ``P_i`` about e_i, i.e. ``(kj + kl)/2 * e_i``.
    """
    if cfg.enabled:
        cfg.check_weights(K)
    R_used, _ = pseudo_rotation(R_e, K, cfg)
    return error_vector_of_error(R_used, K)

