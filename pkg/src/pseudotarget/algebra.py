"""
Attitude algebra on S^3 and SO(3).

Quaternions are stored scalar-first, ``[q0, qx, qy, qz]``, everywhere in the
package (arrays, CSV columns, scenario files). Rotation matrices map body-frame
vectors into the inertial frame, so that ``R(p (x) q) = R(p) R(q)`` and the
kinematics ``q_dot = 0.5 q (x) [0, w]`` and ``R_dot = R hat(w)`` describe the
same motion.

All functions take plain array-likes (including the value classes below, which
implement ``__array__``) and return new ``numpy`` arrays; nothing is mutated in
place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import NotSkew, TooFarFromManifold

UNIT_TOL = 1e-9
SKEW_TOL = 1e-6
MANIFOLD_TOL = 1e-3
# quat_multiply renormalizes only once drift exceeds this
PRODUCT_DRIFT_TOL = 1e-12

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])
E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def hat(x: ArrayLike) -> np.ndarray:
    """Skew-symmetric matrix with ``hat(x) @ y == cross(x, y)``."""
    x1, x2, x3 = np.asarray(x, dtype=float)
    return np.array([[0.0, -x3, x2],
                     [x3, 0.0, -x1],
                     [-x2, x1, 0.0]])


def cross(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Cross product of two 3-vectors (much cheaper than ``np.cross`` for one pair)."""
    a1, a2, a3 = a
    b1, b2, b3 = b
    return np.array([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])


def vee(S: ArrayLike, tol: float = SKEW_TOL) -> np.ndarray:
    """Inverse of :func:`hat`.

    The symmetric part of ``S`` must not exceed ``tol`` (max-abs entry); it is
    discarded before extraction.

    Raises
    ------
    NotSkew
        If ``S`` is not skew-symmetric within ``tol``.
    """
    S = np.asarray(S, dtype=float)
    sym = 0.5 * (S + S.T)
    if np.max(np.abs(sym)) > tol:
        raise NotSkew(f"symmetric part {np.max(np.abs(sym)):.3e} exceeds {tol:g}")
    A = 0.5 * (S - S.T)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def quat_multiply(p: ArrayLike, q: ArrayLike) -> np.ndarray:
    """Hamilton product ``p (x) q`` of two unit quaternions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, px, py, pz = p
    q0, qx, qy, qz = q
    out = np.array([
        p0 * q0 - px * qx - py * qy - pz * qz,
        p0 * qx + q0 * px + py * qz - pz * qy,
        p0 * qy + q0 * py + pz * qx - px * qz,
        p0 * qz + q0 * pz + px * qy - py * qx,
    ])
    n2 = out @ out
    if abs(n2 - 1.0) > PRODUCT_DRIFT_TOL:
        out /= math.sqrt(n2)
    return out


def quat_conjugate(q: ArrayLike) -> np.ndarray:
    """Inverse of a unit quaternion: vector part negated."""
    q = np.array(q, dtype=float)
    q[1:] = -q[1:]
    return q


def quat_to_rotmat(q: ArrayLike) -> np.ndarray:
    """Rotation matrix of a unit quaternion; ``q`` and ``-q`` give the same matrix."""
    q0, x, y, z = np.asarray(q, dtype=float)
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = q0 * x, q0 * y, q0 * z
    return np.array([
        [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
        [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
        [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
    ])


def canonical_axis_angle(axis: ArrayLike, angle: float) -> tuple[np.ndarray, float]:
    """Normalize ``axis`` and fold ``angle`` into ``[0, pi]`` by flipping the axis."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if not n > 0.0:
        raise ValueError("rotation axis must be nonzero")
    axis = axis / n
    angle = float(angle) % (2.0 * math.pi)
    if angle > math.pi:
        angle = 2.0 * math.pi - angle
        axis = -axis
    return axis, angle


def _trig(angle: float) -> tuple[float, float, float, float]:
    # (cos, sin) of the full and the half angle; exact at 0 and pi so that the
    # 180 deg equilibria are represented without 1e-16 dust.
    if angle == math.pi:
        return -1.0, 0.0, 0.0, 1.0
    if angle == 0.0:
        return 1.0, 0.0, 1.0, 0.0
    h = 0.5 * angle
    return math.cos(angle), math.sin(angle), math.cos(h), math.sin(h)


def quat_from_axis_angle(axis: ArrayLike, angle: float) -> np.ndarray:
    """Quaternion ``[cos(a/2), sin(a/2) * axis]`` of a rotation."""
    axis, angle = canonical_axis_angle(axis, angle)
    _, _, ch, sh = _trig(angle)
    return np.concatenate(([ch], sh * axis))


def rotmat_from_axis_angle(axis: ArrayLike, angle: float) -> np.ndarray:
    """Rodrigues formula ``I + sin(a) hat(n) + (1 - cos(a)) hat(n)^2``."""
    axis, angle = canonical_axis_angle(axis, angle)
    c, s, _, _ = _trig(angle)
    N = hat(axis)
    return np.eye(3) + s * N + (1.0 - c) * (N @ N)


def from_axis_angle(axis: ArrayLike, angle: float) -> tuple[np.ndarray, np.ndarray]:
    """Both representations of one rotation: ``(quaternion, rotation matrix)``."""
    return quat_from_axis_angle(axis, angle), rotmat_from_axis_angle(axis, angle)


def rotvec_to_quat(v: ArrayLike) -> np.ndarray:
    """Exponential map from a rotation vector (axis * angle) to S^3."""
    v = np.asarray(v, dtype=float)
    angle = math.sqrt(v @ v)
    if angle < 1e-12:
        q = np.concatenate(([1.0], 0.5 * v))
        return q / np.linalg.norm(q)
    return np.concatenate(([math.cos(0.5 * angle)], math.sin(0.5 * angle) / angle * v))


def rotvec_to_rotmat(v: ArrayLike) -> np.ndarray:
    """Exponential map from a rotation vector to SO(3)."""
    return quat_to_rotmat(rotvec_to_quat(v))


def quat_to_axis_angle(q: ArrayLike) -> tuple[np.ndarray, float]:
    """Axis and angle in ``[0, pi]`` of a unit quaternion (axis e3 at zero angle)."""
    q = np.asarray(q, dtype=float)
    if q[0] < 0.0:
        q = -q
    s = np.linalg.norm(q[1:])
    if s < 1e-15:
        return E3.copy(), 0.0
    return q[1:] / s, 2.0 * math.atan2(s, q[0])


def renormalize(q: ArrayLike, tol: float = MANIFOLD_TOL) -> np.ndarray:
    """Project a near-unit 4-vector back onto S^3.

    Raises
    ------
    TooFarFromManifold
        If ``| |q| - 1 | > tol``.
    """
    q = np.array(q, dtype=float)
    n = math.sqrt(q @ q)
    if not abs(n - 1.0) <= tol:
        raise TooFarFromManifold(f"quaternion norm {n!r} is not within {tol:g} of 1")
    if n != 1.0:
        q /= n
    return q


def orthogonality_error(R: ArrayLike) -> float:
    """Max-abs entry of ``R^T R - I``."""
    R = np.asarray(R, dtype=float)
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def reorthonormalize(R: ArrayLike, tol: float = MANIFOLD_TOL) -> np.ndarray:
    """Project a nearly orthogonal matrix onto SO(3).

    Converges to the orthogonal polar factor (the nearest rotation in the
    Frobenius norm) with Newton-Schulz iterations. Matrices that are already
    orthogonal to working precision are returned unchanged.

    Raises
    ------
    TooFarFromManifold
        If the orthogonality error exceeds ``tol`` or ``det(R) <= 0``.
    """
    R = np.array(R, dtype=float)
    I = np.eye(3)
    err = np.max(np.abs(R.T @ R - I))
    if not err <= tol or np.linalg.det(R) <= 0.0:
        raise TooFarFromManifold(f"orthogonality error {err:.3e} exceeds {tol:g}")
    for _ in range(8):
        if err <= 4e-16:
            break
        R = 0.5 * R @ (3.0 * I - R.T @ R)
        err = np.max(np.abs(R.T @ R - I))
    return R


@dataclass(frozen=True, eq=False)
class Quaternion:
    """Unit quaternion ``[q0, qv]``.

    Inputs within ``MANIFOLD_TOL`` of unit norm are normalized on construction;
    anything further away is rejected.
    """

    q0: float
    qv: np.ndarray

    def __post_init__(self):
        q = renormalize(np.concatenate(([self.q0], np.asarray(self.qv, dtype=float))))
        qv = q[1:]
        qv.flags.writeable = False
        object.__setattr__(self, "q0", float(q[0]))
        object.__setattr__(self, "qv", qv)

    @classmethod
    def from_array(cls, q: ArrayLike) -> Quaternion:
        q = np.asarray(q, dtype=float)
        return cls(q[0], q[1:])

    @classmethod
    def identity(cls) -> Quaternion:
        return cls(1.0, np.zeros(3))

    def __array__(self, dtype=None, copy=None):
        return np.concatenate(([self.q0], self.qv)).astype(dtype or float)

    def __mul__(self, other: Quaternion) -> Quaternion:
        return Quaternion.from_array(quat_multiply(self, other))

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.q0, -self.qv)

    def conjugate(self) -> Quaternion:
        return Quaternion(self.q0, -self.qv)

    def to_rotmat(self) -> RotationMatrix:
        return RotationMatrix(quat_to_rotmat(self))

    def __repr__(self):
        return f"Quaternion({self.q0!r}, {self.qv.tolist()!r})"


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    """Element of SO(3); near-orthogonal input is projected on construction."""

    m: np.ndarray

    def __post_init__(self):
        m = reorthonormalize(self.m)
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.m, dtype=dtype or float)

    def __matmul__(self, other: RotationMatrix) -> RotationMatrix:
        return RotationMatrix(self.m @ np.asarray(other))

    @property
    def T(self) -> RotationMatrix:
        return RotationMatrix(self.m.T)


@dataclass(frozen=True)
class AxisAngle:
    """Rotation by ``angle`` (radians, in ``[0, pi]``) about a unit ``axis``.

    Use :meth:`canonical` to build one from an arbitrary axis and angle.
    """

    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        axis = tuple(float(a) for a in self.axis)
        if len(axis) != 3 or abs(math.sqrt(sum(a * a for a in axis)) - 1.0) > UNIT_TOL:
            raise ValueError(f"axis {axis} is not a unit 3-vector")
        if not 0.0 <= self.angle <= math.pi:
            raise ValueError(f"angle {self.angle} outside [0, pi]")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))

    @classmethod
    def canonical(cls, axis: ArrayLike, angle: float) -> AxisAngle:
        axis, angle = canonical_axis_angle(axis, angle)
        return cls(tuple(axis), angle)

    def to_quaternion(self) -> Quaternion:
        return Quaternion.from_array(quat_from_axis_angle(self.axis, self.angle))

    def to_rotmat(self) -> RotationMatrix:
        return RotationMatrix(rotmat_from_axis_angle(self.axis, self.angle))
