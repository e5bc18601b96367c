import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudotarget.algebra import (
    AxisAngle,
    Quaternion,
    RotationMatrix,
    canonical_axis_angle,
    cross,
    from_axis_angle,
    hat,
    orthogonality_error,
    quat_conjugate,
    quat_from_axis_angle,
    quat_multiply,
    quat_to_axis_angle,
    quat_to_rotmat,
    renormalize,
    reorthonormalize,
    rotmat_from_axis_angle,
    rotvec_to_quat,
    vee,
)
from pseudotarget.exceptions import NotSkew, TooFarFromManifold

from conftest import random_quat, unit_quat, unit_vec, vec3

E1, E2, E3 = np.eye(3)
S2 = math.sqrt(2.0) / 2.0


# hat / vee

def test_hat_known_matrix():
    assert np.array_equal(hat([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])
    assert np.array_equal(hat([0, 0, 0]), np.zeros((3, 3)))


def test_hat_annihilates_its_argument():
    x = np.array([0.3, -1.1, 2.0])
    assert np.allclose(hat(x) @ x, 0.0, atol=1e-15)


@given(vec3, vec3)
def test_hat_is_cross_product(x, y):
    assert np.allclose(hat(x) @ y, np.cross(x, y), atol=1e-12)
    assert np.allclose(cross(x, y), np.cross(x, y), atol=1e-12)


@given(vec3)
def test_hat_is_exactly_skew(x):
    assert np.array_equal(hat(x).T, -hat(x))


def test_vee_inverts_hat_on_1000_random_vectors(rng):
    X = rng.normal(scale=5.0, size=(1000, 3))
    err = max(np.max(np.abs(vee(hat(x)) - x)) for x in X)
    assert err <= 1e-12


def test_vee_examples():
    assert np.array_equal(vee(hat([1, 2, 3])), [1, 2, 3])
    assert np.array_equal(vee(np.zeros((3, 3))), [0, 0, 0])
    K = np.diag([1.0, 2.0, 3.0])
    Re = rotmat_from_axis_angle(E3, math.pi / 2)
    assert np.allclose(0.5 * vee(K @ Re - Re.T @ K), [0, 0, 1.5], atol=1e-15)


def test_vee_rejects_non_skew():
    with pytest.raises(NotSkew):
        vee(np.eye(3))
    # symmetric part below tolerance is discarded
    S = hat([1, 2, 3]) + 1e-8 * np.eye(3)
    assert np.allclose(vee(S), [1, 2, 3])


# quaternion product

def test_quat_multiply_examples():
    p = quat_from_axis_angle(E3, math.pi / 2)
    assert np.allclose(quat_multiply(p, [1, 0, 0, 0]), p, atol=1e-15)
    assert np.allclose(quat_multiply([S2, 0, 0, S2], [S2, 0, 0, S2]), [0, 0, 0, 1], atol=1e-15)


@given(unit_quat())
def test_quat_times_conjugate_is_identity(q):
    assert np.allclose(quat_multiply(q, quat_conjugate(q)), [1, 0, 0, 0], atol=1e-12)
    assert np.allclose(quat_multiply(quat_conjugate(q), q), [1, 0, 0, 0], atol=1e-12)


@given(unit_quat(), unit_quat(), unit_quat())
def test_quat_multiply_associative(p, q, r):
    a = quat_multiply(quat_multiply(p, q), r)
    b = quat_multiply(p, quat_multiply(q, r))
    assert np.allclose(a, b, atol=1e-12)


@given(unit_quat(), unit_quat())
def test_rotmat_homomorphism(p, q):
    lhs = quat_to_rotmat(quat_multiply(p, q))
    rhs = quat_to_rotmat(p) @ quat_to_rotmat(q)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_chained_products_stay_unit(rng):
    # 10^6 products in one chain
    factors = rng.normal(size=(1000, 4))
    factors /= np.linalg.norm(factors, axis=1, keepdims=True)
    q = np.array([1.0, 0.0, 0.0, 0.0])
    worst = 0.0
    for k in range(10**6):
        q = quat_multiply(q, factors[k % 1000])
        if k % 997 == 0:
            worst = max(worst, abs(q @ q - 1.0))
    worst = max(worst, abs(q @ q - 1.0))
    assert worst <= 1e-12


def test_conjugate_examples():
    assert np.array_equal(quat_conjugate([1, 0, 0, 0]), [1, 0, 0, 0])
    assert np.array_equal(quat_conjugate([0, 0, 0, 1]), [0, 0, 0, -1])


# rotation matrices

def test_quat_to_rotmat_examples():
    assert np.array_equal(quat_to_rotmat([1, 0, 0, 0]), np.eye(3))
    assert np.array_equal(quat_to_rotmat([0, 0, 0, 1]), np.diag([-1.0, -1.0, 1.0]))


@given(unit_quat())
def test_double_cover(q):
    assert np.max(np.abs(quat_to_rotmat(q) - quat_to_rotmat(-q))) <= 1e-12


@given(unit_quat())
def test_rotmat_in_so3(q):
    R = quat_to_rotmat(q)
    assert orthogonality_error(R) <= 1e-9
    assert abs(np.linalg.det(R) - 1.0) <= 1e-9


# axis-angle

def test_from_axis_angle_half_turns_are_exact():
    q, R = from_axis_angle(E3, math.pi)
    assert np.array_equal(q, [0, 0, 0, 1])
    assert np.array_equal(R, np.diag([-1.0, -1.0, 1.0]))
    _, R1 = from_axis_angle(E1, math.pi)
    assert np.array_equal(R1, np.diag([1.0, -1.0, -1.0]))


@given(unit_vec())
def test_zero_angle_is_identity(axis):
    q, R = from_axis_angle(axis, 0.0)
    assert np.array_equal(q[0], 1.0) and np.allclose(q[1:], 0.0)
    assert np.allclose(R, np.eye(3), atol=0)


@given(unit_vec(), st.floats(-10.0, 10.0))
def test_axis_angle_forms_agree(axis, angle):
    q, R = from_axis_angle(axis, angle)
    assert abs(q @ q - 1.0) <= 1e-12
    assert np.max(np.abs(quat_to_rotmat(q) - R)) <= 1e-12


@given(unit_vec(), st.floats(-10.0, 10.0))
def test_canonical_angle_in_range(axis, angle):
    a, th = canonical_axis_angle(axis, angle)
    assert 0.0 <= th <= math.pi
    assert np.allclose(rotmat_from_axis_angle(a, th), rotmat_from_axis_angle(axis, angle), atol=1e-12)


def test_quaternion_axis_angle_round_trip():
    axis = np.array([1.0, 2.0, 2.0]) / 3.0
    a, th = quat_to_axis_angle(quat_from_axis_angle(axis, 2.0))
    assert np.allclose(a, axis) and math.isclose(th, 2.0)


def test_rotvec_matches_axis_angle():
    v = np.array([0.3, -0.2, 0.9])
    th = np.linalg.norm(v)
    assert np.allclose(rotvec_to_quat(v), quat_from_axis_angle(v / th, th), atol=1e-15)
    assert np.array_equal(rotvec_to_quat(np.zeros(3)), [1, 0, 0, 0])


# projections

def test_renormalize_examples():
    assert np.allclose(renormalize([1.0005, 0, 0, 0]), [1, 0, 0, 0], atol=0)
    for q in ([1.0, 0, 0, 0], [0, 0, 0, 1.0], [0.5, 0.5, 0.5, 0.5]):
        assert np.array_equal(renormalize(q), q)


def test_renormalize_rejects_far_input():
    with pytest.raises(TooFarFromManifold):
        renormalize([1.01, 0, 0, 0])


@given(unit_quat(), st.floats(-9e-4, 9e-4))
def test_renormalize_moves_at_most_twice_violation(q, s):
    x = q * (1.0 + s)
    violation = abs(math.sqrt(x @ x) - 1.0)
    assert np.linalg.norm(renormalize(x) - x) <= 2.0 * violation + 1e-15


def test_reorthonormalize_small_perturbation(rng):
    R = np.eye(3) + 1e-5 * rng.normal(size=(3, 3))
    P = reorthonormalize(R)
    assert np.max(np.abs(P.T @ P - np.eye(3))) <= 1e-12
    assert abs(np.linalg.det(P) - 1.0) <= 1e-12


@given(unit_quat())
def test_reorthonormalize_leaves_rotations_alone(q):
    R = quat_to_rotmat(q)
    P = reorthonormalize(R)
    assert np.max(np.abs(P - R)) <= 1e-15


def test_reorthonormalize_moves_at_most_twice_violation(rng):
    for _ in range(200):
        R0 = quat_to_rotmat(random_quat(rng))
        R = R0 + rng.uniform(1e-8, 1e-4) * rng.normal(size=(3, 3))
        violation = np.linalg.norm(R.T @ R - np.eye(3), 2)
        P = reorthonormalize(R)
        assert np.linalg.norm(P - R, 2) <= 2.0 * violation
        # polar factor oracle
        U, _, Vt = np.linalg.svd(R)
        assert np.allclose(P, U @ Vt, atol=1e-13)


def test_reorthonormalize_rejects_far_input():
    with pytest.raises(TooFarFromManifold):
        reorthonormalize(np.eye(3) * 1.1)
    with pytest.raises(TooFarFromManifold):
        reorthonormalize(np.diag([1.0, 1.0, -1.0]))


# value classes

def test_quaternion_value_class():
    q = Quaternion(2.0e-4 + 1.0, [0.0, 0.0, 0.0])
    assert q.q0 == 1.0
    p = AxisAngle((0.0, 0.0, 1.0), math.pi / 2).to_quaternion()
    pp = p * p
    assert np.allclose(np.asarray(pp), [0, 0, 0, 1], atol=1e-15)
    assert np.allclose(np.asarray(p * p.conjugate()), [1, 0, 0, 0], atol=1e-15)
    assert np.allclose(np.asarray((-p).to_rotmat()), np.asarray(p.to_rotmat()))
    with pytest.raises(TooFarFromManifold):
        Quaternion(2.0, [0, 0, 0])
    with pytest.raises(ValueError):
        q.qv[0] = 1.0


def test_rotation_matrix_value_class():
    R = RotationMatrix(np.eye(3) + 1e-6 * np.triu(np.ones((3, 3))))
    assert orthogonality_error(np.asarray(R)) <= 1e-12
    assert np.allclose(np.asarray(R @ R.T), np.eye(3), atol=1e-12)
    with pytest.raises(TooFarFromManifold):
        RotationMatrix(2.0 * np.eye(3))


def test_axis_angle_validation():
    with pytest.raises(ValueError):
        AxisAngle((1.0, 1.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        AxisAngle((1.0, 0.0, 0.0), 4.0)
    a = AxisAngle.canonical([0, 0, 2], 3 * math.pi / 2)
    assert a.axis == (0.0, 0.0, -1.0) and math.isclose(a.angle, math.pi / 2)
    assert np.allclose(np.asarray(a.to_rotmat()), rotmat_from_axis_angle(E3, -math.pi / 2), atol=1e-15)
