import math

import numpy as np
import pytest

from pseudotarget.algebra import quat_from_axis_angle, quat_to_rotmat, rotvec_to_quat
from pseudotarget.control import ControllerGains
from pseudotarget.error_kinematics import DesiredTrajectory, WeightMatrix
from pseudotarget.exceptions import NonFiniteState
from pseudotarget.harness import (
    NoiseConfig,
    Scenario,
    closed_loop_flow,
    convergence_only,
    lyapunov_rate_probe,
    reference_scenario,
    run_monte_carlo,
    run_scenario,
    sweep_error_norms,
)

E3 = np.array([0.0, 0.0, 1.0])


@pytest.fixture(scope="module")
def reference_runs():
    return {rep: run_scenario(reference_scenario(rep)) for rep in ("quaternion", "so3")}


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(representation="euler")
    with pytest.raises(ValueError):
        Scenario(duration=0.0)
    with pytest.raises(ValueError):
        Scenario(feedback="foh")
    with pytest.raises(ValueError):
        Scenario(initial_q=[1.0, 1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        NoiseConfig(sigma_attitude=-1.0)
    # overlapping SO(3) bands are rejected up front
    with pytest.raises(ValueError):
        Scenario(representation="so3", weights=WeightMatrix(1.0, 1.01, 3.0))
    Scenario(representation="quaternion", weights=WeightMatrix(1.0, 1.01, 3.0))


def test_reference_scenario_values():
    s = reference_scenario("so3")
    assert np.array_equal(np.diag(s.inertia.J), [0.0125, 0.0125, 0.025])
    assert s.gains == ControllerGains(10.0, 1.5, 5.0, 2.1)
    assert np.array_equal(s.weights.diagonal, [1, 2, 3])
    assert s.pseudo.epsilon == 0.01
    assert np.array_equal(s.desired(0.0).q_d, [0, 0, 0, 1])
    assert s.n_steps == 20_000


def test_identity_start_converges_immediately():
    s = reference_scenario("quaternion").replace(desired=DesiredTrajectory.setpoint([1, 0, 0, 0]), duration=1.0)
    log, rep = run_scenario(s)
    assert rep.converged and rep.t_converge == 0.0
    assert not np.any(log.M)


def test_log_shape_and_time(reference_runs):
    log, _ = reference_runs["quaternion"]
    assert len(log) == 20_001
    assert np.all(np.diff(log.t) > 0)
    assert log.t[-1] == pytest.approx(20.0)
    assert log.q.shape == (20_001, 4) and log.R.shape == (20_001, 3, 3)


@pytest.mark.parametrize("rep", ["quaternion", "so3"])
def test_pseudo_on_converges_with_monotone_V(reference_runs, rep):
    log, r = reference_runs[rep]
    assert r.converged and r.t_converge < 10.0
    last = log.last_pseudo_step()
    assert last >= 0
    dV = np.diff(log.V)
    # non-increasing except across steps that used a substituted error
    assert np.all(dV[~log.pseudo_active[:-1]] <= 1e-9)
    assert np.all(dV[last + 1:] <= 1e-9)
    assert log.V[-1] < 1e-6


@pytest.mark.parametrize("rep", ["quaternion", "so3"])
def test_pseudo_flag_matches_region(reference_runs, rep):
    log, _ = reference_runs[rep]
    assert np.array_equal(log.pseudo_active, log.region != "nominal")


@pytest.mark.parametrize("rep", ["quaternion", "so3"])
def test_pseudo_off_stays_at_unstable_equilibrium(rep):
    log, r = run_scenario(reference_scenario(rep, pseudo=False))
    assert not r.converged and math.isinf(r.t_converge)
    assert np.max(log.M_norm) <= 1e-10
    assert abs(log.psi[-1] - log.psi[0]) <= 1e-8
    assert not log.pseudo_active.any()


def test_perturbed_start_escapes_without_pseudo():
    s = reference_scenario("quaternion", pseudo=False).replace(initial_perturbation=[0.0, 0.0, 1e-3])
    r = convergence_only(s)
    assert r.converged


def test_representations_agree_from_90_degrees():
    s = reference_scenario("quaternion", pseudo=False, duration=10.0).replace(
        initial_q=quat_from_axis_angle(E3, math.pi / 2))
    la, ra = run_scenario(s)
    lb, rb = run_scenario(s.replace(representation="so3"))
    assert ra.converged and rb.converged
    assert not la.pseudo_active.any() and not lb.pseudo_active.any()
    assert np.max(np.abs(la.R[-1] - lb.R[-1])) <= 1e-6


def test_determinism_with_noise():
    s = reference_scenario("so3", noise=True, duration=1.0, seed=11)
    a, _ = run_scenario(s)
    b, _ = run_scenario(s)
    for name in ("q", "R", "omega", "M", "V"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c, _ = run_scenario(s.replace(seed=12))
    assert not np.array_equal(a.M, c.M)


def test_noise_does_not_enter_logged_errors():
    # logged errors are computed from the true state: with zero-variance noise nothing changes
    s = reference_scenario("quaternion", duration=0.5)
    a, _ = run_scenario(s)
    b, _ = run_scenario(s.replace(noise=NoiseConfig(0.0, 0.0, enabled=True)))
    assert np.array_equal(a.V, b.V)


def test_continuous_feedback_mode():
    s = reference_scenario("quaternion", duration=5.0).replace(feedback="continuous")
    log, r = run_scenario(s)
    assert r.converged
    dV = np.diff(log.V)
    assert np.all(dV[log.last_pseudo_step() + 1:] <= 1e-9)


def test_non_finite_state_reports_step():
    s = reference_scenario("quaternion", pseudo=False, duration=1.0).replace(
        initial_q=quat_from_axis_angle(E3, 1.0), gains=ControllerGains(k_q=1e306))
    with pytest.raises(NonFiniteState) as ei:
        run_scenario(s)
    assert ei.value.step is not None and ei.value.step >= 0


# Monte Carlo

def test_monte_carlo_single_seed_matches_run():
    s = reference_scenario("quaternion", noise=True, duration=2.0, seed=5)
    m = run_monte_carlo(s, 1)
    assert m.seeds == [5]
    assert m.reports[0] == run_scenario(s)[1]


def test_monte_carlo_noise_free_reports_identical():
    m = run_monte_carlo(reference_scenario("so3", duration=3.0), 3)
    assert m.reports[0] == m.reports[1] == m.reports[2]
    assert m.fraction_converged == 1.0


def test_monte_carlo_parallel_matches_serial():
    s = reference_scenario("quaternion", noise=True, duration=0.5, seed=3)
    assert run_monte_carlo(s, 3, workers=2).reports == run_monte_carlo(s, 3).reports


def test_monte_carlo_statistics():
    s = reference_scenario("quaternion", pseudo=False, duration=1.0)
    m = run_monte_carlo(s, 2)
    assert m.fraction_converged == 0.0
    assert math.isinf(m.median) and math.isinf(m.quantile(0.5))
    with pytest.raises(ValueError):
        run_monte_carlo(s, 0)


# Lyapunov rate probe

def test_lyapunov_rate_probe_matches_dissipation():
    rng = np.random.default_rng(8)
    for rep in ("quaternion", "so3"):
        s = reference_scenario(rep, pseudo=False)
        for _ in range(20):
            y = np.concatenate((q := rotvec_to_quat(rng.normal(size=3)),
                                quat_to_rotmat(q).ravel(), rng.normal(size=3)))
            fd, pred = lyapunov_rate_probe(s, y, 0.0)
            assert abs(fd - pred) <= 1e-3


def test_closed_loop_flow_is_reversible():
    s = reference_scenario("so3", pseudo=False)
    q = rotvec_to_quat([0.3, 0.2, -0.1])
    y = np.concatenate((q, quat_to_rotmat(q).ravel(), [0.1, 0.2, 0.3]))
    back = closed_loop_flow(s, closed_loop_flow(s, y, 0.0, 1e-4), 1e-4, -1e-4)
    assert np.max(np.abs(back - y)) <= 1e-12


# error-norm sweep

def test_sweep_examples():
    t = sweep_error_norms(WeightMatrix(), E3, 181)
    assert len(t.beta_deg) == 181
    assert t.beta_deg[0] == 0.0 and t.beta_deg[-1] == 180.0
    assert t.qnorm[0] == 0.0 and t.ernorm[0] == 0.0
    assert abs(t.qnorm[90] - 0.5) <= 1e-9 and abs(t.ernorm[90] - 1.5) <= 1e-9
    assert t.qnorm[-1] <= 1e-12 and t.ernorm[-1] <= 1e-12


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep_error_norms(WeightMatrix(), [1.0, 1.0, 0.0], 10)
    with pytest.raises(ValueError):
        sweep_error_norms(WeightMatrix(), E3, 1)


def test_sweep_other_axis():
    t = sweep_error_norms(WeightMatrix(), [1.0, 0.0, 0.0], 3)
    assert np.allclose(t.ernorm, [0.0, 2.5, 0.0], atol=1e-12)
    assert np.allclose(t.qnorm, [0.0, 0.5, 0.0], atol=1e-12)
