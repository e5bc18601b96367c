"""Rigid-body attitude stabilization with pseudo-target error shaping."""

from .algebra import (
    AxisAngle,
    Quaternion,
    RotationMatrix,
    from_axis_angle,
    hat,
    quat_conjugate,
    quat_multiply,
    quat_to_rotmat,
    renormalize,
    reorthonormalize,
    vee,
)
from .control import (
    ControllerGains,
    closed_loop_residual_quat,
    closed_loop_residual_rot,
    lyapunov_value_quat,
    lyapunov_value_rot,
    moment_quaternion,
    moment_rotation,
)
from .dynamics import BodyState, Inertia, IntegratorConfig, state_derivative, step
from .error_kinematics import (
    DesiredTrajectory,
    WeightMatrix,
    attitude_error_vector,
    finite_difference_check_eR,
    omega_error,
    psi,
    quat_error,
)
from .exceptions import NonFiniteState, NotSkew, ScenarioError, TooFarFromManifold
from .harness import (
    ConvergenceReport,
    ConvergenceTolerance,
    MonteCarloSummary,
    NoiseConfig,
    Scenario,
    TrajectoryLog,
    closed_loop_flow,
    convergence_only,
    lyapunov_rate_probe,
    reference_scenario,
    run_monte_carlo,
    run_scenario,
    sweep_error_norms,
)
from .io import dump_scenario, load_scenario, log_to_csv, sweep_to_csv
from .presets import PRESETS, compare_pseudo, preset_scenario
from .pseudo import (
    PseudoConfig,
    Region,
    classify_error_region,
    pseudo_quat_error,
    pseudo_rotation_error,
)

__version__ = "0.1.0"
