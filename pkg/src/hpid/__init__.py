"""Homogeneous PID control toolkit.

Dilation-group algebra and homogeneous norms, linear and homogeneous PID
step evaluators, the disturbed double-integrator and decentralized joint
plants, Lyapunov stability certificates for the homogeneous upgrade of a
linear PID, a deterministic RK4 simulation harness, and the performance
indices used to compare the two controllers.
"""

from .control import GainSet, HpidState, hpid_step, pid_step, reset
from .homogeneity import (
    BracketError,
    CanonicalNorm,
    Dilation,
    ExperimentalNorm,
    HomNormSpec,
    SymMatrix,
    WeightedSumNorm,
    canonical_norm,
    canonical_norm_gradient,
    check_strict_monotonicity,
    dilation_apply,
    error_pair_dilation,
    experimental_norm,
    extended_state_dilation,
    hom_norm,
    standard_dilation,
    verify_field_homogeneity,
    weighted_sum_norm,
)
from .metrics import MetricsReport, compare, iavc, itae, ivc, l2_norm, pointwise_norm
from .plant import (
    DisturbanceSpec,
    ExtendedState,
    JointConfig,
    JointPlantConfig,
    ReferenceSpec,
    closed_loop_field,
    default_six_joint_plant,
    double_integrator_rhs,
    feedback_linearized_joint_rhs,
    make_closed_loop_field,
    reference_eval,
)
from .sim import DivergenceError, Scenario, Trajectory, rk4_step, scaling_symmetry_run, simulate
from .stability import (
    InfeasibleGainsError,
    StabilityCertificate,
    certify,
    convergence_classifier,
    lyapunov_decrease_check,
    solve_lyapunov,
    solve_lyapunov_matrix,
)

__version__ = "0.1.0"
