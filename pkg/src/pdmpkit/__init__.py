"""Event-driven PDMP samplers with explicit convergence-rate certificates."""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    CoercivityConstants,
    Lambda,
    alpha_A,
    epsilon0,
    iact_bound,
    kappas,
    lambda_x_from_poincare,
    lemma6_bracket,
    maximize_alpha,
    r0_general,
    r0_zigzag,
    theorem1_constants,
    theorem17_constants,
)
from .diagnostics import (
    IactEstimate,
    compare_to_bound,
    decay_rate_fit,
    discretize,
    iact_batch_means,
    path_average,
)
from .rates import RateFunction, make_rate, phi_canonical, phi_softplus, verify_rate
from .samplers import (
    SamplerConfig,
    flip_coordinate,
    refresh_full,
    reflect,
    run_replicas,
    simulate,
)
from .scaling import ScalingFamily, scaling_report
from .skeleton import EventSkeleton, validate_skeleton
from .targets import (
    FieldDecomposition,
    TargetConstants,
    TargetModel,
    decompose_bps,
    decompose_rhmc,
    decompose_zigzag,
    gaussian_target,
    product_beta_target,
    radial_beta_target,
    verify_certificates,
    verify_decomposition,
    zero_torus_target,
)
from .velocity import VelocityModel, mb_factor, moments, quadratic_form_l2, sample_velocity
