"""Fast structured random matrices with the restricted isometry property."""

from .chaos import ChaosStats, chaos_statistics
from .errors import FastRipError
from .nets import SeparatedNet, block_decompose, build_separated_net
from .operators import (
    ChainSpec,
    OperatorChain,
    SupportSet,
    TheoremTwoPlan,
    apply_chain,
    build_theorem1,
    build_theorem2,
    draw_sign_vector,
    gaussian_baseline,
    materialize_chain,
    plan_theorem2,
)
from .recovery import RecoveryResult, hard_threshold, iht_recover, omp_recover
from .rip import RipEstimate, exact_rip_constant, monte_carlo_rip
from .linalg import extremal_singular_values
from .transforms import FastTransformSpec, TransformKind, apply_transform, materialize_transform
from .bench import count_operations, scaling_sweep

__version__ = "0.1.0"
