"""Capacity outer bounds and sum-capacity certificates for Gaussian
interference channels.

The package evaluates two families of sum-rate inequalities over receiver
subsets (a correlated-noise family and a genie-aided family), constructs
channel instances whose sum capacity is known exactly, and certifies sum
capacity whenever an outer bound meets an achievable rate.
"""

from .achievability import (
    MacCheckResult,
    bc_bound,
    degraded_chain_sum_rate,
    degraded_sum_capacity,
    mac_feasibility,
    succ_dec_rates,
    tin_sum_rate,
    tin_sum_rate_general,
)
from .certify import (
    BOUND_ONLY,
    CERTIFIED,
    PATH_DEGRADED,
    PATH_MAC,
    PATH_NUMERIC,
    PATH_Z,
    WitnessReport,
    certify_sum_capacity,
    degradedness_witness,
    recover_noise_correlation,
)
from .construct import (
    build_z_channel,
    many_to_one,
    many_to_one_noise,
    rank_one_channel,
)
from .errors import (
    BudgetExhaustedWarning,
    ComputationError,
    ConditionViolated,
    IfcError,
    InternalConsistencyError,
    LabelOverlap,
    SchemaError,
    SingularCovariance,
    TooLarge,
    ValidationError,
    WitnessFailure,
)
from .gaussian_info import (
    LOG2PIE,
    GenieSpec,
    build_joint,
    conditional_entropy,
    conditional_mi,
    diff_entropy,
)
from .model import (
    BoundReport,
    Certificate,
    ChannelMatrix,
    JointGaussian,
    NoiseCorrelation,
    RateInequality,
    identity_noise,
    parse_channel_spec,
    serialize_channel,
    serialize_noise,
    validate_channel,
    validate_noise_correlation,
)
from .oracle import entropy_identity_mi, grid_min_sigma, mc_mutual_information
from .outer_bound import (
    FAMILIES,
    FAMILY_ETW,
    FAMILY_KRA,
    BoundTerm,
    OptimizerConfig,
    count_bounds,
    enumerate_terms,
    etw_term_min,
    etw_term_value,
    kra_term_min,
    kra_term_value,
    region,
)

__version__ = "0.1.0"

__all__ = [
    "BOUND_ONLY",
    "BoundReport",
    "BoundTerm",
    "BudgetExhaustedWarning",
    "CERTIFIED",
    "Certificate",
    "ChannelMatrix",
    "ComputationError",
    "ConditionViolated",
    "FAMILIES",
    "FAMILY_ETW",
    "FAMILY_KRA",
    "GenieSpec",
    "IfcError",
    "InternalConsistencyError",
    "JointGaussian",
    "LOG2PIE",
    "LabelOverlap",
    "MacCheckResult",
    "NoiseCorrelation",
    "OptimizerConfig",
    "PATH_DEGRADED",
    "PATH_MAC",
    "PATH_NUMERIC",
    "PATH_Z",
    "RateInequality",
    "SchemaError",
    "SingularCovariance",
    "TooLarge",
    "ValidationError",
    "WitnessFailure",
    "WitnessReport",
    "bc_bound",
    "build_joint",
    "build_z_channel",
    "certify_sum_capacity",
    "conditional_entropy",
    "conditional_mi",
    "count_bounds",
    "degraded_chain_sum_rate",
    "degraded_sum_capacity",
    "degradedness_witness",
    "diff_entropy",
    "entropy_identity_mi",
    "enumerate_terms",
    "etw_term_min",
    "etw_term_value",
    "grid_min_sigma",
    "identity_noise",
    "kra_term_min",
    "kra_term_value",
    "mac_feasibility",
    "many_to_one",
    "many_to_one_noise",
    "mc_mutual_information",
    "parse_channel_spec",
    "rank_one_channel",
    "recover_noise_correlation",
    "region",
    "serialize_channel",
    "serialize_noise",
    "succ_dec_rates",
    "tin_sum_rate",
    "tin_sum_rate_general",
    "validate_channel",
    "validate_noise_correlation",
]
