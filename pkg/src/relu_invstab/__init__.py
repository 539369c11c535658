"""Inverse stability toolkit for shallow bias-free ReLU networks."""

__version__ = "0.1.0"

from .augment import augment_point, lift_biased, lift_restricted
from .canonical import (
    balance,
    canonicalize,
    check_conditions,
    in_restricted_space,
    merge_parallel,
    minimal_beta,
    normalize_zero_pairs,
)
from .errors import (
    BoundaryError,
    CapacityError,
    ConditionError,
    InconsistencyError,
    InvStabError,
    PreconditionError,
    SolverError,
    UsageError,
)
from .invstab import Certificate, recover_correspondence, reparametrize, verify_certificate
from .io import Dataset, net_from_json, net_to_json
from .landscape import (
    QualityBoundInputs,
    empirical_local_min_check,
    mse_loss,
    quality_bound,
    radius_transfer,
)
from .metrics import realizations_equal, seminorm, sobolev_distance, uniform_norm_box
from .network import (
    BiasedShallowNet,
    ShallowNet,
    biased_eval,
    evaluate,
    jacobian_at,
    param_distance,
    sign_pattern_at,
)
from .pathology import build_case, measure_case
from .regions import attainable_patterns, cell_witness, count_regions_oracle
