"""permorb: permutation-invariant sorted embeddings of point clouds.

Orbit distances (exact assignment plus a factorial oracle), the sorted /
pooled / sketched embedding family, generators for direction matrices and
hard cloud pairs, certified and empirical bi-Lipschitz distortion audits,
and an exhaustive orbit-separation certifier with a CLI front end.
"""

from .core import (
    __version__,
    BudgetExceededError,
    ConstructionError,
    UnsupportedFormError,
    flatten_embedding,
    is_full_spark,
    json_dumps,
    load_matrix_csv,
    make_rng,
    permute_rows,
    save_matrix_csv,
    singular_values,
    sort_ascending,
)
from .embeddings import (
    pooled_embedding,
    sketched_embedding,
    sorted_embedding,
    translation_offset,
)
from .metrics import (
    OrbitDistanceResult,
    orbit_distance,
    orbit_distance_bruteforce,
    sliced_w2_sampled,
    wasserstein2,
)
from .constructions import (
    CounterexamplePair,
    adversarial_circle_pair,
    circle_directions,
    gaussian_directions,
    identity_augmented,
    parity_counterexample,
    sphere_directions,
)
from .audit import (
    AuditReport,
    OseReport,
    PUEstimate,
    SubsetBound,
    blueprint_lower_bound,
    empirical_distortion,
    gaussian_sketch,
    ose_check,
    ose_dimension,
    projective_uniformity,
    region_count_bound,
    sqrtn_ceiling,
    subset_sigma_lower_bound,
    subset_sigma_lower_bound_sampled,
    upper_lipschitz,
)
from .separation import (
    InjectivityReport,
    SeparationStatus,
    SeparationVerdict,
    SeparationWitness,
    certify_separation,
    known_separating_matrix,
    min_injective_D_upper,
    non_injective_D_threshold,
    spot_check_injectivity,
)

__all__ = [
    "__version__",
    "BudgetExceededError",
    "ConstructionError",
    "UnsupportedFormError",
    "flatten_embedding",
    "is_full_spark",
    "json_dumps",
    "load_matrix_csv",
    "make_rng",
    "permute_rows",
    "save_matrix_csv",
    "singular_values",
    "sort_ascending",
    "pooled_embedding",
    "sketched_embedding",
    "sorted_embedding",
    "translation_offset",
    "OrbitDistanceResult",
    "orbit_distance",
    "orbit_distance_bruteforce",
    "sliced_w2_sampled",
    "wasserstein2",
    "CounterexamplePair",
    "adversarial_circle_pair",
    "circle_directions",
    "gaussian_directions",
    "identity_augmented",
    "parity_counterexample",
    "sphere_directions",
    "AuditReport",
    "OseReport",
    "PUEstimate",
    "SubsetBound",
    "blueprint_lower_bound",
    "empirical_distortion",
    "gaussian_sketch",
    "ose_check",
    "ose_dimension",
    "projective_uniformity",
    "region_count_bound",
    "sqrtn_ceiling",
    "subset_sigma_lower_bound",
    "subset_sigma_lower_bound_sampled",
    "upper_lipschitz",
    "InjectivityReport",
    "SeparationStatus",
    "SeparationVerdict",
    "SeparationWitness",
    "certify_separation",
    "known_separating_matrix",
    "min_injective_D_upper",
    "non_injective_D_threshold",
    "spot_check_injectivity",
]
