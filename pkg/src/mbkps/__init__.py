"""Key pre-distribution from multiple block codes.

Assign every node M codewords of a C(n, k)-q block code, map their symbols
to keys from a shared pool, discover pairwise keys by comparing key-index
IDs, and evaluate sharing probability and collusion resilience exactly,
in closed form for MDS codes, and by seeded Monte Carlo simulation.
"""

from .codes import (
    BlockCode,
    CodeSpec,
    linear_code_from_generator,
    load_explicit_code,
    load_generator,
    make_explicit_code,
    make_random_linear_code,
    make_rs_code,
    save_explicit_code,
    save_generator,
)
from .errors import KPSError
from .field import Field, make_field
from .kps import (
    Deployment,
    KeyPool,
    NodeRecord,
    assign_node_ids,
    derive_key_index,
    discover_common,
    key_refs,
    load_deployment,
    make_key_pool,
    storage_bits,
)
from .resilience import (
    AveragedResilience,
    CollusionFreeSets,
    ResilienceReport,
    average_resilience,
    average_resilience_words,
    brute_force_pair_count,
    collusion_free_sets,
    combine_parts,
    exact_pair_count,
    exact_pair_count_words,
    expected_free_symbols,
    mds_average_pair_count,
    multi_authority,
    resilience_probability,
    sharing_probability,
)
from .sim import (
    EmpiricalEstimate,
    EnsembleResult,
    TrialConfig,
    code_space_deployment,
    ensemble_resilience,
    exhaustive_secure_fraction,
    simulate_resilience,
    simulate_sharing,
)

__version__ = "0.1.0"

__all__ = [
    "AveragedResilience",
    "BlockCode",
    "CodeSpec",
    "CollusionFreeSets",
    "Deployment",
    "EmpiricalEstimate",
    "EnsembleResult",
    "Field",
    "KPSError",
    "KeyPool",
    "NodeRecord",
    "ResilienceReport",
    "TrialConfig",
    "assign_node_ids",
    "average_resilience",
    "average_resilience_words",
    "brute_force_pair_count",
    "code_space_deployment",
    "collusion_free_sets",
    "combine_parts",
    "derive_key_index",
    "discover_common",
    "ensemble_resilience",
    "exact_pair_count",
    "exact_pair_count_words",
    "exhaustive_secure_fraction",
    "expected_free_symbols",
    "key_refs",
    "linear_code_from_generator",
    "load_deployment",
    "load_explicit_code",
    "load_generator",
    "make_explicit_code",
    "make_field",
    "make_key_pool",
    "make_random_linear_code",
    "make_rs_code",
    "mds_average_pair_count",
    "multi_authority",
    "resilience_probability",
    "save_explicit_code",
    "save_generator",
    "sharing_probability",
    "simulate_resilience",
    "simulate_sharing",
    "storage_bits",
]
