from nodes.exact_distribution import (
    check_variance_identity,
    distribution_sequence,
    exact_next,
    fourth_moment_diagnostic,
    moments,
)
from nodes.resistance_net import (
    build_lcl,
    equivalence_check,
    laplacian_resistance,
    series_parallel_resistance,
)
from nodes.sampler import evolve_pool, range_check, run_pool, sample_tree
from nodes.statistics import (
    MomentAccumulator,
    mean_growth,
    normal_ks_distance,
    variance_growth_ratios,
)

__all__ = [
    "sample_tree",
    "evolve_pool",
    "run_pool",
    "range_check",
    "exact_next",
    "distribution_sequence",
    "moments",
    "check_variance_identity",
    "fourth_moment_diagnostic",
    "build_lcl",
    "series_parallel_resistance",
    "laplacian_resistance",
    "equivalence_check",
    "MomentAccumulator",
    "variance_growth_ratios",
    "mean_growth",
    "normal_ks_distance",
]
