"""Simultaneous confidence intervals for the ranks of Gaussian centers.

Given one observation per center with known standard deviation, every
method here produces, at a chosen simultaneous level, one rank interval
per center such that all true ranks are covered together with probability
at least 1 - alpha.  Exact methods test the family of ordered equality
hypotheses; the bracketing pipeline approximates the same answer in
polynomial time and certifies where it is exact; Tukey's pairwise
procedure is included as the classical baseline.

Quick start::

    from rankci import Sample, hybrid_exact
    cis = hybrid_exact(Sample(["a", "b", "c"], [0.1, 2.3, 2.4], [1, 1, 1]))
    for label, (lo, hi) in zip(cis.labels, cis.intervals):
        print(label, lo, hi)
"""

from .bracket import (
    AffineBound,
    BoundValidationError,
    ContributionMatrix,
    adjust_lower_bound,
    adjust_upper_bound,
    bracket_cis,
    build_affine_bounds,
    extract_block_bounds,
    hybrid_exact,
    min_contrib_matrix,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .model import (
    CriticalPolicy,
    GuardError,
    OrderedHypothesis,
    RankCIs,
    Sample,
    cns_decode,
    cns_encode,
    count_all_partitions,
    count_ordered_hypotheses,
    rank_set,
)
from .numerics import (
    McConfig,
    chi_square_quantile,
    least_favorable_quantile,
    least_favorable_tail,
    mixture_weights_equal_sigma,
    pava,
    studentized_range_quantile,
)
from .partition import (
    BlockBounds,
    LrResult,
    block_sse_table,
    ci_all_partitions,
    ci_block_check,
    ci_level_by_level,
    lr_statistic,
    lr_statistic_any_order,
    single_block_bounds,
    test_hypothesis,
)
from .simulate import (
    METHODS,
    ComparisonReport,
    FwerEstimate,
    MethodResult,
    Scenario,
    compare_methods,
    estimate_fwer,
    generate_scenario,
    run_method,
)
from .tukey import (
    PairwiseDecision,
    tukey_pairwise_cis,
    tukey_partition_cis,
    tukey_partition_test,
)

__version__ = "1.0.0"

__all__ = [
    "AffineBound",
    "BlockBounds",
    "BoundValidationError",
    "ComparisonReport",
    "ContributionMatrix",
    "CriticalPolicy",
    "FwerEstimate",
    "GuardError",
    "KERNEL_BACKEND",
    "LrResult",
    "McConfig",
    "METHODS",
    "MethodResult",
    "OrderedHypothesis",
    "PairwiseDecision",
    "RankCIs",
    "Sample",
    "Scenario",
    "adjust_lower_bound",
    "adjust_upper_bound",
    "block_sse_table",
    "bracket_cis",
    "build_affine_bounds",
    "chi_square_quantile",
    "ci_all_partitions",
    "ci_block_check",
    "ci_level_by_level",
    "cns_decode",
    "cns_encode",
    "compare_methods",
    "count_all_partitions",
    "count_ordered_hypotheses",
    "estimate_fwer",
    "extract_block_bounds",
    "generate_scenario",
    "hybrid_exact",
    "least_favorable_quantile",
    "least_favorable_tail",
    "lr_statistic",
    "lr_statistic_any_order",
    "min_contrib_matrix",
    "mixture_weights_equal_sigma",
    "pava",
    "rank_set",
    "run_method",
    "single_block_bounds",
    "studentized_range_quantile",
    "test_hypothesis",
    "tukey_pairwise_cis",
    "tukey_partition_cis",
    "tukey_partition_test",
]
