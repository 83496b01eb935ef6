import math
from dataclasses import replace

import numpy as np
import pytest

from core.errors import DegenerateError, DomainError
from core.models import DiscreteDistribution, GrowthRecord, GrowthTrace
from nodes.exact_distribution import x0_distribution
from nodes.sampler import run_pool, sample_tree_batch
from nodes.statistics import (
    MomentAccumulator,
    fourth_ratio_trace,
    law_distance,
    law_distance_threshold,
    log_variance_slope,
    mean_growth,
    normal_ks_distance,
    plot_data,
    record_from_values,
    self_standardize,
    standardize,
    trace_from_distributions,
    variance_growth_ratios,
)
from services.rng_service import generator


def _record(n, variance, mean=1.0, se_var=None):
    return GrowthRecord(
        n=n, mean=mean, variance=variance, m4=0.0, source="exact", size=1, se_var=se_var
    )


def _trace(variances):
    trace = GrowthTrace(fn_id="test")
    for n, v in enumerate(variances):
        trace.append(_record(n, v))
    return trace


def test_streaming_moments_match_two_pass():
    x = generator(3, "moments").exponential(size=2000)
    acc = MomentAccumulator()
    for value in x:
        acc.update(float(value))
    direct = MomentAccumulator.from_values(x)
    assert acc.count == direct.count
    assert acc.mean == pytest.approx(direct.mean, rel=1e-12)
    assert acc.m2 == pytest.approx(direct.m2, rel=1e-10)
    assert acc.m3 == pytest.approx(direct.m3, rel=1e-9)
    assert acc.m4 == pytest.approx(direct.m4, rel=1e-9)


def test_merged_batches_match_whole():
    x = generator(4, "moments").normal(size=3001)
    merged = MomentAccumulator.from_values(x[:1000]) + MomentAccumulator.from_values(
        x[1000:]
    )
    whole = MomentAccumulator.from_values(x)
    assert merged.count == whole.count
    assert merged.variance == pytest.approx(whole.variance, rel=1e-12)
    assert merged.central_moment4 == pytest.approx(whole.central_moment4, rel=1e-10)

    acc = MomentAccumulator()
    acc.update_batch(x[:7])
    acc.update_batch(x[7:])
    assert acc.mean == pytest.approx(whole.mean, rel=1e-12)


def test_record_from_values_has_batch_errors():
    x = generator(5, "record").normal(loc=2.0, size=4000)
    record = record_from_values(3, x, "pool")
    assert record.size == 4000
    assert record.se_mean is not None and record.se_var is not None
    assert record.se_mean == pytest.approx(1.0 / math.sqrt(4000), rel=0.5)


def test_short_samples_have_no_batch_errors():
    record = record_from_values(0, np.arange(10.0), "tree")
    assert record.se_mean is None


def test_exact_variance_ratio(harmonic_laws):
    trace = trace_from_distributions(harmonic_laws)
    (n0, first, se), _ = variance_growth_ratios(trace)
    assert n0 == 0
    assert first == pytest.approx(307.0 / 144.0, rel=1e-12)
    assert se is None


def test_ratio_standard_errors_combine():
    trace = GrowthTrace(fn_id="test")
    trace.append(_record(0, 1.0, se_var=0.03))
    trace.append(_record(1, 2.0, se_var=0.08))
    [(_, ratio, se)] = variance_growth_ratios(trace)
    assert ratio == 2.0
    assert se == pytest.approx(2.0 * math.hypot(0.03, 0.04))


def test_ratio_needs_two_generations_with_variance():
    with pytest.raises(DomainError):
        variance_growth_ratios(_trace([1.0]))
    with pytest.raises(DegenerateError):
        variance_growth_ratios(_trace([0.0, 1.0]))


def test_log_variance_slope():
    assert log_variance_slope(_trace([1.0, 2.125, 2.125**2])) == pytest.approx(2.125)


def test_trace_must_be_contiguous():
    trace = _trace([1.0])
    with pytest.raises(DomainError):
        trace.append(_record(2, 1.0))


def test_exact_normalized_means_are_nonincreasing(harmonic, harmonic_laws):
    trace = trace_from_distributions(harmonic_laws)
    points, violations = mean_growth(trace, harmonic.cx, harmonic.cy, concave=True)
    assert violations == []
    assert points[0][1] == pytest.approx(1.5)
    assert points[1][1] == pytest.approx(89.0 / 60.0)
    assert points[2][1] < points[1][1]


def test_increasing_normalized_mean_is_flagged():
    trace = GrowthTrace(fn_id="test")
    for n, mean in enumerate([1.5, 2.5 * 1.5 * 1.01]):
        trace.append(_record(n, 1.0, mean=mean))
    _, violations = mean_growth(trace, 0.25, 0.25, concave=True)
    assert violations == [1]


def test_standardize():
    z = standardize(np.array([1.0, 3.0]), mean=2.0, variance=4.0)
    np.testing.assert_allclose(z, [-0.5, 0.5])
    with pytest.raises(DegenerateError):
        standardize(np.ones(3), mean=1.0, variance=0.0)


def test_ks_distance_of_normal_draws():
    z = generator(6, "ks").standard_normal(20_000)
    assert normal_ks_distance(z) < 0.02
    assert normal_ks_distance(np.full(200, 5.0)) > 0.99


def test_ks_distance_needs_enough_values():
    with pytest.raises(DomainError):
        normal_ks_distance(np.zeros(50))


def test_pool_generation_is_close_to_normal(harmonic):
    pool = run_pool(harmonic, 8, 20_000, seed=12)
    assert normal_ks_distance(self_standardize(pool.values)) < 0.06


def test_fourth_ratio_of_x0(harmonic_laws):
    trace = trace_from_distributions(harmonic_laws)
    assert fourth_ratio_trace(trace)[0] == (0, pytest.approx(8.0))


def test_fourth_ratio_of_sampled_two_point_law():
    trace = GrowthTrace(fn_id="test")
    trace.append(record_from_values(0, np.tile([1.0, 2.0], 50), "pool"))
    assert fourth_ratio_trace(trace)[0] == (0, pytest.approx(8.0, rel=1e-12))


def test_law_distance_of_a_lopsided_sample():
    values = np.array([1.0, 1.0, 1.0, 2.0])
    assert law_distance(values, x0_distribution()) == pytest.approx(0.25)
    assert law_distance(np.array([1.0, 2.0]), x0_distribution()) == 0.0


def test_law_distance_of_tree_draws(harmonic, harmonic_laws):
    values = sample_tree_batch(harmonic, 2, 100_000, seed=8)
    assert law_distance(values, harmonic_laws[2]) <= 0.01
    assert law_distance(values, harmonic_laws[1]) == pytest.approx(1.0)


def test_law_distance_allows_for_quantization():
    values = np.array([1.0, 2.0])
    shifted = DiscreteDistribution(
        support=np.array([1.25, 2.25]),
        probs=np.array([0.5, 0.5]),
        n=0,
        quant_error_bound=0.3,
    )
    assert law_distance(values, shifted) == 0.0
    assert law_distance(values, replace(shifted, quant_error_bound=0.0)) == 0.5


def test_law_distance_threshold_has_a_sampling_floor():
    assert law_distance_threshold(10**6, 0.01) == 0.01
    assert law_distance_threshold(100, 0.01) > 0.2


def test_plot_data(harmonic, harmonic_laws):
    data = plot_data(trace_from_distributions(harmonic_laws), harmonic.cx, harmonic.cy)
    assert [row[0] for row in data["log_variance"]] == [0, 1, 2]
    assert data["log_variance"][0][1] == pytest.approx(math.log(0.25))
    assert data["normalized_mean"][1][1] == pytest.approx(89.0 / 60.0)
