import math

import numpy as np
import pytest

from core.errors import DomainError, SupportExplosionError
from core.models import DiscreteDistribution
from nodes.exact_distribution import (
    check_variance_identity,
    degenerate_distribution,
    difference_fourth_moment,
    distribution_sequence,
    exact_next,
    fourth_moment_diagnostic,
    generation_delta,
    leaf_enumeration,
    mean,
    merge_atoms,
    moments,
    squared_difference_mean,
    variance,
    x0_distribution,
)


def test_x0_law():
    dist = x0_distribution()
    assert dist.is_exact
    assert mean(dist) == 1.5
    assert variance(dist) == 0.25


def test_harmonic_first_generation(harmonic_laws):
    x1 = harmonic_laws[1]
    assert x1.atom_count == 9
    assert mean(x1) == pytest.approx(89.0 / 24.0, rel=1e-14)
    assert variance(x1) == pytest.approx(307.0 / 576.0, rel=1e-14)
    assert math.fsum(x1.probs.tolist()) == pytest.approx(1.0, abs=1e-12)


def test_support_ends_are_the_range_ends(harmonic_laws):
    for dist in harmonic_laws:
        lo = 2.5**dist.n
        assert dist.support[0] == pytest.approx(lo, rel=1e-14)
        assert dist.support[-1] == pytest.approx(2.0 * lo, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2])
def test_convolution_matches_leaf_enumeration(harmonic, harmonic_laws, n):
    brute = leaf_enumeration(harmonic, n)
    dist = harmonic_laws[n]
    assert brute.atom_count == dist.atom_count
    np.testing.assert_allclose(brute.support, dist.support, rtol=1e-14)
    np.testing.assert_allclose(brute.probs, dist.probs, rtol=1e-14, atol=0)


def test_leaf_enumeration_depth_limit(harmonic):
    with pytest.raises(SupportExplosionError):
        leaf_enumeration(harmonic, 3)


@pytest.mark.parametrize("n", [0, 1])
def test_variance_identity_harmonic(harmonic, harmonic_laws, n):
    report = check_variance_identity(harmonic, harmonic_laws[n], harmonic_laws[n + 1])
    assert report.passed
    assert report.measurements["relative_residual"] <= 1e-13


def test_variance_identity_geometric(geometric):
    x0, x1 = distribution_sequence(geometric, 1)
    report = check_variance_identity(geometric, x0, x1)
    assert report.passed


def test_variance_identity_needs_exact_consecutive_laws(harmonic, harmonic_laws):
    with pytest.raises(DomainError):
        check_variance_identity(harmonic, harmonic_laws[0], harmonic_laws[2])
    x1 = exact_next(harmonic, harmonic_laws[0], delta=0.01)
    x2 = exact_next(harmonic, x1, delta=0.01)
    with pytest.raises(DomainError):
        check_variance_identity(harmonic, x1, x2)


def test_variance_identity_after_one_binned_step(harmonic, harmonic_laws):
    x0 = harmonic_laws[0]
    report = check_variance_identity(harmonic, x0, exact_next(harmonic, x0, delta=0.01))
    assert report.passed
    assert report.params["quantized"]
    allowance = report.measurements["quantization_allowance"]
    assert allowance == pytest.approx(0.005**2 / 12)
    measured = report.measurements
    gap = measured["var_next_recursion"] - measured["var_next_direct"]
    assert -1e-13 <= gap <= allowance + 1e-13


def test_variance_identity_into_generation_three(harmonic):
    dists = distribution_sequence(harmonic, 3)
    assert dists[2].is_exact and not dists[3].is_exact
    report = check_variance_identity(harmonic, dists[2], dists[3])
    assert report.passed
    assert report.measurements["relative_residual"] < 1e-5


def test_squared_difference_mean_switches_to_variance_form():
    rng = np.random.default_rng(3)
    values = np.sort(rng.uniform(1.0, 2.0, 5000))
    probs = np.full(values.size, 1.0 / values.size)
    direct = squared_difference_mean(values[:4000], probs[:4000] * 1.25)
    small_var = 2.0 * np.var(values[:4000])
    assert direct == pytest.approx(small_var, rel=1e-12)
    assert squared_difference_mean(values, probs) == pytest.approx(
        2.0 * np.var(values), rel=1e-12
    )


def test_quantized_step_tracks_its_error_bound(geometric):
    x1 = distribution_sequence(geometric, 1)[1]
    exact = exact_next(geometric, x1)
    coarse = exact_next(geometric, x1, delta=1e-2)
    assert coarse.quant_error_bound == pytest.approx(0.5e-2)
    assert abs(mean(coarse) - mean(exact)) <= coarse.quant_error_bound
    assert math.fsum(coarse.probs.tolist()) == pytest.approx(1.0, abs=1e-12)


def test_default_policy_quantizes_from_generation_three(harmonic):
    assert generation_delta(harmonic, 2) == 0.0
    assert generation_delta(harmonic, 3) == pytest.approx(1e-3 * 2.5**3)
    assert generation_delta(harmonic, 1, delta0=1e-9) == pytest.approx(2.5e-9)

    dists = distribution_sequence(harmonic, 3)
    assert [d.is_exact for d in dists] == [True, True, True, False]
    assert dists[3].support[0] >= 2.5**3 - dists[3].quant_error_bound


def test_atom_cap_is_enforced(harmonic, harmonic_laws):
    with pytest.raises(SupportExplosionError) as excinfo:
        exact_next(harmonic, harmonic_laws[2], cap=1000)
    assert "--delta0" in str(excinfo.value)


def test_binned_step_respects_the_atom_cap(harmonic, harmonic_laws):
    with pytest.raises(SupportExplosionError) as excinfo:
        exact_next(harmonic, harmonic_laws[2], delta=1e-9, cap=1000)
    assert "--delta0" in str(excinfo.value)
    assert "pairs" in str(excinfo.value)


def test_fine_quantization_agrees_with_the_exact_law(geometric):
    exact = distribution_sequence(geometric, 2)[2]
    fine = distribution_sequence(geometric, 2, delta0=1e-9)[2]
    assert fine.quant_error_bound == pytest.approx(3.0 * 1.5e-9 + 4.5e-9)
    assert abs(mean(fine) - mean(exact)) <= fine.quant_error_bound
    assert fine.support[0] >= exact.support[0] - fine.quant_error_bound
    assert fine.support[-1] <= exact.support[-1] + fine.quant_error_bound


def test_finer_quantization_tightens_generation_three(harmonic):
    coarse = distribution_sequence(harmonic, 3)[3]
    finer = distribution_sequence(harmonic, 3, delta0=3e-4)[3]
    assert finer.quant_error_bound < coarse.quant_error_bound
    gap = abs(mean(finer) - mean(coarse))
    assert gap <= finer.quant_error_bound + coarse.quant_error_bound


def test_moments_of_x0():
    raw, central = moments(x0_distribution(), 4)
    assert raw == (1.5, 2.5, 4.5, 8.5)
    assert central == (0.25, 0.0, 0.0625)


def test_difference_fourth_moment_of_x0():
    e4, m4, var = difference_fourth_moment(x0_distribution())
    assert e4 == pytest.approx(0.5)
    assert 2 * m4 <= e4 <= 16 * m4


def test_fourth_moment_diagnostic(harmonic):
    dists = distribution_sequence(harmonic, 4)
    report = fourth_moment_diagnostic(dists)
    assert report.passed
    ratios = [r for _, r in report.measurements["ratios"]]
    assert ratios[0] == pytest.approx(8.0)
    assert max(ratios) / min(ratios) < 3.0


def test_fourth_moment_diagnostic_needs_three_laws(harmonic_laws):
    with pytest.raises(DomainError):
        fourth_moment_diagnostic(harmonic_laws[:2])


def test_merge_atoms_keeps_singletons_exact():
    values = np.array([3.0, 1.0, 1.0 + 1e-15, 2.0])
    probs = np.array([0.25, 0.25, 0.25, 0.25])
    support, mass = merge_atoms(values, probs, tol=1e-12)
    assert support.tolist()[1:] == [2.0, 3.0]
    assert support[0] == pytest.approx(1.0)
    np.testing.assert_allclose(mass, [0.5, 0.25, 0.25])


def test_degenerate_law_steps_to_a_point(harmonic):
    dist = exact_next(harmonic, degenerate_distribution(2.0))
    assert dist.atom_count == 1
    assert dist.support[0] == pytest.approx(5.0)


def test_distribution_validation():
    with pytest.raises(DomainError):
        DiscreteDistribution(
            support=np.array([2.0, 1.0]), probs=np.array([0.5, 0.5]), n=0
        )
    with pytest.raises(DomainError):
        DiscreteDistribution(
            support=np.array([1.0, 2.0]), probs=np.array([0.5, 0.4]), n=0
        )
