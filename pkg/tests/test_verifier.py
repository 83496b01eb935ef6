from dataclasses import replace

import pytest

from core.errors import DomainError
from growth.registry import get_function
from nodes.exact_distribution import distribution_sequence
from nodes import verifier
from nodes.sampler import run_pool, tree_pool
from nodes.statistics import trace_from_distributions
from nodes.verifier import (
    check_lemma_bound,
    expectation_bounds_check,
    expectation_lower_bound,
    lemma2_tightness,
    measure_lipschitz_constant,
    replay_counterexample,
    sampler_oracle_check,
    tightness_ratio,
    verify_condition1,
    verify_condition2,
    verify_condition2_range,
    verify_condition3,
    verify_remark4,
)


@pytest.mark.parametrize("fn_id", ["harmonic", "geometric", "sin2_perturbed"])
def test_condition1_holds_for_builtins(fn_id):
    report = verify_condition1(get_function(fn_id))
    assert report.passed
    assert report.measurements["diagonal_slope"] == pytest.approx(
        get_function(fn_id).slope, abs=1e-6
    )


def test_condition1_needs_increasing_points(harmonic):
    with pytest.raises(DomainError):
        verify_condition1(harmonic, [10.0, 5.0, 100.0])


def test_condition2_holds_for_harmonic(harmonic):
    report = verify_condition2(harmonic, n=3, trials=20_000, seed=0)
    assert report.passed
    assert report.params["A"] == pytest.approx(17.0 / 81.0)
    assert report.threshold_provenance["A"] == "published"
    assert report.measurements["a_hat"] <= 17.0 / 81.0 * (1 + 1e-9)


def test_condition2_fails_for_geometric(geometric):
    report = verify_condition2(geometric, n=3, trials=20_000, seed=0)
    assert report.failed
    assert report.counterexamples
    assert report.measurements["two_a_hat"] == pytest.approx(1.25, abs=0.01)
    assert all(replay_counterexample(report, geometric))


def test_condition2_override_constants(harmonic):
    report = verify_condition2(harmonic, n=2, trials=1000, A=0.3, B=0.3, seed=0)
    # A + B exceeds cx + cy, so the constants are not admissible
    assert report.failed
    assert report.threshold_provenance["A"] == "override"


def test_condition2_range_reports_stable_generation(harmonic):
    report = verify_condition2_range(harmonic, [3, 4, 5], trials=5000, seed=1)
    assert report.passed
    assert report.measurements["n0"] == 3
    assert [row[0] for row in report.measurements["per_n"]] == [3, 4, 5]


def test_lipschitz_estimate_approaches_gradient_sup(harmonic):
    a_hat, parts = measure_lipschitz_constant(harmonic, 4, 5000, seed=2)
    assert a_hat == pytest.approx(17.0 / 81.0, rel=1e-2)
    assert set(parts) == {"uniform", "refined"}


@pytest.mark.parametrize("fn_id", ["harmonic", "geometric"])
def test_condition3_halves(fn_id):
    report = verify_condition3(get_function(fn_id))
    assert report.passed
    for ratio in report.measurements["q_ratios"]:
        assert ratio == pytest.approx(0.5, rel=1e-9)
    assert report.measurements["sup_source"] == ["analytic"]


def test_condition3_fails_for_sin2():
    report = verify_condition3(get_function("sin2_perturbed"))
    assert report.failed
    assert report.counterexamples


def test_condition3_grid_fallback_carries_a_note(harmonic):
    gridded = replace(harmonic, hessian_sup=None)
    report = verify_condition3(gridded, range(3, 6))
    assert report.measurements["sup_source"] == ["grid"]
    assert report.notes


def test_remark4_on_exact_law(geometric):
    law = distribution_sequence(geometric, 2)[2]
    report = verify_remark4(geometric, 2, law, trials=5000, seed=1)
    assert report.passed
    assert report.params["law"] == "exact"
    assert report.measurements["a1_plus_b1"] < 1.0


def test_remark4_on_pool(geometric):
    pool = run_pool(geometric, 4, 20_000, seed=1)
    report = verify_remark4(geometric, 4, pool, trials=20_000, seed=1)
    assert report.passed
    assert report.params["law"] == "pool"


def test_remark4_rejects_wrong_generation(geometric):
    law = distribution_sequence(geometric, 1)[1]
    with pytest.raises(DomainError):
        verify_remark4(geometric, 2, law, trials=10, seed=0)


def test_lemma2_bound():
    report = check_lemma_bound("lemma2", trials=50_000, seed=3)
    assert report.passed
    assert report.measurements["max_ratio"] <= 17.0 / 81.0 + 1e-12


def test_lemma1_bound_and_pair_share():
    report = check_lemma_bound("lemma1", trials=20_000, seed=4)
    assert report.passed
    assert report.measurements["max_pair_share"] <= 5.0 / 9.0 + 1e-12


def test_unknown_lemma():
    with pytest.raises(DomainError):
        check_lemma_bound("lemma3", trials=10, seed=0)


def test_lemma2_is_tight():
    assert tightness_ratio(1e-6) == pytest.approx(17.0 / 81.0, abs=1e-5)
    report = lemma2_tightness()
    assert report.passed
    assert report.measurements["gaps"][-1] < 1e-3


def test_expectation_lower_bound_constants():
    assert expectation_lower_bound("harmonic") == pytest.approx(1.4348, abs=1e-4)
    assert expectation_lower_bound("geometric") == pytest.approx(1.4633, abs=1e-4)
    with pytest.raises(DomainError):
        expectation_lower_bound("sin2_perturbed")


def test_expectation_bounds_on_exact_trace(harmonic, harmonic_laws):
    report = expectation_bounds_check(harmonic, trace_from_distributions(harmonic_laws))
    assert report.passed
    assert report.params["source"] == "exact"
    assert report.measurements["jensen_violations"] == []


def test_expectation_bounds_need_generation_two(harmonic, harmonic_laws):
    with pytest.raises(DomainError):
        expectation_bounds_check(harmonic, trace_from_distributions(harmonic_laws[:2]))


def test_expectation_bounds_for_geometric(geometric):
    dists = distribution_sequence(geometric, 3)
    report = expectation_bounds_check(geometric, trace_from_distributions(dists))
    assert report.passed
    assert report.measurements["lower"] == 1.46
    means = {n: value for n, value, _ in report.measurements["normalized_means"]}
    assert 1.46 <= means[3] <= 1.49


def test_sampler_oracle_agrees_with_exact_laws(harmonic):
    report = sampler_oracle_check(harmonic, [0, 2, 3], 100_000, seed=21)
    assert report.passed
    assert report.measurements["limit"] == 0.01
    assert [row[:2] for row in report.measurements["distances"]] == [
        [0, "tree"],
        [0, "pool"],
        [2, "tree"],
        [2, "pool"],
        [3, "tree"],
        [3, "pool"],
    ]
    assert report.measurements["max_distance"] <= 0.01


def test_sampler_oracle_flags_a_mismatched_sampler(harmonic, monkeypatch):
    def one_generation_too_deep(fn, n, count, seed, workers=1):
        return tree_pool(fn, n + 1, count, seed, workers=workers)

    monkeypatch.setattr(verifier, "tree_pool", one_generation_too_deep)
    report = sampler_oracle_check(harmonic, [1], 5_000, seed=4)
    assert report.failed
    assert [c["method"] for c in report.counterexamples] == ["tree"]
    assert report.counterexamples[0]["distance"] == pytest.approx(1.0)


def test_sampler_oracle_reports_the_configured_threshold(geometric):
    report = sampler_oracle_check(geometric, [1], 2_000, seed=4, threshold=0.5)
    assert report.passed
    assert report.measurements["limit"] == 0.5


def test_sampler_oracle_needs_generations(harmonic):
    with pytest.raises(DomainError):
        sampler_oracle_check(harmonic, [], 100, seed=1)
