import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import (
    ConfigError,
    DomainError,
    RegistrationError,
    UnknownFunctionError,
)
from growth import (
    available_functions,
    check_monotone,
    clamp_count,
    diagonal_constants,
    eval_f,
    get_function,
    gradient,
    hessian,
    numeric_function,
    register_function,
    scale,
    unregister_function,
)

BUILTINS = [
    "harmonic",
    "geometric",
    "power_mean",
    "weighted_geometric",
    "sin2_perturbed",
]


def test_builtins_are_registered():
    assert set(BUILTINS) <= set(available_functions())


def test_harmonic_values(harmonic):
    assert eval_f(harmonic, 1.0, 1.0) == pytest.approx(0.5)
    assert eval_f(harmonic, 1.0, 2.0) == pytest.approx(2.0 / 3.0)
    assert diagonal_constants(harmonic) == (0.25, 0.25)


def test_geometric_is_exact_on_the_diagonal(geometric):
    t = np.array([1.0, 3.0, 1e6])
    np.testing.assert_array_equal(eval_f(geometric, t, t), t)
    gt, gs = gradient(geometric, t, t)
    np.testing.assert_array_equal(gt, 0.5)
    np.testing.assert_array_equal(gs, 0.5)


@pytest.mark.parametrize("fn_id", BUILTINS)
def test_diagonal_is_linear(fn_id):
    fn = get_function(fn_id)
    t = np.array([1.0, 10.0, 1e3, 1e6])
    np.testing.assert_allclose(eval_f(fn, t, t), fn.slope * t, rtol=1e-12)


def test_power_mean_default_matches_harmonic_slope():
    fn = get_function("power_mean")
    assert fn.cx == pytest.approx(0.25)
    assert fn.cy == pytest.approx(0.25)
    assert fn.params["p"] == 2.0


def test_weighted_geometric_constants():
    fn = get_function("weighted_geometric", {"alpha": 0.25, "c": 0.8})
    assert fn.cx == pytest.approx(0.2)
    assert fn.cy == pytest.approx(0.6)
    assert not fn.symmetric


def test_theorem_compliance_flags():
    assert get_function("harmonic").theorem_compliant
    assert not get_function("geometric").theorem_compliant
    assert not get_function("sin2_perturbed").theorem_compliant


def test_lipschitz_constants_of_homogeneous_builtins(harmonic, geometric):
    assert harmonic.lipschitz_sq == pytest.approx(17.0 / 81.0)
    assert geometric.lipschitz_sq == pytest.approx(5.0 / 8.0)


def test_hessian_is_symmetric(harmonic):
    h = hessian(harmonic, np.array([2.0, 5.0]), np.array([3.0, 4.0]))
    assert h.shape == (2, 2, 2)
    np.testing.assert_array_equal(h[:, 0, 1], h[:, 1, 0])


DERIVATIVE_POINTS = [(1.2, 1.9), (3.0, 4.5), (40.0, 25.0)]


@pytest.mark.parametrize("fn_id", BUILTINS)
@pytest.mark.parametrize("t, s", DERIVATIVE_POINTS)
def test_gradient_matches_central_differences(fn_id, t, s):
    fn = get_function(fn_id)
    h, k = 1e-6 * t, 1e-6 * s
    gt, gs = gradient(fn, t, s)
    assert gt == pytest.approx(
        (eval_f(fn, t + h, s) - eval_f(fn, t - h, s)) / (2 * h), rel=1e-5, abs=1e-8
    )
    assert gs == pytest.approx(
        (eval_f(fn, t, s + k) - eval_f(fn, t, s - k)) / (2 * k), rel=1e-5, abs=1e-8
    )


@pytest.mark.parametrize("fn_id", BUILTINS)
@pytest.mark.parametrize("t, s", DERIVATIVE_POINTS)
def test_hessian_matches_differenced_gradient(fn_id, t, s):
    fn = get_function(fn_id)
    h, k = 1e-5 * t, 1e-5 * s
    up_t, down_t = gradient(fn, t + h, s), gradient(fn, t - h, s)
    up_s, down_s = gradient(fn, t, s + k), gradient(fn, t, s - k)
    expected = np.array(
        [
            [(up_t[0] - down_t[0]) / (2 * h), (up_s[0] - down_s[0]) / (2 * k)],
            [(up_t[1] - down_t[1]) / (2 * h), (up_s[1] - down_s[1]) / (2 * k)],
        ]
    )
    np.testing.assert_allclose(hessian(fn, t, s), expected, rtol=1e-4, atol=1e-7)


@pytest.mark.parametrize("fn_id", ["harmonic", "geometric", "weighted_geometric"])
def test_analytic_hessian_sup_bounds_a_grid(fn_id):
    fn = get_function(fn_id)
    lo, hi = fn.domain(2)
    axis = np.linspace(lo, hi, 101)
    t, s = np.meshgrid(axis, axis)
    h = np.abs(hessian(fn, t.ravel(), s.ravel()))
    sup = fn.hessian_sup(lo, hi)
    assert h[:, 0, 0].max() <= sup[0] * (1 + 1e-12)
    assert h[:, 0, 1].max() <= sup[1] * (1 + 1e-12)
    assert h[:, 1, 1].max() <= sup[2] * (1 + 1e-12)


def test_harmonic_second_derivative_bounds(harmonic):
    for n in range(0, 6):
        lo, hi = harmonic.domain(n)
        pure, mixed, _ = harmonic.hessian_sup(lo, hi)
        assert pure == pytest.approx((8.0 / 27.0) / 2.5**n)
        assert mixed == pytest.approx(0.25 / 2.5**n)


def test_eval_outside_domain_raises(harmonic):
    with pytest.raises(DomainError):
        eval_f(harmonic, 0.5, 1.0)


def test_values_just_below_one_are_clamped(harmonic):
    before = clamp_count()
    assert eval_f(harmonic, 1.0 - 1e-10, 1.0) == pytest.approx(0.5)
    assert clamp_count() == before + 1


def test_scale_multiplies_constants(harmonic):
    scaled = scale(harmonic, 2.0)
    assert scaled.id == "harmonic*2"
    assert (scaled.cx, scaled.cy) == (0.5, 0.5)
    assert eval_f(scaled, 1.0, 1.0) == pytest.approx(1.0)
    # 2 * 4 * 17/81 exceeds the new slope of 1
    assert not scaled.theorem_compliant


def test_scale_through_registry():
    fn = get_function("harmonic", {"eps": 0.5})
    assert fn.cx == pytest.approx(0.125)
    assert fn.theorem_compliant


def test_scale_rejects_nonpositive_factor(harmonic):
    with pytest.raises(DomainError):
        scale(harmonic, 0.0)


def test_unknown_function():
    with pytest.raises(UnknownFunctionError) as excinfo:
        get_function("no_such_function")
    assert isinstance(excinfo.value, KeyError)
    assert "harmonic" in str(excinfo.value)


def test_unknown_parameter_is_a_config_error():
    with pytest.raises(ConfigError):
        get_function("harmonic", {"p": 2.0})


def test_register_numeric_function():
    def build(params=None):
        return numeric_function(
            "half_sum", lambda t, s: 0.25 * (t + s), 0.25, 0.25, symmetric=True
        )

    register_function("half_sum", build)
    try:
        fn = get_function("half_sum")
        assert fn.numeric_derivatives
        gt, gs = gradient(fn, 4.0, 7.0)
        assert gt == pytest.approx(0.25, rel=1e-6)
        assert gs == pytest.approx(0.25, rel=1e-6)
        with pytest.raises(KeyError):
            register_function("half_sum", build)
    finally:
        unregister_function("half_sum")
    assert "half_sum" not in available_functions()


def test_register_rejects_wrong_diagonal_constants():
    def build(params=None):
        return numeric_function("skewed", lambda t, s: 0.3 * (t + s), 0.25, 0.25)

    with pytest.raises(RegistrationError):
        register_function("skewed", build)
    assert "skewed" not in available_functions()


def test_builtins_cannot_be_unregistered():
    with pytest.raises(KeyError):
        unregister_function("harmonic")


box = st.floats(min_value=1.0, max_value=100.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(a=box, b=box, c=box, d=box, fn_id=st.sampled_from(BUILTINS))
def test_monotone_in_both_arguments(a, b, c, d, fn_id):
    fn = get_function(fn_id)
    low = eval_f(fn, min(a, c), min(b, d))
    high = eval_f(fn, max(a, c), max(b, d))
    assert low <= high + 1e-12 * max(1.0, abs(high))


@pytest.mark.parametrize("fn_id", BUILTINS)
def test_check_monotone_passes_for_builtins(fn_id):
    report = check_monotone(get_function(fn_id), n=2, trials=2000, seed=5)
    assert report.passed
    assert report.measurements["violations"] == 0
