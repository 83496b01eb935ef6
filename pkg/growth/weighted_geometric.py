"""f(t, s) = c_alpha * t^alpha * s^(1 - alpha)."""

from typing import Mapping, Optional

from growth.base import GrowthFunction, claims_condition2, ratio_lipschitz_sq
from growth.params import read_param, reject_params

FUNCTION_ID = "weighted_geometric"
DEFAULT_ALPHA = 0.3
DEFAULT_C = 0.5


def build(params: Optional[Mapping[str, float]] = None) -> GrowthFunction:
    reject_params(FUNCTION_ID, params, allowed=("alpha", "c"))
    alpha = read_param(params, "alpha", DEFAULT_ALPHA, low=0.0, high=1.0)
    c = read_param(params, "c", DEFAULT_C, low=0.0)
    beta = 1.0 - alpha

    def evaluate(t, s):
        # written around t so that f(t, t) == c t exactly
        return c * t * (s / t) ** beta

    def gradient(t, s):
        return c * alpha * (s / t) ** beta, c * beta * (t / s) ** alpha

    def hessian(t, s):
        k = c * alpha * beta
        return (
            -k * t ** (alpha - 2.0) * s**beta,
            k * t ** (alpha - 1.0) * s ** (-alpha),
            -k * t**alpha * s ** (-alpha - 1.0),
        )

    def hessian_sup(lo: float, hi: float):
        k = c * alpha * beta
        return (
            k * lo ** (alpha - 2.0) * hi**beta,
            k / lo,
            k * hi**alpha * lo ** (-alpha - 1.0),
        )

    cx, cy = c * alpha, c * beta
    lipschitz_sq = ratio_lipschitz_sq(gradient)
    return GrowthFunction(
        id=FUNCTION_ID,
        evaluator=evaluate,
        gradient_fn=gradient,
        hessian_fn=hessian,
        cx=cx,
        cy=cy,
        params={"alpha": alpha, "c": c},
        theorem_compliant=claims_condition2(lipschitz_sq, cx, cy),
        symmetric=alpha == 0.5,
        concave=True,
        hessian_sup=hessian_sup,
        lipschitz_sq=lipschitz_sq,
    )
