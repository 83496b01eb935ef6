"""f(t, s) = ts / (t + s): the parallel-resistance combination."""

from typing import Mapping, Optional

from growth.base import GrowthFunction, claims_condition2, ratio_lipschitz_sq
from growth.params import reject_params

FUNCTION_ID = "harmonic"


def _evaluate(t, s):
    return t * s / (t + s)


def _gradient(t, s):
    d = (t + s) ** 2
    return s * s / d, t * t / d


def _hessian(t, s):
    d = (t + s) ** 3
    return -2.0 * s * s / d, 2.0 * t * s / d, -2.0 * t * t / d


def _hessian_sup(lo: float, hi: float):
    # s^2/(t+s)^3 grows in s while s < 2t and shrinks in t
    s_star = min(hi, 2.0 * lo)
    pure = 2.0 * s_star * s_star / (lo + s_star) ** 3
    mixed = 2.0 * lo * lo / (2.0 * lo) ** 3
    return pure, mixed, pure


def build(params: Optional[Mapping[str, float]] = None) -> GrowthFunction:
    reject_params(FUNCTION_ID, params, allowed=())
    lipschitz_sq = ratio_lipschitz_sq(_gradient)
    return GrowthFunction(
        id=FUNCTION_ID,
        evaluator=_evaluate,
        gradient_fn=_gradient,
        hessian_fn=_hessian,
        cx=0.25,
        cy=0.25,
        theorem_compliant=claims_condition2(lipschitz_sq, 0.25, 0.25),
        symmetric=True,
        concave=True,
        hessian_sup=_hessian_sup,
        lipschitz_sq=lipschitz_sq,
    )
