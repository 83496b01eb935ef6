"""f(t, s) = sqrt(t) * sqrt(s)."""

from typing import Mapping, Optional

import numpy as np

from growth.base import GrowthFunction, claims_condition2, ratio_lipschitz_sq
from growth.params import reject_params

FUNCTION_ID = "geometric"


def _evaluate(t, s):
    # sqrt of the product keeps f(t, t) == t exact
    return np.sqrt(t * s)


def _gradient(t, s):
    return 0.5 * np.sqrt(s / t), 0.5 * np.sqrt(t / s)


def _hessian(t, s):
    return (
        -0.25 * np.sqrt(s) / t**1.5,
        0.25 / np.sqrt(t * s),
        -0.25 * np.sqrt(t) / s**1.5,
    )


def _hessian_sup(lo: float, hi: float):
    pure = 0.25 * np.sqrt(hi) / lo**1.5
    return float(pure), 0.25 / lo, float(pure)


def build(params: Optional[Mapping[str, float]] = None) -> GrowthFunction:
    reject_params(FUNCTION_ID, params, allowed=())
    lipschitz_sq = ratio_lipschitz_sq(_gradient)
    return GrowthFunction(
        id=FUNCTION_ID,
        evaluator=_evaluate,
        gradient_fn=_gradient,
        hessian_fn=_hessian,
        cx=0.5,
        cy=0.5,
        theorem_compliant=claims_condition2(lipschitz_sq, 0.5, 0.5),
        symmetric=True,
        concave=True,
        hessian_sup=_hessian_sup,
        lipschitz_sq=lipschitz_sq,
    )
