"""f(t, s) = t/3 + s/3 + sin^2(t - s)/3: monotone, linear on the diagonal, with
second partials that never decay."""

from typing import Mapping, Optional

import numpy as np

from growth.base import GrowthFunction
from growth.params import reject_params

FUNCTION_ID = "sin2_perturbed"
THIRD = 1.0 / 3.0


def _evaluate(t, s):
    return t / 3.0 + s / 3.0 + np.sin(t - s) ** 2 / 3.0


def _gradient(t, s):
    wave = np.sin(2.0 * (t - s)) / 3.0
    return THIRD + wave, THIRD - wave


def _hessian(t, s):
    curv = 2.0 * np.cos(2.0 * (t - s)) / 3.0
    return curv, -curv, curv


def _hessian_sup(lo: float, hi: float):
    # every box contains the diagonal, where cos(2(t - s)) = 1
    return 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0


def build(params: Optional[Mapping[str, float]] = None) -> GrowthFunction:
    reject_params(FUNCTION_ID, params, allowed=())
    return GrowthFunction(
        id=FUNCTION_ID,
        evaluator=_evaluate,
        gradient_fn=_gradient,
        hessian_fn=_hessian,
        cx=THIRD,
        cy=THIRD,
        theorem_compliant=False,
        symmetric=True,
        hessian_sup=_hessian_sup,
    )
