"""f(t, s) = c_p * (t^p + s^p)^(1/p)."""

import math
from typing import Mapping, Optional

import numpy as np

from growth.base import GrowthFunction, claims_condition2, ratio_lipschitz_sq
from growth.params import read_param, reject_params

FUNCTION_ID = "power_mean"
DEFAULT_P = 2.0


def default_c(p: float) -> float:
    """Coefficient that puts cx + cy at 1/2, the harmonic slope."""
    return 2.0 ** (-1.0 - 1.0 / p)


def _max_power_log(lo: float, hi: float, exponent: float) -> float:
    return max(exponent * math.log(lo), exponent * math.log(hi))


def build(params: Optional[Mapping[str, float]] = None) -> GrowthFunction:
    reject_params(FUNCTION_ID, params, allowed=("p", "c"))
    p = read_param(params, "p", DEFAULT_P, low=0.0)
    c = read_param(params, "c", default_c(p), low=0.0)

    def norm(t, s):
        big = np.maximum(t, s)
        small = np.minimum(t, s)
        return big * (1.0 + (small / big) ** p) ** (1.0 / p)

    def evaluate(t, s):
        return c * norm(t, s)

    def gradient(t, s):
        n = norm(t, s)
        return c * (t / n) ** (p - 1.0), c * (s / n) ** (p - 1.0)

    def hessian(t, s):
        n = norm(t, s)
        x, y = t / n, s / n
        k = c * (p - 1.0) / n
        return k * x ** (p - 2.0) * y**p, -k * (x * y) ** (p - 1.0), k * y ** (
            p - 2.0
        ) * x**p

    def hessian_sup(lo: float, hi: float):
        if p == 1.0:
            return 0.0, 0.0, 0.0
        # product of per-factor maxima over the box, u = t^p + s^p in [2 lo^p, 2 hi^p]
        head = math.log(c * abs(p - 1.0))
        u_term = max(
            (1.0 / p - 2.0) * (math.log(2.0) + p * math.log(lo)),
            (1.0 / p - 2.0) * (math.log(2.0) + p * math.log(hi)),
        )
        pure = math.exp(
            head
            + _max_power_log(lo, hi, p - 2.0)
            + _max_power_log(lo, hi, p)
            + u_term
        )
        mixed = math.exp(head + 2.0 * _max_power_log(lo, hi, p - 1.0) + u_term)
        return pure, mixed, pure

    cx = cy = c * 2.0 ** (1.0 / p - 1.0)
    lipschitz_sq = ratio_lipschitz_sq(gradient)
    return GrowthFunction(
        id=FUNCTION_ID,
        evaluator=evaluate,
        gradient_fn=gradient,
        hessian_fn=hessian,
        cx=cx,
        cy=cy,
        params={"p": p, "c": c},
        theorem_compliant=claims_condition2(lipschitz_sq, cx, cy),
        symmetric=True,
        concave=p <= 1.0,
        convex=p >= 1.0,
        hessian_sup=hessian_sup,
        lipschitz_sq=lipschitz_sq,
    )
