import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Tuple, Union

import numpy as np

from core.errors import DomainError, RegistrationError

logger = logging.getLogger(__name__)

DOMAIN_FLOOR = 1.0
CLAMP_SLACK = 1e-9
DIAGONAL_CHECK_POINTS = (10.0, 1e3, 1e6)

ArrayLike = Union[float, np.ndarray]
Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]
GradientFn = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]
# (f_tt, f_ts, f_ss)
HessianFn = Callable[
    [np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]
]
# sup |f_tt|, sup |f_ts|, sup |f_ss| over [lo, hi]^2
HessianSup = Callable[[float, float], Tuple[float, float, float]]


@dataclass(frozen=True)
class GrowthFunction:
    id: str
    evaluator: Evaluator
    gradient_fn: GradientFn
    hessian_fn: HessianFn
    cx: float
    cy: float
    params: Mapping[str, float] = field(default_factory=dict)
    theorem_compliant: bool = False
    symmetric: bool = False
    concave: bool = False
    convex: bool = False
    numeric_derivatives: bool = False
    hessian_sup: Optional[HessianSup] = None
    # sup of |grad f|^2 over ratio-2 boxes, for degree-1 homogeneous f
    lipschitz_sq: Optional[float] = None

    @property
    def slope(self) -> float:
        return self.cx + self.cy

    @property
    def growth_base(self) -> float:
        return 2.0 + self.cx + self.cy

    def domain(self, n: int) -> Tuple[float, float]:
        lo = self.growth_base**n
        return lo, 2.0 * lo


_clamp_lock = threading.Lock()
_clamp_total = 0


def clamp_count() -> int:
    return _clamp_total


def _guard(x: ArrayLike, name: str) -> np.ndarray:
    global _clamp_total

    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        return arr
    low = float(arr.min())
    if low >= DOMAIN_FLOOR:
        return arr
    if low < DOMAIN_FLOOR - CLAMP_SLACK or np.isnan(low):
        raise DomainError(f"{name}={low!r} is outside the domain [1, inf)")

    clamped = int(np.count_nonzero(arr < DOMAIN_FLOOR))
    with _clamp_lock:
        _clamp_total += clamped
    logger.warning("clamped %d value(s) of %s up to the domain floor", clamped, name)
    return np.maximum(arr, DOMAIN_FLOOR)


def _unwrap(value: np.ndarray, scalar: bool):
    return float(value) if scalar else value


def _is_scalar(t: ArrayLike, s: ArrayLike) -> bool:
    return np.ndim(t) == 0 and np.ndim(s) == 0


def eval_f(fn: GrowthFunction, t: ArrayLike, s: ArrayLike) -> ArrayLike:
    scalar = _is_scalar(t, s)
    tt = _guard(t, "t")
    ss = _guard(s, "s")
    return _unwrap(np.asarray(fn.evaluator(tt, ss), dtype=np.float64), scalar)


def gradient(fn: GrowthFunction, t: ArrayLike, s: ArrayLike):
    scalar = _is_scalar(t, s)
    tt = _guard(t, "t")
    ss = _guard(s, "s")
    gt, gs = fn.gradient_fn(tt, ss)
    return _unwrap(np.asarray(gt, dtype=np.float64), scalar), _unwrap(
        np.asarray(gs, dtype=np.float64), scalar
    )


def hessian(fn: GrowthFunction, t: ArrayLike, s: ArrayLike) -> np.ndarray:
    """Second partials as a symmetric 2x2 matrix (stacked to (..., 2, 2) for arrays)."""
    tt = _guard(t, "t")
    ss = _guard(s, "s")
    f_tt, f_ts, f_ss = fn.hessian_fn(tt, ss)
    f_tt, f_ts, f_ss = np.broadcast_arrays(
        np.asarray(f_tt, dtype=np.float64),
        np.asarray(f_ts, dtype=np.float64),
        np.asarray(f_ss, dtype=np.float64),
    )
    row0 = np.stack([f_tt, f_ts], axis=-1)
    row1 = np.stack([f_ts, f_ss], axis=-1)
    return np.stack([row0, row1], axis=-2)


def diagonal_constants(fn: GrowthFunction) -> Tuple[float, float]:
    return fn.cx, fn.cy


def ratio_lipschitz_sq(gradient_fn: GradientFn, points: int = 4001) -> float:
    """sup of |grad f(1, r)|^2 for r in [1/2, 2]; equals the sup over any ratio-2 box
    when f is homogeneous of degree one."""
    r = np.geomspace(0.5, 2.0, points)
    gt, gs = gradient_fn(np.ones_like(r), r)
    return float(np.max(np.asarray(gt) ** 2 + np.asarray(gs) ** 2))


def claims_condition2(lipschitz_sq: Optional[float], cx: float, cy: float) -> bool:
    if lipschitz_sq is None:
        return False
    return 2.0 * lipschitz_sq < cx + cy


def check_diagonal_constants(
    fn: GrowthFunction,
    points: Tuple[float, ...] = DIAGONAL_CHECK_POINTS,
    tol: float = 1e-6,
) -> None:
    t = np.asarray(points, dtype=np.float64)
    gt, gs = fn.gradient_fn(t, t)
    dev = max(
        float(np.max(np.abs(np.asarray(gt) - fn.cx))),
        float(np.max(np.abs(np.asarray(gs) - fn.cy))),
    )
    if dev > tol:
        raise RegistrationError(
            f"{fn.id}: gradient on the diagonal deviates from "
            f"(cx, cy)=({fn.cx}, {fn.cy}) by {dev:.3g}"
        )


def scale(fn: GrowthFunction, eps: float) -> GrowthFunction:
    if not eps > 0:
        raise DomainError(f"scale factor must be positive, got {eps!r}")

    base_eval, base_grad, base_hess = fn.evaluator, fn.gradient_fn, fn.hessian_fn
    base_sup = fn.hessian_sup

    def evaluator(t, s):
        return eps * base_eval(t, s)

    def gradient_fn(t, s):
        gt, gs = base_grad(t, s)
        return eps * gt, eps * gs

    def hessian_fn(t, s):
        a, b, c = base_hess(t, s)
        return eps * a, eps * b, eps * c

    hessian_sup = None
    if base_sup is not None:

        def hessian_sup(lo, hi):
            return tuple(eps * v for v in base_sup(lo, hi))

    lipschitz_sq = None if fn.lipschitz_sq is None else eps * eps * fn.lipschitz_sq
    cx, cy = eps * fn.cx, eps * fn.cy
    compliant = (
        claims_condition2(lipschitz_sq, cx, cy)
        if lipschitz_sq is not None
        else fn.theorem_compliant
    )

    return GrowthFunction(
        id=f"{fn.id}*{eps:g}",
        evaluator=evaluator,
        gradient_fn=gradient_fn,
        hessian_fn=hessian_fn,
        cx=cx,
        cy=cy,
        params={**fn.params, "eps": eps},
        theorem_compliant=compliant,
        symmetric=fn.symmetric,
        concave=fn.concave,
        convex=fn.convex,
        numeric_derivatives=fn.numeric_derivatives,
        hessian_sup=hessian_sup,
        lipschitz_sq=lipschitz_sq,
    )


def numeric_function(
    fn_id: str,
    evaluator: Evaluator,
    cx: float,
    cy: float,
    *,
    gradient_fn: Optional[GradientFn] = None,
    hessian_fn: Optional[HessianFn] = None,
    hessian_sup: Optional[HessianSup] = None,
    theorem_compliant: bool = False,
    symmetric: bool = False,
    concave: bool = False,
    convex: bool = False,
) -> GrowthFunction:
    """User-supplied f; missing derivatives fall back to central differences and the
    function is flagged as using numeric derivatives."""
    numeric = gradient_fn is None or hessian_fn is None

    if gradient_fn is None:

        def gradient_fn(t, s):
            h = np.maximum(1.0, t) * 1e-6
            k = np.maximum(1.0, s) * 1e-6
            gt = (evaluator(t + h, s) - evaluator(t - h, s)) / (2 * h)
            gs = (evaluator(t, s + k) - evaluator(t, s - k)) / (2 * k)
            return gt, gs

    if hessian_fn is None:

        def hessian_fn(t, s):
            h = np.maximum(1.0, t) * 1e-4
            k = np.maximum(1.0, s) * 1e-4
            f0 = evaluator(t, s)
            f_tt = (evaluator(t + h, s) - 2 * f0 + evaluator(t - h, s)) / (h * h)
            f_ss = (evaluator(t, s + k) - 2 * f0 + evaluator(t, s - k)) / (k * k)
            f_ts = (
                evaluator(t + h, s + k)
                - evaluator(t + h, s - k)
                - evaluator(t - h, s + k)
                + evaluator(t - h, s - k)
            ) / (4 * h * k)
            return f_tt, f_ts, f_ss

    return GrowthFunction(
        id=fn_id,
        evaluator=evaluator,
        gradient_fn=gradient_fn,
        hessian_fn=hessian_fn,
        cx=cx,
        cy=cy,
        theorem_compliant=theorem_compliant,
        symmetric=symmetric,
        concave=concave,
        convex=convex,
        numeric_derivatives=numeric,
        hessian_sup=hessian_sup,
    )
