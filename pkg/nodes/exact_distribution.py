import logging
import math
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DomainError, SupportExplosionError
from core.models import FAIL, PASS, DiscreteDistribution, VerificationReport
from growth.base import GrowthFunction, eval_f
from nodes.sampler import reduce_leaves

logger = logging.getLogger(__name__)

DEFAULT_ATOM_CAP = 10**7
DEFAULT_DELTA0 = 1e-3
EXACT_MAX_GENERATION = 2
MERGE_RTOL = 1e-12
BIN_SPLIT = 6  # three binning passes per step, each of width delta / 6
PAIR_CHUNK = 1 << 22
COMPACT_AT = 4 * PAIR_CHUNK
BINNED_WORK_FACTOR = 100  # binned steps may visit up to cap * 100 pairs
DIRECT_PAIR_LIMIT = 4096
IDENTITY_RTOL = 1e-13
MAX_ENUMERATION_DEPTH = 2

PairOp = Callable[[np.ndarray, np.ndarray], np.ndarray]


def x0_distribution(fn_id: str = "") -> DiscreteDistribution:
    return DiscreteDistribution(
        support=np.array([1.0, 2.0]),
        probs=np.array([0.5, 0.5]),
        n=0,
        quant_error_bound=0.0,
        fn_id=fn_id,
    )


def degenerate_distribution(
    value: float, n: int = 0, fn_id: str = ""
) -> DiscreteDistribution:
    return DiscreteDistribution(
        support=np.array([float(value)]), probs=np.array([1.0]), n=n, fn_id=fn_id
    )


def _normalized(probs: np.ndarray) -> np.ndarray:
    return probs / math.fsum(probs.tolist())


def merge_atoms(
    values: np.ndarray, probs: np.ndarray, tol: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Sorts atoms and merges runs whose consecutive gaps are <= tol. A merged atom
    sits at the probability-weighted mean of its run; singletons keep their value."""
    values = np.asarray(values, dtype=np.float64).ravel()
    probs = np.asarray(probs, dtype=np.float64).ravel()
    order = np.argsort(values, kind="stable")
    v, p = values[order], probs[order]
    if v.size == 0:
        return v, p

    starts = np.concatenate(([0], np.flatnonzero(np.diff(v) > tol) + 1))
    anchor = np.repeat(v[starts], np.diff(np.append(starts, v.size)))
    mass = np.add.reduceat(p, starts)
    shift = np.add.reduceat(p * (v - anchor), starts)
    keep = mass > 0
    return (v[starts] + shift / mass)[keep], mass[keep]


class _BinAccumulator:
    """Sparse accumulation of (value, prob) atoms on a fixed grid of width w."""

    def __init__(self, width: float) -> None:
        self.width = width
        self._idx: List[np.ndarray] = []
        self._mass: List[np.ndarray] = []
        self._moment: List[np.ndarray] = []

    def _collapse(self, idx, mass, moment):
        keys, inverse = np.unique(idx, return_inverse=True)
        return (
            keys,
            np.bincount(inverse, weights=mass, minlength=keys.size),
            np.bincount(inverse, weights=moment, minlength=keys.size),
        )

    def add(self, values: np.ndarray, probs: np.ndarray) -> None:
        idx = np.floor(values / self.width).astype(np.int64)
        offset = values - idx * self.width
        keys, mass, moment = self._collapse(idx, probs, probs * offset)
        self._idx.append(keys)
        self._mass.append(mass)
        self._moment.append(moment)
        if sum(k.size for k in self._idx) > COMPACT_AT:
            self._compact()

    def _compact(self) -> None:
        keys, mass, moment = self._collapse(
            np.concatenate(self._idx),
            np.concatenate(self._mass),
            np.concatenate(self._moment),
        )
        self._idx, self._mass, self._moment = [keys], [mass], [moment]

    def result(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self._idx:
            return np.empty(0), np.empty(0)
        self._compact()
        keys, mass, moment = self._idx[0], self._mass[0], self._moment[0]
        keep = mass > 0
        reps = keys[keep] * self.width + moment[keep] / mass[keep]
        return reps, mass[keep]


def _pairwise_binned(
    u: np.ndarray,
    pu: np.ndarray,
    w: np.ndarray,
    pw: np.ndarray,
    op: PairOp,
    width: float,
) -> Tuple[np.ndarray, np.ndarray]:
    acc = _BinAccumulator(width)
    rows = max(1, PAIR_CHUNK // max(1, w.size))
    for lo in range(0, u.size, rows):
        hi = min(u.size, lo + rows)
        vals = op(u[lo:hi, None], w[None, :]).ravel()
        prob = (pu[lo:hi, None] * pw[None, :]).ravel()
        acc.add(vals, prob)
    return acc.result()


def _pairwise_exact(
    u: np.ndarray,
    pu: np.ndarray,
    w: np.ndarray,
    pw: np.ndarray,
    op: PairOp,
    tol: float,
) -> Tuple[np.ndarray, np.ndarray]:
    vals = op(u[:, None], w[None, :]).ravel()
    prob = (pu[:, None] * pw[None, :]).ravel()
    return merge_atoms(vals, prob, tol)


def _ensure_cap(pairs: int, cap: int, what: str, unit: str = "atoms") -> None:
    if pairs > cap:
        raise SupportExplosionError(
            f"{what} would enumerate {pairs:,} {unit}, above the cap of {cap:,}; "
            "set a coarser quantization width (--delta0) or raise the atom cap"
        )


def exact_next(
    fn: GrowthFunction,
    dist: DiscreteDistribution,
    delta: float = 0.0,
    cap: int = DEFAULT_ATOM_CAP,
    delta_policy: Optional[str] = None,
) -> DiscreteDistribution:
    """Law of A + B + f(C, D) for A, B, C, D i.i.d. ~ dist.

    With delta > 0 the A+B law, the f(C, D) law and their sum are each binned on a
    grid of width delta/6, so one step moves any atom by less than delta/2 and
    quant_error_bound grows as (2 + cx + cy) * old + delta / 2.
    """
    if delta < 0:
        raise DomainError(f"quantization width must be >= 0, got {delta}")

    gen = dist.n + 1
    scale = fn.growth_base**gen
    v, p = dist.support, dist.probs

    def f_op(a, b):
        return eval_f(fn, a, b)

    if delta == 0:
        tol = MERGE_RTOL * scale
        _ensure_cap(v.size * v.size, cap, f"generation {gen} pair laws")
        sums = _pairwise_exact(v, p, v, p, np.add, tol)
        fvals = _pairwise_exact(v, p, v, p, f_op, tol)
        _ensure_cap(sums[0].size * fvals[0].size, cap, f"generation {gen} convolution")
        support, probs = _pairwise_exact(
            sums[0], sums[1], fvals[0], fvals[1], np.add, tol
        )
        bound = 0.0
    else:
        width = delta / BIN_SPLIT
        work = cap * BINNED_WORK_FACTOR
        _ensure_cap(v.size * v.size, work, f"generation {gen} pair laws", "pairs")
        sums = _pairwise_binned(v, p, v, p, np.add, width)
        fvals = _pairwise_binned(v, p, v, p, f_op, width)
        _ensure_cap(
            sums[0].size * fvals[0].size,
            work,
            f"generation {gen} binned convolution",
            "pairs",
        )
        support, probs = _pairwise_binned(
            sums[0], sums[1], fvals[0], fvals[1], np.add, width
        )
        bound = fn.growth_base * dist.quant_error_bound + delta / 2.0

    logger.debug(
        "generation %d: %d atoms (A+B %d, f %d, delta=%g)",
        gen,
        support.size,
        sums[0].size,
        fvals[0].size,
        delta,
    )
    if delta_policy is None:
        delta_policy = dist.delta_policy if delta == 0 else f"absolute:{delta:g}"
    return DiscreteDistribution(
        support=support,
        probs=_normalized(probs),
        n=gen,
        quant_error_bound=bound,
        fn_id=fn.id,
        delta_policy=delta_policy,
    )


def generation_delta(
    fn: GrowthFunction,
    gen: int,
    delta0: Optional[float] = None,
    exact_max: int = EXACT_MAX_GENERATION,
) -> float:
    """Quantization width used to build generation `gen`: none up to exact_max,
    relative width DEFAULT_DELTA0 beyond; an explicit delta0 applies to every step."""
    if delta0 is None:
        if gen <= exact_max:
            return 0.0
        delta0 = DEFAULT_DELTA0
    return delta0 * fn.growth_base**gen


def policy_label(delta0: Optional[float], exact_max: int = EXACT_MAX_GENERATION) -> str:
    if delta0 is None:
        return f"exact<= {exact_max}, relative:{DEFAULT_DELTA0:g}"
    if delta0 == 0:
        return "exact"
    return f"relative:{delta0:g}"


def iterate_distributions(
    fn: GrowthFunction,
    n: int,
    delta0: Optional[float] = None,
    exact_max: int = EXACT_MAX_GENERATION,
    cap: int = DEFAULT_ATOM_CAP,
) -> Iterator[DiscreteDistribution]:
    label = policy_label(delta0, exact_max)
    dist = x0_distribution(fn.id)
    yield dist
    while dist.n < n:
        delta = generation_delta(fn, dist.n + 1, delta0, exact_max)
        dist = exact_next(fn, dist, delta, cap=cap, delta_policy=label)
        yield dist


def distribution_sequence(
    fn: GrowthFunction,
    n: int,
    delta0: Optional[float] = None,
    exact_max: int = EXACT_MAX_GENERATION,
    cap: int = DEFAULT_ATOM_CAP,
) -> List[DiscreteDistribution]:
    return list(iterate_distributions(fn, n, delta0, exact_max, cap))


def moments(
    dist: DiscreteDistribution, k: int = 4
) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """(raw moments 1..k, central moments 2..k), each by compensated summation."""
    if not 1 <= k <= 4:
        raise DomainError(f"moment order must be in 1..4, got {k}")
    v, p = dist.support, dist.probs
    raw = tuple(math.fsum((p * v**j).tolist()) for j in range(1, k + 1))
    centred = v - raw[0]
    central = tuple(math.fsum((p * centred**j).tolist()) for j in range(2, k + 1))
    return raw, central


def mean(dist: DiscreteDistribution) -> float:
    return moments(dist, 1)[0][0]


def variance(dist: DiscreteDistribution) -> float:
    return moments(dist, 2)[1][0]


def cdf(dist: DiscreteDistribution, x: np.ndarray) -> np.ndarray:
    cum = np.cumsum(dist.probs)
    pos = np.searchsorted(dist.support, np.asarray(x, dtype=np.float64), side="right")
    return np.where(pos > 0, cum[np.maximum(pos - 1, 0)], 0.0)


def f_law(
    fn: GrowthFunction, dist: DiscreteDistribution
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact law of f(C, D) for C, D i.i.d. ~ dist."""
    v, p = dist.support, dist.probs
    tol = MERGE_RTOL * fn.growth_base ** (dist.n + 1)
    return _pairwise_exact(v, p, v, p, lambda a, b: eval_f(fn, a, b), tol)


def squared_difference_mean(values: np.ndarray, probs: np.ndarray) -> float:
    """E[(F - F')^2] for F, F' i.i.d. with the given law: a double sum for small
    laws, 2 Var F beyond DIRECT_PAIR_LIMIT atoms."""
    if values.size > DIRECT_PAIR_LIMIT:
        mu = math.fsum((probs * values).tolist())
        centred = values - mu
        return 2.0 * math.fsum((probs * centred * centred).tolist())
    parts: List[float] = []
    rows = max(1, PAIR_CHUNK // max(1, values.size))
    for lo in range(0, values.size, rows):
        hi = min(values.size, lo + rows)
        diff = values[lo:hi, None] - values[None, :]
        weight = probs[lo:hi, None] * probs[None, :]
        parts.extend(np.sum(weight * diff * diff, axis=1).tolist())
    return math.fsum(parts)


def check_variance_identity(
    fn: GrowthFunction,
    dist_n: DiscreteDistribution,
    dist_next: DiscreteDistribution,
    rtol: float = IDENTITY_RTOL,
) -> VerificationReport:
    """Var X_{n+1} = 2 Var X_n + E[(F - F')^2] / 2 with F = f(C, D).

    dist_n must be exact. dist_next may be one binned step away from it: the
    conditional-mean bins can only lower its variance, by at most bound^2 / 12,
    so the recursion is then checked as a one-sided band.
    """
    if not dist_n.is_exact:
        raise DomainError("the variance identity needs an exact law for X_n")
    if dist_next.n != dist_n.n + 1:
        raise DomainError(
            "laws must be consecutive generations, "
            f"got n={dist_n.n} and n={dist_next.n}"
        )

    direct = variance(dist_next)
    fv, fp = f_law(fn, dist_n)
    mixed = squared_difference_mean(fv, fp)
    recursed = 2.0 * variance(dist_n) + 0.5 * mixed
    scale = max(abs(direct), abs(recursed))
    residual = 0.0 if scale == 0 else abs(direct - recursed) / scale
    allowance = dist_next.quant_error_bound**2 / 12.0
    if dist_next.is_exact:
        holds = residual <= rtol
    else:
        gap = recursed - direct
        holds = -rtol * scale <= gap <= allowance + rtol * scale

    return VerificationReport(
        check="variance_identity",
        fn=fn.id,
        params={"n": dist_n.n, "rtol": rtol, "quantized": not dist_next.is_exact},
        verdict=PASS if holds else FAIL,
        measurements={
            "var_next_direct": direct,
            "var_next_recursion": recursed,
            "mixed_term": mixed,
            "relative_residual": residual,
            "quantization_allowance": allowance,
        },
        counterexamples=[]
        if holds
        else [{"n": dist_n.n, "direct": direct, "recursion": recursed}],
        threshold_provenance={"rtol": "calibrated"},
    )


def difference_fourth_moment(dist: DiscreteDistribution) -> Tuple[float, float, float]:
    """(E[(X - X')^4], E[(X - mu)^4], Var[X]) via 2 mu4 + 6 sigma^4."""
    _, central = moments(dist, 4)
    var, m4 = central[0], central[2]
    return 2.0 * m4 + 6.0 * var * var, m4, var


def fourth_moment_diagnostic(
    dists: Sequence[DiscreteDistribution], band: float = 10.0
) -> VerificationReport:
    if len(dists) < 3:
        raise DomainError(
            f"fourth-moment diagnostic needs >= 3 generations, got {len(dists)}"
        )

    ratios: List[Tuple[int, float]] = []
    sandwich_failures: List[dict] = []
    for dist in dists:
        e4, m4, var = difference_fourth_moment(dist)
        slack = 1e-12 * max(1.0, abs(e4))
        if not (2.0 * m4 <= e4 + slack and e4 <= 16.0 * m4 + slack):
            sandwich_failures.append({"n": dist.n, "e4": e4, "m4": m4})
        ratios.append((dist.n, 0.0 if var == 0 else e4 / (var * var)))

    reference = ratios[1][1]
    values = [r for _, r in ratios]
    bounded = reference == 0 or (
        max(values) <= band * reference and min(values) >= reference / band
    )

    return VerificationReport(
        check="fourth_moment",
        fn=dists[0].fn_id,
        params={"generations": [d.n for d in dists], "band": band},
        verdict=PASS if bounded and not sandwich_failures else FAIL,
        measurements={
            "ratios": [[n, r] for n, r in ratios],
            "sandwich_holds": not sandwich_failures,
            "bounded": bounded,
        },
        counterexamples=sandwich_failures,
        threshold_provenance={"sandwich": "published", "band": "calibrated"},
    )


def leaf_enumeration(fn: GrowthFunction, n: int) -> DiscreteDistribution:
    """Law of X_n by enumerating all 2^(4^n) leaf configurations (n <= 2)."""
    if n > MAX_ENUMERATION_DEPTH:
        raise SupportExplosionError(
            f"leaf enumeration at n={n} needs 2^{4**n} configurations"
        )
    width = 4**n
    configs = np.arange(2**width, dtype=np.int64)[:, None]
    leaves = 1.0 + ((configs >> np.arange(width)) & 1).astype(np.float64)
    values = reduce_leaves(fn, leaves)
    probs = np.full(values.size, 2.0**-width)
    support, mass = merge_atoms(values, probs, MERGE_RTOL * fn.growth_base**n)
    return DiscreteDistribution(
        support=support, probs=_normalized(mass), n=n, fn_id=fn.id
    )
