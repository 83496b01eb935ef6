import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.special
import scipy.stats

from core.errors import DegenerateError, DomainError
from core.models import DiscreteDistribution, GrowthRecord, GrowthTrace, SamplePool
from nodes.exact_distribution import MERGE_RTOL, cdf, moments

logger = logging.getLogger(__name__)

DEFAULT_BATCHES = 20
MIN_KS_VALUES = 100
EXACT_MONOTONE_SLACK = 1e-10
SAMPLED_MONOTONE_SIGMAS = 3.0
ORACLE_LEVEL = 1e-6


@dataclass
class MomentAccumulator:
    """Single-pass count, mean and central power sums M2..M4, mergeable."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    def update(self, x: float) -> None:
        n1 = self.count
        self.count += 1
        n = self.count
        delta = x - self.mean
        delta_n = delta / n
        delta_n2 = delta_n * delta_n
        term1 = delta * delta_n * n1
        self.mean += delta_n
        self.m4 += (
            term1 * delta_n2 * (n * n - 3 * n + 3)
            + 6 * delta_n2 * self.m2
            - 4 * delta_n * self.m3
        )
        self.m3 += term1 * delta_n * (n - 2) - 3 * delta_n * self.m2
        self.m2 += term1

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "MomentAccumulator":
        """Exact two-pass moments of one batch."""
        x = np.asarray(values, dtype=np.float64).ravel()
        if x.size == 0:
            return cls()
        mean = float(np.mean(x))
        d = x - mean
        d2 = d * d
        return cls(
            count=int(x.size),
            mean=mean,
            m2=float(np.sum(d2)),
            m3=float(np.sum(d2 * d)),
            m4=float(np.sum(d2 * d2)),
        )

    def update_batch(self, values: Iterable[float]) -> None:
        merged = self.merge(MomentAccumulator.from_values(values))
        self.count, self.mean = merged.count, merged.mean
        self.m2, self.m3, self.m4 = merged.m2, merged.m3, merged.m4

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if self.count == 0:
            return MomentAccumulator(**vars(other))
        if other.count == 0:
            return MomentAccumulator(**vars(self))

        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        delta2 = delta * delta
        m2 = self.m2 + other.m2 + delta2 * na * nb / n
        m3 = (
            self.m3
            + other.m3
            + delta2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        m4 = (
            self.m4
            + other.m4
            + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n
        )
        return MomentAccumulator(
            count=n, mean=self.mean + delta * nb / n, m2=m2, m3=m3, m4=m4
        )

    __add__ = merge

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def central_moment4(self) -> float:
        return self.m4 / self.count if self.count else 0.0


def record_from_distribution(dist: DiscreteDistribution) -> GrowthRecord:
    raw, central = moments(dist, 4)
    return GrowthRecord(
        n=dist.n,
        mean=raw[0],
        variance=central[0],
        m4=central[2],
        source="exact",
        size=dist.atom_count,
    )


def record_from_values(
    n: int, values: np.ndarray, source: str, batches: int = DEFAULT_BATCHES
) -> GrowthRecord:
    """Moments of a sample with batch-means standard errors over contiguous,
    equal-size, nonoverlapping batches."""
    x = np.asarray(values, dtype=np.float64)
    acc = MomentAccumulator.from_values(x)
    record = GrowthRecord(
        n=n,
        mean=acc.mean,
        variance=acc.variance,
        m4=acc.central_moment4,
        source=source,
        size=acc.count,
    )

    per_batch = x.size // batches if batches > 1 else 0
    if per_batch >= 2:
        blocks = x[: per_batch * batches].reshape(batches, per_batch)
        record.se_mean = float(np.std(blocks.mean(axis=1), ddof=1) / math.sqrt(batches))
        record.se_var = float(
            np.std(blocks.var(axis=1, ddof=1), ddof=1) / math.sqrt(batches)
        )
    return record


def trace_from_distributions(dists: Sequence[DiscreteDistribution]) -> GrowthTrace:
    trace = GrowthTrace(fn_id=dists[0].fn_id if dists else "")
    for dist in dists:
        trace.append(record_from_distribution(dist))
    return trace


def trace_from_pools(
    pools: Sequence[SamplePool], batches: int = DEFAULT_BATCHES
) -> GrowthTrace:
    trace = GrowthTrace(fn_id=pools[0].fn_id if pools else "")
    for pool in pools:
        trace.append(
            record_from_values(pool.n, pool.values, pool.lineage.method, batches)
        )
    return trace


def variance_growth_ratios(
    trace: GrowthTrace,
) -> List[Tuple[int, float, Optional[float]]]:
    """(n, Var[X_{n+1}] / Var[X_n], standard error) for consecutive generations.
    Sampled errors combine the two relative errors as if independent."""
    records = trace.records
    if len(records) < 2:
        raise DomainError("variance growth needs at least 2 generations")
    for r in records:
        if r.variance <= 0:
            raise DegenerateError(f"zero variance at n={r.n}; growth ratio undefined")

    out = []
    for prev, cur in zip(records, records[1:]):
        ratio = cur.variance / prev.variance
        se = None
        if prev.se_var is not None or cur.se_var is not None:
            rel = ((prev.se_var or 0.0) / prev.variance) ** 2 + (
                (cur.se_var or 0.0) / cur.variance
            ) ** 2
            se = ratio * math.sqrt(rel)
        out.append((prev.n, ratio, se))
    return out


def log_variance_slope(trace: GrowthTrace) -> float:
    """exp of the least-squares slope of log Var[X_n] against n."""
    ns = np.array([r.n for r in trace.records if r.variance > 0], dtype=np.float64)
    logs = np.array([math.log(r.variance) for r in trace.records if r.variance > 0])
    if ns.size < 2:
        raise DegenerateError("need two generations with positive variance")
    return float(math.exp(scipy.stats.linregress(ns, logs).slope))


def mean_growth(
    trace: GrowthTrace, cx: float, cy: float, concave: bool = False
) -> Tuple[List[Tuple[int, float, Optional[float]]], List[int]]:
    """Normalized means E[X_n] / (2 + cx + cy)^n, plus the generations where a
    concave f breaks the nonincreasing (Jensen) direction."""
    if not trace.records:
        raise DomainError("mean growth needs at least 1 generation")
    base = 2.0 + cx + cy
    points = []
    for r in trace.records:
        scale = base**r.n
        se = None if r.se_mean is None else r.se_mean / scale
        points.append((r.n, r.mean / scale, se))

    violations: List[int] = []
    if concave:
        for (_, prev, prev_se), (n, cur, cur_se) in zip(points, points[1:]):
            slack = EXACT_MONOTONE_SLACK * max(1.0, abs(prev))
            if prev_se is not None or cur_se is not None:
                spread = math.hypot(prev_se or 0.0, cur_se or 0.0)
                slack += SAMPLED_MONOTONE_SIGMAS * spread
            if cur > prev + slack:
                violations.append(n)
    if violations:
        logger.warning("normalized mean increases at n=%s", violations)
    return points, violations


def standardize(values: np.ndarray, mean: float, variance: float) -> np.ndarray:
    if not variance > 0:
        raise DegenerateError(f"cannot standardize with variance {variance!r}")
    return (np.asarray(values, dtype=np.float64) - mean) / math.sqrt(variance)


def self_standardize(values: np.ndarray) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    return standardize(x, float(np.mean(x)), float(np.var(x)))


def normal_ks_distance(values: np.ndarray) -> float:
    """Kolmogorov distance between the empirical CDF and the standard normal."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < MIN_KS_VALUES:
        raise DomainError(
            f"KS distance needs at least {MIN_KS_VALUES} values, got {x.size}"
        )
    return float(scipy.stats.kstest(x, scipy.special.ndtr).statistic)


def _ecdf(sorted_values: np.ndarray, x: np.ndarray, side: str) -> np.ndarray:
    return np.searchsorted(sorted_values, x, side=side) / sorted_values.size


def _law_cdf(dist: DiscreteDistribution, x: np.ndarray, left: bool) -> np.ndarray:
    if not left:
        return cdf(dist, x)
    cum = np.cumsum(dist.probs)
    pos = np.searchsorted(dist.support, x, side="left")
    return np.where(pos > 0, cum[np.maximum(pos - 1, 0)], 0.0)


def law_distance(values: np.ndarray, dist: DiscreteDistribution) -> float:
    """Kolmogorov distance from the empirical law of `values` to the law that
    `dist` stands for.

    A quantized law only pins each true atom to within quant_error_bound of its
    representative, so the comparison is made against the band
    [F(x - s), F(x + s)] and the result never overstates the true distance.
    s also absorbs the rounding gap between sampled and enumerated atoms.
    """
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if x.size == 0:
        raise DomainError("law distance needs at least one value")
    scale = max(abs(float(dist.support[-1])), 1.0)
    s = dist.quant_error_bound + MERGE_RTOL * scale
    points = np.concatenate((x, dist.support - s, dist.support + s))

    above = np.maximum(
        _ecdf(x, points, "right") - _law_cdf(dist, points + s, left=False),
        _ecdf(x, points, "left") - _law_cdf(dist, points + s, left=True),
    )
    below = np.maximum(
        _law_cdf(dist, points - s, left=False) - _ecdf(x, points, "right"),
        _law_cdf(dist, points - s, left=True) - _ecdf(x, points, "left"),
    )
    return float(max(0.0, above.max(), below.max()))


def law_distance_threshold(size: int, threshold: float) -> float:
    """The configured threshold, floored at the i.i.d. Kolmogorov critical value
    at level ORACLE_LEVEL for `size` draws."""
    critical = float(scipy.stats.kstwobign.isf(ORACLE_LEVEL)) / math.sqrt(size)
    return max(threshold, critical)


def fourth_ratio_trace(trace: GrowthTrace) -> List[Tuple[int, float]]:
    """E[(X - X')^4] / sigma^4 per generation. Sampled records carry an unbiased
    variance next to a plug-in m4, so sigma^2 is put back on the plug-in scale."""
    out = []
    for r in trace.records:
        var = r.variance
        if r.source != "exact" and r.size > 1:
            var = var * (r.size - 1) / r.size
        var2 = var * var
        out.append((r.n, 0.0 if var2 == 0 else (2.0 * r.m4 + 6.0 * var2) / var2))
    return out


def plot_data(trace: GrowthTrace, cx: float, cy: float) -> Dict[str, List[List[float]]]:
    points, _ = mean_growth(trace, cx, cy)
    return {
        "log_variance": [
            [r.n, math.log(r.variance)] for r in trace.records if r.variance > 0
        ],
        "normalized_mean": [[n, value] for n, value, _ in points],
    }
