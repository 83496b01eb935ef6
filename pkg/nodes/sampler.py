import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from core.errors import DepthLimitError, DomainError, EmptyPoolError
from core.models import FAIL, PASS, PoolLineage, SamplePool, VerificationReport
from growth.base import GrowthFunction, eval_f
from services.rng_service import bit_block, derive_key, index_block, partition

logger = logging.getLogger(__name__)

N_MAX_TREE = 12
MIN_POOL_SIZE = 4
RANGE_RTOL = 1e-9
LEAF_CHUNK = 1 << 22

STREAM_X0 = "x0"
STREAM_TREE = "tree"
STREAM_POOL = "pool"


def sample_x0(seed: int, count: int) -> np.ndarray:
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    return 1.0 + bit_block(derive_key(seed, STREAM_X0), 0, count).astype(np.float64)


def combine(fn: GrowthFunction, a, b, c, d):
    return a + b + eval_f(fn, c, d)


def reduce_leaves(fn: GrowthFunction, leaves: np.ndarray) -> np.ndarray:
    """Collapses the last axis (length 4^n, depth-first block order) one level at a
    time: each group of four is (left line, circle top, circle bottom, right line)."""
    x = np.asarray(leaves, dtype=np.float64)
    while x.shape[-1] > 1:
        q = x.reshape(x.shape[:-1] + (-1, 4))
        x = combine(fn, q[..., 0], q[..., 3], q[..., 1], q[..., 2])
    return x[..., 0]


def tree_leaves(seed: int, n: int, first_draw: int, count: int) -> np.ndarray:
    """X_0 leaves of draws [first_draw, first_draw + count), shape (count, 4^n)."""
    width = 4**n
    bits = bit_block(derive_key(seed, STREAM_TREE), first_draw * width, count * width)
    return (1.0 + bits.astype(np.float64)).reshape(count, width)


def _run_chunks(
    work: Callable[[int, int], np.ndarray],
    chunks: List[Tuple[int, int]],
    workers: int,
) -> np.ndarray:
    if not chunks:
        return np.empty(0, dtype=np.float64)
    if workers <= 1 or len(chunks) == 1:
        parts = [work(lo, hi) for lo, hi in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: work(*c), chunks))
    return np.concatenate(parts)


def _check_depth(n: int, n_max: int) -> None:
    if n < 0:
        raise DomainError(f"generation must be >= 0, got {n}")
    if n > n_max:
        raise DepthLimitError(
            f"tree sampling needs 4^{n} leaves per draw; n={n} exceeds "
            f"n_max_tree={n_max} (use the pool method)"
        )


def sample_tree(
    fn: GrowthFunction, n: int, seed: int, n_max: int = N_MAX_TREE
) -> float:
    _check_depth(n, n_max)
    return float(reduce_leaves(fn, tree_leaves(seed, n, 0, 1))[0])


def sample_tree_batch(
    fn: GrowthFunction,
    n: int,
    count: int,
    seed: int,
    workers: int = 1,
    n_max: int = N_MAX_TREE,
) -> np.ndarray:
    _check_depth(n, n_max)
    per_chunk = max(1, LEAF_CHUNK // 4**n)
    chunks = [(lo, min(count, lo + per_chunk)) for lo in range(0, count, per_chunk)]

    def work(lo: int, hi: int) -> np.ndarray:
        return reduce_leaves(fn, tree_leaves(seed, n, lo, hi - lo))

    return _run_chunks(work, chunks, workers)


def tree_pool(
    fn: GrowthFunction,
    n: int,
    count: int,
    seed: int,
    workers: int = 1,
    n_max: int = N_MAX_TREE,
) -> SamplePool:
    values = sample_tree_batch(fn, n, count, seed, workers=workers, n_max=n_max)
    return SamplePool(
        n=n,
        values=values,
        fn_id=fn.id,
        master_seed=seed,
        lineage=PoolLineage(
            method="tree", pool_size=count, generation_seeds=((n, STREAM_TREE),)
        ),
    )


def x0_pool(size: int, seed: int, fn_id: str = "") -> SamplePool:
    return SamplePool(
        n=0,
        values=sample_x0(seed, size),
        fn_id=fn_id,
        master_seed=seed,
        lineage=PoolLineage(
            method="pool", pool_size=size, generation_seeds=((0, STREAM_X0),)
        ),
    )


def constant_pool(value: float, size: int, n: int = 0, fn_id: str = "") -> SamplePool:
    return SamplePool(
        n=n,
        values=np.full(size, float(value)),
        fn_id=fn_id,
        master_seed=0,
        lineage=PoolLineage(method="pool", pool_size=size),
    )


def evolve_pool(
    fn: GrowthFunction,
    pool: SamplePool,
    out_size: int,
    seed: int,
    workers: int = 1,
) -> SamplePool:
    """One generation of pool resampling: output i draws four pool members with
    replacement at counters (i, 0..3) and combines them."""
    m = pool.size
    if m == 0:
        raise EmptyPoolError("cannot evolve an empty pool")
    if out_size < MIN_POOL_SIZE:
        raise DomainError(f"pool size must be >= {MIN_POOL_SIZE}, got {out_size}")

    generation = pool.n + 1
    key = derive_key(seed, STREAM_POOL, generation)
    values = pool.values

    def work(lo: int, hi: int) -> np.ndarray:
        idx = index_block(key, 4 * lo, 4 * (hi - lo), m).reshape(-1, 4)
        v = values[idx]
        return combine(fn, v[:, 0], v[:, 1], v[:, 2], v[:, 3])

    out = _run_chunks(work, partition(out_size, workers), workers)
    logger.debug(
        "evolved pool to n=%d (M=%d, workers=%d)", generation, out_size, workers
    )

    return SamplePool(
        n=generation,
        values=out,
        fn_id=fn.id,
        master_seed=seed,
        lineage=PoolLineage(
            method="pool",
            pool_size=out_size,
            generation_seeds=pool.lineage.generation_seeds
            + ((generation, STREAM_POOL),),
        ),
    )


def iterate_pools(
    fn: GrowthFunction,
    n: int,
    size: int,
    seed: int,
    workers: int = 1,
    initial: Optional[SamplePool] = None,
) -> Iterator[SamplePool]:
    pool = initial if initial is not None else x0_pool(size, seed, fn_id=fn.id)
    yield pool
    while pool.n < n:
        pool = evolve_pool(fn, pool, size, seed, workers=workers)
        yield pool


def run_pool(
    fn: GrowthFunction,
    n: int,
    size: int,
    seed: int,
    workers: int = 1,
    initial: Optional[SamplePool] = None,
) -> SamplePool:
    pool = None
    for pool in iterate_pools(fn, n, size, seed, workers=workers, initial=initial):
        pass
    return pool


def generation_range(n: int, cx: float, cy: float) -> Tuple[float, float]:
    lo = (2.0 + cx + cy) ** n
    return lo, 2.0 * lo


def range_check(
    pool: SamplePool, cx: float, cy: float, rtol: float = RANGE_RTOL
) -> VerificationReport:
    lo, hi = generation_range(pool.n, cx, cy)
    lo_tol, hi_tol = lo * (1.0 - rtol), hi * (1.0 + rtol)
    values = pool.values
    bad = np.flatnonzero((values < lo_tol) | (values > hi_tol))

    report = VerificationReport(
        check="range",
        fn=pool.fn_id,
        params={"n": pool.n, "pool_size": pool.size, "seed": pool.master_seed},
        verdict=PASS if bad.size == 0 else FAIL,
        measurements={
            "min": float(values.min()) if values.size else None,
            "max": float(values.max()) if values.size else None,
            "lower": lo,
            "upper": hi,
            "violations": int(bad.size),
        },
        threshold_provenance={"range": "published", "rtol": "calibrated"},
    )
    for i in bad[:10]:
        report.counterexamples.append(
            {"index": int(i), "value": float(values[i]), "seed": pool.master_seed}
        )
    return report
