"""Counter-based random streams.

Every draw is a pure function of (master seed, stream name, generation, global
index): a Philox4x64 key is derived from the first three, and the global index
selects the counter block and the lane inside it. Any partition of the index range
across workers therefore reproduces the same numbers.
"""

import zlib
from typing import List, Tuple

import numpy as np

LANES = 4  # uint64 outputs per Philox counter block
MAX_SEED = 2**64 - 1
_UNIT = 2.0**-53


def check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream_code(stream: str) -> int:
    return zlib.crc32(stream.encode("utf-8"))


def derive_key(master_seed: int, stream: str, generation: int = 0) -> np.ndarray:
    seq = np.random.SeedSequence(
        entropy=check_seed(master_seed),
        spawn_key=(stream_code(stream), int(generation)),
    )
    return seq.generate_state(2, dtype=np.uint64)


def raw_block(key: np.ndarray, start: int, count: int) -> np.ndarray:
    """uint64 words for global indices [start, start + count)."""
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    block, lane = divmod(int(start), LANES)
    bit_gen = np.random.Philox(counter=block, key=key)
    return bit_gen.random_raw(count + lane)[lane:]


def uniform_block(key: np.ndarray, start: int, count: int) -> np.ndarray:
    raw = raw_block(key, start, count)
    return (raw >> np.uint64(11)).astype(np.float64) * _UNIT


def index_block(key: np.ndarray, start: int, count: int, size: int) -> np.ndarray:
    idx = np.floor(uniform_block(key, start, count) * size).astype(np.int64)
    np.minimum(idx, size - 1, out=idx)
    return idx


def bit_block(key: np.ndarray, start: int, count: int) -> np.ndarray:
    return (raw_block(key, start, count) >> np.uint64(63)).astype(np.int64)


def generator(master_seed: int, stream: str) -> np.random.Generator:
    """Sequential generator for uses that need distributions (normals, log-uniforms)
    and do not need worker-count independence."""
    return np.random.Generator(np.random.Philox(key=derive_key(master_seed, stream)))


def partition(total: int, workers: int, min_chunk: int = 1) -> List[Tuple[int, int]]:
    workers = max(1, int(workers))
    if total <= 0:
        return []
    size = max(min_chunk, -(-total // workers))
    return [(lo, min(total, lo + size)) for lo in range(0, total, size)]
