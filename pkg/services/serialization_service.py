"""On-disk formats: binary pools with a JSON sidecar, distribution JSON/CSV, LCL
edge lists, resistance-vector CSV and growth traces."""

import csv
import json
import struct
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from core.errors import SerializationError
from core.models import (
    DiscreteDistribution,
    GrowthRecord,
    GrowthTrace,
    PoolLineage,
    ResistorNetwork,
    SamplePool,
)

PathLike = Union[str, Path]

POOL_MAGIC = b"LCLP"
POOL_VERSION = 1
_U16 = struct.Struct("<H")
_POOL_FIXED = struct.Struct("<IQQ")  # n, M, master_seed

TRACE_COLUMNS = ("n", "mean", "variance", "m4", "source", "size", "se_mean", "se_var")


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def _pack_text(text: str) -> bytes:
    raw = text.encode("utf-8")
    return _U16.pack(len(raw)) + raw


def _unpack_text(buf: bytes, offset: int) -> Tuple[str, int]:
    (length,) = _U16.unpack_from(buf, offset)
    offset += _U16.size
    return buf[offset : offset + length].decode("utf-8"), offset + length


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def pool_header(pool: SamplePool) -> Dict[str, Any]:
    return {
        "magic": POOL_MAGIC.decode("ascii"),
        "version": POOL_VERSION,
        "fn_id": pool.fn_id,
        "n": pool.n,
        "M": pool.size,
        "master_seed": pool.master_seed,
        "method": pool.lineage.method,
        "generation_seeds": [list(g) for g in pool.lineage.generation_seeds],
    }


def write_pool(pool: SamplePool, path: PathLike) -> Path:
    path = Path(path)
    _ensure_parent(path)
    header = (
        POOL_MAGIC
        + _U16.pack(POOL_VERSION)
        + _pack_text(pool.fn_id)
        + _POOL_FIXED.pack(pool.n, pool.size, pool.master_seed)
        + _pack_text(pool.lineage.method)
    )
    with path.open("wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(pool.values, dtype="<f8").tobytes())

    with sidecar_path(path).open("w", encoding="utf-8") as f:
        json.dump(pool_header(pool), f, indent=2, sort_keys=True)
    return path


def read_pool(path: PathLike) -> SamplePool:
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise SerializationError(f"cannot read pool {path}: {exc}") from exc

    try:
        if buf[:4] != POOL_MAGIC:
            raise SerializationError(f"{path} is not a pool file (bad magic)")
        (version,) = _U16.unpack_from(buf, 4)
        if version != POOL_VERSION:
            raise SerializationError(f"{path}: unsupported pool version {version}")
        fn_id, offset = _unpack_text(buf, 6)
        n, size, seed = _POOL_FIXED.unpack_from(buf, offset)
        method, offset = _unpack_text(buf, offset + _POOL_FIXED.size)
    except (struct.error, UnicodeDecodeError) as exc:
        raise SerializationError(f"{path}: truncated or corrupt header") from exc

    payload = buf[offset:]
    if len(payload) != 8 * size:
        raise SerializationError(
            f"{path}: header says {size} values but payload holds {len(payload) / 8:g}"
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)

    generation_seeds: Tuple[Tuple[int, str], ...] = ()
    sidecar = sidecar_path(path)
    if sidecar.is_file():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        generation_seeds = tuple(
            (int(g), str(s)) for g, s in meta.get("generation_seeds", [])
        )

    return SamplePool(
        n=n,
        values=values,
        fn_id=fn_id,
        master_seed=seed,
        lineage=PoolLineage(
            method=method, pool_size=size, generation_seeds=generation_seeds
        ),
    )


def distribution_to_dict(dist: DiscreteDistribution) -> Dict[str, Any]:
    return {
        "fn_id": dist.fn_id,
        "n": dist.n,
        "delta_policy": dist.delta_policy,
        "quant_error_bound": dist.quant_error_bound,
        "atoms": [[float(v), float(p)] for v, p in zip(dist.support, dist.probs)],
    }


def distribution_from_dict(data: Dict[str, Any]) -> DiscreteDistribution:
    try:
        atoms = np.asarray(data["atoms"], dtype=np.float64).reshape(-1, 2)
        return DiscreteDistribution(
            support=atoms[:, 0],
            probs=atoms[:, 1],
            n=int(data["n"]),
            quant_error_bound=float(data.get("quant_error_bound", 0.0)),
            fn_id=str(data.get("fn_id", "")),
            delta_policy=str(data.get("delta_policy", "exact")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"malformed distribution: {exc}") from exc


def write_distribution_json(dist: DiscreteDistribution, path: PathLike) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with path.open("w", encoding="utf-8") as f:
        json.dump(distribution_to_dict(dist), f, indent=2)
    return path


def read_distribution_json(path: PathLike) -> DiscreteDistribution:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SerializationError(f"cannot load distribution {path}: {exc}") from exc
    return distribution_from_dict(data)


def write_distribution_csv(dist: DiscreteDistribution, path: PathLike) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["value", "prob"])
        for v, p in zip(dist.support, dist.probs):
            writer.writerow([repr(float(v)), repr(float(p))])
    return path


def write_network(net: ResistorNetwork, path: PathLike) -> Path:
    path = Path(path)
    _ensure_parent(path)
    source, sink = net.terminals
    seed = "none" if net.seed is None else net.seed
    lines = [
        f"lcl n={net.depth} seed={seed} source={source} sink={sink} "
        f"nodes={net.node_count}"
    ]
    lines.extend(f"{u} {v} {r!r}" for u, v, r in net.edges)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_network(path: PathLike) -> ResistorNetwork:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SerializationError(f"cannot read network {path}: {exc}") from exc
    if not lines or not lines[0].startswith("lcl "):
        raise SerializationError(f"{path}: missing `lcl` header line")

    try:
        header = dict(item.split("=", 1) for item in lines[0].split()[1:])
        edges = []
        for line in lines[1:]:
            if not line.strip():
                continue
            u, v, r = line.split()
            edges.append((int(u), int(v), float(r)))
        return ResistorNetwork(
            node_count=int(header["nodes"]),
            edges=tuple(edges),
            terminals=(int(header["source"]), int(header["sink"])),
            depth=int(header["n"]),
            seed=None if header["seed"] == "none" else int(header["seed"]),
        )
    except (KeyError, ValueError) as exc:
        raise SerializationError(f"{path}: malformed edge list: {exc}") from exc


def write_resistances_csv(resistances, path: PathLike) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "resistance"])
        for i, r in enumerate(np.asarray(resistances, dtype=np.float64)):
            writer.writerow([i, repr(float(r))])
    return path


def read_resistances_csv(path: PathLike) -> np.ndarray:
    try:
        with Path(path).open("r", encoding="utf-8", newline="") as f:
            rows = list(csv.DictReader(f))
        return np.array([float(row["resistance"]) for row in rows])
    except (OSError, KeyError, ValueError) as exc:
        raise SerializationError(f"cannot read resistances {path}: {exc}") from exc


def trace_rows(trace: GrowthTrace) -> List[Dict[str, Any]]:
    return [asdict(r) for r in trace.records]


def write_trace_csv(trace: GrowthTrace, path: PathLike) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=TRACE_COLUMNS)
        writer.writeheader()
        for row in trace_rows(trace):
            writer.writerow(
                {k: "" if row[k] is None else row[k] for k in TRACE_COLUMNS}
            )
    return path


def write_trace_json(trace: GrowthTrace, path: PathLike) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with path.open("w", encoding="utf-8") as f:
        json.dump({"fn_id": trace.fn_id, "records": trace_rows(trace)}, f, indent=2)
    return path


def read_trace_json(path: PathLike) -> GrowthTrace:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        trace = GrowthTrace(fn_id=data["fn_id"])
        for row in data["records"]:
            trace.append(GrowthRecord(**row))
        return trace
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SerializationError(f"cannot load trace {path}: {exc}") from exc
