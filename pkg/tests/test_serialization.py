import json

import numpy as np
import pytest

from core.errors import SerializationError
from core.models import GrowthRecord, GrowthTrace
from nodes.resistance_net import build_lcl
from nodes.sampler import run_pool
from services.serialization_service import (
    POOL_MAGIC,
    read_distribution_json,
    read_network,
    read_pool,
    read_resistances_csv,
    read_trace_json,
    sidecar_path,
    write_distribution_csv,
    write_distribution_json,
    write_network,
    write_pool,
    write_resistances_csv,
    write_trace_csv,
    write_trace_json,
)


def test_pool_round_trip(harmonic, tmp_path):
    pool = run_pool(harmonic, 2, 100, seed=9)
    path = write_pool(pool, tmp_path / "x2.pool")
    loaded = read_pool(path)
    np.testing.assert_array_equal(loaded.values, pool.values)
    assert loaded.lineage == pool.lineage
    assert (loaded.n, loaded.fn_id, loaded.master_seed) == (2, "harmonic", 9)

    header = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    assert header["M"] == 100
    assert header["magic"] == POOL_MAGIC.decode("ascii")


def test_pool_loader_rejects_bad_files(harmonic, tmp_path):
    path = write_pool(run_pool(harmonic, 1, 16, seed=1), tmp_path / "x1.pool")
    raw = path.read_bytes()

    bad_magic = tmp_path / "magic.pool"
    bad_magic.write_bytes(b"NOPE" + raw[4:])
    with pytest.raises(SerializationError):
        read_pool(bad_magic)

    truncated = tmp_path / "short.pool"
    truncated.write_bytes(raw[:-8])
    with pytest.raises(SerializationError):
        read_pool(truncated)

    with pytest.raises(SerializationError):
        read_pool(tmp_path / "absent.pool")


def test_distribution_round_trip(harmonic_laws, tmp_path):
    dist = harmonic_laws[2]
    loaded = read_distribution_json(write_distribution_json(dist, tmp_path / "x2.json"))
    np.testing.assert_array_equal(loaded.support, dist.support)
    np.testing.assert_array_equal(loaded.probs, dist.probs)
    assert loaded.n == 2
    assert loaded.is_exact


def test_distribution_csv(harmonic_laws, tmp_path):
    path = write_distribution_csv(harmonic_laws[1], tmp_path / "x1.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "value,prob"
    assert len(lines) == 10


def test_malformed_distribution(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 1}', encoding="utf-8")
    with pytest.raises(SerializationError):
        read_distribution_json(path)


def test_network_round_trip(tmp_path):
    net = build_lcl(2, seed=3)
    path = write_network(net, tmp_path / "g2.edges")
    assert path.read_text(encoding="utf-8").startswith("lcl n=2 seed=3 ")
    assert read_network(path) == net


def test_network_needs_header(tmp_path):
    path = tmp_path / "plain.edges"
    path.write_text("0 1 1.0\n", encoding="utf-8")
    with pytest.raises(SerializationError):
        read_network(path)


def test_resistances_round_trip(tmp_path):
    values = np.array([2.5, 3.0, 1.0 / 3.0])
    loaded = read_resistances_csv(write_resistances_csv(values, tmp_path / "r.csv"))
    np.testing.assert_array_equal(loaded, values)


def test_trace_files(tmp_path):
    trace = GrowthTrace(fn_id="harmonic")
    trace.append(GrowthRecord(0, 1.5, 0.25, 0.0625, "exact", 2))
    trace.append(GrowthRecord(1, 3.7, 0.53, 0.7, "pool", 1000, 0.01, 0.02))
    assert read_trace_json(write_trace_json(trace, tmp_path / "t.json")) == trace

    lines = write_trace_csv(trace, tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "n,mean,variance,m4,source,size,se_mean,se_var"
    assert lines[1].endswith("exact,2,,")
