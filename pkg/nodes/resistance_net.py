"""Line-circle-line networks G_n and their effective resistance.

Resistances are laid out depth-first in block order (left line, circle top, circle
bottom, right line), the same leaf order the tree sampler uses, so a seed maps to
one network and to one tree draw.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from core.errors import CapExceededError, DomainError, SolverError
from core.models import (
    FAIL,
    PASS,
    DiscreteDistribution,
    ResistorNetwork,
    VerificationReport,
)
from growth.registry import get_function
from nodes.exact_distribution import (
    MERGE_RTOL,
    exact_next,
    merge_atoms,
    x0_distribution,
)
from nodes.sampler import LEAF_CHUNK, tree_leaves

logger = logging.getLogger(__name__)

SOURCE = 0
SINK = 1
DEFAULT_NODE_CAP = 10_000
DENSE_LIMIT = 2_000
RESIDUAL_RTOL = 1e-12
EQUIVALENCE_RTOL = 1e-9
MAX_EXHAUSTIVE_DEPTH = 2


def node_count(n: int) -> int:
    return (2 * 4**n + 4) // 3


def series(*resistances):
    total = resistances[0]
    for r in resistances[1:]:
        total = total + r
    return total


def parallel(r1, r2):
    return r1 * r2 / (r1 + r2)


def _resolve_resistances(
    n: int,
    seed: Optional[int],
    resistances: Optional[Sequence[float]],
    draw: int = 0,
) -> np.ndarray:
    if n < 0:
        raise DomainError(f"depth must be >= 0, got {n}")
    if (seed is None) == (resistances is None):
        raise DomainError("give exactly one of seed or explicit resistances")
    if resistances is None:
        return tree_leaves(seed, n, draw, 1)[0]

    values = np.asarray(resistances, dtype=np.float64).ravel()
    if values.size != 4**n:
        raise DomainError(
            f"G_{n} has {4**n} edges, got {values.size} resistances"
        )
    if not np.all(values > 0):
        raise DomainError("resistances must be positive")
    return values


def build_lcl(
    n: int,
    seed: Optional[int] = None,
    resistances: Optional[Sequence[float]] = None,
    draw: int = 0,
) -> ResistorNetwork:
    values = iter(_resolve_resistances(n, seed, resistances, draw).tolist())
    edges: List[Tuple[int, int, float]] = []
    next_node = 2

    def expand(u: int, v: int, depth: int) -> None:
        nonlocal next_node
        if depth == 0:
            edges.append((u, v, next(values)))
            return
        a, b = next_node, next_node + 1
        next_node += 2
        expand(u, a, depth - 1)
        expand(a, b, depth - 1)
        expand(a, b, depth - 1)
        expand(b, v, depth - 1)

    expand(SOURCE, SINK, n)
    return ResistorNetwork(
        node_count=next_node,
        edges=tuple(edges),
        terminals=(SOURCE, SINK),
        depth=n,
        seed=seed,
    )


def reduce_resistances(leaves: np.ndarray) -> np.ndarray:
    """Series-parallel reduction of (..., 4^n) resistance vectors."""
    r = np.asarray(leaves, dtype=np.float64)
    while r.shape[-1] > 1:
        q = r.reshape(r.shape[:-1] + (-1, 4))
        r = series(q[..., 0], q[..., 3], parallel(q[..., 1], q[..., 2]))
    return r[..., 0]


def series_parallel_resistance(
    n: int,
    seed: Optional[int] = None,
    resistances: Optional[Sequence[float]] = None,
    draw: int = 0,
) -> float:
    return float(
        reduce_resistances(_resolve_resistances(n, seed, resistances, draw))
    )


def series_parallel_batch(
    n: int, count: int, seed: int, workers: int = 1
) -> np.ndarray:
    """R(G_n) for draws [0, count) of one seed; draw i is bit-identical to the tree
    sampler's draw i under the harmonic function."""
    per_chunk = max(1, LEAF_CHUNK // 4**n)
    chunks = [(lo, min(count, lo + per_chunk)) for lo in range(0, count, per_chunk)]

    def work(chunk: Tuple[int, int]) -> np.ndarray:
        lo, hi = chunk
        return reduce_resistances(tree_leaves(seed, n, lo, hi - lo))

    if workers <= 1 or len(chunks) <= 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    return np.concatenate(parts) if parts else np.empty(0)


def to_graph(net: ResistorNetwork) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(net.node_count))
    for u, v, r in net.edges:
        graph.add_edge(u, v, resistance=r, conductance=1.0 / r)
    return graph


def _grounded_system(net: ResistorNetwork):
    graph = to_graph(net)
    source, sink = net.terminals
    if not nx.has_path(graph, source, sink):
        raise SolverError(f"terminals {source} and {sink} are not connected")

    nodes = sorted(nx.node_connected_component(graph, source))
    lap = nx.laplacian_matrix(graph, nodelist=nodes, weight="conductance")
    lap = sp.csr_matrix(lap, dtype=np.float64)

    sink_pos = nodes.index(sink)
    keep = np.array([i for i in range(len(nodes)) if i != sink_pos])
    reduced = lap[keep, :].tocsc()[:, keep].tocsr()

    rhs = np.zeros(len(keep))
    source_pos = int(np.flatnonzero(keep == nodes.index(source))[0])
    rhs[source_pos] = 1.0
    return reduced, rhs, source_pos


def _residual_floor(matrix, x: np.ndarray, rhs: np.ndarray) -> float:
    # backward-stable solves cannot beat eps * |L| * |x|
    norm_l = float(abs(matrix).sum(axis=1).max())
    floor = 64.0 * np.finfo(np.float64).eps * norm_l * float(np.abs(x).max())
    return max(RESIDUAL_RTOL * float(np.linalg.norm(rhs)), floor)


def solve_potentials(
    net: ResistorNetwork,
    node_cap: int = DEFAULT_NODE_CAP,
    dense_limit: int = DENSE_LIMIT,
) -> Tuple[float, float, str]:
    """(effective resistance, residual norm, solver name) for unit current from
    source to sink with the sink grounded."""
    if net.node_count > node_cap:
        raise CapExceededError(
            f"network has {net.node_count} nodes, above the Laplacian cap of {node_cap}"
        )
    if net.terminals[0] == net.terminals[1]:
        return 0.0, 0.0, "trivial"

    matrix, rhs, source_pos = _grounded_system(net)

    if matrix.shape[0] <= dense_limit:
        method = "dense"
        dense = matrix.toarray()
        try:
            x = scipy.linalg.solve(dense, rhs, assume_a="pos")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"grounded Laplacian is singular: {exc}") from exc
        residual = rhs - dense @ x
        x = x + scipy.linalg.solve(dense, residual, assume_a="pos")
    else:
        method = "cg"
        diag = matrix.diagonal()
        if np.any(diag <= 0):
            raise SolverError("grounded Laplacian has an empty row")
        precond = sp.diags(1.0 / diag)
        x, info = cg(
            matrix,
            rhs,
            rtol=RESIDUAL_RTOL,
            atol=0.0,
            M=precond,
            maxiter=20 * matrix.shape[0],
        )
        if info != 0:
            raise SolverError(f"conjugate gradient did not converge (info={info})")

    residual = float(np.linalg.norm(matrix @ x - rhs))
    if residual > _residual_floor(matrix, x, rhs):
        raise SolverError(f"{method} solve left residual {residual:.3g}")

    logger.debug(
        "laplacian solve (%s) on %d nodes, residual %.3g",
        method,
        net.node_count,
        residual,
    )
    return float(x[source_pos]), residual, method


def laplacian_resistance(
    net: ResistorNetwork,
    node_cap: int = DEFAULT_NODE_CAP,
    dense_limit: int = DENSE_LIMIT,
) -> float:
    return solve_potentials(net, node_cap=node_cap, dense_limit=dense_limit)[0]


def _compare(
    n: int, seed: Optional[int], resistances, node_cap: int, draw: int = 0
) -> Tuple[float, float, float]:
    net = build_lcl(n, seed=seed, resistances=resistances, draw=draw)
    reduced = series_parallel_resistance(
        n, seed=seed, resistances=resistances, draw=draw
    )
    solved = laplacian_resistance(net, node_cap=node_cap)
    return reduced, solved, abs(reduced - solved) / solved


def equivalence_check(
    n: int,
    seeds: Iterable[int],
    rtol: float = EQUIVALENCE_RTOL,
    node_cap: int = DEFAULT_NODE_CAP,
    workers: int = 1,
    draws: int = 1,
) -> VerificationReport:
    """Series-parallel against Laplacian on draws 0..draws-1 of every seed."""
    cases = [(seed, draw) for seed in seeds for draw in range(draws)]
    if node_count(n) > node_cap:
        raise CapExceededError(
            f"G_{n} has {node_count(n)} nodes, above the Laplacian cap of {node_cap}"
        )

    def work(case: Tuple[int, int]) -> Tuple[float, float, float]:
        return _compare(n, case[0], None, node_cap, draw=case[1])

    if workers <= 1:
        results = [work(c) for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, cases))

    report = VerificationReport(
        check="resistance_equivalence",
        fn="harmonic",
        params={"n": n, "cases": len(cases), "draws": draws, "rtol": rtol},
        measurements={
            "max_relative_deviation": max((r[2] for r in results), default=0.0),
            "nodes": node_count(n),
            "edges": 4**n,
        },
        threshold_provenance={"rtol": "calibrated"},
    )
    for (seed, draw), (reduced, solved, dev) in zip(cases, results):
        if dev > rtol:
            report.counterexamples.append(
                {
                    "seed": seed,
                    "draw": draw,
                    "series_parallel": reduced,
                    "laplacian": solved,
                }
            )
    report.verdict = FAIL if report.counterexamples else PASS
    return report


def all_assignments(n: int) -> np.ndarray:
    """Every {1, 2} resistance vector of G_n, shape (2^(4^n), 4^n)."""
    if n > MAX_EXHAUSTIVE_DEPTH:
        raise CapExceededError(f"G_{n} has 2^{4**n} resistance assignments")
    width = 4**n
    configs = np.arange(2**width, dtype=np.int64)[:, None]
    return 1.0 + ((configs >> np.arange(width)) & 1).astype(np.float64)


def exhaustive_law(n: int) -> DiscreteDistribution:
    values = reduce_resistances(all_assignments(n))
    probs = np.full(values.size, 1.0 / values.size)
    support, mass = merge_atoms(values, probs, MERGE_RTOL * 2.5**n)
    return DiscreteDistribution(support=support, probs=mass, n=n, fn_id="harmonic")


def exhaustive_check(
    n: int = 1, rtol: float = EQUIVALENCE_RTOL, node_cap: int = DEFAULT_NODE_CAP
) -> VerificationReport:
    """Both engines on every assignment of G_n, plus the resulting law against the
    convolution engine."""
    assignments = all_assignments(n)
    report = VerificationReport(
        check="resistance_exhaustive",
        fn="harmonic",
        params={"n": n, "assignments": int(assignments.shape[0]), "rtol": rtol},
        threshold_provenance={"rtol": "calibrated", "law_atol": "calibrated"},
    )
    worst = 0.0
    for row in assignments:
        reduced, solved, dev = _compare(n, None, row, node_cap)
        worst = max(worst, dev)
        if dev > rtol:
            report.counterexamples.append(
                {
                    "resistances": row.tolist(),
                    "series_parallel": reduced,
                    "laplacian": solved,
                }
            )

    law = exhaustive_law(n)
    harmonic = get_function("harmonic")
    dist = x0_distribution(harmonic.id)
    while dist.n < n:
        dist = exact_next(harmonic, dist)
    same_support = law.atom_count == dist.atom_count and bool(
        np.allclose(law.support, dist.support, rtol=1e-12, atol=0.0)
    )
    prob_gap = (
        float(np.max(np.abs(law.probs - dist.probs))) if same_support else float("inf")
    )
    if not same_support or prob_gap > 1e-14:
        report.counterexamples.append(
            {
                "law_atoms": law.atom_count,
                "exact_atoms": dist.atom_count,
                "prob_gap": prob_gap,
            }
        )

    report.measurements = {
        "max_relative_deviation": worst,
        "atoms": law.atom_count,
        "support": law.support.tolist(),
        "probs": law.probs.tolist(),
        "max_prob_gap": prob_gap,
    }
    report.verdict = FAIL if report.counterexamples else PASS
    return report

