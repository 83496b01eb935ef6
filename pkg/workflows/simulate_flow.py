import logging
from typing import Dict, List, Tuple

from core.models import (
    MEASURED,
    GrowthTrace,
    StatefulSimulationResult,
    VerificationReport,
)
from core.state import RunState
from growth.base import GrowthFunction
from nodes.exact_distribution import iterate_distributions
from nodes.sampler import iterate_pools, range_check, tree_pool
from nodes.statistics import (
    fourth_ratio_trace,
    log_variance_slope,
    mean_growth,
    normal_ks_distance,
    plot_data,
    record_from_distribution,
    record_from_values,
    self_standardize,
    variance_growth_ratios,
)
from services.report_service import write_json, write_report
from services.run_config_service import RunConfig, tolerance_provenance
from services.serialization_service import write_trace_csv, write_trace_json
from workflows.common import build_run_state, file_stem, load_function

logger = logging.getLogger(__name__)

DEFAULT_GENERATIONS = range(0, 11)

EngineResult = Tuple[GrowthTrace, List[VerificationReport], Dict[int, float]]


def _exact_trace(
    fn: GrowthFunction, config: RunConfig, generations: List[int]
) -> EngineResult:
    trace = GrowthTrace(fn_id=fn.id)
    for dist in iterate_distributions(
        fn, max(generations), delta0=config.delta0, cap=config.atom_cap
    ):
        if dist.n in generations:
            trace.append(record_from_distribution(dist))
            logger.info("exact generation %d: %d atoms", dist.n, dist.atom_count)
    return trace, [], {}


def _pool_trace(
    fn: GrowthFunction, config: RunConfig, generations: List[int]
) -> EngineResult:
    trace = GrowthTrace(fn_id=fn.id)
    reports: List[VerificationReport] = []
    ks: Dict[int, float] = {}
    rtol = config.tolerances["range_rtol"]
    for pool in iterate_pools(
        fn, max(generations), config.pool_size, config.seed, workers=config.workers
    ):
        if pool.n not in generations:
            continue
        trace.append(record_from_values(pool.n, pool.values, "pool"))
        reports.append(range_check(pool, fn.cx, fn.cy, rtol=rtol))
        if pool.n in config.ks_at:
            ks[pool.n] = normal_ks_distance(self_standardize(pool.values))
        logger.info("pool generation %d done (M=%d)", pool.n, pool.size)
    return trace, reports, ks


def _tree_trace(
    fn: GrowthFunction, config: RunConfig, generations: List[int]
) -> EngineResult:
    trace = GrowthTrace(fn_id=fn.id)
    reports: List[VerificationReport] = []
    ks: Dict[int, float] = {}
    rtol = config.tolerances["range_rtol"]
    for n in generations:
        pool = tree_pool(fn, n, config.samples, config.seed, workers=config.workers)
        trace.append(record_from_values(n, pool.values, "tree"))
        reports.append(range_check(pool, fn.cx, fn.cy, rtol=rtol))
        if n in config.ks_at:
            ks[n] = normal_ks_distance(self_standardize(pool.values))
        logger.info("tree generation %d done (%d draws)", n, pool.size)
    return trace, reports, ks


ENGINES = {"exact": _exact_trace, "pool": _pool_trace, "tree": _tree_trace}


def growth_report(
    fn: GrowthFunction, trace: GrowthTrace, ks: Dict[int, float], config: RunConfig
) -> VerificationReport:
    report = VerificationReport(
        check="growth",
        fn=fn.id,
        params={
            "method": config.method,
            "generations": trace.generations,
            "seed": config.seed,
        },
        verdict=MEASURED,
        measurements={
            "variance_base": 2.0 + fn.cx**2 + fn.cy**2,
            "mean_base": fn.growth_base,
            "ks_distances": [[n, d] for n, d in sorted(ks.items())],
            "ks_threshold": config.tolerances["ks_threshold"],
            "fourth_ratios": [[n, r] for n, r in fourth_ratio_trace(trace)],
        },
        threshold_provenance=tolerance_provenance(config, "ks_threshold"),
    )
    if len(trace.records) >= 2 and all(r.variance > 0 for r in trace.records):
        report.measurements["variance_ratios"] = [
            [n, ratio, se] for n, ratio, se in variance_growth_ratios(trace)
        ]
        report.measurements["log_regression_base"] = log_variance_slope(trace)
    else:
        report.notes.append("variance ratios need two generations of positive variance")

    points, jensen = mean_growth(trace, fn.cx, fn.cy, concave=fn.concave)
    report.measurements["normalized_means"] = [[n, v, se] for n, v, se in points]
    report.measurements["jensen_violations"] = jensen
    above = [n for n, d in sorted(ks.items()) if d > config.tolerances["ks_threshold"]]
    if above:
        report.notes.append(f"KS distance above threshold at n={above}")
    return report


def run_simulate_flow(config: RunConfig) -> StatefulSimulationResult:
    state: RunState = build_run_state(config)
    fn = load_function(config)
    generations = config.generations(DEFAULT_GENERATIONS)
    state["generations"] = generations

    trace, reports, ks = ENGINES[config.method](fn, config, generations)
    state["history"].append(
        f"simulate_flow: {config.method} trace for "
        f"n={generations[0]}..{generations[-1]}"
    )

    reports = [growth_report(fn, trace, ks, config)] + reports
    stem = f"{file_stem(fn.id)}-{config.method}"
    if "csv" in config.formats:
        path = write_trace_csv(trace, f"{config.out_dir}/{stem}-trace.csv")
        state["output_files"].append(str(path))
    if "json" in config.formats:
        path = write_trace_json(trace, f"{config.out_dir}/{stem}-trace.json")
        state["output_files"].append(str(path))
    if config.plot_data:
        payload = plot_data(trace, fn.cx, fn.cy)
        path = write_json(f"{stem}-plot", payload, config.out_dir)
        state["output_files"].append(path)
    state["output_files"].append(
        write_report(f"simulate-{stem}", reports, config.to_dict(), config.out_dir)
    )
    state["history"].append(f"simulate_flow: wrote {len(state['output_files'])} files")

    state["checks_run"] = [r.check for r in reports]
    state["checks_failed"] = [r.check for r in reports if r.failed]
    state["done"] = True
    return StatefulSimulationResult(trace=trace, state=state, reports=reports)
