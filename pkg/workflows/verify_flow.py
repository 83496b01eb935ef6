import logging
from typing import Callable, Dict, List

from core.models import FAIL, GrowthTrace, StatefulVerifyResult, VerificationReport
from core.state import RunState
from growth.base import GrowthFunction
from growth.checks import check_monotone
from nodes.exact_distribution import EXACT_MAX_GENERATION, distribution_sequence
from nodes.sampler import iterate_pools, run_pool
from nodes.statistics import trace_from_distributions, trace_from_pools
from nodes.verifier import (
    CONDITION_N_RANGE,
    ORACLE_N_RANGE,
    check_lemma_bound,
    expectation_bounds_check,
    lemma2_tightness,
    sampler_oracle_check,
    verify_condition1,
    verify_condition2_range,
    verify_condition3,
    verify_remark4,
)
from services.report_service import exit_code_for, write_report
from services.run_config_service import RunConfig, tolerance_provenance
from workflows.common import build_run_state, file_stem, load_function

logger = logging.getLogger(__name__)

REMARK4_DEFAULT_N = 5
MONOTONE_DEFAULT_N = range(0, 6)
EXACT_EXPECTATION_N = 4
POOL_EXPECTATION_N = 20

Check = Callable[[GrowthFunction, RunConfig], VerificationReport]


def _cond1(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    return verify_condition1(fn)


def _cond2(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    n_values = config.generations(CONDITION_N_RANGE)
    return verify_condition2_range(fn, n_values, config.trials, seed=config.seed)


def _cond3(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    return verify_condition3(fn, config.generations(CONDITION_N_RANGE))


def _remark4(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    n = config.generations([REMARK4_DEFAULT_N])[-1]
    if config.method == "exact" and n <= EXACT_MAX_GENERATION:
        law = distribution_sequence(fn, n, cap=config.atom_cap)[-1]
    else:
        law = run_pool(fn, n, config.pool_size, config.seed, workers=config.workers)
    return verify_remark4(fn, n, law, config.trials, config.seed)


def _lemma1(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    return check_lemma_bound("lemma1", config.trials, config.seed)


def _lemma2(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    return check_lemma_bound("lemma2", config.trials, config.seed)


def _tightness(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    return lemma2_tightness()


def _monotone(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    n_values = config.generations(MONOTONE_DEFAULT_N)
    reports = [check_monotone(fn, n, config.trials, config.seed) for n in n_values]
    merged = reports[-1]
    merged.params["n_values"] = n_values
    merged.measurements["max_excess"] = max(
        r.measurements["max_excess"] for r in reports
    )
    merged.measurements["violations"] = sum(
        r.measurements["violations"] for r in reports
    )
    merged.measurements["per_n"] = [[r.params["n"], r.verdict] for r in reports]
    merged.counterexamples = [cx for r in reports for cx in r.counterexamples]
    if any(r.failed for r in reports):
        merged.verdict = FAIL
    return merged


def _expectation(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    if config.method == "exact":
        n = config.generations([EXACT_EXPECTATION_N])[-1]
        trace: GrowthTrace = trace_from_distributions(
            distribution_sequence(fn, n, delta0=config.delta0, cap=config.atom_cap)
        )
    else:
        n = config.generations([POOL_EXPECTATION_N])[-1]
        pools = iterate_pools(
            fn, n, config.pool_size, config.seed, workers=config.workers
        )
        trace = trace_from_pools(list(pools))
    return expectation_bounds_check(fn, trace)


def _oracle(fn: GrowthFunction, config: RunConfig) -> VerificationReport:
    report = sampler_oracle_check(
        fn,
        config.generations(ORACLE_N_RANGE),
        config.pool_size,
        config.seed,
        threshold=config.tolerances["oracle_ks"],
        workers=config.workers,
        delta0=config.delta0,
        cap=config.atom_cap,
    )
    provenance = tolerance_provenance(config, "oracle_ks")
    report.threshold_provenance["threshold"] = provenance["oracle_ks"]
    return report


CHECKS: Dict[str, Check] = {
    "cond1": _cond1,
    "cond2": _cond2,
    "cond3": _cond3,
    "remark4": _remark4,
    "lemma1": _lemma1,
    "lemma2": _lemma2,
    "tightness": _tightness,
    "monotone": _monotone,
    "expectation": _expectation,
    "oracle": _oracle,
}


def run_verify_flow(config: RunConfig) -> StatefulVerifyResult:
    state: RunState = build_run_state(config)
    fn = load_function(config)

    reports: List[VerificationReport] = []
    for check_id in config.checks:
        report = CHECKS[check_id](fn, config)
        reports.append(report)
        state["history"].append(f"verify_flow: {check_id} -> {report.verdict}")
        logger.info("%s on %s: %s", check_id, report.fn, report.verdict)

    compliant = {fn.id: fn.theorem_compliant, "harmonic": True}
    exit_code = exit_code_for(reports, compliant)

    name = "lemmas" if config.command == "lemmas" else f"verify-{file_stem(fn.id)}"
    state["output_files"].append(
        write_report(name, reports, config.to_dict(), config.out_dir)
    )
    state["checks_run"] = [r.check for r in reports]
    state["checks_failed"] = [r.check for r in reports if r.failed]
    state["exit_code"] = exit_code
    state["done"] = True
    return StatefulVerifyResult(reports=reports, state=state, exit_code=exit_code)
