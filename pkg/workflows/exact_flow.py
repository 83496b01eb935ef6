import logging
from typing import List

from core.models import DiscreteDistribution, StatefulExactResult, VerificationReport
from core.state import RunState
from nodes.exact_distribution import (
    check_variance_identity,
    distribution_sequence,
    fourth_moment_diagnostic,
)
from services.report_service import write_report
from services.run_config_service import RunConfig, tolerance_provenance
from services.serialization_service import (
    write_distribution_csv,
    write_distribution_json,
)
from workflows.common import build_run_state, file_stem, load_function

logger = logging.getLogger(__name__)

DEFAULT_GENERATIONS = range(0, 4)
MIN_DIAGNOSTIC_GENERATIONS = 3


def run_exact_flow(config: RunConfig) -> StatefulExactResult:
    """Laws of X_0..X_max; files are written for the requested generations, the
    identity is checked on every transition out of an exact law that ends in one
    of them."""
    state: RunState = build_run_state(config)
    fn = load_function(config)
    generations = config.generations(DEFAULT_GENERATIONS)
    state["generations"] = generations

    dists = distribution_sequence(
        fn, max(generations), delta0=config.delta0, cap=config.atom_cap
    )
    state["history"].append(
        f"exact_flow: computed laws up to n={dists[-1].n} "
        f"({dists[-1].atom_count} atoms at the last step)"
    )

    stem = file_stem(fn.id)
    selected: List[DiscreteDistribution] = [d for d in dists if d.n in generations]
    for dist in selected:
        if "json" in config.formats:
            path = write_distribution_json(
                dist, f"{config.out_dir}/{stem}-X{dist.n}.json"
            )
            state["output_files"].append(str(path))
        if "csv" in config.formats:
            path = write_distribution_csv(
                dist, f"{config.out_dir}/{stem}-X{dist.n}.csv"
            )
            state["output_files"].append(str(path))

    reports: List[VerificationReport] = []
    if config.check_identity:
        rtol = config.tolerances["identity_rtol"]
        for prev, cur in zip(dists, dists[1:]):
            if cur.n not in generations:
                continue
            if not prev.is_exact:
                logger.info("skipping identity at n=%d: quantized law", prev.n)
                continue
            report = check_variance_identity(fn, prev, cur, rtol=rtol)
            report.threshold_provenance.update(
                {"rtol": tolerance_provenance(config, "identity_rtol")["identity_rtol"]}
            )
            reports.append(report)
        if not reports:
            logger.warning("no step from an exact law in range; identity not checked")
        state["history"].append(f"exact_flow: {len(reports)} identity checks")

    if len(dists) >= MIN_DIAGNOSTIC_GENERATIONS:
        reports.append(fourth_moment_diagnostic(dists))

    if reports:
        state["output_files"].append(
            write_report(f"exact-{stem}", reports, config.to_dict(), config.out_dir)
        )
    state["checks_run"] = [r.check for r in reports]
    state["checks_failed"] = [r.check for r in reports if r.failed]
    state["done"] = True
    return StatefulExactResult(distributions=selected, state=state, reports=reports)
