import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from core.errors import INTERNAL_EXIT_CODE, LclError
from core.models import VerificationReport
from services.log_service import configure_logging
from services.report_service import exit_code_for
from services.run_config_service import (
    CHECK_IDS,
    FORMATS,
    METHODS,
    load_run_config,
)
from workflows.common import is_compliant
from workflows.exact_flow import run_exact_flow
from workflows.report_merge_flow import run_report_merge_flow
from workflows.resistance_flow import run_resistance_flow
from workflows.simulate_flow import run_simulate_flow
from workflows.verify_flow import run_verify_flow

logger = logging.getLogger(__name__)

GLOBAL_KEYS = ("config", "command")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run manifest")
    common.add_argument("--f", help="growth function id (default: harmonic)")
    common.add_argument(
        "--param", action="append", help="function parameter k=v (repeatable)"
    )
    common.add_argument("--n", help="generation N or inclusive range A..B")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--threads", type=int, help="worker count")
    common.add_argument("--out", help="output directory (default: lcl-out)")
    common.add_argument(
        "--format", help=f"comma-separated subset of {','.join(FORMATS)}"
    )
    common.add_argument(
        "--tolerance", action="append", help="tolerance override name=value"
    )
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    parser = argparse.ArgumentParser(prog="lcl")
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", parents=[common])
    simulate.add_argument("--method", choices=METHODS)
    simulate.add_argument("--pool", type=int, help="pool size M")
    simulate.add_argument("--samples", type=int, help="tree draws per generation")
    simulate.add_argument("--delta0", type=float)
    simulate.add_argument("--ks-at", help="generations to report KS distance at")
    simulate.add_argument("--plot-data", action="store_true")

    exact = subparsers.add_parser("exact", parents=[common])
    exact.add_argument("--delta0", type=float)
    exact.add_argument("--atom-cap", type=int)
    exact.add_argument("--check-identity", action="store_true")

    resistance = subparsers.add_parser("resistance", parents=[common])
    resistance.add_argument("--samples", type=int)
    resistance.add_argument("--check-laplacian", action="store_true")
    resistance.add_argument("--exhaustive", action="store_true")

    for name in ("verify", "lemmas"):
        verify = subparsers.add_parser(name, parents=[common])
        verify.add_argument("--trials", type=int)
        verify.add_argument("--method", choices=METHODS)
        verify.add_argument("--pool", type=int)
        verify.add_argument("--delta0", type=float)
        if name == "verify":
            verify.add_argument("--checks", help=f"subset of {','.join(CHECK_IDS)}")

    merge = subparsers.add_parser("report-merge", parents=[common])
    merge.add_argument("inputs", nargs="+", help="report JSON files")
    return parser


def flags_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS}


def print_reports(reports: List[VerificationReport]) -> None:
    for report in reports:
        print(f"{report.check:<24} {report.fn:<20} {report.verdict}")
        for note in report.notes:
            print(f"    note: {note}")


def run(command: str, flags: Dict[str, Any], config_path: Optional[str]) -> int:
    config = load_run_config(command, flags, config_path)
    if config.log_level:
        configure_logging(config.log_level)
    logger.info("running %s on %s", command, config.fn_id)

    if command == "simulate":
        flow_result = run_simulate_flow(config)
        for record in flow_result.trace.records:
            print(
                f"n={record.n:<3} mean={record.mean:.10g} "
                f"var={record.variance:.10g} ({record.source}, {record.size})"
            )
    elif command == "exact":
        flow_result = run_exact_flow(config)
        for dist in flow_result.distributions:
            print(
                f"X{dist.n}: {dist.atom_count} atoms, "
                f"quantization bound {dist.quant_error_bound:.3g}"
            )
    elif command == "resistance":
        flow_result = run_resistance_flow(config)
    elif command in ("verify", "lemmas"):
        flow_result = run_verify_flow(config)
    else:
        flow_result = run_report_merge_flow(config)

    print_reports(flow_result.reports)
    for path in flow_result.state["output_files"]:
        print(f"wrote {path}")

    if command in ("verify", "lemmas", "report-merge"):
        return flow_result.exit_code
    compliant = {
        r.fn: is_compliant(r.fn, config.fn_params) for r in flow_result.reports
    }
    return exit_code_for(flow_result.reports, compliant)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        return run(args.command, flags_from_args(args), args.config)
    except LclError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        logger.exception("%s crashed", args.command)
        print(f"error: internal: {exc!r}", file=sys.stderr)
        return INTERNAL_EXIT_CODE


if __name__ == "__main__":
    sys.exit(main())
