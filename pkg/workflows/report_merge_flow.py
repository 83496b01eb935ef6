import logging
from typing import Dict, List

from core.models import StatefulVerifyResult
from core.state import RunState
from services.report_service import (
    exit_code_for,
    load_report,
    merge_payloads,
    report_from_dict,
    write_json,
)
from services.run_config_service import RunConfig
from workflows.common import build_run_state, is_compliant

logger = logging.getLogger(__name__)

MERGED_NAME = "merged-report"


def run_report_merge_flow(config: RunConfig) -> StatefulVerifyResult:
    state: RunState = build_run_state(config)
    payloads = [load_report(path, compare=True) for path in config.inputs]
    merged = merge_payloads(payloads)
    state["history"].append(
        f"report_merge_flow: {len(payloads)} inputs, {len(merged['reports'])} checks"
    )

    compliant: Dict[str, bool] = {}
    reports = []
    for payload in payloads:
        params = payload.get("config", {}).get("fn_params") or {}
        for data in payload["reports"]:
            report = report_from_dict(data)
            if report.fn not in compliant:
                compliant[report.fn] = is_compliant(report.fn, params)
            reports.append(report)
    exit_code = exit_code_for(reports, compliant)
    merged["summary"]["theorem_compliant"] = compliant

    failed: List[str] = merged["summary"]["failed"]
    if failed:
        logger.warning("merged reports carry %d failed checks", len(failed))

    state["output_files"].append(write_json(MERGED_NAME, merged, config.out_dir))
    state["checks_run"] = [r.check for r in reports]
    state["checks_failed"] = [r.check for r in reports if r.failed]
    state["exit_code"] = exit_code
    state["done"] = True
    return StatefulVerifyResult(reports=reports, state=state, exit_code=exit_code)
