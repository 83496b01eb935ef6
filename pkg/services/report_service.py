import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from core.errors import SerializationError
from core.models import FAIL, PASS, VerificationReport

logger = logging.getLogger(__name__)

REPORT_DIR = "lcl-out"
METADATA_KEY = "metadata"
EXIT_OK = 0
EXIT_CHECK_FAILED = 1


def ensure_report_dir(out_dir: str = REPORT_DIR) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _to_json(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def dumps(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_to_json) + "\n"


def summarize(reports: Sequence[VerificationReport]) -> Dict[str, Any]:
    failed = [r.check for r in reports if r.failed]
    return {
        "checks": [r.check for r in reports],
        "failed": failed,
        "verdict": FAIL if failed else PASS,
    }


def build_payload(
    reports: Sequence[VerificationReport],
    config: Mapping[str, Any],
    extra: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "config": dict(config),
        "reports": [r.to_dict() for r in reports],
        "summary": summarize(reports),
    }
    if extra:
        payload.update(extra)
    payload[METADATA_KEY] = {
        "generated": datetime.now(timezone.utc).isoformat(timespec="seconds")
    }
    return payload


def write_report(
    name: str,
    reports: Sequence[VerificationReport],
    config: Mapping[str, Any],
    out_dir: str = REPORT_DIR,
    extra: Optional[Mapping[str, Any]] = None,
) -> str:
    path = ensure_report_dir(out_dir) / f"{name}-report.json"
    path.write_text(dumps(build_payload(reports, config, extra)), encoding="utf-8")
    logger.info("wrote %s (%d checks)", path, len(reports))
    return str(path)


def write_json(name: str, payload: Mapping[str, Any], out_dir: str = REPORT_DIR) -> str:
    path = ensure_report_dir(out_dir) / f"{name}.json"
    path.write_text(dumps(payload), encoding="utf-8")
    return str(path)


def load_report(path: str, compare: bool = False) -> Dict[str, Any]:
    """Loads a report file; compare=True drops the timestamp metadata so two runs of
    the same config compare equal."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SerializationError(f"cannot load report {path}: {exc}") from exc
    if not isinstance(payload, dict) or "reports" not in payload:
        raise SerializationError(f"{path} is not a report file")
    if compare:
        payload.pop(METADATA_KEY, None)
    return payload


def report_from_dict(data: Mapping[str, Any]) -> VerificationReport:
    return VerificationReport(**data)


def exit_code_for(
    reports: Iterable[VerificationReport], compliant: Mapping[str, bool]
) -> int:
    """1 iff a check failed for a function flagged theorem-compliant."""
    for r in reports:
        if r.failed and compliant.get(r.fn, False):
            return EXIT_CHECK_FAILED
    return EXIT_OK


def merge_payloads(payloads: Sequence[Mapping[str, Any]]) -> Dict[str, Any]:
    reports: List[Dict[str, Any]] = []
    counterexamples: List[Dict[str, Any]] = []
    configs = []
    for payload in payloads:
        configs.append(payload.get("config", {}))
        for report in payload.get("reports", []):
            reports.append(report)
            for cx in report.get("counterexamples", []):
                counterexamples.append(
                    {"check": report["check"], "fn": report["fn"], **cx}
                )
    failed = [f"{r['fn']}:{r['check']}" for r in reports if r["verdict"] == FAIL]
    return {
        "configs": configs,
        "reports": reports,
        "counterexamples": counterexamples,
        "summary": {
            "inputs": len(payloads),
            "checks": len(reports),
            "failed": failed,
            "verdict": FAIL if failed else PASS,
        },
    }
