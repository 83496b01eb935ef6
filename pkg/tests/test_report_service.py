import json

import pytest

from core.errors import SerializationError
from core.models import FAIL, MEASURED, PASS, VerificationReport
from services.report_service import (
    METADATA_KEY,
    build_payload,
    exit_code_for,
    load_report,
    merge_payloads,
    report_from_dict,
    write_report,
)


def _report(check, fn, verdict, counterexamples=()):
    return VerificationReport(
        check=check, fn=fn, verdict=verdict, counterexamples=list(counterexamples)
    )


def test_exit_code_only_counts_compliant_failures():
    reports = [_report("cond2", "geometric", FAIL), _report("cond1", "harmonic", PASS)]
    compliant = {"harmonic": True, "geometric": False}
    assert exit_code_for(reports, compliant) == 0
    reports.append(_report("cond3", "harmonic", FAIL))
    assert exit_code_for(reports, compliant) == 1
    assert exit_code_for([_report("growth", "harmonic", MEASURED)], compliant) == 0


def test_payload_embeds_config_and_summary():
    payload = build_payload([_report("cond1", "harmonic", FAIL)], {"seed": 1})
    assert payload["config"] == {"seed": 1}
    assert payload["summary"] == {
        "checks": ["cond1"],
        "failed": ["cond1"],
        "verdict": FAIL,
    }
    assert "generated" in payload[METADATA_KEY]


def test_report_round_trip_and_compare_mode(tmp_path):
    report = _report("lemma2", "harmonic", PASS)
    report.measurements = {"max_ratio": 0.2}
    path = write_report("lemmas", [report], {"seed": 3}, str(tmp_path))
    assert path.endswith("lemmas-report.json")

    full = load_report(path)
    assert METADATA_KEY in full
    compared = load_report(path, compare=True)
    assert METADATA_KEY not in compared
    assert report_from_dict(compared["reports"][0]) == report


def test_load_report_rejects_other_json(tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"hello": 1}), encoding="utf-8")
    with pytest.raises(SerializationError):
        load_report(str(path))


def test_merge_collects_counterexamples():
    failing = _report("cond2", "geometric", FAIL, [{"a": [1, 2, 3, 4]}])
    first = build_payload([failing], {})
    second = build_payload([_report("cond1", "harmonic", PASS)], {})
    merged = merge_payloads([first, second])
    assert merged["summary"]["inputs"] == 2
    assert merged["summary"]["failed"] == ["geometric:cond2"]
    assert merged["summary"]["verdict"] == FAIL
    assert merged["counterexamples"] == [
        {"check": "cond2", "fn": "geometric", "a": [1, 2, 3, 4]}
    ]
