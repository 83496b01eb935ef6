from workflows.exact_flow import run_exact_flow
from workflows.report_merge_flow import run_report_merge_flow
from workflows.resistance_flow import run_resistance_flow
from workflows.simulate_flow import run_simulate_flow
from workflows.verify_flow import run_verify_flow

__all__ = [
    "run_simulate_flow",
    "run_exact_flow",
    "run_resistance_flow",
    "run_verify_flow",
    "run_report_merge_flow",
]
