from typing import Mapping, Optional

from core.errors import DomainError, UnknownFunctionError
from core.state import RunState
from growth.base import GrowthFunction
from growth.registry import get_function
from services.run_config_service import RunConfig


def build_run_state(config: RunConfig) -> RunState:
    return RunState(
        command=config.command,
        fn_id=config.fn_id,
        fn_params=dict(config.fn_params),
        seed=config.seed,
        workers=config.workers,
        generations=list(config.n_values or []),
        method=config.method,
        config=config.to_dict(),
        output_files=[],
        checks_run=[],
        checks_failed=[],
        history=[],
        exit_code=0,
        done=False,
    )


def load_function(config: RunConfig) -> GrowthFunction:
    return get_function(config.fn_id, config.fn_params)


def file_stem(fn_id: str) -> str:
    return fn_id.replace("*", "x").replace("/", "_")


def is_compliant(fn_id: str, params: Optional[Mapping[str, float]] = None) -> bool:
    """theorem_compliant flag for a report's fn id; scaled ids look like base*eps."""
    base, _, eps = fn_id.partition("*")
    own = dict(params or {})
    try:
        if eps:
            own["eps"] = float(eps)
        return get_function(base, own).theorem_compliant
    except (UnknownFunctionError, DomainError, ValueError):
        return False
