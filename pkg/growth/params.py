from typing import Iterable, Mapping, Optional

from core.errors import ConfigError


def reject_params(
    fn_id: str, params: Optional[Mapping[str, float]], allowed: Iterable[str]
) -> None:
    allowed = set(allowed)
    unknown = sorted(set(params or {}) - allowed)
    if unknown:
        expected = ", ".join(sorted(allowed)) if allowed else "no parameters"
        raise ConfigError(
            f"{fn_id}: unknown parameter(s) {', '.join(unknown)} (expected {expected})"
        )


def read_param(
    params: Optional[Mapping[str, float]],
    name: str,
    default: float,
    *,
    low: Optional[float] = None,
    high: Optional[float] = None,
) -> float:
    value = float((params or {}).get(name, default))
    if low is not None and not value > low:
        raise ConfigError(f"parameter {name}={value} must be > {low}")
    if high is not None and not value < high:
        raise ConfigError(f"parameter {name}={value} must be < {high}")
    return value
