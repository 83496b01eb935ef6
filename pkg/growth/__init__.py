from growth.base import (
    GrowthFunction,
    clamp_count,
    diagonal_constants,
    eval_f,
    gradient,
    hessian,
    numeric_function,
    scale,
)
from growth.checks import check_monotone
from growth.registry import (
    available_functions,
    get_function,
    register_function,
    unregister_function,
)

__all__ = [
    "GrowthFunction",
    "eval_f",
    "gradient",
    "hessian",
    "diagonal_constants",
    "scale",
    "numeric_function",
    "clamp_count",
    "check_monotone",
    "available_functions",
    "get_function",
    "register_function",
    "unregister_function",
]
