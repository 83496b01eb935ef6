import logging
import threading
from typing import Callable, Dict, List, Mapping, Optional

from core.errors import UnknownFunctionError
from growth import geometric, harmonic, power_mean, sin2_perturbed, weighted_geometric
from growth.base import GrowthFunction, check_diagonal_constants, scale
from growth.params import read_param

logger = logging.getLogger(__name__)

Builder = Callable[[Optional[Mapping[str, float]]], GrowthFunction]

SCALE_PARAM = "eps"

FUNCTION_REGISTRY: Dict[str, Builder] = {
    harmonic.FUNCTION_ID: harmonic.build,
    geometric.FUNCTION_ID: geometric.build,
    power_mean.FUNCTION_ID: power_mean.build,
    weighted_geometric.FUNCTION_ID: weighted_geometric.build,
    sin2_perturbed.FUNCTION_ID: sin2_perturbed.build,
}
BUILTIN_IDS = tuple(FUNCTION_REGISTRY)

_registry_lock = threading.Lock()


def available_functions() -> List[str]:
    return sorted(FUNCTION_REGISTRY)


def register_function(name: str, builder: Builder, *, replace: bool = False) -> None:
    """Registers a user growth function; meant for startup/configuration only."""
    with _registry_lock:
        if name in FUNCTION_REGISTRY and not replace:
            raise KeyError(f"Growth function already registered: {name}")
        fn = builder({})
        check_diagonal_constants(fn)
        FUNCTION_REGISTRY[name] = builder
    logger.info(
        "registered growth function %s (cx=%g, cy=%g, numeric derivatives=%s)",
        name,
        fn.cx,
        fn.cy,
        fn.numeric_derivatives,
    )


def unregister_function(name: str) -> None:
    if name in BUILTIN_IDS:
        raise KeyError(f"Cannot unregister built-in growth function: {name}")
    with _registry_lock:
        FUNCTION_REGISTRY.pop(name, None)


def get_function(
    name: str, params: Optional[Mapping[str, float]] = None
) -> GrowthFunction:
    if name not in FUNCTION_REGISTRY:
        raise UnknownFunctionError(
            f"Unknown growth function: {name} "
            f"(available: {', '.join(available_functions())})"
        )

    own = dict(params or {})
    eps = None
    if SCALE_PARAM in own:
        eps = read_param(own, SCALE_PARAM, 1.0)
        own.pop(SCALE_PARAM)

    fn = FUNCTION_REGISTRY[name](own)
    check_diagonal_constants(fn)

    if eps is not None:
        fn = scale(fn, eps)
    return fn
