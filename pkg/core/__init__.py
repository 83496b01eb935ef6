from core.errors import (
    CapExceededError,
    ConfigError,
    DegenerateError,
    DepthLimitError,
    DomainError,
    EmptyPoolError,
    LclError,
    RegistrationError,
    SerializationError,
    SolverError,
    SupportExplosionError,
    UnknownCheckError,
    UnknownFunctionError,
)
from core.models import (
    FAIL,
    MEASURED,
    PASS,
    DiscreteDistribution,
    GrowthRecord,
    GrowthTrace,
    PoolLineage,
    ResistorNetwork,
    SamplePool,
    StatefulExactResult,
    StatefulResistanceResult,
    StatefulSimulationResult,
    StatefulVerifyResult,
    VerificationReport,
)
from core.state import RunState

__all__ = [
    "RunState",
    "PASS",
    "FAIL",
    "MEASURED",
    "VerificationReport",
    "PoolLineage",
    "SamplePool",
    "DiscreteDistribution",
    "ResistorNetwork",
    "GrowthRecord",
    "GrowthTrace",
    "StatefulSimulationResult",
    "StatefulExactResult",
    "StatefulResistanceResult",
    "StatefulVerifyResult",
    "LclError",
    "ConfigError",
    "UnknownCheckError",
    "UnknownFunctionError",
    "DomainError",
    "RegistrationError",
    "DepthLimitError",
    "SupportExplosionError",
    "CapExceededError",
    "SolverError",
    "DegenerateError",
    "EmptyPoolError",
    "SerializationError",
]
