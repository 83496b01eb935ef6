import math
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

import numpy as np

from core.errors import DomainError

if TYPE_CHECKING:
    from core.state import RunState


PASS = "pass"
FAIL = "fail"
MEASURED = "measured"


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass
class VerificationReport:
    check: str
    fn: str
    params: Dict[str, Any] = field(default_factory=dict)
    verdict: str = MEASURED
    measurements: Dict[str, Any] = field(default_factory=dict)
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)
    threshold_provenance: Dict[str, str] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PoolLineage:
    method: str  # tree | pool
    pool_size: int
    generation_seeds: Tuple[Tuple[int, str], ...] = ()


@dataclass(frozen=True)
class SamplePool:
    n: int
    values: np.ndarray
    fn_id: str
    master_seed: int
    lineage: PoolLineage

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.n < 0:
            raise DomainError(f"generation index must be >= 0, got {self.n}")

    @property
    def size(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class DiscreteDistribution:
    support: np.ndarray
    probs: np.ndarray
    n: int
    quant_error_bound: float = 0.0
    fn_id: str = ""
    delta_policy: str = "exact"

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", _frozen_array(self.support))
        object.__setattr__(self, "probs", _frozen_array(self.probs))
        if self.support.ndim != 1 or self.support.shape != self.probs.shape:
            raise DomainError("support and probs must be 1-D arrays of equal length")
        if self.support.size == 0:
            raise DomainError("distribution must have at least one atom")
        if self.support.size > 1 and not np.all(np.diff(self.support) > 0):
            raise DomainError("support must be strictly increasing")
        if np.any(self.probs <= 0):
            raise DomainError("all probabilities must be positive")
        total = math.fsum(self.probs.tolist())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {total!r}, expected 1")
        if self.quant_error_bound < 0:
            raise DomainError("quant_error_bound must be >= 0")

    @property
    def atom_count(self) -> int:
        return int(self.support.shape[0])

    @property
    def is_exact(self) -> bool:
        return self.quant_error_bound == 0.0


@dataclass(frozen=True)
class ResistorNetwork:
    node_count: int
    edges: Tuple[Tuple[int, int, float], ...]
    terminals: Tuple[int, int]
    depth: int = 0
    seed: Optional[int] = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass
class GrowthRecord:
    n: int
    mean: float
    variance: float
    m4: float
    source: str  # exact | pool | tree
    size: int
    se_mean: Optional[float] = None
    se_var: Optional[float] = None


@dataclass
class GrowthTrace:
    fn_id: str
    records: List[GrowthRecord] = field(default_factory=list)

    def append(self, record: GrowthRecord) -> None:
        if self.records and record.n != self.records[-1].n + 1:
            raise DomainError(
                f"trace generations must be contiguous: got n={record.n} "
                f"after n={self.records[-1].n}"
            )
        if record.variance < 0:
            raise DomainError(f"negative variance at n={record.n}")
        self.records.append(record)

    @property
    def generations(self) -> List[int]:
        return [r.n for r in self.records]

    def record(self, n: int) -> GrowthRecord:
        for r in self.records:
            if r.n == n:
                return r
        raise KeyError(f"generation {n} not in trace")


@dataclass
class StatefulSimulationResult:
    trace: GrowthTrace
    state: "RunState"
    reports: List[VerificationReport] = field(default_factory=list)


@dataclass
class StatefulExactResult:
    distributions: List[DiscreteDistribution]
    state: "RunState"
    reports: List[VerificationReport] = field(default_factory=list)


@dataclass
class StatefulResistanceResult:
    values: np.ndarray
    state: "RunState"
    reports: List[VerificationReport] = field(default_factory=list)


@dataclass
class StatefulVerifyResult:
    reports: List[VerificationReport]
    state: "RunState"
    exit_code: int = 0
