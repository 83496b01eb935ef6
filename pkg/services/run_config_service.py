import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from core.errors import ConfigError, UnknownCheckError
from services.rng_service import check_seed

logger = logging.getLogger(__name__)

CONFIG_ENV = "LCL_CONFIG_PATH"

COMMANDS = ("simulate", "exact", "resistance", "verify", "lemmas", "report-merge")
METHODS = ("exact", "tree", "pool")
FORMATS = ("json", "csv")
CHECK_IDS = (
    "cond1",
    "cond2",
    "cond3",
    "remark4",
    "lemma1",
    "lemma2",
    "tightness",
    "monotone",
    "expectation",
    "oracle",
)
LEMMA_CHECKS = ("lemma1", "lemma2", "tightness")
SEEDED_CHECKS = ("cond2", "remark4", "lemma1", "lemma2", "monotone", "oracle")
MIN_POOL_SIZE = 4

# name -> (default, provenance)
DEFAULT_TOLERANCES: Dict[str, Tuple[float, str]] = {
    "range_rtol": (1e-9, "calibrated"),
    "identity_rtol": (1e-13, "calibrated"),
    "equivalence_rtol": (1e-9, "calibrated"),
    "ks_threshold": (0.02, "calibrated"),
    "growth_ratio_atol": (0.05, "calibrated"),
    "oracle_ks": (0.01, "published"),
}

KEY_ALIASES = {
    "f": "fn_id",
    "fn": "fn_id",
    "function": "fn_id",
    "param": "fn_params",
    "params": "fn_params",
    "n": "n_values",
    "pool": "pool_size",
    "threads": "workers",
    "out": "out_dir",
    "format": "formats",
    "tolerance": "tolerances",
    "input": "inputs",
}


@dataclass
class RunConfig:
    command: str = ""
    fn_id: str = "harmonic"
    fn_params: Dict[str, float] = field(default_factory=dict)
    n_values: Optional[List[int]] = None
    method: str = "pool"
    pool_size: int = 100_000
    samples: int = 10_000
    delta0: Optional[float] = None
    atom_cap: int = 10**7
    trials: int = 100_000
    seed: Optional[int] = None
    workers: int = 1
    out_dir: str = "lcl-out"
    formats: List[str] = field(default_factory=lambda: ["json"])
    checks: List[str] = field(default_factory=list)
    check_identity: bool = False
    check_laplacian: bool = False
    exhaustive: bool = False
    ks_at: List[int] = field(default_factory=list)
    plot_data: bool = False
    log_level: Optional[str] = None
    inputs: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(
        default_factory=lambda: {k: v for k, (v, _) in DEFAULT_TOLERANCES.items()}
    )
    tolerance_sources: Dict[str, str] = field(
        default_factory=lambda: {k: s for k, (_, s) in DEFAULT_TOLERANCES.items()}
    )
    config_path: Optional[str] = None

    def generations(self, default: Sequence[int]) -> List[int]:
        return list(self.n_values) if self.n_values else list(default)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return KEY_ALIASES.get(key, key)


def parse_n_range(text: str) -> List[int]:
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError as exc:
        raise ConfigError(f"bad generation range {text!r}; use N or A..B") from exc
    if lo < 0 or hi < lo:
        raise ConfigError(f"generation range {text!r} is empty or negative")
    return list(range(lo, hi + 1))


def parse_pairs(items, what: str) -> Dict[str, float]:
    """k=v strings (or comma-separated lists of them) to a float mapping."""
    if isinstance(items, str):
        items = [items]
    out: Dict[str, float] = {}
    for item in items or []:
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise ConfigError(f"{what} {part!r} must look like key=value")
            key, value = part.split("=", 1)
            try:
                out[key.strip()] = float(value)
            except ValueError as exc:
                raise ConfigError(
                    f"{what} {key.strip()} has non-numeric value {value!r}"
                ) from exc
    return out


def parse_list(value) -> List[str]:
    if isinstance(value, (list, tuple)):
        parts = [str(v) for v in value]
    else:
        parts = str(value).split(",")
    return [p.strip() for p in parts if p.strip()]


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def read_config_file(path: Path) -> Dict[str, str]:
    """`key = value` lines; `#` starts a comment. Repeated keys accumulate."""
    data: Dict[str, str] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected `key = value`, got {raw!r}")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        value = value.strip()
        data[key] = f"{data[key]},{value}" if key in data else value
    return data


def _apply(config: RunConfig, key: str, value: Any, source: str) -> None:
    known = {f.name for f in fields(RunConfig)}
    if key not in known:
        raise ConfigError(f"unknown {source} key {key!r}")

    if key == "n_values":
        config.n_values = value if isinstance(value, list) else parse_n_range(value)
    elif key == "fn_params":
        config.fn_params.update(
            value if isinstance(value, dict) else parse_pairs(value, "parameter")
        )
    elif key == "tolerances":
        if isinstance(value, dict):
            overrides = value
        else:
            overrides = parse_pairs(value, "tolerance")
        for name, tol in overrides.items():
            if name not in DEFAULT_TOLERANCES:
                known = ", ".join(DEFAULT_TOLERANCES)
                raise ConfigError(f"unknown tolerance {name!r} (known: {known})")
            config.tolerances[name] = float(tol)
            config.tolerance_sources[name] = "override"
    elif key in ("formats", "checks", "inputs"):
        setattr(config, key, parse_list(value))
    elif key == "ks_at":
        config.ks_at = [int(v) for v in parse_list(value)]
    elif key in ("check_identity", "check_laplacian", "exhaustive", "plot_data"):
        setattr(config, key, _parse_bool(value))
    elif key in ("pool_size", "samples", "trials", "workers", "atom_cap"):
        try:
            setattr(config, key, int(float(value)))
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
    elif key == "seed":
        try:
            config.seed = check_seed(int(value))
        except ValueError as exc:
            raise ConfigError(f"bad seed {value!r}: {exc}") from exc
    elif key == "delta0":
        config.delta0 = None if value in (None, "") else float(value)
    else:
        setattr(config, key, value if value is None else str(value))


def resolve_config_path(explicit: Optional[str]) -> Optional[Path]:
    if explicit:
        path = Path(explicit)
        if not path.is_file():
            raise ConfigError(f"config file {explicit} does not exist")
        return path
    env_path = os.getenv(CONFIG_ENV)
    if env_path:
        path = Path(env_path)
        if path.is_file():
            return path
        logger.warning(
            "%s points at missing file %s; ignoring it", CONFIG_ENV, env_path
        )
    return None


def load_run_config(
    command: str,
    flags: Optional[Mapping[str, Any]] = None,
    config_path: Optional[str] = None,
) -> RunConfig:
    """Defaults, then the config file, then flags (flags win). Flags left at None
    are treated as not given."""
    config = RunConfig(command=command)

    path = resolve_config_path(config_path)
    if path is not None:
        config.config_path = str(path)
        for key, value in read_config_file(path).items():
            _apply(config, key, value, "config file")

    for key, value in (flags or {}).items():
        if value is None or value == [] or value is False:
            continue
        _apply(config, normalize_key(key), value, "flag")

    if command == "lemmas":
        config.checks = list(LEMMA_CHECKS)
    return validate_run_config(config)


def validate_run_config(config: RunConfig) -> RunConfig:
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}")
    if config.n_values is not None and (
        not config.n_values or min(config.n_values) < 0
    ):
        raise ConfigError("generation range must be non-empty and non-negative")
    if config.method not in METHODS:
        raise ConfigError(
            f"method must be one of {', '.join(METHODS)}, got {config.method!r}"
        )
    if config.pool_size < MIN_POOL_SIZE:
        raise ConfigError(
            f"pool size must be >= {MIN_POOL_SIZE}, got {config.pool_size}"
        )
    if config.delta0 is not None and config.delta0 < 0:
        raise ConfigError(f"delta0 must be >= 0, got {config.delta0}")
    if config.atom_cap < 1:
        raise ConfigError("atom cap must be >= 1")
    if config.trials < 1 or config.samples < 1:
        raise ConfigError("trials and samples must be >= 1")
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}")
    bad_formats = sorted(set(config.formats) - set(FORMATS))
    if bad_formats or not config.formats:
        raise ConfigError(f"formats must be a subset of {', '.join(FORMATS)}")

    unknown = [c for c in config.checks if c not in CHECK_IDS]
    if unknown:
        raise UnknownCheckError(
            f"unknown check id(s) {', '.join(unknown)} (known: {', '.join(CHECK_IDS)})"
        )
    if config.command == "verify" and not config.checks:
        raise ConfigError("verify needs --checks (comma-separated check ids)")
    if config.command == "report-merge" and not config.inputs:
        raise ConfigError("report-merge needs at least one input report")

    if config.seed is None and needs_seed(config):
        raise ConfigError(
            f"{config.command} is stochastic here; "
            "pass --seed so the run is reproducible"
        )
    return config


def needs_seed(config: RunConfig) -> bool:
    if config.command == "simulate":
        return config.method != "exact"
    if config.command == "resistance":
        return not config.exhaustive
    if config.command in ("verify", "lemmas"):
        stochastic = set(SEEDED_CHECKS)
        if config.method != "exact":
            stochastic.add("expectation")
        return bool(stochastic & set(config.checks))
    return False


def tolerance_provenance(config: RunConfig, *names: str) -> Dict[str, str]:
    return {name: config.tolerance_sources[name] for name in names}
