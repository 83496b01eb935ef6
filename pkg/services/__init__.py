from services.log_service import configure_logging
from services.report_service import exit_code_for, load_report, write_report
from services.rng_service import derive_key, generator, uniform_block
from services.run_config_service import RunConfig, load_run_config
from services.serialization_service import (
    read_distribution_json,
    read_network,
    read_pool,
    write_distribution_json,
    write_network,
    write_pool,
)

__all__ = [
    "configure_logging",
    "RunConfig",
    "load_run_config",
    "derive_key",
    "generator",
    "uniform_block",
    "write_report",
    "load_report",
    "exit_code_for",
    "write_pool",
    "read_pool",
    "write_distribution_json",
    "read_distribution_json",
    "write_network",
    "read_network",
]
