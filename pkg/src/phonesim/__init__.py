"""Energy-efficient hybrid precoding with computation-aware power modeling."""
from .config import ConfigError, SystemConfig, load_system_config
from .factorization import FactorizationProblem, factorize, phone
from .omp import omp_hybrid, zf_target
from .power_cost import PowerBreakdown, energy_efficiency, total_power
from .runner import MetricsRecord, SweepSpec, load_config, power_saving_ratio, run_sweep, write_csv
from .system_model import ChannelSet, HybridPrecoder, Structure, sample_channel, sum_rate
from .upper_bound import optimize_digital

__all__ = [
    "ChannelSet", "ConfigError", "FactorizationProblem", "HybridPrecoder", "MetricsRecord",
    "PowerBreakdown", "Structure", "SweepSpec", "SystemConfig", "energy_efficiency",
    "factorize", "load_config", "load_system_config", "omp_hybrid", "optimize_digital",
    "phone", "power_saving_ratio", "run_sweep", "sample_channel", "sum_rate", "total_power",
    "write_csv", "zf_target",
]
