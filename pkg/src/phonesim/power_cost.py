"""Itemized transmitter power, hardware/power cost and efficiency metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .config import ConfigError, SystemConfig
from .system_model import HybridPrecoder, Structure


@dataclass(frozen=True)
class PowerBreakdown:
    p_pa: float
    p_rf: float
    p_ce: float
    p_cd: float
    p_lp_bb: float
    p_lp_rf: float
    p_complex: float
    p_fix: float

    @property
    def p_total(self) -> float:
        return (self.p_pa + self.p_rf + self.p_ce + self.p_cd + self.p_lp_bb
                + self.p_lp_rf + self.p_complex + self.p_fix)

    @property
    def communication(self) -> float:
        return self.p_pa + self.p_rf

    @property
    def computation(self) -> float:
        return self.p_ce + self.p_cd + self.p_lp_bb + self.p_lp_rf + self.p_complex

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["p_total"] = self.p_total
        return d


@dataclass(frozen=True)
class CostBreakdown:
    c_hardware: float
    c_power: float

    @property
    def c_total(self) -> float:
        return self.c_hardware + self.c_power


def n_shifters(cfg: SystemConfig, structure: Structure) -> int:
    return cfg.n_tx if Structure(structure) is Structure.PARTIAL else cfg.n_tx * cfg.n_rf


def pa_power(p: HybridPrecoder | np.ndarray, cfg: SystemConfig) -> float:
    """Radiated power over PA efficiency; accepts a hybrid or a digital precoder."""
    b = p.matrix() if isinstance(p, HybridPrecoder) else np.asarray(p)
    return float(np.sum(np.abs(b) ** 2)) / cfg.pa_efficiency


def rf_chain_power(cfg: SystemConfig) -> float:
    return cfg.n_rf * cfg.p_one_rf


def training_gain(stage: int, cfg: SystemConfig) -> float:
    """Beamforming gain of hierarchical training stage ``stage`` (1-based)."""
    return float(min(cfg.kappa ** stage, cfg.n_tx))


def channel_estimation_power(cfg: SystemConfig) -> float:
    stages = round(math.log(cfg.n_aod, cfg.kappa))
    if cfg.kappa ** stages != cfg.n_aod:
        raise ConfigError("n_aod", f"{cfg.n_aod} is not a power of kappa={cfg.kappa}")
    bracket = (cfg.kappa ** 2 - 1) * stages / cfg.delta_err - 2
    if bracket < 0:
        raise ConfigError("delta_err", "training-error bracket is negative")
    inv_gain = sum(1.0 / training_gain(s, cfg) for s in range(1, stages + 1))
    return (cfg.ce_scale * cfg.n_users * cfg.n_rays * cfg.kappa ** 2
            * (2.0 / cfg.snr) * bracket * inv_gain)


def rate_power_slope(cfg: SystemConfig) -> float:
    """Watts per bit/s spent on coding plus baseband precoding."""
    if not cfg.include_computation_power:
        return 0.0
    return cfg.p_cod + 2.0 * cfg.n_rf / (cfg.bits_per_symbol * cfg.l_tr)


def computation_power(cfg: SystemConfig, sum_rate: float, structure: Structure,
                      complexity: float) -> dict:
    """Channel estimation, coding, linear processing and algorithm power, in W."""
    if sum_rate < 0:
        raise ValueError("sum_rate must be non-negative")
    if not cfg.include_computation_power:
        return dict(p_ce=0.0, p_cd=0.0, p_lp_bb=0.0, p_lp_rf=0.0, p_complex=0.0)
    return dict(
        p_ce=channel_estimation_power(cfg),
        p_cd=cfg.p_cod * sum_rate,
        p_lp_bb=2.0 * sum_rate * cfg.n_rf / (cfg.bits_per_symbol * cfg.l_tr),
        p_lp_rf=n_shifters(cfg, structure) * cfg.p_shifter,
        p_complex=complexity * cfg.c_cmplx / cfg.l_tr,
    )


def phone_complexity(cfg: SystemConfig) -> float:
    return float(cfg.n_tx) ** 3 + float(cfg.n_users) ** 3.5


def omp_complexity(cfg: SystemConfig) -> float:
    return float(cfg.n_rf * cfg.n_rays * cfg.n_tx * cfg.n_users)


def breakdown(cfg: SystemConfig, radiated: float, sum_rate: float, structure: Structure,
              complexity: float) -> PowerBreakdown:
    """Assemble the breakdown from radiated power ``||B||_F^2`` and sum rate."""
    return PowerBreakdown(
        p_pa=radiated / cfg.pa_efficiency,
        p_rf=rf_chain_power(cfg),
        p_fix=cfg.p_fix,
        **computation_power(cfg, sum_rate, structure, complexity),
    )


def total_power(cfg: SystemConfig, p: HybridPrecoder, sum_rate: float,
                structure: Structure | None = None,
                complexity: float | None = None) -> PowerBreakdown:
    structure = p.structure if structure is None else Structure(structure)
    if complexity is None:
        complexity = phone_complexity(cfg)
    radiated = float(np.sum(np.abs(p.matrix()) ** 2))
    return breakdown(cfg, radiated, sum_rate, structure, complexity)


def energy_efficiency(sum_rate: float, pb: PowerBreakdown) -> float:
    return sum_rate / pb.p_total


def cost_breakdown(cfg: SystemConfig, pb: PowerBreakdown, structure: Structure) -> CostBreakdown:
    hardware = (cfg.beta_t * cfg.n_tx + cfg.beta_shifter * n_shifters(cfg, structure)
                + cfg.beta_rf * cfg.n_rf + cfg.beta_bb)
    return CostBreakdown(c_hardware=hardware, c_power=cfg.beta_power * pb.p_total)


def cost_efficiency(cfg: SystemConfig, sum_rate: float, pb: PowerBreakdown,
                    structure: Structure) -> float:
    return sum_rate / cost_breakdown(cfg, pb, structure).c_total

