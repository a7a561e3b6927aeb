"""System parameters and the flat ``key = value`` config format."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional


class ConfigError(ValueError):
    """Bad config value or unparsable config file."""

    def __init__(self, key: str, message: str, line: Optional[int] = None):
        self.key = key
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {message}")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    # geometry / users
    n_users: int = 5
    n_tx: int = 100
    n_rf: int = 5
    n_rays: int = 20
    array_rows: Optional[int] = None    # None -> nearest-square split of n_tx
    spacing: float = 0.5                # antenna spacing over wavelength

    # link budget
    bandwidth: float = 200e3            # Hz
    noise_psd_dbm: float = -174.0       # dBm/Hz
    p_max_dbm: float = 33.0
    path_gain: Optional[float] = None   # None -> calibrated from snr_calibration_db
    avg_snr: Optional[float] = None     # linear; None -> link budget
    snr_calibration_db: float = 40.0

    # power model
    pa_efficiency: float = 0.38
    p_one_rf: float = 12.9              # W
    p_shifter: float = 0.088            # W
    p_fix: float = 1.0                  # W
    p_cod: float = 0.1e-9               # W per bit/s
    l_tr: float = 12.8e9                # flops per W*s
    bits_per_symbol: float = 1.0
    c_cmplx: float = 1.0
    kappa: int = 2
    n_aod: int = 64
    delta_err: float = 0.1
    ce_scale: float = 1.0
    include_computation_power: bool = True
    tau: float = 1.0                    # listed with the defaults, used nowhere

    # cost coefficients
    beta_power: float = 0.9
    beta_t: float = 188.0
    beta_shifter: float = 1800.0
    beta_rf: float = 7800.0
    beta_bb: float = 6800.0

    # algorithm knobs
    step_interval: float = 0.1          # line-search grid spacing for mu
    eps1: Optional[float] = None        # None -> 1e-3 * sqrt(p_max)
    max_iters: int = 200
    eps2_rel: float = 1e-2
    max_alternations: int = 50
    n_randomizations: int = 100
    sdp_tol: float = 1e-7
    sdp_max_n: int = 512
    omp_target: str = "zf"              # "zf" or "bopt"

    # ---- derived quantities -------------------------------------------
    @property
    def p_max(self) -> float:
        return dbm_to_watt(self.p_max_dbm)

    @property
    def noise_power(self) -> float:
        """Noise power over the whole band, W."""
        return dbm_to_watt(self.noise_psd_dbm) * self.bandwidth

    @property
    def rows(self) -> int:
        if self.array_rows is not None:
            return self.array_rows
        return nearest_square_rows(self.n_tx)

    @property
    def cols(self) -> int:
        return self.n_tx // self.rows

    @property
    def subarray_size(self) -> int:
        return self.n_tx // self.n_rf

    @property
    def stop_tol(self) -> float:
        return self.eps1 if self.eps1 is not None else 1e-3 * math.sqrt(self.p_max)

    @property
    def gain(self) -> float:
        if self.path_gain is not None:
            return self.path_gain
        snr = 10.0 ** (self.snr_calibration_db / 10.0)
        return snr * self.noise_power * self.n_users / self.p_max

    @property
    def snr(self) -> float:
        if self.avg_snr is not None:
            return self.avg_snr
        return self.p_max / self.n_users * self.gain / self.noise_power

    def calibrated(self) -> "SystemConfig":
        """Freeze path gain and average SNR so later substitutions keep them."""
        return replace(self, path_gain=self.gain, avg_snr=self.snr)

    def validate(self) -> "SystemConfig":
        for key in ("n_users", "n_tx", "n_rf", "n_rays", "kappa", "n_aod",
                    "max_iters", "max_alternations", "n_randomizations", "sdp_max_n"):
            if getattr(self, key) < 1:
                raise ConfigError(key, "must be >= 1")
        if self.n_tx % self.n_rf:
            raise ConfigError("n_rf", f"n_tx={self.n_tx} is not divisible by n_rf={self.n_rf}")
        if not self.n_users <= self.n_rf <= self.n_tx:
            raise ConfigError("n_users", "need n_users <= n_rf <= n_tx")
        if self.n_tx % self.rows:
            raise ConfigError("array_rows", f"{self.rows} does not divide n_tx={self.n_tx}")
        for key in ("bandwidth", "spacing", "p_one_rf", "p_shifter", "p_fix",
                    "p_cod", "l_tr", "bits_per_symbol", "c_cmplx", "sdp_tol", "eps2_rel"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, "must be > 0")
        for key in ("path_gain", "avg_snr", "eps1"):
            value = getattr(self, key)
            if value is not None and not value > 0:
                raise ConfigError(key, "must be > 0")
        if not 0 < self.pa_efficiency <= 1:
            raise ConfigError("pa_efficiency", "must lie in (0, 1]")
        if not 0 < self.step_interval <= 1:
            raise ConfigError("step_interval", "must lie in (0, 1]")
        if not 0 < self.delta_err < 1:
            raise ConfigError("delta_err", "must lie in (0, 1)")
        if self.kappa < 2:
            raise ConfigError("kappa", "must be >= 2")
        if self.ce_scale < 0:
            raise ConfigError("ce_scale", "must be >= 0")
        for key in ("beta_power", "beta_t", "beta_shifter", "beta_rf", "beta_bb"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be >= 0")
        if self.omp_target not in ("zf", "bopt"):
            raise ConfigError("omp_target", "must be 'zf' or 'bopt'")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(p_max_w=self.p_max, noise_power_w=self.noise_power, rows=self.rows,
                 cols=self.cols, gain=self.gain, snr=self.snr, stop_tol=self.stop_tol)
        return d


def nearest_square_rows(n: int) -> int:
    """Largest divisor of ``n`` not above sqrt(n)."""
    r = math.isqrt(n)
    while n % r:
        r -= 1
    return r


_FIELDS = {f.name: f for f in fields(SystemConfig)}


def _coerce(key: str, raw: str, line: int):
    default = _FIELDS[key].default
    text = raw.strip()
    kind = _FIELDS[key].type
    try:
        if "bool" in str(kind):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if "str" in str(kind):
            return text
        if text.lower() == "none" and "Optional" in str(kind):
            return None
        if "int" in str(kind):
            value = float(text)
            if value != int(value):
                raise ValueError(text)
            return int(value)
        return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw.strip()!r} (default {default!r})", line) from None


def parse_config_text(text: str) -> dict:
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(body, "expected 'key = value'", lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(key, "unknown key", lineno)
        overrides[key] = _coerce(key, value, lineno)
    return overrides


def load_system_config(path: str | Path | None = None, **overrides) -> SystemConfig:
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    values.update(overrides)
    return SystemConfig(**values).validate()
