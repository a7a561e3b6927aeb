"""Monte Carlo sweeps over paired channel draws, CSV output and post-processing."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import power_cost as pc
from .config import ConfigError, SystemConfig, parse_config_text
from .factorization import phone
from .omp import omp_hybrid, zf_target
from .system_model import ChannelSet, HybridPrecoder, Structure, sample_channel, sum_rate
from .upper_bound import optimize_digital

log = logging.getLogger(__name__)

ALGORITHMS = ("phone", "omp_full", "omp_partial")
PARAM_ALIASES = {"nt": "n_tx", "nrf": "n_rf", "k": "n_users",
                 "n_tx": "n_tx", "n_rf": "n_rf", "n_users": "n_users"}
CSV_COLUMNS = ("algorithm", "structure", "param", "value", "trial", "seed", "sum_rate_bps",
               "p_pa_w", "p_rf_w", "p_ce_w", "p_cd_w", "p_lp_bb_w", "p_lp_rf_w",
               "p_complex_w", "p_fix_w", "p_total_w", "ee_bit_per_joule",
               "se_bit_per_s_per_hz", "cost_total", "cost_eff", "converged")
FAILED = -1

BASELINE_NOTES = (
    "omp target: zero-forcing precoder (omp_target=bopt switches to the digital EE optimum); "
    "dictionary: true ray responses; partial variant: global greedy selection, chain j takes "
    "the j-th selected response on its own sub-array, baseband refit by least squares"
)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str = "n_tx"
    values: tuple = (100,)
    trials: int = 30
    base_seed: int = 0
    algorithms: tuple = ALGORITHMS

    def validate(self, cfg: SystemConfig) -> "SweepSpec":
        if self.parameter not in ("n_tx", "n_rf", "n_users"):
            raise ConfigError("sweep_param", f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ConfigError("sweep_values", "needs at least one value")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise ConfigError("algorithms", f"unknown or empty algorithm list {bad}")
        for v in self.values:
            point_config(cfg, self.parameter, v)
        return self


@dataclass
class MetricsRecord:
    algorithm: str
    structure: str
    param: str
    value: int
    trial: int
    seed: int
    sum_rate_bps: float
    p_pa_w: float
    p_rf_w: float
    p_ce_w: float
    p_cd_w: float
    p_lp_bb_w: float
    p_lp_rf_w: float
    p_complex_w: float
    p_fix_w: float
    p_total_w: float
    ee_bit_per_joule: float
    se_bit_per_s_per_hz: float
    cost_total: float
    cost_eff: float
    converged: int

    @property
    def failed(self) -> bool:
        return self.converged == FAILED


# ---------------------------------------------------------------- seeding
_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def mix_seed(*parts: int) -> int:
    """Order-sensitive 64-bit hash of integers, stable across runs and platforms."""
    h = 0
    for p in parts:
        h = _splitmix64(h ^ (int(p) & _MASK))
    return h


# ---------------------------------------------------------------- config
SWEEP_KEYS = {"sweep_param", "sweep_values", "trials", "base_seed", "algorithms"}


def load_config(path: str | Path | None) -> tuple[SystemConfig, SweepSpec]:
    """Read a flat ``key = value`` file holding system and sweep settings."""
    text = Path(path).read_text() if path is not None else ""
    sys_lines, sweep = [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        key = body.split("=", 1)[0].strip() if "=" in body else None
        if key in SWEEP_KEYS:
            sweep[key] = (body.split("=", 1)[1].strip(), lineno)
            sys_lines.append("")
        else:
            sys_lines.append(raw)
    cfg = SystemConfig(**parse_config_text("\n".join(sys_lines))).validate().calibrated()
    kwargs = {}
    try:
        if "sweep_param" in sweep:
            name = sweep["sweep_param"][0]
            kwargs["parameter"] = PARAM_ALIASES.get(name, name)
        if "sweep_values" in sweep:
            kwargs["values"] = tuple(int(v) for v in sweep["sweep_values"][0].split(",") if v.strip())
        if "trials" in sweep:
            kwargs["trials"] = int(sweep["trials"][0])
        if "base_seed" in sweep:
            kwargs["base_seed"] = int(sweep["base_seed"][0])
        if "algorithms" in sweep:
            kwargs["algorithms"] = tuple(a.strip() for a in sweep["algorithms"][0].split(",") if a.strip())
    except ValueError as err:
        raise ConfigError("sweep", str(err)) from None
    spec = SweepSpec(**kwargs)
    if "values" not in kwargs:
        spec = replace(spec, values=(getattr(cfg, spec.parameter),))
    return cfg, spec.validate(cfg)


def point_config(cfg: SystemConfig, parameter: str, value: int) -> SystemConfig:
    return replace(cfg, **{parameter: int(value)}).validate()


# ---------------------------------------------------------------- evaluation
def evaluate(ch: ChannelSet, p: HybridPrecoder, cfg: SystemConfig, algorithm: str,
             complexity: float, converged: bool, param: str, value: int, trial: int,
             seed: int) -> MetricsRecord:
    rate = sum_rate(ch, p, cfg)
    pb = pc.total_power(cfg, p, rate, p.structure, complexity)
    cost = pc.cost_breakdown(cfg, pb, p.structure)
    return MetricsRecord(
        algorithm=algorithm, structure=p.structure.value, param=param, value=int(value),
        trial=int(trial), seed=int(seed), sum_rate_bps=rate,
        p_pa_w=pb.p_pa, p_rf_w=pb.p_rf, p_ce_w=pb.p_ce, p_cd_w=pb.p_cd,
        p_lp_bb_w=pb.p_lp_bb, p_lp_rf_w=pb.p_lp_rf, p_complex_w=pb.p_complex,
        p_fix_w=pb.p_fix, p_total_w=pb.p_total,
        ee_bit_per_joule=pc.energy_efficiency(rate, pb),
        se_bit_per_s_per_hz=rate / cfg.bandwidth,
        cost_total=cost.c_total, cost_eff=rate / cost.c_total,
        converged=int(bool(converged)),
    )


def _failed_record(algorithm, param, value, trial, seed) -> MetricsRecord:
    structure = "partial" if algorithm in ("phone", "omp_partial") else "full"
    nan = float("nan")
    numeric = {f.name: nan for f in fields(MetricsRecord)
               if f.name not in ("algorithm", "structure", "param", "value", "trial", "seed", "converged")}
    return MetricsRecord(algorithm=algorithm, structure=structure, param=param, value=int(value),
                         trial=int(trial), seed=int(seed), converged=FAILED, **numeric)


def run_algorithm(algorithm: str, ch: ChannelSet, cfg: SystemConfig, seed: int):
    """Precoder, complexity and convergence flag for one algorithm on one draw."""
    alg_seed = mix_seed(seed, ALGORITHMS.index(algorithm) + 1)
    trace = {}
    if algorithm == "phone":
        res = phone(ch, cfg, alg_seed)
        trace = dict(digital=[asdict(t) for t in res.digital.trace],
                     factorization=res.factorization.diagnostics)
        return res.precoder, pc.phone_complexity(cfg), res.converged, trace
    structure = Structure.FULL if algorithm == "omp_full" else Structure.PARTIAL
    if cfg.omp_target == "bopt":
        target = optimize_digital(ch, cfg, alg_seed).b
    else:
        target = zf_target(ch, cfg)
    return omp_hybrid(ch, target, cfg, structure), pc.omp_complexity(cfg), True, trace


def run_cell(cfg: SystemConfig, spec: SweepSpec, value: int, trial: int, with_trace: bool = False):
    """All requested algorithms on one shared channel draw."""
    seed = mix_seed(spec.base_seed, value, trial)
    point = point_config(cfg, spec.parameter, value)
    ch = sample_channel(point, seed)
    records, traces = [], []
    for algorithm in spec.algorithms:
        try:
            p, complexity, converged, trace = run_algorithm(algorithm, ch, point, seed)
            records.append(evaluate(ch, p, point, algorithm, complexity, converged,
                                    spec.parameter, value, trial, seed))
            if with_trace:
                traces.append(dict(algorithm=algorithm, value=int(value), trial=int(trial),
                                   seed=int(seed), **trace))
        except Exception:  # a failed row must not stop the sweep
            log.exception("algorithm %s failed at %s=%s trial %s", algorithm,
                          spec.parameter, value, trial)
            records.append(_failed_record(algorithm, spec.parameter, value, trial, seed))
    return records, traces


def _run_cell_args(args):
    return run_cell(*args)


def _sort_key(spec: SweepSpec):
    order = {v: i for i, v in enumerate(spec.values)}
    return lambda r: (order[r.value], r.trial, spec.algorithms.index(r.algorithm))


def run_sweep(cfg: SystemConfig, spec: SweepSpec, workers: int = 1,
              trace_path: str | Path | None = None) -> list[MetricsRecord]:
    spec.validate(cfg)
    cells = [(cfg, spec, v, t, trace_path is not None)
             for v in spec.values for t in range(spec.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_args, cells))
    else:
        results = [run_cell(*c) for c in cells]
    records = sorted((r for recs, _ in results for r in recs), key=_sort_key(spec))
    if trace_path is not None:
        with open(trace_path, "w") as fh:
            for _, traces in results:
                for t in traces:
                    fh.write(json.dumps(t, sort_keys=True, default=float) + "\n")
    return records


# ---------------------------------------------------------------- CSV
def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(records, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in records:
            fh.write(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) + "\n")


def read_csv(path: str | Path) -> list[MetricsRecord]:
    kinds = {f.name: f.type for f in fields(MetricsRecord)}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {}
            for k, v in row.items():
                kind = kinds[k]
                vals[k] = int(v) if kind == "int" else float(v) if kind == "float" else v
            out.append(MetricsRecord(**vals))
    return out


def write_metadata(cfg: SystemConfig, spec: SweepSpec, path: str | Path) -> None:
    meta = dict(config=cfg.to_dict(), sweep=asdict(spec), baselines=BASELINE_NOTES)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- post-processing
@dataclass(frozen=True)
class SavingPoint:
    value: int
    ratio: float
    reference_j_per_bit: float
    algorithm_j_per_bit: float
    defined: bool = True


def trial_means(records, algorithm: str, metric: str) -> dict:
    """Mean of ``metric`` per sweep value over non-failed rows of ``algorithm``."""
    groups: dict = {}
    for r in records:
        if r.algorithm == algorithm and not r.failed:
            groups.setdefault(r.value, []).append(getattr(r, metric))
    return {v: float(np.mean(xs)) for v, xs in groups.items()}


def power_saving_ratio(records, reference_algorithm: str, algorithm: str = "phone") -> dict:
    """Relative cut in trial-mean energy per bit against a reference algorithm."""
    out = {}
    p_ref = trial_means(records, reference_algorithm, "p_total_w")
    r_ref = trial_means(records, reference_algorithm, "sum_rate_bps")
    p_alg = trial_means(records, algorithm, "p_total_w")
    r_alg = trial_means(records, algorithm, "sum_rate_bps")
    for v in sorted(set(p_ref) & set(p_alg)):
        if r_ref[v] <= 0 or r_alg[v] <= 0:
            log.warning("power saving undefined at value %s (zero mean rate)", v)
            out[v] = SavingPoint(v, math.nan, math.nan, math.nan, defined=False)
            continue
        ref = p_ref[v] / r_ref[v]
        alg = p_alg[v] / r_alg[v]
        out[v] = SavingPoint(v, (ref - alg) / ref, ref, alg)
    return out
