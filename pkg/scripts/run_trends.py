"""Sweeps behind the trend plots: EE, SE and cost efficiency versus N_T, N_RF and K.

Writes one CSV per sweep into --out and prints trial-mean tables.
"""
import argparse
from dataclasses import replace
from pathlib import Path

from phonesim.config import SystemConfig
from phonesim.runner import SweepSpec, power_saving_ratio, run_sweep, trial_means, write_csv, write_metadata

SWEEPS = {
    # name: (parameter, values, n_tx override, config overrides)
    "antennas": ("n_tx", (25, 50, 75, 100), None, {}),
    "antennas_comm_only": ("n_tx", (25, 50, 75, 100), None, dict(include_computation_power=False)),
    "rf_chains": ("n_rf", (5, 6, 10, 14), 210, {}),
    "users": ("n_users", (1, 2, 3, 4, 5), None, {}),
}
METRICS = ("ee_bit_per_joule", "se_bit_per_s_per_hz", "cost_eff", "p_total_w")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(SWEEPS))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = SystemConfig().calibrated()
    for name in args.only or SWEEPS:
        param, values, n_tx, extra = SWEEPS[name]
        cfg = replace(base, **extra, **({"n_tx": n_tx} if n_tx else {}))
        spec = SweepSpec(param, values, args.trials, args.seed)
        rows = run_sweep(cfg, spec, workers=args.workers)
        write_csv(rows, out / f"{name}.csv")
        write_metadata(cfg, spec, out / f"{name}.csv.meta.json")
        print(f"\n== {name} ({param}) ==")
        for metric in METRICS:
            print(metric)
            for alg in spec.algorithms:
                means = trial_means(rows, alg, metric)
                print(f"  {alg:>12}: " + "  ".join(f"{v}={means[v]:.4g}" for v in values))
        for ref in ("omp_full", "omp_partial"):
            saving = power_saving_ratio(rows, ref)
            print(f"  saving vs {ref}: " + "  ".join(f"{v}={s.ratio:+.3f}" for v, s in saving.items()))


if __name__ == "__main__":
    main()
