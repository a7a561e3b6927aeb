"""Trial-mean table of one metric per algorithm and sweep value from a sweep CSV."""
import argparse
import sys

from phonesim.runner import ALGORITHMS, power_saving_ratio, read_csv, trial_means


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("--metric", default="ee_bit_per_joule")
    ap.add_argument("--saving-vs", default=None, help="reference algorithm for the power saving ratio")
    args = ap.parse_args(argv)
    rows = read_csv(args.csv)
    if not rows:
        sys.exit("no rows")
    algs = [a for a in ALGORITHMS if any(r.algorithm == a for r in rows)]
    values = sorted({r.value for r in rows})
    means = {a: trial_means(rows, a, args.metric) for a in algs}
    print(f"{rows[0].param:>8} " + " ".join(f"{a:>14}" for a in algs))
    for v in values:
        print(f"{v:>8} " + " ".join(f"{means[a].get(v, float('nan')):>14.5g}" for a in algs))
    if args.saving_vs:
        print(f"\npower saving of phone vs {args.saving_vs}")
        for v, s in power_saving_ratio(rows, args.saving_vs).items():
            print(f"{v:>8} {s.ratio:+.4f}  ({s.reference_j_per_bit:.4g} vs {s.algorithm_j_per_bit:.4g} J/bit)")


if __name__ == "__main__":
    main()
