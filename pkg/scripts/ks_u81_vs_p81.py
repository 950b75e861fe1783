"""Kolmogorov-Smirnov comparison of U81 against two permutation 2-unitaries.

Samples the linear entropy of output states for each gate, writes the
histogram and statistics, and reports how the pairwise statistics compare
with the 5% critical value. A false-positive calibration on P81 is optional.

    python3 scripts/ks_u81_vs_p81.py --n 10000 --seed 0 --calibrate
"""
import argparse
import json
import sys
from pathlib import Path

from qconv import cli
from qconv import families as F
from qconv import stats as ST


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/ks"))
    ap.add_argument("--calibrate", action="store_true", help="also run 100 P81-vs-P81 trials")
    args = ap.parse_args()

    code = cli.main(["repro", "fig4", "--n", str(args.n), "--seed", str(args.seed), "--out", str(args.out)])
    rows = json.loads((args.out / "fig4_ks.json").read_text())
    crit = ST.ks_critical_value(args.n, args.n)
    print(f"critical value at 5%: {crit:.5f}")
    for name, r in rows.items():
        print(f"{name:16s} D = {r['statistic']:.5f}  ({r['statistic'] / crit:.2f} x critical)  p = {r['p_display']}")
    if args.calibrate:
        hits = ST.null_calibration(F.build_p81(), args.n, 100, seed=args.seed)
        print(f"null calibration: {hits} of 100 trials rejected at 5%")
    return code


if __name__ == "__main__":
    sys.exit(main())
