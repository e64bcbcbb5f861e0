"""Completion time of each offload option as the link rate is swept.

Writes a CSV with one row per (rate, alpha_k, beta_m, entropy) and prints the
planner's choice at a few reference rates.
"""
import argparse
import csv
import sys

import numpy as np

from stae import latency as lm
from stae import planner as pl


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="completion_vs_rate.csv")
    ap.add_argument("--rates", default="10,1000,40", help="start,stop,count on a log grid (Mbps)")
    ap.add_argument("--deadline", type=float, default=100.0)
    ap.add_argument("--beta", type=float, default=0.4)
    args = ap.parse_args(argv)

    lo, hi, n = args.rates.split(",")
    rates = np.geomspace(float(lo), float(hi), int(n))
    profile = lm.default_profile()

    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma_mbps", "alpha_k", "beta_m_percent", "entropy_on", "completion_ms", "accuracy_pct"])
        for g in rates:
            link = lm.LinkModel(float(g))
            for a in (1, 2, 4, 8, 16):
                for ent in (False, True):
                    opt = pl.offload_option(a, args.beta, ent, profile)
                    w.writerow([f"{g:.6g}", a, args.beta * 100, ent, f"{opt.completion_ms(link):.4f}", opt.accuracy_pct])

    for g in (50, 100, 200, 500):
        d = pl.plan(lm.LinkModel(g), args.deadline, profile, betas=(1.0, args.beta), strict=True)
        print(f"{g:>5} Mbps -> {d.mode} a={d.alpha_k} b={d.beta_m:.0%} entropy={d.entropy_on} "
              f"t={d.predicted_completion_ms:.2f} ms acc={d.predicted_accuracy_pct}")
    print(f"wrote {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
