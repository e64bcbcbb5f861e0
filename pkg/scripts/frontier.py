"""Accuracy/latency frontier at a fixed rate and deadline."""
import argparse

from stae import latency as lm
from stae import simulator as sim


def pareto(rows):
    # keep rows not dominated in (lower time, higher accuracy)
    rows = sorted(rows, key=lambda r: (r["completion_ms"], -r["accuracy_pct"]))
    out, best = [], -1.0
    for r in rows:
        if r["accuracy_pct"] > best:
            out.append(r)
            best = r["accuracy_pct"]
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rate", type=float, default=100.0)
    ap.add_argument("--deadline", type=float, default=100.0)
    ap.add_argument("--strict", action="store_true", help="only tabulated budgets (100%% and 40%%)")
    ap.add_argument("-o", "--output", default="frontier.csv")
    args = ap.parse_args(argv)

    betas = (1.0, 0.4) if args.strict else sim.DEFAULT_BETAS
    rows = sim.frontier(lm.default_profile(), lm.LinkModel(args.rate), args.deadline, betas=betas, strict=args.strict)
    with open(args.output, "w") as fh:
        fh.write(sim.rows_to_csv(rows))
    for r in pareto(rows):
        flag = "ok " if r["feasible"] else "late"
        print(f"{flag} {r['mode']:<7} a={r['alpha_k']:>2} b={r['beta_m_percent']:>5}% "
              f"entropy={str(r['entropy_on']):<5} t={r['completion_ms']:9.2f} ms acc={r['accuracy_pct']:.2f}")


if __name__ == "__main__":
    main()
