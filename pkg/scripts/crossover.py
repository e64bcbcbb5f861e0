"""Break-even link rates between deployment choices."""
import json

from stae import baselines as bl
from stae import latency as lm
from stae import planner as pl


def main():
    profile = lm.default_profile()
    report = {}
    loc = pl.local_option(profile)
    for ent in (False, True):
        off = pl.offload_option(1, 0.4, ent, profile)
        report[f"local_vs_stae_a1_b40_entropy_{ent}"] = pl.crossover_rate(loc, off)
        rate, inputs = bl.crossover_vs_full_offload(entropy_on=ent, profile=profile)
        report[f"deepisc_vs_full_offload_entropy_{ent}"] = {"rate_mbps": rate, "inputs": inputs}
    report["accuracy_gap_at_40pct"] = bl.accuracy_gap(profile)
    report["compression_ratio_a1_b40"] = lm.compression_ratio(1, 0.4, profile)
    print(json.dumps(report, indent=2, default=str))


if __name__ == "__main__":
    main()
