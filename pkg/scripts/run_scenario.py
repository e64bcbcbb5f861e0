"""Run a simulation scenario file and print the summary."""
import argparse
import json
from pathlib import Path

from stae import simulator as sim


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", nargs="?", default=str(Path(__file__).parent / "scenarios" / "step_100_200.json"))
    ap.add_argument("-o", "--output", default=None, help="write report.csv here")
    args = ap.parse_args(argv)

    path = Path(args.scenario)
    sc = sim.Scenario.from_dict(json.loads(path.read_text()), base_dir=path.parent)
    res = sim.run(sc)
    if args.output:
        Path(args.output).write_bytes(sim.export_report(res.records, "csv"))
    for r in res.records:
        print(f"t={r.release_ms:7.1f} g={r.gamma_at_release_mbps:7.2f} a={r.alpha_k:>2} b={r.beta_m_percent:>5}% "
              f"done={r.actual_completion_ms:8.2f} met={r.met_deadline}")
    print(json.dumps(res.summary, indent=2))


if __name__ == "__main__":
    main()
