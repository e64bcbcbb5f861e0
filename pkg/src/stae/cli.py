"""Command-line front end.

Exit codes::

    0  success
    2  bad command line (argparse)
    3  I/O error (missing or unreadable file)
    4  malformed input file (packet, clip, weights, profile, scenario)
    5  invalid shapes or values
    6  weight bundle lacks a required array
    7  plan found no option meeting the deadline
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import baselines, codec, latency, pipeline, planner, simulator
from . import tensor_core as tc
from .errors import FormatError, MissingWeightError, ProfileError, ShapeError, TraceCoverageError
from .profile_data import DEFAULT_ALPHAS, DEFAULT_BETAS, TABULATED_BETAS

EXIT_OK, EXIT_PARSE, EXIT_IO, EXIT_FORMAT, EXIT_VALUE, EXIT_WEIGHTS, EXIT_INFEASIBLE = 0, 2, 3, 4, 5, 6, 7

# defaults live here rather than on the parser so a --config file can fill gaps
DEFAULTS = {
    "alpha": 4,
    "beta": 0.4,
    "entropy": "auto",
    "seed": 0,
    "recovery": "interpolate",
    "rate": 100.0,
    "deadline": 100.0,
    "alphas": ",".join(str(a) for a in DEFAULT_ALPHAS),
    "betas": None,
    "method": "stae",
    "size_convention": "payload_only",
    "format": "csv",
}


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"cannot serialise {type(o)}")


def _ints(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _deadline(text):
    return math.inf if str(text).lower() in ("inf", "infinity", "none") else float(text)


def _resolve(args, config):
    for key, default in DEFAULTS.items():
        if getattr(args, key, "absent") is None:
            setattr(args, key, config.get(key, default))
    return args


def _weights(args, n_frames, channels):
    if getattr(args, "weights", None):
        return tc.WeightBundle.load(args.weights)
    return pipeline.make_weights(n_frames, channels, seed=int(args.seed))


def _profile(args):
    prof = latency.load_profile(args.profile) if getattr(args, "profile", None) else latency.default_profile()
    if getattr(args, "local_time_ms", None) is not None:
        prof = prof.with_local_time(args.local_time_ms)
    return prof


def cmd_encode(args):
    if args.raw_rgb:
        f, h, w = _ints(args.raw_rgb)
        x = pipeline.load_planar_rgb(args.clip, f, h, w)
    else:
        x = pipeline.load_clip(args.clip)
    weights = _weights(args, x.shape[0], x.shape[1])
    alpha, beta = int(args.alpha), float(args.beta)
    if args.entropy == "auto":
        candidates = [pipeline.encode_clip(x, weights, alpha, beta, e) for e in (False, True)]
        pkt, info = min(candidates, key=lambda pi: len(pi[0]))
    else:
        pkt, info = pipeline.encode_clip(x, weights, alpha, beta, args.entropy == "on")
    Path(args.output).write_bytes(pkt)
    _emit(info)
    return EXIT_OK


def cmd_decode(args):
    pkt = Path(args.packet).read_bytes()
    sel, dims, _ = codec.decode_packet(pkt)
    weights = _weights(args, dims[0], dims[1]) if args.recovery == "fr" else None
    out, _, info = pipeline.decode_clip(pkt, weights, args.recovery)
    pipeline.save_clip(args.output, out)
    _emit(info)
    return EXIT_OK


def cmd_inspect(args):
    pkt = Path(args.packet).read_bytes()
    sel, dims, stats, layout = codec.decode_packet(pkt, with_layout=True)
    info = {
        "dims": list(dims),
        "alpha_k": sel.alpha_k,
        "k_px": sel.k_px,
        "frame_indices": [int(i) for i in sel.frame_indices],
        "encoding": "huffman" if layout.table_bytes else "raw",
        "header_bytes": layout.header_bytes,
        "index_bytes": layout.index_bytes,
        "mask_bytes": layout.mask_bytes,
        "table_bytes": layout.table_bytes,
        "payload_bytes": layout.payload_bytes,
        "total_bytes": layout.total_bytes,
    }
    info.update(stats.as_dict())
    _emit(info)
    return EXIT_OK


def cmd_plan(args):
    prof = _profile(args)
    betas = TABULATED_BETAS if args.tabulated_only else _floats(args.betas or ",".join(map(str, DEFAULT_BETAS)))
    link = latency.LinkModel(float(args.rate), args.size_convention)
    decision = planner.plan(
        link,
        _deadline(args.deadline),
        prof,
        alphas=_ints(args.alphas),
        betas=betas,
        allow_local=not args.no_local,
        strict=args.tabulated_only,
        method=args.method,
        entropy=args.entropy,
    )
    out = decision.as_dict()
    out["beta_m_percent"] = round(decision.beta_m * 100, 6)
    _emit(out)
    return EXIT_OK if decision.feasible else EXIT_INFEASIBLE


def cmd_simulate(args):
    path = Path(args.scenario)
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"scenario is not valid JSON: {exc}") from None
    try:
        sc = simulator.Scenario.from_dict(spec, base_dir=path.parent)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad scenario: {exc}") from None
    res = simulator.run(sc)
    front = simulator.frontier(
        sc.profile, latency.LinkModel(sc.trace.rate_at(0.0), sc.size_convention), sc.deadline_ms,
        sc.alphas, sc.betas, sc.method, sc.strict, sc.dims,
    )
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.csv").write_bytes(simulator.export_report(res.records, "csv"))
    (outdir / "report.json").write_bytes(simulator.export_report(res.records, "json", res.summary, front))
    (outdir / "frontier.csv").write_text(simulator.rows_to_csv(front))
    _emit(res.summary)
    return EXIT_OK


def cmd_tables(args):
    prof = _profile(args)
    if args.format == "json":
        rows = [dict(zip(latency.CSV_COLUMNS, e.row())) for e in prof.entries.values()]
        _emit({"rows": rows, "stae_minus_deepisc_accuracy_at_40pct": baselines.accuracy_gap(prof)})
    else:
        sys.stdout.write(prof.to_csv())
    return EXIT_OK


def cmd_synth_weights(args):
    bundle = pipeline.make_weights(int(args.frames), int(args.channels), seed=int(args.seed), zero=args.zero)
    bundle.save(args.output)
    _emit({"output": str(args.output), "arrays": len(bundle)})
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="stae", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file of option defaults; command-line flags win")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("encode", help="compress a clip into a semantic packet")
    e.add_argument("clip")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--alpha", type=int, help="frame budget (default 4)")
    e.add_argument("--beta", type=float, help="spatial budget fraction (default 0.4)")
    e.add_argument("--entropy", choices=("auto", "on", "off"))
    e.add_argument("--raw-rgb", metavar="F,H,W", help="input is planar uint8 RGB with these dims")
    wg = e.add_mutually_exclusive_group()
    wg.add_argument("--weights")
    wg.add_argument("--seed", type=int, help="synthesize weights with this seed (default 0)")
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="rebuild a clip from a packet")
    d.add_argument("packet")
    d.add_argument("-o", "--output", required=True)
    d.add_argument("--recovery", choices=("fr", "interpolate", "zero"))
    wg = d.add_mutually_exclusive_group()
    wg.add_argument("--weights")
    wg.add_argument("--seed", type=int)
    d.set_defaults(func=cmd_decode)

    i = sub.add_parser("inspect", help="print a packet's header and size breakdown")
    i.add_argument("packet")
    i.set_defaults(func=cmd_inspect)

    pl = sub.add_parser("plan", help="choose budgets for a data rate and deadline")
    pl.add_argument("--rate", type=float, help="uplink rate in Mbps (default 100)")
    pl.add_argument("--deadline", help="deadline in ms, or 'inf' (default 100)")
    pl.add_argument("--profile")
    pl.add_argument("--local-time-ms", type=float)
    pl.add_argument("--alphas", help="comma-separated frame budgets")
    bg = pl.add_mutually_exclusive_group()
    bg.add_argument("--betas", help="comma-separated spatial budgets as fractions")
    bg.add_argument("--tabulated-only", action="store_true", help="only tabulated (alpha, beta) pairs")
    pl.add_argument("--no-local", action="store_true")
    pl.add_argument("--entropy", choices=("auto", "on", "off"))
    pl.add_argument("--method")
    pl.add_argument("--size-convention", choices=("payload_only", "full_packet"))
    pl.set_defaults(func=cmd_plan)

    s = sub.add_parser("simulate", help="replay a scenario over a channel trace")
    s.add_argument("scenario")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("tables", help="dump the deployment profile")
    t.add_argument("--profile")
    t.add_argument("--local-time-ms", type=float)
    t.add_argument("--format", choices=("csv", "json"))
    t.set_defaults(func=cmd_tables)

    w = sub.add_parser("synth-weights", help="write a synthetic weight bundle")
    w.add_argument("-o", "--output", required=True)
    w.add_argument("--frames", type=int, default=16)
    w.add_argument("--channels", type=int, default=3)
    w.add_argument("--seed", type=int)
    w.add_argument("--zero", action="store_true")
    w.set_defaults(func=cmd_synth_weights)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = json.loads(Path(args.config).read_text()) if args.config else {}
    except OSError as exc:
        print(f"stae: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"stae: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    _resolve(args, config)
    try:
        return args.func(args)
    except MissingWeightError as exc:
        print(f"stae: {exc.args[0]}", file=sys.stderr)
        return EXIT_WEIGHTS
    except (FormatError, ProfileError) as exc:
        print(f"stae: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"stae: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ShapeError, TraceCoverageError, ValueError) as exc:
        print(f"stae: {exc}", file=sys.stderr)
        return EXIT_VALUE


if __name__ == "__main__":
    sys.exit(main())
