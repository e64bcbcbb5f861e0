"""Periodic-task replay over a time-varying uplink.

The planner only sees the rate at release time. The transfer itself drains
bits at the instantaneous trace rate, so the realised completion time can
differ from the planner's estimate.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import latency as lm
from . import planner as pl
from .errors import TraceCoverageError
from .profile_data import DEFAULT_ALPHAS, DEFAULT_BETAS


@dataclass(frozen=True)
class ChannelTrace:
    timestamps_ms: tuple
    gamma_mbps: tuple
    interpolation: str = "step"

    def __post_init__(self):
        t = np.asarray(self.timestamps_ms, dtype=float)
        g = np.asarray(self.gamma_mbps, dtype=float)
        if t.ndim != 1 or t.shape != g.shape or t.size == 0:
            raise ValueError("trace needs matching, non-empty timestamp and rate sequences")
        if np.any(np.diff(t) <= 0):
            raise ValueError("trace timestamps must be strictly increasing")
        if np.any(g <= 0) or not np.all(np.isfinite(g)):
            raise ValueError("trace rates must be positive and finite")
        if self.interpolation not in ("step", "linear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        object.__setattr__(self, "timestamps_ms", tuple(float(v) for v in t))
        object.__setattr__(self, "gamma_mbps", tuple(float(v) for v in g))

    @property
    def start_ms(self):
        return self.timestamps_ms[0]

    @property
    def end_ms(self):
        return self.timestamps_ms[-1]

    @classmethod
    def constant(cls, gamma, duration_ms):
        return cls((0.0, float(duration_ms)), (gamma, gamma))

    @classmethod
    def steps(cls, points, end_ms, interpolation="step"):
        """Piecewise-constant trace from ``[(t, gamma), ...]`` held until ``end_ms``."""
        ts = [float(t) for t, _ in points] + [float(end_ms)]
        gs = [float(g) for _, g in points] + [float(points[-1][1])]
        return cls(tuple(ts), tuple(gs), interpolation)

    @classmethod
    def random_walk(cls, seed, duration_ms, step_ms=100.0, start=100.0, sigma=0.1, lo=1.0, hi=1000.0):
        """Log-normal random walk sampled every ``step_ms``."""
        rng = np.random.default_rng(seed)
        n = int(math.ceil(duration_ms / step_ms)) + 1
        log_g = np.log(start) + np.concatenate([[0.0], np.cumsum(rng.normal(0, sigma, n - 1))])
        g = np.clip(np.exp(log_g), lo, hi)
        return cls(tuple(np.arange(n) * step_ms), tuple(g))

    @classmethod
    def from_csv(cls, source, interpolation="step"):
        text = Path(source).read_text() if not hasattr(source, "read") else source.read()
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
        if rows and rows[0][0].strip() == "timestamp_ms":
            rows = rows[1:]
        try:
            ts = [float(r[0]) for r in rows]
            gs = [float(r[1]) for r in rows]
        except (ValueError, IndexError):
            raise ValueError("trace CSV rows must be 'timestamp_ms,gamma_mbps'") from None
        return cls(tuple(ts), tuple(gs), interpolation)

    def to_csv(self):
        lines = ["timestamp_ms,gamma_mbps"] + [f"{t!r},{g!r}" for t, g in zip(self.timestamps_ms, self.gamma_mbps)]
        return "\n".join(lines) + "\n"

    def rate_at(self, t_ms):
        t, g = self.timestamps_ms, self.gamma_mbps
        if not t[0] <= t_ms <= t[-1]:
            raise TraceCoverageError(f"trace covers [{t[0]}, {t[-1]}] ms, asked for {t_ms}")
        i = int(np.searchsorted(t, t_ms, side="right")) - 1
        if i >= len(t) - 1 or self.interpolation == "step":
            return g[i]
        u = (t_ms - t[i]) / (t[i + 1] - t[i])
        return g[i] + u * (g[i + 1] - g[i])


def integrate_transmission(size_bits, trace: ChannelTrace, start_ms):
    """Earliest time by which ``size_bits`` have been sent starting at ``start_ms``.

    A rate of gamma Mbps drains ``gamma * 1000`` bits per ms.
    """
    if size_bits < 0:
        raise ValueError("size must be non-negative")
    t, g = trace.timestamps_ms, trace.gamma_mbps
    if not t[0] <= start_ms <= t[-1]:
        raise TraceCoverageError(f"transfer starts at {start_ms} ms outside trace [{t[0]}, {t[-1]}]")
    if size_bits == 0:
        return start_ms
    remaining = float(size_bits)
    now = start_ms
    i = max(0, int(np.searchsorted(t, start_ms, side="right")) - 1)
    while i < len(t) - 1:
        seg_end = t[i + 1]
        if trace.interpolation == "step":
            rate = g[i] * 1e3
            cap = rate * (seg_end - now)
            if cap >= remaining:
                return now + remaining / rate
        else:
            slope = (g[i + 1] - g[i]) * 1e3 / (seg_end - t[i])
            r0 = g[i] * 1e3 + slope * (now - t[i])
            dt_seg = seg_end - now
            cap = r0 * dt_seg + 0.5 * slope * dt_seg**2
            if cap >= remaining:
                if slope == 0:
                    return now + remaining / r0
                # smallest positive root of 0.5*slope*dt^2 + r0*dt - remaining = 0,
                # written to avoid cancellation when slope is small
                disc = r0 * r0 + 2 * slope * remaining
                return now + 2 * remaining / (r0 + math.sqrt(max(disc, 0.0)))
        remaining -= cap
        now = seg_end
        i += 1
    raise TraceCoverageError(f"trace ends at {t[-1]} ms with {remaining:.0f} bits still to send")


@dataclass
class Scenario:
    trace: ChannelTrace
    period_ms: float
    deadline_ms: float
    horizon_ms: float
    dims: tuple = None
    alphas: tuple = DEFAULT_ALPHAS
    betas: tuple = DEFAULT_BETAS
    profile: lm.DeploymentProfile = None
    method: str = "stae"
    strict: bool = False
    allow_local: bool = True
    entropy: str = "auto"
    fifo: bool = False
    size_convention: str = "payload_only"
    seed: int = 0

    def __post_init__(self):
        if not self.period_ms > 0:
            raise ValueError("task period must be positive")
        if self.horizon_ms < self.period_ms:
            raise ValueError("horizon must cover at least one period")
        if self.profile is None:
            self.profile = lm.default_profile()
        if self.dims is None:
            self.dims = self.profile.dims

    @classmethod
    def from_dict(cls, d, base_dir="."):
        d = dict(d)
        base = Path(base_dir)
        tspec = d.pop("trace")
        interp = tspec.get("interpolation", "step")
        seed = int(d.get("seed", 0))
        horizon = float(d["horizon_ms"])
        if "csv" in tspec:
            trace = ChannelTrace.from_csv(base / tspec["csv"], interp)
        elif "constant" in tspec:
            trace = ChannelTrace.constant(float(tspec["constant"]), tspec.get("end_ms", horizon + 10_000))
        elif "steps" in tspec:
            trace = ChannelTrace.steps(tspec["steps"], tspec.get("end_ms", horizon + 10_000), interp)
        elif "random_walk" in tspec:
            rw = dict(tspec["random_walk"])
            trace = ChannelTrace.random_walk(seed, rw.pop("duration_ms", horizon + 10_000), **rw)
        else:
            raise ValueError("trace must give one of: csv, constant, steps, random_walk")
        path = d.pop("profile", None)
        profile = lm.load_profile(base / path) if path else lm.default_profile()
        if "local_time_ms" in d:
            profile = profile.with_local_time(d.pop("local_time_ms"))
        for key in ("alphas", "betas", "dims"):
            if key in d:
                d[key] = tuple(d[key])
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(trace=trace, profile=profile, **d)


@dataclass
class TaskRecord:
    task: int
    release_ms: float
    gamma_at_release_mbps: float
    mode: str
    method: str
    alpha_k: int
    beta_m_percent: float
    entropy_on: bool
    feasible: bool
    interpolated: bool
    size_bits: float
    predicted_completion_ms: float
    actual_completion_ms: float
    deadline_ms: float
    met_deadline: bool
    expected_accuracy_pct: float


RECORD_COLUMNS = tuple(f.name for f in fields(TaskRecord))


@dataclass
class SimulationResult:
    records: list
    summary: dict = field(default_factory=dict)


def summarize(records):
    comp = np.array([r.actual_completion_ms for r in records])
    return {
        "tasks": len(records),
        "misses": sum(not r.met_deadline for r in records),
        "miss_rate": float(np.mean([not r.met_deadline for r in records])),
        "mean_expected_accuracy_pct": float(np.mean([r.expected_accuracy_pct for r in records])),
        "p50_completion_ms": float(np.percentile(comp, 50)),
        "p95_completion_ms": float(np.percentile(comp, 95)),
    }


def run(scenario: Scenario) -> SimulationResult:
    sc = scenario
    if sc.trace.start_ms > 0 or sc.trace.end_ms < sc.horizon_ms:
        raise TraceCoverageError(
            f"trace [{sc.trace.start_ms}, {sc.trace.end_ms}] ms does not cover horizon [0, {sc.horizon_ms}]"
        )
    records = []
    link_free = 0.0
    n_tasks = int(math.floor(sc.horizon_ms / sc.period_ms + 1e-9))
    for k in range(n_tasks):
        release = k * sc.period_ms
        gamma = sc.trace.rate_at(release)
        link = lm.LinkModel(gamma, sc.size_convention)
        d = pl.plan(
            link, sc.deadline_ms, sc.profile, sc.alphas, sc.betas,
            sc.allow_local, sc.strict, sc.method, sc.entropy, sc.dims,
        )
        if d.mode == "local":
            actual = d.predicted_completion_ms
        else:
            opt = pl.offload_option(d.alpha_k, d.beta_m, d.entropy_on, sc.profile, link, d.method, sc.dims)
            tx_start = release + opt.device_ms
            if sc.fifo:
                tx_start = max(tx_start, link_free)
            tx_end = integrate_transmission(opt.size_bits, sc.trace, tx_start)
            link_free = tx_end
            actual = tx_end + opt.server_ms - release
        records.append(
            TaskRecord(
                k, release, gamma, d.mode, d.method, d.alpha_k, round(d.beta_m * 100, 6), d.entropy_on,
                d.feasible, d.interpolated_accuracy, d.size_bits, d.predicted_completion_ms,
                actual, sc.deadline_ms, actual <= sc.deadline_ms, d.predicted_accuracy_pct,
            )
        )
    return SimulationResult(records, summarize(records))


def frontier(profile, link, deadline_ms=math.inf, alphas=DEFAULT_ALPHAS, betas=DEFAULT_BETAS,
             method="stae", strict=False, dims=None):
    """One row per option: budgets, entropy flag, completion time, accuracy, feasibility."""
    if not isinstance(link, lm.LinkModel):
        link = lm.LinkModel(float(link))
    rows = []
    for o in pl.enumerate_options(profile, alphas, betas, link, method, strict, True, "auto", dims):
        t = o.completion_ms(link)
        rows.append({
            "mode": o.mode, "method": o.method, "alpha_k": o.alpha_k,
            "beta_m_percent": round(o.beta_m * 100, 6), "entropy_on": o.entropy_on,
            "gamma_mbps": link.gamma_mbps, "completion_ms": t, "accuracy_pct": o.accuracy_pct,
            "feasible": t <= deadline_ms, "interpolated": o.interpolated,
        })
    return rows


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, columns=None):
    columns = columns or list(rows[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def export_report(records, fmt="csv", summary=None, frontier_rows=None) -> bytes:
    """CSV: one row per task in ``RECORD_COLUMNS`` order. JSON: records, summary, frontier."""
    rows = [asdict(r) for r in records]
    if fmt == "csv":
        return rows_to_csv(rows, list(RECORD_COLUMNS)).encode()
    if fmt == "json":
        doc = {
            "columns": list(RECORD_COLUMNS),
            "records": rows,
            "summary": summary if summary is not None else summarize(records),
            "frontier": frontier_rows or [],
        }
        return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode()
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report_csv(data) -> list:
    text = data.decode() if isinstance(data, bytes) else data
    reader = csv.DictReader(io.StringIO(text))
    types = {f.name: f.type for f in fields(TaskRecord)}
    out = []
    for row in reader:
        kw = {}
        for name, text_v in row.items():
            t = types[name]
            if t == "bool":
                kw[name] = text_v == "true"
            elif t == "int":
                kw[name] = int(text_v)
            elif t == "float":
                kw[name] = float(text_v)
            else:
                kw[name] = text_v
        out.append(TaskRecord(**kw))
    return out
