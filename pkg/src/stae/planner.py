"""Deadline-constrained budget selection.

Every (frame budget, spatial budget, entropy on/off) offload option plus
local execution is enumerated. The most accurate option whose completion
time meets the deadline wins. If none meets it, the fastest option is
returned with ``feasible=False``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from . import latency as lm
from .errors import ProfileError
from .profile_data import DEFAULT_ALPHAS, DEFAULT_BETAS


@dataclass(frozen=True)
class Option:
    mode: str  # "local" or "offload"
    method: str
    alpha_k: int
    beta_m: float
    entropy_on: bool
    size_bits: float
    raw_bytes: int
    compute_ms: float
    device_ms: float
    server_ms: float
    accuracy_pct: float
    interpolated: bool = False

    def completion_ms(self, link):
        if self.mode == "local":
            return self.compute_ms
        return lm.comm_time_ms(self.size_bits, link) + self.compute_ms


@dataclass(frozen=True)
class PlanDecision:
    mode: str
    alpha_k: int
    beta_m: float
    entropy_on: bool
    predicted_completion_ms: float
    predicted_accuracy_pct: float
    feasible: bool
    interpolated_accuracy: bool
    method: str = "stae"
    size_bits: float = 0.0

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_option(cls, opt: Option, link, delta_ms):
        t = opt.completion_ms(link)
        return cls(
            opt.mode,
            opt.alpha_k,
            opt.beta_m,
            opt.entropy_on,
            t,
            opt.accuracy_pct,
            t <= delta_ms,
            opt.interpolated,
            opt.method,
            opt.size_bits,
        )


def local_option(profile) -> Option:
    t = profile.local_inference_time_ms
    f = profile.dims[0]
    return Option("local", "local", f, 1.0, False, 0.0, 0, t, t, 0.0, profile.local_accuracy_pct)


def offload_option(alpha_k, beta_m, entropy_on, profile, link=None, method="stae", dims=None) -> Option:
    """Build one offload option; raises ``ProfileError`` if the profile lacks it."""
    dims = dims or profile.dims
    link = link or lm.LinkModel(1.0)
    e = profile.entry(method, alpha_k, beta_m)
    return Option(
        "offload",
        method,
        alpha_k,
        beta_m,
        entropy_on,
        lm.transmitted_bits(alpha_k, beta_m, dims, profile, entropy_on, link, method),
        lm.raw_size_bytes(alpha_k, beta_m, dims),
        lm.compute_time_ms(alpha_k, beta_m, profile, entropy_on, method),
        lm.device_time_ms(alpha_k, beta_m, profile, entropy_on, method),
        lm.server_time_ms(alpha_k, beta_m, profile, entropy_on, method),
        e.accuracy_pct,
        e.interpolated,
    )


def enumerate_options(
    profile,
    alphas=DEFAULT_ALPHAS,
    betas=DEFAULT_BETAS,
    link=None,
    method="stae",
    strict=False,
    allow_local=True,
    entropy="auto",
    dims=None,
):
    """All evaluable options; budgets the profile cannot price are skipped."""
    dims = dims or profile.dims
    modes = {"auto": (True, False), "on": (True,), "off": (False,)}[entropy]
    out = []
    for a in alphas:
        if a > dims[0]:
            continue
        for b in betas:
            if strict and not profile.is_tabulated(method, a, b):
                continue
            for ent in modes:
                try:
                    out.append(offload_option(a, b, ent, profile, link, method, dims))
                except ProfileError:
                    break
    if allow_local:
        try:
            out.append(local_option(profile))
        except ProfileError:
            pass
    return out


def _rank(opt: Option, t):
    # accuracy first, then time, then transmitted volume, then fewer frames
    return (-opt.accuracy_pct, t, opt.raw_bytes, opt.alpha_k, opt.beta_m, opt.entropy_on, opt.mode)


def choose(options, link, delta_ms) -> PlanDecision:
    if not options:
        raise ProfileError("no evaluable options: profile does not cover the budget sets")
    timed = [(o, o.completion_ms(link)) for o in options]
    feasible = [(o, t) for o, t in timed if t <= delta_ms]
    if feasible:
        best, _ = min(feasible, key=lambda ot: _rank(*ot))
    else:
        best, _ = min(timed, key=lambda ot: (ot[1],) + _rank(*ot))
    return PlanDecision.from_option(best, link, delta_ms)


def plan(
    link,
    delta_ms,
    profile=None,
    alphas=DEFAULT_ALPHAS,
    betas=DEFAULT_BETAS,
    allow_local=True,
    strict=False,
    method="stae",
    entropy="auto",
    dims=None,
) -> PlanDecision:
    """Most accurate option finishing within ``delta_ms`` at the given link rate."""
    profile = profile or lm.default_profile()
    if not isinstance(link, lm.LinkModel):
        link = lm.LinkModel(float(link))
    opts = enumerate_options(profile, alphas, betas, link, method, strict, allow_local, entropy, dims)
    return choose(opts, link, delta_ms)


def entropy_worthwhile(alpha_k, beta_m, link, profile=None, method="stae", dims=None) -> bool:
    """True iff coding time is strictly less than the transmission time it saves."""
    profile = profile or lm.default_profile()
    dims = dims or profile.dims
    if not isinstance(link, lm.LinkModel):
        link = lm.LinkModel(float(link))
    e = profile.entry(method, alpha_k, beta_m)
    raw = lm.comm_time_ms(8 * lm.raw_size_bytes(alpha_k, beta_m, dims), link)
    coded = lm.comm_time_ms(lm.coded_size_bits(alpha_k, beta_m, dims, profile, method), link)
    return e.t_ee_ms + e.t_ed_ms < raw - coded


def crossover_rate(a: Option, b: Option):
    """Rate (Mbps) at which two options finish at the same time, or None.

    Each option costs ``compute + bits / (1000 * gamma)`` ms; local options
    transmit nothing.
    """
    ds = a.size_bits - b.size_bits
    dc = b.compute_ms - a.compute_ms
    if ds == 0 and dc == 0:
        raise ValueError("options have identical size and compute time; every rate is a crossover")
    if ds == 0 or dc == 0:
        return None
    gamma = ds / (1e3 * dc)
    return gamma if gamma > 0 and math.isfinite(gamma) else None
