"""DeepISC comparison path, driven entirely by its published numbers.

DeepISC rows live in the same profile CSV under ``method = deepisc``; the
codec time sits in the recovery column so the shared cost machinery applies
unchanged. Payload sizes are the same as the STAE path at equal budgets.
"""
from __future__ import annotations

import math

from . import latency as lm
from . import planner as pl
from .errors import ProfileError


def evaluate_baseline(alpha_k, beta_m, link, delta_ms, profile=None, method="deepisc", entropy="auto"):
    """Decision for a fixed budget pair; entropy on/off picked by completion time."""
    profile = profile or lm.default_profile()
    if not isinstance(link, lm.LinkModel):
        link = lm.LinkModel(float(link))
    modes = {"auto": (True, False), "on": (True,), "off": (False,)}[entropy]
    opts = [pl.offload_option(alpha_k, beta_m, e, profile, link, method) for e in modes]
    best = min(opts, key=lambda o: (o.completion_ms(link), o.entropy_on))
    return pl.PlanDecision.from_option(best, link, delta_ms)


def accuracy_gap(profile=None, beta_m=0.4, ours="stae", theirs="deepisc"):
    """``{alpha_k: accuracy(ours) - accuracy(theirs)}`` over budgets both methods tabulate."""
    profile = profile or lm.default_profile()
    a = {k for k, b in profile.tabulated(ours) if math.isclose(b, beta_m)}
    b = {k for k, bb in profile.tabulated(theirs) if math.isclose(bb, beta_m)}
    return {
        k: profile.entry(ours, k, beta_m).accuracy_pct - profile.entry(theirs, k, beta_m).accuracy_pct
        for k in sorted(a & b)
    }


def check_integrity(profile=None):
    """STAE must beat DeepISC at every tabulated 40% budget; raises ``ProfileError`` otherwise."""
    gaps = accuracy_gap(profile)
    bad = {k: g for k, g in gaps.items() if not g > 0}
    if bad:
        raise ProfileError(f"STAE accuracy does not exceed DeepISC at alpha_k {sorted(bad)}")
    return gaps


def crossover_vs_full_offload(alpha_k=1, beta_m=0.4, profile=None, method="deepisc", entropy_on=True):
    """Rate below which ``method`` at the given budget beats raw full-clip offloading.

    Returns ``(rate_mbps_or_None, inputs)`` where ``inputs`` lists the compute
    times and sizes used.
    """
    profile = profile or lm.default_profile()
    f = profile.dims[0]
    full = pl.offload_option(f, 1.0, False, profile, method="stae")
    opt = pl.offload_option(alpha_k, beta_m, entropy_on, profile, method=method)
    rate = pl.crossover_rate(opt, full)
    inputs = {
        "full_offload": {"compute_ms": full.compute_ms, "size_bits": full.size_bits},
        method: {
            "alpha_k": alpha_k, "beta_m": beta_m, "entropy_on": entropy_on,
            "compute_ms": opt.compute_ms, "size_bits": opt.size_bits,
        },
    }
    return rate, inputs
