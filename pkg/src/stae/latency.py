"""Analytical cost model: payload size, transmission time, computation time.

Units: sizes in bytes or bits as named, rates in Mbps (10^6 bit/s), times in
ms. Table sizes quoted in "MB" are MiB (2^20 bytes).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import profile_data
from .attention import pixel_budget
from .codec import overhead_bytes
from .errors import ProfileError

CSV_COLUMNS = (
    "method",
    "alpha_k",
    "beta_m_percent",
    "t_fa_ms",
    "t_sa_ms",
    "t_fr_ms",
    "t_vit_ms",
    "t_ee_ms",
    "t_ed_ms",
    "entropy_bits",
    "accuracy_pct",
    "accuracy_spread",
)
_NUMERIC = CSV_COLUMNS[3:]
MIB = 2**20


def _pct_key(beta_m):
    return round(beta_m * 100, 6)


@dataclass(frozen=True)
class ProfileEntry:
    method: str
    alpha_k: int
    beta_pct: float
    t_fa_ms: float | None = None
    t_sa_ms: float | None = None
    t_fr_ms: float | None = None
    t_vit_ms: float | None = None
    t_ee_ms: float | None = None
    t_ed_ms: float | None = None
    entropy_bits: float | None = None
    accuracy_pct: float | None = None
    accuracy_spread: float | None = None
    interpolated: bool = False

    @property
    def beta_m(self):
        return self.beta_pct / 100

    @property
    def available(self):
        return all(getattr(self, k) is not None for k in _NUMERIC if k != "accuracy_spread")

    def row(self):
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [self.method, str(self.alpha_k), fmt(self.beta_pct)] + [fmt(getattr(self, k)) for k in _NUMERIC]


@dataclass(frozen=True)
class LinkModel:
    gamma_mbps: float
    size_convention: str = "payload_only"

    def __post_init__(self):
        if not self.gamma_mbps > 0:
            raise ValueError(f"data rate must be positive, got {self.gamma_mbps}")
        if self.size_convention not in ("payload_only", "full_packet"):
            raise ValueError(f"unknown size convention {self.size_convention!r}")


@dataclass
class DeploymentProfile:
    entries: dict = field(default_factory=dict)  # (method, alpha_k, beta_pct) -> ProfileEntry
    dims: tuple = profile_data.DEFAULT_DIMS

    @property
    def methods(self):
        return sorted({m for m, _, _ in self.entries} - {"local"})

    @property
    def local(self) -> ProfileEntry:
        rows = [e for (m, _, _), e in self.entries.items() if m == "local"]
        if not rows:
            raise ProfileError("profile has no local-inference row")
        return rows[0]

    @property
    def local_inference_time_ms(self):
        return self.local.t_vit_ms

    @property
    def local_accuracy_pct(self):
        return self.local.accuracy_pct

    def with_local_time(self, ms):
        entries = dict(self.entries)
        e = self.local
        entries[(e.method, e.alpha_k, e.beta_pct)] = replace(e, t_vit_ms=float(ms))
        return DeploymentProfile(entries, self.dims)

    def tabulated(self, method="stae"):
        """Available ``(alpha_k, beta_m)`` pairs present in the table itself."""
        return sorted(
            (a, p / 100) for (m, a, p), e in self.entries.items() if m == method and e.available
        )

    def is_tabulated(self, method, alpha_k, beta_m):
        e = self.entries.get((method, alpha_k, _pct_key(beta_m)))
        return e is not None and e.available

    def entry(self, method, alpha_k, beta_m, interpolate=True) -> ProfileEntry:
        """Look up an entry, linearly interpolating accuracy, entropy and codec times in beta_m.

        Attention and recovery times for an interpolated entry come from the
        lower bracketing budget (both run whenever beta_m < 100%).
        """
        key = (method, alpha_k, _pct_key(beta_m))
        e = self.entries.get(key)
        if e is not None:
            if not e.available:
                raise ProfileError(f"profile entry {key} is marked unavailable")
            return e
        if not interpolate:
            raise ProfileError(f"no tabulated entry for {key}")
        pts = sorted(p for (m, a, p), v in self.entries.items() if m == method and a == alpha_k and v.available)
        target = _pct_key(beta_m)
        lo = [p for p in pts if p < target]
        hi = [p for p in pts if p > target]
        if not lo or not hi:
            raise ProfileError(f"cannot interpolate {key}: tabulated spatial budgets are {pts}")
        a, b = self.entries[(method, alpha_k, lo[-1])], self.entries[(method, alpha_k, hi[0])]
        u = (target - a.beta_pct) / (b.beta_pct - a.beta_pct)

        def lerp(name):
            va, vb = getattr(a, name), getattr(b, name)
            if va is None or vb is None:
                return None
            return va + u * (vb - va)

        return ProfileEntry(
            method,
            alpha_k,
            target,
            t_fa_ms=lerp("t_fa_ms"),
            t_sa_ms=a.t_sa_ms,
            t_fr_ms=a.t_fr_ms,
            t_vit_ms=lerp("t_vit_ms"),
            t_ee_ms=lerp("t_ee_ms"),
            t_ed_ms=lerp("t_ed_ms"),
            entropy_bits=lerp("entropy_bits"),
            accuracy_pct=lerp("accuracy_pct"),
            accuracy_spread=lerp("accuracy_spread"),
            interpolated=True,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for e in self.entries.values():
            w.writerow(e.row())
        return buf.getvalue()


def _parse_float(text, col, lineno):
    text = text.strip()
    if text == "":
        return None
    try:
        v = float(text)
    except ValueError:
        raise ProfileError(f"line {lineno}: {col} is not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ProfileError(f"line {lineno}: {col} is not finite")
    return v


def load_profile(source=None, dims=profile_data.DEFAULT_DIMS) -> DeploymentProfile:
    """Read a profile CSV (path, file object or CSV text). ``None`` loads the default."""
    if source is None:
        text = profile_data.DEFAULT_PROFILE_CSV
    elif hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = source
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_COLUMNS:
        raise ProfileError(f"profile header must be {','.join(CSV_COLUMNS)}")
    entries = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ProfileError(f"line {lineno}: expected {len(CSV_COLUMNS)} cells, got {len(row)}")
        method = row[0].strip().lower()
        if not method:
            raise ProfileError(f"line {lineno}: empty method")
        try:
            alpha_k = int(row[1])
        except ValueError:
            raise ProfileError(f"line {lineno}: alpha_k must be an integer") from None
        pct = _parse_float(row[2], "beta_m_percent", lineno)
        if alpha_k < 1 or pct is None or not 0 < pct <= 100:
            raise ProfileError(f"line {lineno}: budget ({alpha_k}, {pct}%) out of range")
        vals = {c: _parse_float(v, c, lineno) for c, v in zip(_NUMERIC, row[3:])}
        for c, v in vals.items():
            if v is None:
                continue
            if c.startswith("t_") and v < 0:
                raise ProfileError(f"line {lineno}: {c} is negative")
            if c == "accuracy_pct" and not 0 <= v <= 100:
                raise ProfileError(f"line {lineno}: accuracy {v} outside [0, 100]")
            if c == "entropy_bits" and not 0 < v <= 32:
                raise ProfileError(f"line {lineno}: entropy {v} bits outside (0, 32]")
            if c == "accuracy_spread" and v < 0:
                raise ProfileError(f"line {lineno}: negative accuracy spread")
        key = (method, alpha_k, _pct_key(pct / 100))
        if key in entries:
            raise ProfileError(f"line {lineno}: duplicate entry {key}")
        if method == "local" and (vals["t_vit_ms"] is None or vals["accuracy_pct"] is None):
            raise ProfileError(f"line {lineno}: local row needs t_vit_ms and accuracy_pct")
        entries[key] = ProfileEntry(method, alpha_k, key[2], **vals)
    if not entries:
        raise ProfileError("profile has no rows")
    return DeploymentProfile(entries, tuple(dims))


_DEFAULT = None


def default_profile() -> DeploymentProfile:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_profile(None)
    return _DEFAULT


# --------------------------------------------------------------------------
# cost model


def element_count(alpha_k, beta_m, dims):
    _, c, h, w = dims
    return alpha_k * c * pixel_budget(beta_m, h * w)


def raw_size_bytes(alpha_k, beta_m, dims=profile_data.DEFAULT_DIMS):
    """float32 payload bytes, ``4 * alpha_k * C * floor(beta_m * H * W)``."""
    return 4 * element_count(alpha_k, beta_m, dims)


def coded_size_bits(alpha_k, beta_m, dims, profile, method="stae"):
    e = profile.entry(method, alpha_k, beta_m)
    return element_count(alpha_k, beta_m, dims) * e.entropy_bits


def payload_bits(alpha_k, beta_m, dims, profile, entropy_on, method="stae"):
    if entropy_on:
        return coded_size_bits(alpha_k, beta_m, dims, profile, method)
    return 8 * raw_size_bytes(alpha_k, beta_m, dims)


def transmitted_bits(alpha_k, beta_m, dims, profile, entropy_on, link: LinkModel, method="stae"):
    bits = payload_bits(alpha_k, beta_m, dims, profile, entropy_on, method)
    if link.size_convention == "full_packet":
        # table size assumed at its 256-entry maximum
        bits += 8 * overhead_bytes(alpha_k, dims, 256 if entropy_on else None)
    return bits


def comm_time_ms(size_bits, link):
    gamma = link.gamma_mbps if isinstance(link, LinkModel) else float(link)
    return size_bits / (gamma * 1e3)


def _terms(alpha_k, beta_m, profile, method):
    e = profile.entry(method, alpha_k, beta_m)
    spatial = _pct_key(beta_m) < 100
    return e, (e.t_sa_ms if spatial else 0.0), (e.t_fr_ms if spatial else 0.0)


def device_time_ms(alpha_k, beta_m, profile, entropy_on, method="stae"):
    """Sender-side share: frame attention, spatial attention, entropy encoding."""
    e, t_sa, _ = _terms(alpha_k, beta_m, profile, method)
    return e.t_fa_ms + t_sa + (e.t_ee_ms if entropy_on else 0.0)


def server_time_ms(alpha_k, beta_m, profile, entropy_on, method="stae"):
    """Receiver-side share: entropy decoding, recovery, inference."""
    e, _, t_fr = _terms(alpha_k, beta_m, profile, method)
    return (e.t_ed_ms if entropy_on else 0.0) + t_fr + e.t_vit_ms


def compute_time_ms(alpha_k, beta_m, profile, entropy_on, method="stae"):
    e, t_sa, t_fr = _terms(alpha_k, beta_m, profile, method)
    total = e.t_fa_ms + t_sa + t_fr + e.t_vit_ms
    if entropy_on:
        total += e.t_ee_ms + e.t_ed_ms
    return total


def completion_time_ms(alpha_k, beta_m, link, profile, entropy_on, method="stae", dims=None):
    """Transmission plus computation; ``method="local"`` returns the on-device time."""
    if method == "local":
        return profile.local_inference_time_ms
    dims = dims or profile.dims
    bits = transmitted_bits(alpha_k, beta_m, dims, profile, entropy_on, link, method)
    return comm_time_ms(bits, link) + compute_time_ms(alpha_k, beta_m, profile, entropy_on, method)


def compression_ratio(alpha_k, beta_m, profile, entropy_on=True, method="stae", dims=None):
    """Full raw clip bits over transmitted payload bits."""
    dims = dims or profile.dims
    full = 8 * raw_size_bytes(dims[0], 1.0, dims)
    return full / payload_bits(alpha_k, beta_m, dims, profile, entropy_on, method)
