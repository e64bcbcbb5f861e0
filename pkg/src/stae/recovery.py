"""Receiver side: scatter the payload back into place, then fill what is missing.

Two fillers are provided. ``fr_forward`` runs the two-branch network
(a low-resolution 3-D encoder/decoder whose features are injected into a
per-frame 2-D completion network) with externally supplied weights.
``interpolate_baseline`` is weight-free nearest-available-pixel filling.
Both copy known pixels straight through.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import tensor_core as tc
from .attention import SelectionResult
from .errors import ShapeError

CONFIG_PREFIX = "__config__/fr/"


@dataclass
class MaskedClip:
    x_m: np.ndarray  # (alpha_k, C, H, W), zero where missing
    mask: np.ndarray  # (alpha_k, H*W) bool, True = available

    @property
    def mask_grid(self):
        n, _, h, w = self.x_m.shape
        return self.mask.reshape(n, 1, h, w).astype(tc.DTYPE)


@dataclass(frozen=True)
class RecoveryNetConfig:
    widths3d: tuple = (16, 32, 64)
    widths2d: tuple = (32, 32, 32)
    inject_first: int = 0
    inject_last: int = -1

    def __post_init__(self):
        if not self.widths3d or not self.widths2d:
            raise ShapeError("recovery network needs at least one 3-D and one 2-D layer")
        n = len(self.widths2d)
        object.__setattr__(self, "widths3d", tuple(int(v) for v in self.widths3d))
        object.__setattr__(self, "widths2d", tuple(int(v) for v in self.widths2d))
        object.__setattr__(self, "inject_first", self.inject_first % n)
        object.__setattr__(self, "inject_last", self.inject_last % n)

    @property
    def levels3d(self):
        return len(self.widths3d)

    def injection_widths(self):
        return self.widths2d[self.inject_first], self.widths2d[self.inject_last]

    def to_arrays(self):
        return {
            CONFIG_PREFIX + "widths3d": np.array(self.widths3d, dtype=tc.DTYPE),
            CONFIG_PREFIX + "widths2d": np.array(self.widths2d, dtype=tc.DTYPE),
            CONFIG_PREFIX + "inject": np.array([self.inject_first, self.inject_last], dtype=tc.DTYPE),
        }

    @classmethod
    def from_bundle(cls, weights):
        if CONFIG_PREFIX + "widths3d" not in weights:
            return cls()
        w3 = tuple(int(v) for v in weights[CONFIG_PREFIX + "widths3d"])
        w2 = tuple(int(v) for v in weights[CONFIG_PREFIX + "widths2d"])
        first, last = (int(v) for v in weights[CONFIG_PREFIX + "inject"])
        return cls(w3, w2, first, last)


def zero_fill(sel: SelectionResult, dims) -> MaskedClip:
    sel.validate()
    _, c, h, w = dims
    if sel.channels != c or sel.masks.shape[1] != h * w:
        raise ShapeError(f"selection does not match dims {tuple(dims)}")
    n, k = sel.alpha_k, sel.k_px
    x_m = np.zeros((n, c, h * w), dtype=tc.DTYPE)
    vals = np.asarray(sel.values, dtype=tc.DTYPE).reshape(n, c, k)
    for f in range(n):
        x_m[f][:, sel.masks[f]] = vals[f]
    return MaskedClip(x_m.reshape(n, c, h, w), sel.masks.copy())


def gather(mc: MaskedClip) -> np.ndarray:
    """Read the available positions back out in payload order."""
    n, c, h, w = mc.x_m.shape
    flat = mc.x_m.reshape(n, c, h * w)
    return np.concatenate([flat[f][:, mc.mask[f]].ravel() for f in range(n)])


def composite(mc: MaskedClip, filled) -> np.ndarray:
    keep = mc.mask_grid.astype(bool)
    return np.where(keep, mc.x_m, np.asarray(filled, dtype=tc.DTYPE)).astype(tc.DTYPE)


def _param_shapes(cfg: RecoveryNetConfig, channels, k=3):
    shapes = {}
    c_in = channels + 1
    w3 = cfg.widths3d
    for i, c_out in enumerate(w3):
        shapes[f"fr/enc{i}"] = (c_out, c_in, k, k, k)
        c_in = c_out
    for i in range(cfg.levels3d - 1, -1, -1):
        c_out = w3[i - 1] if i > 0 else w3[0]
        shapes[f"fr/dec{i}"] = (c_out, w3[i], k, k, k)
    for j, width in enumerate(cfg.injection_widths()):
        shapes[f"fr/inj{j}"] = (width, w3[0], k, k, k)
    c_in = channels + 1
    for i, c_out in enumerate(cfg.widths2d):
        shapes[f"fr/c2d{i}"] = (c_out, c_in, k, k)
        c_in = c_out
    shapes["fr/out"] = (channels, c_in, k, k)
    return shapes


def synth_recovery_weights(channels, cfg=None, seed=0, scale=0.1, zero=False):
    """Random (or all-zero) recovery weights including the serialized config."""
    cfg = cfg or RecoveryNetConfig()
    rng = np.random.default_rng(seed)
    out = dict(cfg.to_arrays())
    for name, shape in _param_shapes(cfg, channels).items():
        fan_in = int(np.prod(shape[1:]))
        w = np.zeros(shape) if zero else rng.normal(0, scale / np.sqrt(fan_in) * 3, shape)
        out[name + "/w"] = w
        out[name + "/b"] = np.zeros(shape[0]) if zero else rng.normal(0, 0.01, shape[0])
    return out


def _check_weights(weights, cfg, channels):
    for name, shape in _param_shapes(cfg, channels).items():
        w, b = weights[name + "/w"], weights[name + "/b"]
        if w.shape != shape or b.shape != (shape[0],):
            raise ShapeError(f"{name}: expected weight {shape}, bias ({shape[0]},); got {w.shape}, {b.shape}")


def _conv3(x, weights, name, stride=1):
    return tc.conv3d_forward(x, weights[name + "/w"], weights[name + "/b"], stride=stride, padding=1)


def temporal_features(mc: MaskedClip, weights, cfg: RecoveryNetConfig):
    """Low-resolution 3-D branch; returns the two injection maps at full resolution.

    Each map is ``(alpha_k, width, H, W)``.
    """
    n, c, h, w = mc.x_m.shape
    low = np.concatenate([tc.downsample2x(mc.x_m), tc.downsample2x(mc.mask_grid)], axis=1)
    x = low.transpose(1, 0, 2, 3)  # (C+1, T, H/2, W/2)
    skips = [x]
    for i in range(cfg.levels3d):
        x = tc.relu(_conv3(x, weights, f"fr/enc{i}", stride=2))
        skips.append(x)
    for i in range(cfg.levels3d - 1, -1, -1):
        x = tc.relu(_conv3(tc.upsample_to(x, skips[i].shape[1:]), weights, f"fr/dec{i}"))
        if i > 0:
            x = x + skips[i]
    feats = []
    for j in range(2):
        f = _conv3(x, weights, f"fr/inj{j}").transpose(1, 0, 2, 3)
        feats.append(np.ascontiguousarray(tc.upsample_to(f, (h, w))))
    return feats


def fr_forward(mc: MaskedClip, weights, cfg: RecoveryNetConfig | None = None) -> np.ndarray:
    """Two-branch completion; known pixels are copied from ``mc.x_m``."""
    n, c, h, w = mc.x_m.shape
    if h % 2 or w % 2:
        raise ShapeError(f"recovery needs even H and W, got {h}x{w}")
    cfg = cfg or RecoveryNetConfig.from_bundle(weights)
    _check_weights(weights, cfg, c)
    if mc.mask.all():
        return mc.x_m.copy()
    inj_first, inj_last = temporal_features(mc, weights, cfg)
    x = np.concatenate([mc.x_m, mc.mask_grid], axis=1)
    for i in range(len(cfg.widths2d)):
        x = tc.relu(tc.conv2d_forward(x, weights[f"fr/c2d{i}/w"], weights[f"fr/c2d{i}/b"]))
        if i == cfg.inject_first:
            x = x + inj_first
        if i == cfg.inject_last:
            x = x + inj_last
    out = tc.conv2d_forward(x, weights["fr/out/w"], weights["fr/out/b"])
    return composite(mc, out)


def interpolate_baseline(mc: MaskedClip) -> np.ndarray:
    """Fill each missing pixel from the nearest available pixel of the same frame.

    Distance is Euclidean in pixel units; ties go to the lower row-major index.
    """
    n, c, h, w = mc.x_m.shape
    out = mc.x_m.copy().reshape(n, c, h * w)
    rows, cols = np.divmod(np.arange(h * w), w)
    coords = np.stack([rows, cols], axis=1)
    for f in range(n):
        known = np.flatnonzero(mc.mask[f])
        missing = np.flatnonzero(~mc.mask[f])
        if known.size == 0:
            raise ShapeError(f"frame {f} has no available pixels to interpolate from")
        if missing.size == 0:
            continue
        src = _nearest(coords[known], coords[missing])
        out[f][:, missing] = out[f][:, known[src]]
    return out.reshape(n, c, h, w)


def _nearest(known_xy, query_xy, k=16):
    """Index into ``known_xy`` of the nearest point, lowest index on ties."""
    k = min(k, len(known_xy))
    _, idx = cKDTree(known_xy).query(query_xy, k=k)
    idx = idx.reshape(len(query_xy), k)
    # exact integer distances so ties are detected without rounding noise
    d2 = ((known_xy[idx] - query_xy[:, None, :]) ** 2).sum(axis=2)
    best = d2.min(axis=1)
    cand = np.where(d2 == best[:, None], idx, np.iinfo(np.int64).max)
    choice = cand.min(axis=1)
    # every returned neighbour ties: more may exist outside the k returned
    crowded = np.flatnonzero((d2 == best[:, None]).all(axis=1) & (k < len(known_xy)))
    for q in crowded:
        full = ((known_xy - query_xy[q]) ** 2).sum(axis=1)
        choice[q] = int(np.flatnonzero(full == full.min())[0])
    return choice


def recover(sel: SelectionResult, dims, mode="interpolate", weights=None):
    """Zero-fill a selection, then fill it with ``mode`` in {"fr", "interpolate", "zero"}."""
    mc = zero_fill(sel, dims)
    if mode == "zero":
        return mc.x_m
    if mode == "interpolate":
        return interpolate_baseline(mc)
    if mode == "fr":
        if weights is None:
            raise ShapeError("recovery mode 'fr' needs weights")
        return fr_forward(mc, weights)
    raise ValueError(f"unknown recovery mode {mode!r}")
