"""End-to-end encode/decode plus the clip container format.

Clip file: ``"STAEV1" | F, C, H, W as u16 LE | float32 LE payload``.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import attention, codec, recovery
from . import tensor_core as tc
from .errors import BadMagicError, FormatError, ShapeError, TruncatedError

CLIP_MAGIC = b"STAEV1"
_CLIP_HEAD = struct.Struct("<6s4H")


def clip_to_bytes(x) -> bytes:
    x = tc.as_video(x)
    if max(x.shape) > 0xFFFF:
        raise ShapeError("clip dimension too large for u16 header")
    return _CLIP_HEAD.pack(CLIP_MAGIC, *x.shape) + x.astype("<f4").tobytes()


def clip_from_bytes(buf: bytes) -> np.ndarray:
    if buf[:6] != CLIP_MAGIC:
        raise BadMagicError("not a clip file (bad magic)")
    if len(buf) < _CLIP_HEAD.size:
        raise TruncatedError("clip header truncated")
    _, *dims = _CLIP_HEAD.unpack_from(buf)
    n = int(np.prod(dims))
    if len(buf) - _CLIP_HEAD.size < 4 * n:
        raise TruncatedError("clip payload truncated")
    if len(buf) - _CLIP_HEAD.size > 4 * n:
        raise FormatError("trailing bytes after clip payload")
    return np.frombuffer(buf, dtype="<f4", offset=_CLIP_HEAD.size).astype(np.float32).reshape(dims)


def save_clip(path, x):
    Path(path).write_bytes(clip_to_bytes(x))


def load_clip(path) -> np.ndarray:
    return clip_from_bytes(Path(path).read_bytes())


def load_planar_rgb(path, frames, height, width) -> np.ndarray:
    """Import raw planar 8-bit RGB (frame, channel, row, col), scaled to [0, 1]."""
    raw = np.fromfile(path, dtype=np.uint8)
    need = frames * 3 * height * width
    if raw.size != need:
        raise ShapeError(f"planar RGB file holds {raw.size} bytes, {frames}x3x{height}x{width} needs {need}")
    return (raw.reshape(frames, 3, height, width) / np.float32(255)).astype(np.float32)


def make_weights(n_frames, channels=3, seed=0, zero=False, fr_config=None) -> tc.WeightBundle:
    """Synthetic attention + recovery weights (no trained parameters ship with the package)."""
    w = attention.synth_attention_weights(n_frames, seed=seed)
    if zero:
        w = {k: np.zeros_like(v) for k, v in w.items()}
    w.update(recovery.synth_recovery_weights(channels, fr_config, seed=seed + 1, zero=zero))
    return tc.WeightBundle(w)


def encode_clip(x, weights, alpha_k, beta_m, use_entropy=False, skip_fa_when_full=True):
    """Returns ``(packet_bytes, stats_dict)``."""
    x = tc.as_video(x)
    sel = attention.encode_semantics(x, weights, alpha_k, beta_m, skip_fa_when_full)
    pkt = codec.encode_packet(sel, x.shape, use_entropy)
    _, _, stats, layout = codec.decode_packet(pkt, with_layout=True)
    info = {
        "dims": list(x.shape),
        "alpha_k": sel.alpha_k,
        "beta_m": beta_m,
        "k_px": sel.k_px,
        "frame_indices": [int(i) for i in sel.frame_indices],
        "entropy": bool(use_entropy),
        "raw_payload_bytes": 4 * sel.values.size,
        "packet_bytes": len(pkt),
        "overhead_bytes": layout.overhead_bytes,
    }
    info.update(stats.as_dict())
    return pkt, info


def decode_clip(pkt: bytes, weights=None, mode="interpolate"):
    """Returns ``(recovered_clip, selected_frame_indices, info_dict)``."""
    sel, dims, stats = codec.decode_packet(pkt)
    out = recovery.recover(sel, dims, mode, weights)
    info = {
        "dims": list(dims),
        "recovered_shape": list(out.shape),
        "frame_indices": [int(i) for i in sel.frame_indices],
        "k_px": sel.k_px,
        "available_fraction": sel.k_px / (dims[2] * dims[3]),
        "recovery": mode,
    }
    info.update(stats.as_dict())
    return out, sel.frame_indices, info
