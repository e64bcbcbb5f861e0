"""Dense float32 tensor primitives used by the encoder and decoder forward passes.

A video clip is a plain ``numpy.ndarray`` of shape ``(F, C, H, W)`` and dtype
float32. Everything here is a pure function; no autograd, no broadcasting
beyond the shapes listed in each docstring.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import BadMagicError, MissingWeightError, ShapeError, TruncatedError

DTYPE = np.float32

# Largest float32 strictly below 1 and smallest positive normal float32.
_SIG_HI = np.float32(1.0) - np.float32(2.0 ** -24)
_SIG_LO = np.finfo(np.float32).tiny


def as_video(x, name="x") -> np.ndarray:
    """Validate and return ``x`` as a contiguous float32 ``(F, C, H, W)`` array."""
    arr = np.ascontiguousarray(x, dtype=DTYPE)
    if arr.ndim != 4:
        raise ShapeError(f"{name} must be 4-D (F, C, H, W), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ShapeError(f"{name} has an empty axis: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite values")
    return arr


def pool_frames(x, mode="avg") -> np.ndarray:
    """Collapse (C, H, W) of every frame to one scalar; returns shape ``(F,)``."""
    x = as_video(x)
    flat = x.reshape(x.shape[0], -1)
    if mode == "avg":
        # float64 accumulation keeps the per-frame mean order-independent in practice
        return flat.mean(axis=1, dtype=np.float64).astype(DTYPE)
    if mode == "max":
        return flat.max(axis=1)
    raise ValueError(f"unknown pooling mode {mode!r}")


def pool_channels(x, mode="avg") -> np.ndarray:
    """Pool over channels; ``(F, C, H, W) -> (F, 1, H, W)``."""
    x = as_video(x)
    if mode == "avg":
        return x.mean(axis=1, keepdims=True, dtype=np.float64).astype(DTYPE)
    if mode == "max":
        return x.max(axis=1, keepdims=True)
    raise ValueError(f"unknown pooling mode {mode!r}")


def relu(x):
    return np.maximum(x, DTYPE(0))


def sigmoid(x):
    """Logistic function, float32 output clipped to the open interval (0, 1)."""
    z = np.asarray(x, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    out = np.clip(out.astype(DTYPE), _SIG_LO, _SIG_HI)
    if np.ndim(x) == 0:
        return DTYPE(out)
    return out


def mlp_forward(v, w1, b1, w2, b2) -> np.ndarray:
    """Two-layer perceptron ``w2 @ relu(w1 @ v + b1) + b2``.

    ``w1`` is ``(hidden, n)``, ``w2`` is ``(n, hidden)``.
    """
    v = np.asarray(v, dtype=DTYPE)
    w1, b1, w2, b2 = (np.asarray(a, dtype=DTYPE) for a in (w1, b1, w2, b2))
    if v.ndim != 1 or w1.ndim != 2 or w1.shape[1] != v.shape[0]:
        raise ShapeError(f"MLP input length {v.shape} does not match w1 {w1.shape}")
    if b1.shape != (w1.shape[0],) or w2.shape != (v.shape[0], w1.shape[0]) or b2.shape != v.shape:
        raise ShapeError(
            f"MLP weight chain broken: w1 {w1.shape} b1 {b1.shape} w2 {w2.shape} b2 {b2.shape}"
        )
    h = relu(w1 @ v + b1)
    return (w2 @ h + b2).astype(DTYPE)


def conv2d_forward(x, kernel, bias=None, padding=None) -> np.ndarray:
    """Stride-1 2-D cross-correlation with zero padding.

    x: ``(n, c_in, H, W)``; kernel: ``(c_out, c_in, k, k)`` with odd k.
    ``padding`` defaults to ``k // 2`` so the spatial size is preserved.
    """
    x = np.asarray(x, dtype=DTYPE)
    kernel = np.asarray(kernel, dtype=DTYPE)
    if x.ndim != 4 or kernel.ndim != 4:
        raise ShapeError(f"conv2d expects 4-D input and kernel, got {x.shape}, {kernel.shape}")
    c_out, c_in, kh, kw = kernel.shape
    if x.shape[1] != c_in:
        raise ShapeError(f"conv2d channel mismatch: input {x.shape[1]}, kernel {c_in}")
    if kh != kw or kh % 2 == 0:
        raise ShapeError(f"conv2d kernel must be square with odd size, got {kh}x{kw}")
    p = kh // 2 if padding is None else padding
    if p:
        x = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))  # n, c_in, H', W', kh, kw
    out = np.einsum("nchwij,ocij->nohw", win, kernel, optimize=True)
    if bias is not None:
        out = out + np.asarray(bias, dtype=DTYPE).reshape(1, c_out, 1, 1)
    return np.ascontiguousarray(out, dtype=DTYPE)


def conv3d_forward(x, kernel, bias=None, stride=1, padding=0) -> np.ndarray:
    """3-D cross-correlation over ``(c_in, T, H, W)`` -> ``(c_out, T', H', W')``.

    Output sizes follow ``(n + 2p - k) // s + 1`` on each of T, H, W.
    """
    x = np.asarray(x, dtype=DTYPE)
    kernel = np.asarray(kernel, dtype=DTYPE)
    if x.ndim != 4 or kernel.ndim != 5:
        raise ShapeError(f"conv3d expects (c,T,H,W) input and 5-D kernel, got {x.shape}, {kernel.shape}")
    c_out, c_in, kt, kh, kw = kernel.shape
    if x.shape[0] != c_in:
        raise ShapeError(f"conv3d channel mismatch: input {x.shape[0]}, kernel {c_in}")
    if padding:
        x = np.pad(x, ((0, 0),) + ((padding, padding),) * 3)
    if any(n < k for n, k in zip(x.shape[1:], (kt, kh, kw))):
        raise ShapeError(f"conv3d kernel {kernel.shape[2:]} larger than padded input {x.shape[1:]}")
    win = sliding_window_view(x, (kt, kh, kw), axis=(1, 2, 3))
    win = win[:, ::stride, ::stride, ::stride]
    out = np.einsum("cthwabd,ocabd->othw", win, kernel, optimize=True)
    if bias is not None:
        out = out + np.asarray(bias, dtype=DTYPE).reshape(c_out, 1, 1, 1)
    return np.ascontiguousarray(out, dtype=DTYPE)


def downsample2x(x) -> np.ndarray:
    """2x2 average pooling over the last two axes (H and W must be even)."""
    x = np.asarray(x, dtype=DTYPE)
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise ShapeError(f"downsample2x needs even H and W, got {h}x{w}")
    blocks = x.reshape(*x.shape[:-2], h // 2, 2, w // 2, 2)
    return blocks.mean(axis=(-3, -1), dtype=np.float64).astype(DTYPE)


def upsample_to(x, size) -> np.ndarray:
    """Nearest-neighbour resize of the trailing axes of ``x`` to ``size``."""
    x = np.asarray(x)
    lead = x.ndim - len(size)
    for ax, n in enumerate(size, start=lead):
        src = x.shape[ax]
        if src != n:
            idx = (np.arange(n) * src) // n
            x = np.take(x, idx, axis=ax)
    return x


# --------------------------------------------------------------------------
# weight bundles

WEIGHT_MAGIC = b"STAEW1"


class WeightBundle:
    """Named float32 arrays keyed by string paths like ``"fa/w1"``.

    Missing keys raise ``MissingWeightError``; there is no default value.
    """

    def __init__(self, arrays=None):
        self._arrays = {}
        for name, arr in (arrays or {}).items():
            self[name] = arr

    def __setitem__(self, name, arr):
        arr = np.ascontiguousarray(arr, dtype=DTYPE)
        if arr.size != int(np.prod(arr.shape)):
            raise ShapeError(f"{name}: size/shape mismatch")
        self._arrays[str(name)] = arr

    def __getitem__(self, name) -> np.ndarray:
        try:
            return self._arrays[name]
        except KeyError:
            raise MissingWeightError(f"weight {name!r} missing from bundle") from None

    def __contains__(self, name):
        return name in self._arrays

    def __iter__(self):
        return iter(sorted(self._arrays))

    def __len__(self):
        return len(self._arrays)

    def keys(self):
        return sorted(self._arrays)

    def items(self):
        return [(k, self._arrays[k]) for k in self.keys()]

    def __eq__(self, other):
        if not isinstance(other, WeightBundle) or self.keys() != other.keys():
            return False
        return all(
            a.shape == other[k].shape and a.tobytes() == other[k].tobytes() for k, a in self.items()
        )

    def to_bytes(self) -> bytes:
        """Serialize: magic, u32 entry count, entry table, float32 LE payload.

        Entry: u16 name length, UTF-8 name, u8 rank, rank x u32 dims,
        u64 byte offset into the payload.
        """
        head = [WEIGHT_MAGIC, struct.pack("<I", len(self))]
        payload = []
        offset = 0
        for name, arr in self.items():
            raw = name.encode("utf-8")
            head.append(struct.pack("<H", len(raw)) + raw)
            head.append(struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
            head.append(struct.pack("<Q", offset))
            data = arr.astype("<f4").tobytes()
            payload.append(data)
            offset += len(data)
        return b"".join(head + payload)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "WeightBundle":
        if buf[:6] != WEIGHT_MAGIC:
            raise BadMagicError("not a weight bundle (bad magic)")
        try:
            pos = 6
            (count,) = struct.unpack_from("<I", buf, pos)
            pos += 4
            table = []
            for _ in range(count):
                (nlen,) = struct.unpack_from("<H", buf, pos)
                pos += 2
                name = buf[pos : pos + nlen].decode("utf-8")
                if len(name.encode("utf-8")) != nlen:
                    raise TruncatedError("weight bundle truncated in entry table")
                pos += nlen
                (rank,) = struct.unpack_from("<B", buf, pos)
                pos += 1
                dims = struct.unpack_from(f"<{rank}I", buf, pos)
                pos += 4 * rank
                (off,) = struct.unpack_from("<Q", buf, pos)
                pos += 8
                table.append((name, dims, off))
        except struct.error as exc:
            raise TruncatedError(f"weight bundle truncated: {exc}") from None
        bundle = cls()
        for name, dims, off in table:
            n = int(np.prod(dims, dtype=np.int64))
            start = pos + off
            if start + 4 * n > len(buf):
                raise TruncatedError(f"weight bundle payload truncated at {name!r}")
            arr = np.frombuffer(buf, dtype="<f4", count=n, offset=start)
            bundle[name] = arr.reshape(dims)
        return bundle

    def save(self, path):
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "WeightBundle":
        return cls.from_bytes(Path(path).read_bytes())
