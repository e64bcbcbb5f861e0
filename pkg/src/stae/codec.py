"""Byte-exact semantic packet format.

Layout (little-endian throughout)::

    "STAEP1" | version u8 | flags u8 (bit0 = huffman)
    | F, C, H, W u16 | alpha_k u16 | k_px u32
    | frame_indices alpha_k x u16
    | masks alpha_k x ceil(H*W/8) bytes, bit i = row-major pixel i, LSB first
    | huffman: entries u16, (symbol u8, length u8) x entries, bit_length u64, coded bytes
    | raw:     float32 payload, 4 * alpha_k * C * k_px bytes

Header and mask bytes are reported separately from the payload so the cost
model can decide whether to count them.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import huffman
from .attention import SelectionResult
from .errors import BadMagicError, FormatError, PopcountError, ShapeError, TruncatedError

MAGIC = b"STAEP1"
VERSION = 1
FLAG_HUFFMAN = 0x01
_HEAD = struct.Struct("<6sBB4HHI")


@dataclass(frozen=True)
class EntropyStats:
    raw_bits: int
    coded_bits: int
    n_elements: int

    @property
    def bits_per_element(self):
        return self.coded_bits / self.n_elements if self.n_elements else 0.0

    def as_dict(self):
        return {
            "raw_bits": self.raw_bits,
            "coded_bits": self.coded_bits,
            "n_elements": self.n_elements,
            "bits_per_element": self.bits_per_element,
        }


@dataclass(frozen=True)
class PacketLayout:
    header_bytes: int
    index_bytes: int
    mask_bytes: int
    table_bytes: int
    payload_bytes: int

    @property
    def total_bytes(self):
        return self.header_bytes + self.index_bytes + self.mask_bytes + self.table_bytes + self.payload_bytes

    @property
    def overhead_bytes(self):
        return self.total_bytes - self.payload_bytes


def mask_bytes_per_frame(h, w):
    return math.ceil(h * w / 8)


def overhead_bytes(alpha_k, dims, huffman_entries=None):
    """Non-payload bytes of a packet; ``huffman_entries`` None means a raw packet."""
    _, _, h, w = dims
    n = _HEAD.size + 2 * alpha_k + alpha_k * mask_bytes_per_frame(h, w)
    if huffman_entries is not None:
        n += 2 + 2 * huffman_entries + 8
    return n


def encode_packet(sel: SelectionResult, dims, use_entropy=False) -> bytes:
    f, c, h, w = (int(d) for d in dims)
    sel.validate()
    if sel.channels != c or sel.masks.shape[1] != h * w:
        raise ShapeError(f"selection does not match dims {dims}")
    if sel.frame_indices[-1] >= f:
        raise ShapeError(f"frame index {sel.frame_indices[-1]} out of range for F={f}")
    if max(f, c, h, w, sel.alpha_k) > 0xFFFF:
        raise ShapeError("dimension too large for u16 header field")
    k_px = sel.k_px
    if k_px == 0:
        raise ShapeError("selection retains no pixels")
    parts = [
        _HEAD.pack(MAGIC, VERSION, FLAG_HUFFMAN if use_entropy else 0, f, c, h, w, sel.alpha_k, k_px),
        np.asarray(sel.frame_indices, dtype="<u2").tobytes(),
    ]
    nb = mask_bytes_per_frame(h, w)
    for m in sel.masks:
        parts.append(np.packbits(m, bitorder="little").tobytes().ljust(nb, b"\0"))
    raw = np.asarray(sel.values, dtype="<f4").tobytes()
    if use_entropy:
        table, nbits, coded = huffman.encode(raw)
        parts.append(struct.pack("<H", len(table)))
        parts.append(b"".join(struct.pack("<BB", s, n) for s, n in table))
        parts.append(struct.pack("<Q", nbits))
        parts.append(coded)
    else:
        parts.append(raw)
    return b"".join(parts)


def _take(buf, pos, n, what):
    if pos + n > len(buf):
        raise TruncatedError(f"packet truncated in {what} (need {n} bytes at offset {pos}, have {len(buf) - pos})")
    return buf[pos : pos + n], pos + n


def decode_packet(buf: bytes, with_layout=False):
    """Parse a packet; returns ``(selection, dims, stats)`` (plus layout if asked)."""
    buf = bytes(buf)
    if len(buf) < len(MAGIC) or buf[: len(MAGIC)] != MAGIC:
        raise BadMagicError("not a semantic packet (bad magic)")
    head, pos = _take(buf, 0, _HEAD.size, "header")
    _, version, flags, f, c, h, w, alpha_k, k_px = _HEAD.unpack(head)
    if version != VERSION:
        raise FormatError(f"unsupported packet version {version}")
    if flags & ~FLAG_HUFFMAN:
        raise FormatError(f"unknown flag bits 0x{flags:02x}")
    if min(f, c, h, w, alpha_k) < 1 or alpha_k > f or not 1 <= k_px <= h * w:
        raise FormatError(f"inconsistent header: dims {(f, c, h, w)}, alpha_k {alpha_k}, k_px {k_px}")

    raw_idx, pos = _take(buf, pos, 2 * alpha_k, "frame indices")
    idx = np.frombuffer(raw_idx, dtype="<u2").astype(np.int64)
    if np.any(np.diff(idx) <= 0) or idx[-1] >= f:
        raise FormatError("frame indices not strictly increasing within range")

    nb = mask_bytes_per_frame(h, w)
    raw_masks, pos = _take(buf, pos, alpha_k * nb, "masks")
    bits = np.unpackbits(np.frombuffer(raw_masks, dtype=np.uint8).reshape(alpha_k, nb), axis=1, bitorder="little")
    if bits[:, h * w :].any():
        raise FormatError("padding bits set in mask")
    masks = bits[:, : h * w].astype(bool)
    counts = masks.sum(axis=1)
    bad = np.flatnonzero(counts != k_px)
    if bad.size:
        raise PopcountError(f"mask of frame {int(bad[0])} has {int(counts[bad[0]])} bits set, header says {k_px}")

    n_elem = alpha_k * c * k_px
    table_start = pos
    if flags & FLAG_HUFFMAN:
        (n_entries,), pos = struct.unpack("<H", _take(buf, pos, 2, "table size")[0]), pos + 2
        raw_tab, pos = _take(buf, pos, 2 * n_entries, "Huffman table")
        table = [(raw_tab[i], raw_tab[i + 1]) for i in range(0, len(raw_tab), 2)]
        (nbits,), pos = struct.unpack("<Q", _take(buf, pos, 8, "bit length")[0]), pos + 8
        table_bytes = pos - table_start
        coded, pos = _take(buf, pos, math.ceil(nbits / 8), "coded payload")
        raw = huffman.decode(table, nbits, coded, 4 * n_elem)
        coded_bits = nbits
    else:
        table_bytes = 0
        raw, pos = _take(buf, pos, 4 * n_elem, "payload")
        coded_bits = 8 * len(raw)
    if pos != len(buf):
        raise FormatError(f"{len(buf) - pos} trailing bytes after payload")

    values = np.frombuffer(raw, dtype="<f4").astype(np.float32)
    sel = SelectionResult(idx, masks, values, c)
    stats = EntropyStats(32 * n_elem, coded_bits, n_elem)
    if not with_layout:
        return sel, (f, c, h, w), stats
    layout = PacketLayout(_HEAD.size, 2 * alpha_k, alpha_k * nb, table_bytes, len(buf) - table_start - table_bytes)
    return sel, (f, c, h, w), stats, layout
