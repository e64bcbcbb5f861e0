"""Canonical byte-wise Huffman coding.

Codes are emitted MSB-first. Only the (symbol, code length) table is needed
to rebuild the code, so that is what travels with the stream. A stream that
uses a single distinct byte gets a 1-bit code.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from .errors import FormatError, HuffmanOverrunError

MAX_CODE_LEN = 57  # windows are assembled in uint64
_ENC_CHUNK = 1 << 18
_DEC_CHUNK = 1 << 16


def code_lengths(counts) -> np.ndarray:
    """Huffman code length per byte value (0 for absent symbols)."""
    counts = np.asarray(counts, dtype=np.int64)
    present = [int(s) for s in np.flatnonzero(counts)]
    lengths = np.zeros(256, dtype=np.int64)
    if not present:
        return lengths
    if len(present) == 1:
        lengths[present[0]] = 1
        return lengths
    while True:
        lengths = _tree_depths(counts, present)
        if lengths.max() <= MAX_CODE_LEN:
            return lengths
        # pathological (Fibonacci-like) histograms: flatten and rebuild
        counts = np.where(counts > 0, (counts + 1) // 2, 0)


def _tree_depths(counts, present):
    lengths = np.zeros(256, dtype=np.int64)
    # (weight, tiebreak, symbols) -- tiebreak keeps the tree deterministic
    heap = [(int(counts[s]), s, [s]) for s in present]
    heapq.heapify(heap)
    tick = 256
    while len(heap) > 1:
        wa, _, sa = heapq.heappop(heap)
        wb, _, sb = heapq.heappop(heap)
        for s in sa:
            lengths[s] += 1
        for s in sb:
            lengths[s] += 1
        heapq.heappush(heap, (wa + wb, tick, sa + sb))
        tick += 1
    return lengths


def canonical_table(lengths):
    """Sorted ``[(symbol, length), ...]`` in canonical order (length, then symbol)."""
    return sorted(((int(s), int(n)) for s, n in enumerate(lengths) if n > 0), key=lambda e: (e[1], e[0]))


def canonical_codes(table):
    """Assign canonical codes; returns ``(codes, lengths)`` indexed by byte value."""
    codes = np.zeros(256, dtype=np.uint64)
    lengths = np.zeros(256, dtype=np.int64)
    code = 0
    prev = 0
    for sym, n in table:
        code <<= n - prev
        codes[sym] = code
        lengths[sym] = n
        code += 1
        prev = n
    return codes, lengths


def validate_table(table):
    syms = [s for s, _ in table]
    lens = [n for _, n in table]
    if not table:
        raise FormatError("empty Huffman table")
    if len(set(syms)) != len(syms):
        raise FormatError("duplicate symbol in Huffman table")
    if any(not 1 <= n <= MAX_CODE_LEN for n in lens):
        raise FormatError("Huffman code length out of range")
    if any((a[1], a[0]) >= (b[1], b[0]) for a, b in zip(table, table[1:])):
        raise FormatError("Huffman table not in canonical order")
    if sum(2.0 ** -n for n in lens) > 1.0 + 1e-12:
        raise FormatError("Huffman table violates the Kraft inequality")


def encode(data: bytes):
    """Return ``(table, bit_length, coded_bytes)``."""
    sym = np.frombuffer(bytes(data), dtype=np.uint8)
    if sym.size == 0:
        raise ValueError("cannot entropy-code an empty payload")
    table = canonical_table(code_lengths(np.bincount(sym, minlength=256)))
    codes, lengths = canonical_codes(table)
    out = []
    carry = np.zeros(0, dtype=np.uint8)
    total = 0
    for start in range(0, sym.size, _ENC_CHUNK):
        s = sym[start : start + _ENC_CHUNK]
        L = lengths[s]
        C = codes[s]
        j = np.arange(L.max())
        shift = np.clip(L[:, None] - 1 - j, 0, None).astype(np.uint64)
        bits = ((C[:, None] >> shift) & np.uint64(1)).astype(np.uint8)
        bits = bits[j < L[:, None]]
        total += bits.size
        bits = np.concatenate([carry, bits])
        cut = bits.size - bits.size % 8
        out.append(np.packbits(bits[:cut]).tobytes())
        carry = bits[cut:]
    if carry.size:
        out.append(np.packbits(carry).tobytes())
    return table, total, b"".join(out)


def _decoder_tables(table):
    maxlen = max(n for _, n in table)
    order = np.array([s for s, _ in table], dtype=np.uint8)
    counts = np.bincount([n for _, n in table], minlength=maxlen + 1)
    first = np.zeros(maxlen + 1, dtype=np.int64)
    offset = np.zeros(maxlen + 1, dtype=np.int64)
    code = 0
    idx = 0
    for n in range(1, maxlen + 1):
        code <<= 1
        first[n] = code
        offset[n] = idx
        code += counts[n]
        idx += counts[n]
    # left-justified exclusive upper bound of each length's code range
    upper = np.array([(first[n] + counts[n]) << (maxlen - n) for n in range(1, maxlen + 1)], dtype=np.int64)
    return maxlen, order, first, offset, upper


def decode(table, bit_length, coded: bytes, n_symbols) -> bytes:
    """Inverse of :func:`encode`; ``n_symbols`` is the expected decoded length."""
    validate_table(table)
    if len(coded) < math.ceil(bit_length / 8):
        raise HuffmanOverrunError("coded stream shorter than its declared bit length")
    maxlen, order, first, offset, upper = _decoder_tables(table)
    bits = np.unpackbits(np.frombuffer(coded, dtype=np.uint8))[:bit_length]
    bits = np.concatenate([bits, np.zeros(_DEC_CHUNK + maxlen, dtype=np.uint8)])
    weights = (np.uint64(1) << np.arange(maxlen - 1, -1, -1, dtype=np.uint64)).astype(np.int64)

    out = []
    pos = 0
    remaining = n_symbols
    while remaining > 0:
        if pos >= bit_length:
            raise HuffmanOverrunError(f"stream exhausted with {remaining} symbols left")
        n = min(_DEC_CHUNK, bit_length - pos)
        seg = bits[pos : pos + n + maxlen].astype(np.int64)
        win = np.zeros(n, dtype=np.int64)
        for j in range(maxlen):
            win += seg[j : j + n] * weights[j]
        li = np.searchsorted(upper, win, side="right")  # index into lengths 1..maxlen
        valid = li < maxlen
        L = np.where(valid, li + 1, 1)
        # jump table over positions, sentinel n absorbs everything leaving the chunk
        nxt = np.arange(n) + L
        nxt[~valid] = n
        jump = np.append(np.minimum(nxt, n), n)
        levels = [jump]
        while (1 << len(levels)) <= n:
            levels.append(levels[-1][levels[-1]])
        # number of orbit positions from 0 that stay inside the chunk
        p, steps = 0, 0
        for k in range(len(levels) - 1, -1, -1):
            q = levels[k][p]
            if q < n:
                p, steps = q, steps + (1 << k)
        count = min(steps + 1, remaining)
        t = np.arange(count)
        starts = np.zeros(count, dtype=np.int64)
        for k, lv in enumerate(levels):
            sel = ((t >> k) & 1).astype(bool)
            starts[sel] = lv[starts[sel]]
        if not valid[starts].all():
            raise HuffmanOverrunError(f"invalid code at bit {pos + int(starts[~valid[starts]][0])}")
        Ls = L[starts]
        end = pos + int(starts[-1] + Ls[-1])
        if end > bit_length:
            raise HuffmanOverrunError("last symbol runs past the end of the coded stream")
        w = win[starts]
        out.append(order[offset[Ls] + (w >> (maxlen - Ls)) - first[Ls]])
        pos = end
        remaining -= count
    if pos != bit_length:
        raise HuffmanOverrunError(f"{bit_length - pos} undecoded bits after the last symbol")
    return np.concatenate(out).tobytes() if out else b""


def roundtrip(data: bytes):
    """Encode then decode ``data``; returns ``((table, bit_length, coded), decoded)``."""
    table, nbits, coded = encode(data)
    return (table, nbits, coded), decode(table, nbits, coded, len(data))


def empirical_entropy(data: bytes) -> float:
    """Shannon entropy of the byte histogram, bits per byte."""
    counts = np.bincount(np.frombuffer(bytes(data), dtype=np.uint8), minlength=256)
    p = counts[counts > 0] / counts.sum()
    return max(0.0, float(-(p * np.log2(p)).sum()))
