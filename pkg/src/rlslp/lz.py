"""LZ77-style factorizations: an exact greedy parser used as an oracle,
and the block-fingerprint approximate parser used by the pipeline.

A factorization is a list of phrases (p, l).  l = 0 marks a literal and
p is then the byte value; l >= 1 copies l bytes starting at 1-based text
position p, where p points strictly before the phrase (sources may
overlap the phrase itself, as usual for LZ77).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .grammar import FormatError

LZ_MAGIC = b"LZPF"
LZ_VERSION = 1

DEFAULT_BLOCK_SIZE = 50

# Rolling fingerprints: polynomial hash modulo the Mersenne prime 2^61-1.
FP_MOD = (1 << 61) - 1
DEFAULT_FP_BASE = 256

_MASK53 = (1 << 53) - 1


@dataclass(frozen=True)
class Phrase:
    pos: int     # 1-based source position, or byte value for literals
    length: int  # 0 for literals


@dataclass
class Factorization:
    phrases: list[Phrase]
    text_length: int


class ParseError(ValueError):
    """Raised when a factorization is malformed or undecodable."""


def parse_exact_lz77(text: bytes) -> Factorization:
    """Greedy longest-match factorization (oracle role).

    Each phrase takes the longest prefix of the remainder that occurs
    earlier in the text; among valid sources the most recent one is
    reported.  Match lengths are found by galloping + binary search over
    substring probes, so heavily repetitive inputs stay workable.
    """
    n = len(text)
    phrases: list[Phrase] = []
    i = 0
    while i < n:
        # longest l with an occurrence of text[i:i+l] starting before i:
        # probe(l) uses find's end bound to force a start position <= i-1.
        def probe(length: int) -> bool:
            return text.find(text[i:i + length], 0, i - 1 + length) >= 0

        if i == 0 or not probe(1):
            phrases.append(Phrase(text[i], 0))
            i += 1
            continue
        lo = 1
        hi = 2
        limit = n - i
        while hi <= limit and probe(hi):
            lo = hi
            hi *= 2
        hi = min(hi, limit + 1)
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            lo, hi = (mid, hi) if probe(mid) else (lo, mid)
        src = text.rfind(text[i:i + lo], 0, i - 1 + lo)
        phrases.append(Phrase(src + 1, lo))
        i += lo
    return Factorization(phrases, n)


def _block_fingerprints(text: bytes, block_size: int, base: int) -> list[int]:
    """Fingerprints of the full blocks at offsets 0, B, 2B, ..."""
    m = len(text) // block_size
    if m == 0:
        return []
    if base == 256:
        # Horner column-by-column; v*256 mod (2^61-1) folds via 2^61 = 1.
        blocks = np.frombuffer(text, dtype=np.uint8,
                               count=m * block_size).reshape(m, block_size)
        v = np.zeros(m, dtype=np.uint64)
        for col in range(block_size):
            v = (v >> np.uint64(53)) + ((v & np.uint64(_MASK53)) << np.uint64(8))
            v += blocks[:, col].astype(np.uint64)
            v = (v & np.uint64(FP_MOD)) + (v >> np.uint64(61))
        v = np.where(v >= FP_MOD, v - FP_MOD, v)
        return v.tolist()
    out = []
    for j in range(m):
        h = 0
        for byte in text[j * block_size:(j + 1) * block_size]:
            h = (h * base + byte) % FP_MOD
        out.append(h)
    return out


def _fingerprint(chunk: bytes, base: int) -> int:
    h = 0
    for byte in chunk:
        h = (h * base + byte) % FP_MOD
    return h


# Inputs at least this long precompute every window fingerprint in bulk
# instead of rolling the hash byte by byte inside the scan loop.
BULK_FP_MIN = 1 << 16

_ROW = 2048


def _canon(v: np.ndarray, mod: np.uint64) -> np.ndarray:
    """Reduce folded sums to canonical residues.  v - mod wraps above v
    whenever v < mod, so the minimum picks the reduced value."""
    return np.minimum(v, v - mod)


def _rot_mul(v: np.ndarray, shift: int, mod: np.uint64) -> np.ndarray:
    """v * 2^shift modulo 2^61 - 1.  Powers of two act as 61-bit
    rotations, so no multiply can overflow uint64."""
    s = np.uint64(shift % 61)
    inv = np.uint64(61) - s
    out = (v >> inv) + ((v & ((np.uint64(1) << inv) - np.uint64(1))) << s)
    return _canon((out & mod) + (out >> np.uint64(61)), mod)


def _window_fingerprints(text: bytes, block_size: int) -> np.ndarray:
    """Fingerprint of text[i:i+B] for every window start, base 256.

    Row-local prefix hashes are built column-parallel (Horner over the
    columns of an (rows, _ROW) reshape), seeded row by row into global
    prefix hashes, and differenced into window values.  Every value is
    the canonical residue the scalar path computes, so the two hashing
    paths can share one fingerprint table.
    """
    n = len(text)
    blk = block_size
    count = n - blk + 1
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    mod = np.uint64(FP_MOD)
    rows = -(-n // _ROW)
    data = np.zeros(rows * _ROW, dtype=np.uint8)
    data[:n] = np.frombuffer(text, dtype=np.uint8)
    # transpose so the Horner loop reads contiguous columns
    cols = np.ascontiguousarray(data.reshape(rows, _ROW).T).astype(np.uint64)
    wt = np.empty((_ROW + 1, rows), dtype=np.uint64)
    wt[0] = 0
    v = np.zeros(rows, dtype=np.uint64)
    c8, c53, c61 = np.uint64(8), np.uint64(53), np.uint64(61)
    m53 = np.uint64(_MASK53)
    for c in range(_ROW):
        v = (v >> c53) + ((v & m53) << c8)
        v = v + cols[c]
        v = (v & mod) + (v >> c61)
        wt[c + 1] = v
    # prefix hash at each row start, exact integer arithmetic
    row_pow = pow(256, _ROW, FP_MOD)
    seeds = np.empty(rows, dtype=np.uint64)
    acc = 0
    for r in range(rows):
        seeds[r] = acc
        acc = (acc * row_pow + int(wt[_ROW, r])) % FP_MOD
    w = np.ascontiguousarray(wt.T)  # (rows, _ROW + 1)
    del wt
    # global prefix hashes p[k] for k = 0..n, combined slab-wise
    shifts = (np.arange(_ROW + 1, dtype=np.uint64) * c8) % c61
    invs = c61 - shifts
    masks = (np.uint64(1) << invs) - np.uint64(1)
    p = np.empty(rows * _ROW + 1, dtype=np.uint64)
    slab = max(1, (1 << 22) // (_ROW * 8))
    for r0 in range(0, rows, slab):
        r1 = min(r0 + slab, rows)
        sc = seeds[r0:r1, None]
        rot = (sc >> invs[None, :]) + ((sc & masks[None, :]) << shifts[None, :])
        rot = _canon((rot & mod) + (rot >> c61), mod)
        q = rot + w[r0:r1]
        q = _canon((q & mod) + (q >> c61), mod)
        p[r0 * _ROW:r1 * _ROW] = q[:, :_ROW].reshape(-1)
    p[rows * _ROW] = acc if n == rows * _ROW else 0
    del w
    # window value: p[i + B] - p[i] * 2^(8B)
    out = np.empty(count, dtype=np.uint64)
    step = 1 << 20
    for i0 in range(0, count, step):
        i1 = min(i0 + step, count)
        a = _rot_mul(p[i0:i1], 8 * blk, mod)
        h = p[i0 + blk:i1 + blk] + (mod - a)
        out[i0:i1] = _canon((h & mod) + (h >> c61), mod)
    return out


def _extend_match(text: bytes, src: int, dst: int, start: int) -> int:
    """Length of the common extension of text[src:] and text[dst:] from
    offset start onward, found by galloping slice comparison."""
    n = len(text)
    k = start
    step = 1 << 10
    while True:
        hi = min(step, n - dst - k)
        if hi <= 0:
            return k
        if text[src + k:src + k + hi] == text[dst + k:dst + k + hi]:
            k += hi
            step *= 2
            continue
        lo = 0
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if text[src + k:src + k + mid] == text[dst + k:dst + k + mid]:
                lo = mid
            else:
                hi = mid
        return k + lo


def parse_bentley_mcilroy(text: bytes, block_size: int = DEFAULT_BLOCK_SIZE,
                          base: int = DEFAULT_FP_BASE) -> Factorization:
    """Approximate factorization from stored block fingerprints.

    Fingerprints of the non-overlapping blocks at stride B are stored as
    the scan passes them (first store wins on equal fingerprints).  At
    each position the fingerprint of the upcoming B bytes is looked up;
    a hit is verified by direct comparison and extended maximally
    forward.  Matches shorter than B never arise, unmatched bytes are
    emitted as literals.

    Long inputs take every window fingerprint from one vectorized
    precompute; short ones roll the hash inside the scan.  Both paths
    produce the same canonical values, hence the same factorization.
    """
    if block_size < 2:
        raise ValueError("block size must be at least 2")
    n = len(text)
    phrases: list[Phrase] = []
    if n == 0:
        return Factorization(phrases, 0)
    bulk = base == 256 and n >= BULK_FP_MIN and n >= block_size
    table: dict[int, int] = {}
    stored = 0  # blocks whose end lies at or before the scan position
    i = 0
    if bulk:
        window = _window_fingerprints(text, block_size)
        while i < n:
            while (stored + 1) * block_size <= i:
                table.setdefault(int(window[stored * block_size]),
                                 stored * block_size)
                stored += 1
            if i + block_size > n:
                phrases.append(Phrase(text[i], 0))
                i += 1
                continue
            src = table.get(int(window[i]))
            if src is not None and text[src:src + block_size] == text[i:i + block_size]:
                length = _extend_match(text, src, i, block_size)
                phrases.append(Phrase(src + 1, length))
                i += length
            else:
                phrases.append(Phrase(text[i], 0))
                i += 1
        return Factorization(phrases, n)

    fps = _block_fingerprints(text, block_size, base)
    pow_top = pow(base, block_size - 1, FP_MOD)
    h = _fingerprint(text[:block_size], base) if n >= block_size else 0
    while i < n:
        while (stored + 1) * block_size <= i:
            table.setdefault(fps[stored], stored * block_size)
            stored += 1
        if i + block_size > n:
            phrases.append(Phrase(text[i], 0))
            i += 1
            continue
        src = table.get(h)
        if src is not None and text[src:src + block_size] == text[i:i + block_size]:
            length = _extend_match(text, src, i, block_size)
            phrases.append(Phrase(src + 1, length))
            i += length
            if i + block_size <= n:
                h = _fingerprint(text[i:i + block_size], base)
        else:
            phrases.append(Phrase(text[i], 0))
            if i + 1 + block_size <= n:
                h = ((h - text[i] * pow_top) * base + text[i + block_size]) % FP_MOD
            i += 1
    return Factorization(phrases, n)


def decode_factorization(fz: Factorization) -> bytes:
    """Reconstruct the text, validating every phrase reference."""
    out = bytearray()
    for idx, ph in enumerate(fz.phrases):
        if ph.length == 0:
            if not 0 <= ph.pos <= 255:
                raise ParseError(f"phrase {idx + 1}: literal {ph.pos} out of range")
            out.append(ph.pos)
            continue
        if ph.pos < 1 or ph.pos > len(out):
            raise ParseError(
                f"phrase {idx + 1}: source {ph.pos} not inside the {len(out)} "
                "bytes decoded so far")
        src = ph.pos - 1
        remaining = ph.length
        while remaining > 0:
            avail = len(out) - src
            take = min(avail, remaining)
            out += out[src:src + take]
            src += take
            remaining -= take
    if len(out) != fz.text_length:
        raise ParseError(
            f"decoded {len(out)} bytes, header promised {fz.text_length}")
    return bytes(out)


def factorization_stats(fz: Factorization) -> dict:
    """Phrase count, text length and the compression ratio n/f."""
    f = len(fz.phrases)
    n = fz.text_length
    return {"phrases": f, "text_length": n,
            "ratio": round(n / f, 3) if f else 0.0}


# Serialization ("LZPF").

_LZ_HEADER = struct.Struct("<4sBQQ")
_PAIR = struct.Struct("<QQ")


def encode_factorization(fz: Factorization) -> bytes:
    out = bytearray(_LZ_HEADER.pack(LZ_MAGIC, LZ_VERSION, fz.text_length,
                                    len(fz.phrases)))
    for ph in fz.phrases:
        out += _PAIR.pack(ph.pos, ph.length)
    return bytes(out)


def decode_factorization_bytes(data: bytes) -> Factorization:
    if len(data) < _LZ_HEADER.size:
        raise FormatError("truncated header")
    magic, version, n, f = _LZ_HEADER.unpack_from(data, 0)
    if magic != LZ_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != LZ_VERSION:
        raise FormatError(f"unsupported version {version}")
    if len(data) != _LZ_HEADER.size + 16 * f:
        raise FormatError("phrase table size mismatch")
    phrases = []
    pos = _LZ_HEADER.size
    for _ in range(f):
        p, length = _PAIR.unpack_from(data, pos)
        pos += 16
        phrases.append(Phrase(p, length))
    return Factorization(phrases, n)
