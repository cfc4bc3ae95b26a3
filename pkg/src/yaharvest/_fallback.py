"""Pure-Python kernels. Same API and outputs as the compiled ``_kernels`` module."""

from __future__ import annotations

_C1 = 0xCC9E2D51
_C2 = 0x1B873593
_MASK = 0xFFFFFFFF

TRIGGER = 1
OFFENSIVE = 2
HATEFUL = 4


def murmur3_32(data: bytes, seed: int = 0) -> int:
    """MurmurHash3 x86_32 of ``data``, as an unsigned 32-bit int."""
    h = seed & _MASK
    n = len(data)
    nblocks = n // 4
    for i in range(nblocks):
        k = int.from_bytes(data[4 * i : 4 * i + 4], "little")
        k = (k * _C1) & _MASK
        k = ((k << 15) | (k >> 17)) & _MASK
        k = (k * _C2) & _MASK
        h ^= k
        h = ((h << 13) | (h >> 19)) & _MASK
        h = (h * 5 + 0xE6546B64) & _MASK
    tail = data[4 * nblocks :]
    k = 0
    if len(tail) == 3:
        k ^= tail[2] << 16
    if len(tail) >= 2:
        k ^= tail[1] << 8
    if len(tail) >= 1:
        k ^= tail[0]
        k = (k * _C1) & _MASK
        k = ((k << 15) | (k >> 17)) & _MASK
        k = (k * _C2) & _MASK
        h ^= k
    h ^= n
    h ^= h >> 16
    h = (h * 0x85EBCA6B) & _MASK
    h ^= h >> 13
    h = (h * 0xC2B2AE35) & _MASK
    h ^= h >> 16
    return h


def hash_ngrams(text: str, orders: tuple[int, ...], dim: int, seed: int) -> dict[int, int]:
    """Bucket counts of boundary-padded character n-grams of every word in ``text``."""
    counts: dict[int, int] = {}
    for word in text.split():
        padded = "<" + word + ">"
        size = len(padded)
        for n in orders:
            for i in range(size - n + 1):
                bucket = murmur3_32(padded[i : i + n].encode("utf-8"), seed) % dim
                counts[bucket] = counts.get(bucket, 0) + 1
    return counts


def scan_tokens(tokens: list[str], table: dict[str, int]) -> tuple[bool, list[str], list[str]]:
    """One pass over ``tokens`` against a token->category-bitmask table.

    Returns (trigger_present, offensive_hits, hateful_hits); hits are
    deduplicated and kept in first-occurrence order.
    """
    trigger = False
    off: list[str] = []
    hs: list[str] = []
    seen: set[str] = set()
    for tok in tokens:
        mask = table.get(tok, 0)
        if not mask:
            continue
        if mask & TRIGGER:
            trigger = True
        if tok in seen:
            continue
        seen.add(tok)
        if mask & OFFENSIVE:
            off.append(tok)
        if mask & HATEFUL:
            hs.append(tok)
    return trigger, off, hs
