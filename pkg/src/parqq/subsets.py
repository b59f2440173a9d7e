"""Bitmask helpers for subsets of a ground set ``{0, ..., n-1}``.

Subsets are plain ints: bit ``i`` set means index ``i`` is a member.  All
indices in the package are 0-based; human-facing output keeps them 0-based
too so that JSON round-trips are lossless.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator


def popcount(mask: int) -> int:
    return int(mask).bit_count()


def to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def members(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def masks_of_size(n: int, k: int) -> Iterator[int]:
    """All ``k``-subsets of ``range(n)`` in lexicographic order of their sorted members."""
    for combo in combinations(range(n), k):
        yield to_mask(combo)


def submasks(mask: int) -> Iterator[int]:
    """Every submask of ``mask`` including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def nonempty_submasks_upto(mask: int, size: int) -> Iterator[int]:
    """Nonempty submasks of ``mask`` with at most ``size`` elements, by size then lexicographically."""
    elems = members(mask)
    for k in range(1, min(size, len(elems)) + 1):
        for combo in combinations(elems, k):
            yield to_mask(combo)


def format_mask(mask: int) -> str:
    return ",".join(str(i) for i in members(mask))


def parse_mask(text: str) -> int:
    text = text.strip()
    if not text:
        return 0
    return to_mask(int(t) for t in text.split(","))
