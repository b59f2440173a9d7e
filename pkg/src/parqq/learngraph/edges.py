"""The p-parallel learning-graph edge set.

An edge ``(S, J)`` joins ``S`` to ``S | J`` where ``J`` is a nonempty set of
at most ``p`` indices outside ``S``.  The degenerate ``J = {}`` loop is left
out: it carries no information and any weight placed on it is wasted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from ..errors import ParameterError, ResourceLimitError
from ..subsets import format_mask, masks_of_size, nonempty_submasks_upto, parse_mask

MAX_EDGES = 10**7


def edge_count(n: int, p: int, stage_cap: int) -> int:
    return sum(
        comb(n, s) * sum(comb(n - s, j) for j in range(1, min(p, n - s) + 1))
        for s in range(stage_cap + 1)
    )


def edge_key(S: int, J: int) -> str:
    """JSON key ``"S|J"`` with sorted 0-based index lists, e.g. ``"0,2|1"``."""
    return f"{format_mask(S)}|{format_mask(J)}"


def parse_edge_key(key: str) -> tuple[int, int]:
    s, _, j = key.partition("|")
    return parse_mask(s), parse_mask(j)


@dataclass(frozen=True)
class EdgeSetP:
    n: int
    p: int
    stage_cap: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.p <= self.n:
            raise ParameterError(f"need 1 <= p <= n, got p={self.p}, n={self.n}")
        if not 0 <= self.stage_cap <= self.n:
            raise ParameterError(f"need 0 <= stage_cap <= n, got {self.stage_cap}")

    def __len__(self):
        return edge_count(self.n, self.p, self.stage_cap)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """``(S, J)`` bitmask pairs, ordered by ``|S|``, then ``S``, then ``|J|``, then ``J``."""
        if len(self) > MAX_EDGES:
            raise ResourceLimitError(f"{len(self)} edges exceeds the limit {MAX_EDGES}")
        full = (1 << self.n) - 1
        out = []
        for s in range(self.stage_cap + 1):
            for S in masks_of_size(self.n, s):
                for J in nonempty_submasks_upto(full & ~S, self.p):
                    out.append((S, J))
        return tuple(out)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge sources and increments as int64 arrays."""
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        return e[:, 0], e[:, 1]


def build_edge_set(n: int, p: int, stage_cap: int | None = None) -> EdgeSetP:
    """Edge set over all ``S`` with ``|S| <= stage_cap`` (default: every stage)."""
    return EdgeSetP(n, p, n if stage_cap is None else stage_cap)


__all__ = ["EdgeSetP", "build_edge_set", "edge_count", "edge_key", "parse_edge_key"]
