"""Certificate structures, orthogonal arrays and the functions they induce.

A certificate structure is a family of pairwise incomparable index sets.
Equipping each block ``M`` with an orthogonal array ``T_M`` of length ``|M|``
over alphabet ``[q] = {0, ..., q-1}`` induces ``f(x) = 1`` iff some block has
``x_M in T_M``.  Element distinctness uses all pairs with the equality array;
k-sum uses all k-subsets with the zero-sum-mod-q array.

Indices are 0-based throughout.  Blocks are kept in lexicographic order of
their sorted members so witnesses are deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError, ResourceLimitError
from .subsets import to_mask

MAX_ARRAY_ENUMERATION = 10**7


@dataclass(frozen=True)
class CertificateStructure:
    n: int
    blocks: tuple[tuple[int, ...], ...]
    k_bound: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"ground set size must be >= 1, got {self.n}")
        blocks = tuple(sorted(tuple(sorted(set(b))) for b in self.blocks))
        for b in blocks:
            if not b:
                raise ParameterError("blocks must be nonempty")
            if b[0] < 0 or b[-1] >= self.n:
                raise ParameterError(f"block {b} is outside range({self.n})")
            if len(b) > self.k_bound:
                raise ParameterError(f"block {b} exceeds k_bound={self.k_bound}")
        if len(set(blocks)) != len(blocks):
            raise ParameterError("duplicate blocks")
        if len({len(b) for b in blocks}) > 1:
            # distinct equal-size blocks are never comparable
            masks = [to_mask(b) for b in blocks]
            for i, a in enumerate(masks):
                for j, b in enumerate(masks):
                    if i != j and a & ~b == 0:
                        raise ParameterError(f"blocks {blocks[i]} and {blocks[j]} are comparable")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_blocks(cls, n: int, blocks: Sequence[Sequence[int]]) -> "CertificateStructure":
        k = max((len(set(b)) for b in blocks), default=0)
        return cls(n, tuple(tuple(b) for b in blocks), k)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(to_mask(b) for b in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def uniform_size(self) -> Optional[int]:
        """``k`` if the structure is exactly all k-subsets of ``range(n)``, else None."""
        if not self.blocks:
            return None
        k = len(self.blocks[0])
        if all(len(b) == k for b in self.blocks) and len(self.blocks) == comb(self.n, k):
            return k
        return None


def make_ed_structure(n: int) -> CertificateStructure:
    """All 2-subsets of ``range(n)``."""
    if n < 2:
        raise ParameterError(f"element distinctness needs n >= 2, got {n}")
    return CertificateStructure(n, tuple(combinations(range(n), 2)), 2)


def make_uniform_structure(n: int, k: int) -> CertificateStructure:
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    return CertificateStructure(n, tuple(combinations(range(n), k)), k)


@dataclass(frozen=True)
class OrthogonalArray:
    """A subset of ``[q]^k`` given by a membership predicate and a completion rule.

    ``complete(partial, i)`` returns the coordinate ``i`` value that puts the
    tuple in the array, given the other coordinates (``partial[i]`` ignored).
    It may be None for arrays built from explicit tuple lists, in which case
    the array need not actually be orthogonal; :func:`verify_orthogonal_array`
    is the arbiter.
    """

    k: int
    q: int
    contains: Callable[[tuple[int, ...]], bool]
    complete: Optional[Callable[[Sequence[int], int], int]] = None
    name: str = ""

    def support(self) -> np.ndarray:
        """Boolean membership table of shape ``(q,) * k``."""
        if self.q**self.k > MAX_ARRAY_ENUMERATION:
            raise ResourceLimitError(
                f"q^k = {self.q}^{self.k} exceeds the enumeration limit {MAX_ARRAY_ENUMERATION}"
            )
        table = np.zeros((self.q,) * self.k, dtype=bool)
        for t in product(range(self.q), repeat=self.k):
            table[t] = bool(self.contains(t))
        return table


def zero_sum_array(k: int, q: int) -> OrthogonalArray:
    def contains(t):
        return sum(t) % q == 0

    def complete(t, i):
        return (-sum(v for j, v in enumerate(t) if j != i)) % q

    return OrthogonalArray(k, q, contains, complete, name="zero-sum")


def equality_array(q: int) -> OrthogonalArray:
    """``{(v, v)}``: the element-distinctness array of length 2."""
    return OrthogonalArray(2, q, lambda t: t[0] == t[1], lambda t, i: t[1 - i], name="equality")


def tuple_array(k: int, q: int, tuples) -> OrthogonalArray:
    members_ = frozenset(tuple(int(v) for v in t) for t in tuples)
    return OrthogonalArray(k, q, lambda t: tuple(t) in members_, None, name="explicit")


def verify_orthogonal_array(a: OrthogonalArray) -> bool:
    """True iff every fixing of ``k-1`` coordinates has exactly one completion."""
    table = a.support()
    for axis in range(a.k):
        if not np.all(table.sum(axis=axis) == 1):
            return False
    if a.complete is not None:
        # the completion rule must agree with membership
        for t in zip(*np.nonzero(table)):
            t = tuple(int(v) for v in t)
            for i in range(a.k):
                if a.complete(t, i) != t[i]:
                    return False
    return True


@dataclass(frozen=True)
class InducedFunction:
    structure: CertificateStructure
    arrays: tuple[OrthogonalArray, ...]
    q: int
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.arrays) != len(self.structure.blocks):
            raise ParameterError("need exactly one orthogonal array per block")
        for block, arr in zip(self.structure.blocks, self.arrays):
            if arr.k != len(block) or arr.q != self.q:
                raise ParameterError(
                    f"array (k={arr.k}, q={arr.q}) does not fit block {block} with q={self.q}"
                )
        flags = set(self.flags)
        if self.q < 2 * len(self.structure.blocks):
            flags.add("theorem precondition unmet")
        object.__setattr__(self, "flags", frozenset(flags))

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def precondition_met(self) -> bool:
        return "theorem precondition unmet" not in self.flags

    def _check_input(self, x) -> tuple[int, ...]:
        x = tuple(int(v) for v in x)
        if len(x) != self.n:
            raise ParameterError(f"input has length {len(x)}, expected {self.n}")
        for v in x:
            if not 0 <= v < self.q:
                raise ParameterError(f"entry {v} outside alphabet [0, {self.q})")
        return x

    def certifies(self, block_index: int, x) -> bool:
        block = self.structure.blocks[block_index]
        return bool(self.arrays[block_index].contains(tuple(x[i] for i in block)))

    def witnesses(self, x) -> list[int]:
        """Indices of all blocks ``M`` with ``x_M in T_M``."""
        x = self._check_input(x)
        return [i for i in range(len(self.arrays)) if self.certifies(i, x)]

    def evaluate(self, x) -> tuple[int, Optional[tuple[int, ...]]]:
        """``(f(x), first witnessing block)``; the block is None for 0-inputs."""
        x = self._check_input(x)
        for i, block in enumerate(self.structure.blocks):
            if self.certifies(i, x):
                return 1, block
        return 0, None

    def __call__(self, x) -> int:
        return self.evaluate(x)[0]

    def _grid(self) -> np.ndarray:
        size = self.q**self.n
        if size > MAX_ARRAY_ENUMERATION:
            raise ResourceLimitError(f"q^n = {size} too large to tabulate")
        return np.indices((self.q,) * self.n).reshape(self.n, -1)

    def block_hits(self, block_index: int, grid: Optional[np.ndarray] = None) -> np.ndarray:
        """Whether ``x_M in T_M`` for every ``x`` in ``[q]^n`` (row-major, coordinate 0 most significant)."""
        grid = self._grid() if grid is None else grid
        block = self.structure.blocks[block_index]
        arr = self.arrays[block_index]
        sub = grid[list(block)]
        if arr.name == "zero-sum":
            return sub.sum(axis=0) % self.q == 0
        if arr.name == "equality":
            return sub[0] == sub[1]
        return np.array([bool(arr.contains(tuple(col))) for col in sub.T], dtype=bool)

    def truth_table(self) -> np.ndarray:
        """Values on all of ``[q]^n`` in the same order as :meth:`block_hits`."""
        grid = self._grid()
        out = np.zeros(grid.shape[1], dtype=np.uint8)
        for b in range(len(self.arrays)):
            out |= self.block_hits(b, grid).astype(np.uint8)
        return out


def make_ed_function(n: int, q: int) -> InducedFunction:
    structure = make_ed_structure(n)
    arr = equality_array(q)
    return InducedFunction(structure, (arr,) * len(structure.blocks), q)


def make_ksum_structure(n: int, k: int, q: int) -> InducedFunction:
    """k-sum on ``[q]^n``: all k-subsets with the zero-sum-mod-q array.

    Alphabets below ``2 * C(n, k)`` are accepted but flagged (and warned).
    """
    if not 2 <= k <= n:
        raise ParameterError(f"need 2 <= k <= n, got k={k}, n={n}")
    if q < 2:
        raise ParameterError(f"alphabet size must be >= 2, got {q}")
    structure = make_uniform_structure(n, k)
    arr = zero_sum_array(k, q)
    fi = InducedFunction(structure, (arr,) * len(structure.blocks), q)
    if not fi.precondition_met:
        warnings.warn(
            f"q={q} < 2*C({n},{k})={2 * comb(n, k)}: theorem precondition unmet",
            stacklevel=2,
        )
    return fi


def structure_from_json(obj: dict):
    """Parse ``{"type": "ed"|"ksum", "n", "k", "q"}`` or ``{"n", "blocks": [[...], ...]}``.

    Typed declarations return an :class:`InducedFunction` when ``q`` is given,
    otherwise a bare :class:`CertificateStructure`.
    """
    kind = obj.get("type")
    n = int(obj["n"])
    if kind == "ed":
        return make_ed_function(n, int(obj["q"])) if "q" in obj else make_ed_structure(n)
    if kind == "ksum":
        k = int(obj["k"])
        if "q" in obj:
            return make_ksum_structure(n, k, int(obj["q"]))
        return make_uniform_structure(n, k)
    if "blocks" in obj:
        return CertificateStructure.from_blocks(n, obj["blocks"])
    raise ParameterError(f"unrecognised structure declaration {obj!r}")


def structure_to_json(structure: CertificateStructure) -> dict:
    return {"n": structure.n, "blocks": [list(b) for b in structure.blocks]}


__all__ = [
    "CertificateStructure",
    "OrthogonalArray",
    "InducedFunction",
    "make_ed_structure",
    "make_uniform_structure",
    "make_ed_function",
    "make_ksum_structure",
    "zero_sum_array",
    "equality_array",
    "tuple_array",
    "verify_orthogonal_array",
    "structure_from_json",
    "structure_to_json",
]
