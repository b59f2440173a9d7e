"""Total Boolean functions on n bits and their classical complexity measures.

Inputs are little-endian integers: bit ``i`` of the index holds variable
``x_i`` (0-based).  Measures are computed exactly by vectorised subset
enumeration, which is why arity is capped at :data:`MAX_EXACT_ARITY`.

The key trick is that at a fixed input ``x`` both certificate complexity and
block sensitivity only depend on the family of *sensitive masks*
``{D : f(x ^ D) != f(x)}``:

* ``S`` is a certificate for ``x`` iff no sensitive mask avoids ``S``, i.e.
  iff ``OR_{D subseteq ~S} sensitive[D]`` is false (a subset-OR transform);
* block sensitivity is the maximum number of pairwise disjoint sensitive
  masks, and only inclusion-minimal masks need to be packed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal

import numpy as np

from .errors import ParameterError, ResourceLimitError

MAX_EXACT_ARITY = 16
# rows of the (inputs x masks) work array processed at once
_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """A total function ``{0,1}^n -> {0,1}`` held as a truth table."""

    n: int
    table: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"arity must be >= 1, got {self.n}")
        table = np.asarray(self.table, dtype=np.uint8).ravel()
        if table.size != 1 << self.n:
            raise ParameterError(f"truth table must have 2^{self.n} entries, got {table.size}")
        if np.any(table > 1):
            raise ParameterError("truth table entries must be 0 or 1")
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __call__(self, x) -> int:
        if not isinstance(x, (int, np.integer)):
            x = sum(int(b) << i for i, b in enumerate(x))
        return int(self.table[x])

    def __eq__(self, other):
        return (
            isinstance(other, BooleanFunction)
            and self.n == other.n
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    @property
    def is_constant(self) -> bool:
        return bool(self.table.min() == self.table.max())

    def negate(self) -> "BooleanFunction":
        return BooleanFunction(self.n, 1 - self.table)

    def to_hex(self) -> str:
        """Hex string of the 2^n-bit table, most significant bit = input ``2^n - 1``."""
        value = 0
        for i in np.flatnonzero(self.table):
            value |= 1 << int(i)
        width = max(1, -(-(1 << self.n) // 4))
        return format(value, f"0{width}x")

    @classmethod
    def from_hex(cls, n: int, text: str) -> "BooleanFunction":
        value = int(text, 16)
        if value >> (1 << n):
            raise ParameterError(f"hex table {text!r} has more than 2^{n} bits")
        table = [(value >> i) & 1 for i in range(1 << n)]
        return cls(n, np.array(table, dtype=np.uint8))

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[tuple[int, ...]], int]) -> "BooleanFunction":
        table = [int(bool(fn(tuple((x >> i) & 1 for i in range(n))))) for x in range(1 << n)]
        return cls(n, np.array(table, dtype=np.uint8))


def or_function(n: int) -> BooleanFunction:
    table = np.ones(1 << n, dtype=np.uint8)
    table[0] = 0
    return BooleanFunction(n, table)


def and_function(n: int) -> BooleanFunction:
    table = np.zeros(1 << n, dtype=np.uint8)
    table[-1] = 1
    return BooleanFunction(n, table)


def parity_function(n: int) -> BooleanFunction:
    return BooleanFunction(n, (_popcounts(n) & 1).astype(np.uint8))


def constant_function(n: int, value: int = 0) -> BooleanFunction:
    return BooleanFunction(n, np.full(1 << n, int(value), dtype=np.uint8))


def random_function(n: int, seed: int = 0) -> BooleanFunction:
    rng = np.random.default_rng(seed)
    return BooleanFunction(n, rng.integers(0, 2, size=1 << n, dtype=np.uint8))


def or_of_ands(n: int, width: int = 2) -> BooleanFunction:
    """Depth-2 tree: OR over consecutive AND gates of ``width`` variables each."""
    if n % width:
        raise ParameterError(f"width {width} must divide n={n}")
    return BooleanFunction.from_callable(
        n, lambda x: any(all(x[i : i + width]) for i in range(0, n, width))
    )


def parse_function(spec: str) -> BooleanFunction:
    """Build a function from ``or:n``, ``and:n``, ``parity:n``, ``random:n:seed`` or ``hex:n:digits``."""
    parts = spec.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind in ("or", "and", "parity") and len(parts) == 2:
            n = int(parts[1])
            return {"or": or_function, "and": and_function, "parity": parity_function}[kind](n)
        if kind == "random" and len(parts) in (2, 3):
            return random_function(int(parts[1]), int(parts[2]) if len(parts) == 3 else 0)
        if kind == "hex" and len(parts) == 3:
            return BooleanFunction.from_hex(int(parts[1]), parts[2])
    except ValueError as exc:
        raise ParameterError(f"bad function spec {spec!r}: {exc}") from exc
    raise ParameterError(f"unknown function spec {spec!r}")


# ---------------------------------------------------------------------------
# enumeration machinery


@lru_cache(maxsize=None)
def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        counts += (idx >> i) & 1
    counts.setflags(write=False)
    return counts


def _check_arity(f: BooleanFunction):
    if f.n > MAX_EXACT_ARITY:
        raise ResourceLimitError(
            f"exact enumeration is capped at n <= {MAX_EXACT_ARITY}, got n={f.n}"
        )


def _subset_or(s: np.ndarray, n: int) -> np.ndarray:
    """Row-wise ``h[D] = OR_{D' subseteq D} s[D']`` over the last axis."""
    h = s.copy()
    rows = h.shape[0]
    for i in range(n):
        view = h.reshape(rows, -1, 2, 1 << i)
        view[:, :, 1, :] |= view[:, :, 0, :]
    return h


def _sensitive_chunks(f: BooleanFunction):
    """Yield ``(inputs, sensitive, covered)`` for chunks of inputs.

    ``sensitive[r, D]`` says flipping mask ``D`` changes ``f`` at ``inputs[r]``;
    ``covered`` is its subset-OR transform.
    """
    size = 1 << f.n
    masks = np.arange(size, dtype=np.int64)
    step = max(1, _CHUNK_CELLS // size)
    table = f.table.astype(bool)
    for start in range(0, size, step):
        xs = np.arange(start, min(size, start + step), dtype=np.int64)
        sens = table[xs[:, None] ^ masks[None, :]] != table[xs][:, None]
        yield xs, sens, _subset_or(sens, f.n)


def certificate_sizes(f: BooleanFunction) -> np.ndarray:
    """``C_x(f)`` for every input ``x`` (array of length 2^n)."""
    _check_arity(f)
    size = 1 << f.n
    full = size - 1
    pc = _popcounts(f.n)
    out = np.empty(size, dtype=np.int64)
    comp = full ^ np.arange(size, dtype=np.int64)
    for xs, _, covered in _sensitive_chunks(f):
        is_cert = ~covered[:, comp]
        sizes = np.where(is_cert, pc[None, :], f.n + 1)
        out[xs] = sizes.min(axis=1)
    return out


def _minimal_masks(sens: np.ndarray, covered: np.ndarray, n: int) -> np.ndarray:
    """Row-wise inclusion-minimal sensitive masks (bool array, same shape)."""
    below = np.zeros_like(sens)
    idx = np.arange(sens.shape[1], dtype=np.int64)
    for i in range(n):
        bit = 1 << i
        has = idx[(idx & bit) != 0]
        below[:, has] |= covered[:, has ^ bit]
    return sens & ~below


def _max_disjoint(blocks: list[int]) -> int:
    singles = 0
    for b in blocks:
        if b & (b - 1) == 0:
            singles |= b
    multi = [b for b in blocks if b & (b - 1) and not (b & singles)]
    base = singles.bit_count()
    if not multi:
        return base

    memo: dict[int, int] = {}

    def pack(avail: int) -> int:
        if avail in memo:
            return memo[avail]
        fitting = [b for b in multi if b & ~avail == 0]
        if not fitting:
            memo[avail] = 0
            return 0
        union = 0
        for b in fitting:
            union |= b
        low = union & -union
        best = pack(avail & ~low)
        for b in fitting:
            if b & low:
                best = max(best, 1 + pack(avail & ~b))
        memo[avail] = best
        return best

    universe = 0
    for b in multi:
        universe |= b
    return base + pack(universe)


def block_sensitivities(f: BooleanFunction) -> np.ndarray:
    """``bs(f, x)`` for every input ``x``."""
    _check_arity(f)
    out = np.zeros(1 << f.n, dtype=np.int64)
    for xs, sens, covered in _sensitive_chunks(f):
        minimal = _minimal_masks(sens, covered, f.n)
        for r, x in enumerate(xs):
            out[x] = _max_disjoint([int(d) for d in np.flatnonzero(minimal[r])])
    return out


def _max_block_sensitivity(f: BooleanFunction) -> int:
    # bs(f,x) <= C_x(f): inputs whose certificate size cannot beat the best are skipped
    size = 1 << f.n
    comp = (size - 1) ^ np.arange(size, dtype=np.int64)
    pc = _popcounts(f.n)
    best = 0
    for _, sens, covered in _sensitive_chunks(f):
        cert = np.where(~covered[:, comp], pc[None, :], f.n + 1).min(axis=1)
        rows = np.flatnonzero(cert > best)
        if rows.size == 0:
            continue
        rows = rows[np.argsort(-cert[rows], kind="stable")]
        minimal = _minimal_masks(sens[rows], covered[rows], f.n)
        for r, row in enumerate(rows):
            if cert[row] <= best:
                break
            best = max(best, _max_disjoint([int(d) for d in np.flatnonzero(minimal[r])]))
    return best


def block_sensitivity(f: BooleanFunction) -> int:
    """Exact block sensitivity ``max_x bs(f, x)``; 0 for constant functions."""
    _check_arity(f)
    if f.is_constant:
        return 0
    return _max_block_sensitivity(f)


def certificate_complexity(f: BooleanFunction, side: Literal[0, 1, "both"] = "both") -> int:
    """``C(f)`` (side="both") or the max of ``C_x(f)`` over ``f(x) = side``.

    Returns 0 when no input has the requested value.
    """
    if side not in (0, 1, "both"):
        raise ParameterError(f"side must be 0, 1 or 'both', got {side!r}")
    sizes = certificate_sizes(f)
    if side == "both":
        return int(sizes.max())
    sel = f.table == side
    return int(sizes[sel].max()) if sel.any() else 0


# ---------------------------------------------------------------------------
# p-parallel bounds


@dataclass(frozen=True)
class ComplexityReport:
    bs: int
    c: int
    c0: int
    c1: int
    p: int
    dpar_upper: int
    q_lower: float
    orientation: str = "f"
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "bs": self.bs,
            "c": self.c,
            "c0": self.c0,
            "c1": self.c1,
            "p": self.p,
            "dpar_upper": self.dpar_upper,
            "q_lower": self.q_lower,
            "orientation": self.orientation,
            "metadata": dict(self.metadata),
        }


def _check_p(p: int):
    if int(p) != p or p < 1:
        raise ParameterError(f"p must be a positive integer, got {p!r}")


def _dpar_from_measures(bs: int, c0: int, c1: int, p: int) -> tuple[int, str]:
    direct = -(-c1 // p) * bs
    if max(c0, c1) == c1:
        return direct, "f"
    # C(f) != C1(f): the complement 1-f has C1(1-f) = C0(f) and the same bs
    flipped = -(-c0 // p) * bs
    if flipped < direct:
        return flipped, "1-f"
    return direct, "f"


def dpar_upper_bound(f: BooleanFunction, p: int) -> int:
    """Deterministic p-parallel upper bound ``ceil(C1/p) * bs``.

    When ``C(f) != C1(f)`` the same bound for ``1 - f`` is also evaluated
    and the smaller one returned; :func:`complexity_report` records which.
    """
    return complexity_report(f, p).dpar_upper


def dpar_upper_bounds(f: BooleanFunction, p_values) -> list[int]:
    """:func:`dpar_upper_bound` for several ``p`` with the measures computed once."""
    p_values = list(p_values)
    for p in p_values:
        _check_p(p)
    rep = complexity_report(f, 1)
    return [_dpar_from_measures(rep.bs, rep.c0, rep.c1, p)[0] for p in p_values]


def q_parallel_lower_bs(f: BooleanFunction, p: int) -> float:
    """``sqrt(bs(f)/p)``: the order-of-growth lower bound with its constant dropped."""
    _check_p(p)
    return math.sqrt(block_sensitivity(f) / p)


def complexity_report(f: BooleanFunction, p: int) -> ComplexityReport:
    _check_p(p)
    sizes = certificate_sizes(f)
    ones = f.table == 1
    c1 = int(sizes[ones].max()) if ones.any() else 0
    c0 = int(sizes[~ones].max()) if (~ones).any() else 0
    bs = block_sensitivity(f)
    dpar, orientation = _dpar_from_measures(bs, c0, c1, p)
    return ComplexityReport(
        bs=bs,
        c=max(c0, c1),
        c0=c0,
        c1=c1,
        p=p,
        dpar_upper=dpar,
        q_lower=math.sqrt(bs / p),
        orientation=orientation,
        metadata={
            "q_lower_is_order_of_growth_only": True,
            "dpar_orientation_rule": "min over f and 1-f when C(f) != C1(f)",
        },
    )


@dataclass(frozen=True)
class PolynomialRelationReport:
    p: int
    c: float
    bs: int
    precondition_holds: bool
    status: str
    dpar_upper: int
    bs_cubed_over_p: float
    observed_constant: float
    exponent: float
    q_lower: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def polynomial_relation_check(f: BooleanFunction, p: int, c: float) -> PolynomialRelationReport:
    """Evaluate the chain ``ceil(C1/p) bs <= k bs^3/p`` behind the D-vs-Q relation.

    The function is oriented so that its 1-certificate complexity equals
    ``C(f)``; ``observed_constant`` is the realised ``k``.
    """
    _check_p(p)
    if not c > 1:
        raise ParameterError(f"c must exceed 1, got {c!r}")
    bs = block_sensitivity(f)
    cc = certificate_complexity(f, "both")
    holds = bs > 0 and p <= bs ** (1.0 / c) * (1 + 1e-12)
    dpar = -(-cc // p) * bs
    cubic = bs**3 / p
    return PolynomialRelationReport(
        p=p,
        c=float(c),
        bs=bs,
        precondition_holds=bool(holds),
        status="ok" if holds else "precondition-failed",
        dpar_upper=dpar,
        bs_cubed_over_p=cubic,
        observed_constant=dpar / cubic if cubic else 0.0,
        exponent=6 + 4 / (c - 1),
        q_lower=math.sqrt(bs / p),
    )
