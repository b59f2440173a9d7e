"""Johnson-graph walks, product spectra, marked fractions and the walk cost model.

The search walks over p-tuples ``(S_1, ..., S_p)`` of ``r/p``-subsets, one
Johnson graph copy per tuple slot, each step moving every copy at once.
A state is marked when the union of the copies contains a witness block of
the input.  The cost model is::

    total = setup + (update / sqrt(delta) + check) / sqrt(eps)

All counts are p-parallel query rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from math import comb
from typing import Optional

import numpy as np

from .certstruct import InducedFunction
from .errors import ParameterError, ResourceLimitError
from .subsets import masks_of_size

MAX_EXPLICIT_STATES = 5000
MAX_MARKED_STATES = 10**7
MAX_UNION_N = 20
SPECTRUM_TOL = 1e-9


def _check_nr(n: int, r: int):
    if not 1 <= r <= n - 1:
        raise ParameterError(f"need 1 <= r <= n-1, got r={r}, n={n}")


def johnson_eigenvalues(n: int, r: int) -> list[tuple[float, int]]:
    """``[(lambda_i, multiplicity)]`` of the normalized J(n, r) walk, i = 0..min(r, n-r)."""
    _check_nr(n, r)
    out = []
    for i in range(min(r, n - r) + 1):
        lam = ((r - i) * (n - r - i) - i) / (r * (n - r))
        mult = comb(n, i) - (comb(n, i - 1) if i else 0)
        out.append((lam, mult))
    return out


def johnson_gap(n: int, r: int) -> float:
    _check_nr(n, r)
    return n / (r * (n - r))


def johnson_matrix(n: int, r: int) -> np.ndarray:
    """Transition matrix of the uniform replace-one-element step on r-subsets."""
    _check_nr(n, r)
    states = list(masks_of_size(n, r))
    if len(states) > MAX_EXPLICIT_STATES:
        raise ResourceLimitError(f"C({n},{r}) = {len(states)} states exceeds {MAX_EXPLICIT_STATES}")
    index = {s: i for i, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    deg = r * (n - r)
    full = (1 << n) - 1
    for s in states:
        for out_bit in (1 << i for i in range(n) if s >> i & 1):
            for in_bit in (1 << i for i in range(n) if (full & ~s) >> i & 1):
                P[index[s], index[s ^ out_bit ^ in_bit]] = 1.0 / deg
    return P


@dataclass(frozen=True)
class JohnsonWalk:
    n: int
    r: int
    lazy: bool = True

    def __post_init__(self):
        _check_nr(self.n, self.r)

    def spectrum(self) -> list[tuple[float, int]]:
        eig = johnson_eigenvalues(self.n, self.r)
        if self.lazy:
            eig = [((1 + lam) / 2, m) for lam, m in eig]
        return eig

    @property
    def gap(self) -> float:
        g = johnson_gap(self.n, self.r)
        return g / 2 if self.lazy else g

    def matrix(self) -> np.ndarray:
        P = johnson_matrix(self.n, self.r)
        return (np.eye(P.shape[0]) + P) / 2 if self.lazy else P

    def explicit_spectrum(self) -> np.ndarray:
        return np.sort(np.linalg.eigvalsh(self.matrix()))[::-1]


def expand_spectrum(eig) -> np.ndarray:
    """Eigenvalue list with multiplicities expanded, sorted descending."""
    return np.sort(np.concatenate([np.full(m, lam) for lam, m in eig]))[::-1]


def johnson_spectrum(n: int, r: int, lazy: bool = False, explicit_check: bool = False):
    """Closed-form spectrum (sorted descending, with multiplicities) and its gap.

    With ``explicit_check`` the closed form is compared against a dense
    eigendecomposition and a mismatch beyond 1e-9 raises.
    """
    w = JohnsonWalk(n, r, lazy)
    eig = sorted(w.spectrum(), key=lambda t: -t[0])
    if explicit_check:
        closed = expand_spectrum(eig)
        explicit = w.explicit_spectrum()
        err = float(np.abs(closed - explicit).max())
        if err > SPECTRUM_TOL:
            raise AssertionError(f"J({n},{r}) closed form off by {err}")
    return eig, w.gap


@dataclass(frozen=True)
class ProductSpectrum:
    eigenvalues: tuple[tuple[float, int], ...]
    second: float
    gap: float
    single_gap: float

    @property
    def gap_preserved(self) -> bool:
        return abs(self.gap - self.single_gap) <= SPECTRUM_TOL


def product_spectrum(w: JohnsonWalk, p: int) -> ProductSpectrum:
    """Spectrum of the p-fold tensor walk: all p-fold products of single-copy eigenvalues."""
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    single = w.spectrum()
    merged: dict[float, int] = {}
    for combo in product(single, repeat=p):
        lam = math.prod(c[0] for c in combo)
        mult = math.prod(c[1] for c in combo)
        key = round(lam, 12) + 0.0
        merged[key] = merged.get(key, 0) + mult
    eig = tuple(sorted(merged.items(), key=lambda t: -t[0]))
    # the top eigenvalue 1 has multiplicity 1; the next distinct value is the second-largest
    second = eig[1][0] if eig[0][1] == 1 and len(eig) > 1 else eig[0][0]
    single_second = sorted((lam for lam, _ in single), reverse=True)[1]
    return ProductSpectrum(eig, second, 1.0 - second, 1.0 - single_second)


def explicit_product_spectrum(w: JohnsonWalk, p: int) -> np.ndarray:
    size = comb(w.n, w.r) ** p
    if size > MAX_EXPLICIT_STATES:
        raise ResourceLimitError(f"{size} product states exceeds {MAX_EXPLICIT_STATES}")
    P = w.matrix()
    T = P
    for _ in range(p - 1):
        T = np.kron(T, P)
    return np.sort(np.linalg.eigvalsh(T))[::-1]


# ---------------------------------------------------------------------------
# marked fraction


@dataclass(frozen=True)
class MarkedFraction:
    exact: float
    bound: float
    states: int
    no_witness: bool = False


def _union_distribution(n: int, size: int, p: int) -> np.ndarray:
    """``dist[U]`` = probability that the union of p independent uniform size-subsets is ``U``."""
    if n > MAX_UNION_N:
        raise ResourceLimitError(f"2^{n} union states too many")
    subsets = list(masks_of_size(n, size))
    dist = np.zeros(1 << n)
    dist[0] = 1.0
    support = np.array(subsets, dtype=np.int64)
    for _ in range(p):
        nxt = np.zeros_like(dist)
        for U in np.flatnonzero(dist):
            np.add.at(nxt, U | support, dist[U] / len(subsets))
        dist = nxt
    return dist


def _witness_masks(fi: InducedFunction, x) -> list[int]:
    return [fi.structure.masks[b] for b in fi.witnesses(x)]


def marked_fraction(fi: InducedFunction, x, r: int, p: int) -> MarkedFraction:
    """Exact probability that the union of p uniform (r/p)-subsets contains a witness block of ``x``."""
    n = fi.n
    if p < 1 or r % p:
        raise ParameterError(f"p must divide r, got r={r}, p={p}")
    if not 1 <= r // p <= n:
        raise ParameterError(f"need 1 <= r/p <= n, got r/p={r // p}")
    k = fi.structure.k_bound
    bound = (r / n) ** k
    states = comb(n, r // p) ** p
    blocks = _witness_masks(fi, x)
    if not blocks:
        return MarkedFraction(0.0, bound, states, no_witness=True)
    dist = _union_distribution(n, r // p, p)
    U = np.arange(1 << n, dtype=np.int64)
    hit = np.zeros(1 << n, dtype=bool)
    for m in blocks:
        hit |= (U & m) == m
    return MarkedFraction(float(dist[hit].sum()), bound, states)


def marked_fraction_bruteforce(fi: InducedFunction, x, r: int, p: int) -> float:
    """Same quantity by enumerating every p-tuple of subsets."""
    n, size = fi.n, r // p
    subsets = list(masks_of_size(n, size))
    if len(subsets) ** p > MAX_MARKED_STATES:
        raise ResourceLimitError("too many tuples to enumerate")
    blocks = _witness_masks(fi, x)
    hits = 0
    for tup in product(subsets, repeat=p):
        U = 0
        for s in tup:
            U |= s
        hits += any(U & m == m for m in blocks)
    return hits / len(subsets) ** p


# ---------------------------------------------------------------------------
# cost model


def mnrs_cost(setup: float, update: float, check: float, eps: float, delta: float) -> float:
    if not 0 < eps <= 1:
        raise ParameterError(f"eps must lie in (0, 1], got {eps}")
    if not 0 < delta <= 1:
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")
    if min(setup, update, check) < 0:
        raise ParameterError("costs must be nonnegative")
    return setup + (update / math.sqrt(delta) + check) / math.sqrt(eps)


@dataclass(frozen=True)
class WalkCostModel:
    setup: float
    update: float
    check: float
    epsilon: float
    delta: float
    r: Optional[int] = None

    @property
    def total(self) -> float:
        return mnrs_cost(self.setup, self.update, self.check, self.epsilon, self.delta)

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "S": self.setup,
            "U": self.update,
            "C": self.check,
            "eps": self.epsilon,
            "delta": self.delta,
            "total": self.total,
        }


def _problem_order(problem: str, k: Optional[int]) -> int:
    if problem == "ed":
        return 2
    if problem == "ksum":
        if k is None or k < 2:
            raise ParameterError("ksum needs k >= 2")
        return k
    raise ParameterError(f"problem must be 'ed' or 'ksum', got {problem!r}")


def _gaps(n: int, p: int, r, gap: str):
    r = np.asarray(r, dtype=float)
    if gap == "nominal":
        return np.minimum(p / r, 1.0)
    if gap == "lazy":
        size = r / p
        with np.errstate(divide="ignore"):
            g = n / (2 * size * (n - size))
        return np.where(size < n, np.minimum(g, 1.0), 1.0)
    raise ParameterError(f"gap must be 'nominal' or 'lazy', got {gap!r}")


def walk_cost_model(problem: str, n: int, p: int, r: int, k: Optional[int] = None, gap: str = "lazy") -> WalkCostModel:
    """Cost ingredients at subset size ``r`` (a multiple of ``p``).

    Setup reads ``r`` indices in ``r/p`` rounds, one update swaps one index per
    copy (2 rounds: unload and load), checking is free, and the marked
    fraction is the order-``k`` lower bound ``(r/n)^k``.  ``gap`` is either
    the exact gap of the lazy walk on one copy ``J(n, r/p)`` (``"lazy"``,
    the default) or the nominal ``p/r``.
    """
    order = _problem_order(problem, k)
    if not 1 <= p <= n:
        raise ParameterError(f"need 1 <= p <= n, got p={p}, n={n}")
    if r % p or not p <= r <= n:
        raise ParameterError(f"r must be a multiple of p in [p, n], got r={r}")
    eps = (r / n) ** order
    delta = float(_gaps(n, p, r, gap))
    return WalkCostModel(r / p, 2.0, 0.0, eps, delta, r)


def closed_form_r(problem: str, n: int, p: int, k: Optional[int] = None) -> float:
    order = _problem_order(problem, k)
    return n ** (order / (order + 1)) * p ** (1 / (order + 1))


@dataclass(frozen=True)
class OptimizedWalk:
    r: int
    cost: float
    closed_form_r: float
    model: WalkCostModel


def optimize_r(problem: str, n: int, p: int, k: Optional[int] = None, gap: str = "lazy") -> OptimizedWalk:
    """Minimise the instantiated cost over ``r`` in ``{p, 2p, ..., n}``."""
    order = _problem_order(problem, k)
    if not 1 <= p <= n:
        raise ParameterError(f"need 1 <= p <= n, got p={p}, n={n}")
    grid = np.arange(p, n + 1, p, dtype=float)
    eps = (grid / n) ** order
    costs = grid / p + 2.0 / np.sqrt(_gaps(n, p, grid, gap)) / np.sqrt(eps)
    best = int(grid[int(np.argmin(costs))])
    model = walk_cost_model(problem, n, p, best, k, gap)
    return OptimizedWalk(best, model.total, closed_form_r(problem, n, p, k), model)


__all__ = [
    "JohnsonWalk",
    "MarkedFraction",
    "OptimizedWalk",
    "ProductSpectrum",
    "WalkCostModel",
    "closed_form_r",
    "expand_spectrum",
    "explicit_product_spectrum",
    "johnson_eigenvalues",
    "johnson_gap",
    "johnson_matrix",
    "johnson_spectrum",
    "marked_fraction",
    "marked_fraction_bruteforce",
    "mnrs_cost",
    "optimize_r",
    "product_spectrum",
    "walk_cost_model",
]
