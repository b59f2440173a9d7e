"""Adversary matrices, difference masks and the p-parallel ratio bound.

``delta_mask(rows, cols, J)[r, c]`` is 1 iff the row input and column input
differ somewhere on ``J``.  For a given adversary matrix ``Gamma`` the
p-parallel bound is ``||Gamma|| / max_J ||Gamma o Delta_J||`` with ``J``
ranging over sets of size exactly ``p`` (or at most ``p``; the two differ by
at most a factor 2).  Nothing here optimises over ``Gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ParameterError, PropertyViolation

DENSE_NORM_LIMIT = 4000 * 4000
POWER_TOL = 1e-9
POWER_MAX_ITER = 100_000


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value: dense SVD up to 4000^2 entries, power iteration beyond."""
    A = np.asarray(A, dtype=float)
    if A.size == 0 or not np.any(A):
        return 0.0
    if A.size <= DENSE_NORM_LIMIT:
        return float(np.linalg.norm(A, 2))
    rng = np.random.default_rng(0)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(POWER_MAX_ITER):
        u = A @ v
        v_new = A.T @ u
        norm = np.linalg.norm(v_new)
        if norm == 0:
            return 0.0
        v_new /= norm
        new_sigma = math.sqrt(norm)
        if abs(new_sigma - sigma) <= POWER_TOL * max(new_sigma, 1.0):
            return new_sigma
        sigma, v = new_sigma, v_new
    return sigma


def _as_labels(labels) -> np.ndarray:
    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def coordinate_masks(rows, cols) -> np.ndarray:
    """``D[j, r, c] = rows[r, j] != cols[c, j]`` for every coordinate ``j``."""
    rows, cols = _as_labels(rows), _as_labels(cols)
    if rows.shape[1] != cols.shape[1]:
        raise ParameterError("row and column labels have different arity")
    return np.moveaxis(rows[:, None, :] != cols[None, :, :], 2, 0)


def delta_mask(rows, cols, J: Sequence[int]) -> np.ndarray:
    """0/1 matrix with a 1 where row and column inputs differ on some index of ``J``."""
    rows, cols = _as_labels(rows), _as_labels(cols)
    if rows.shape[1] != cols.shape[1]:
        raise ParameterError("row and column labels have different arity")
    J = list(J)
    if not J:
        return np.zeros((rows.shape[0], cols.shape[0]), dtype=np.uint8)
    return np.any(rows[:, None, J] != cols[None, :, J], axis=2).astype(np.uint8)


@dataclass(frozen=True)
class AdversaryInstance:
    """``gamma`` with input labels; rows may repeat an input (``(x, M)`` duplication)."""

    gamma: np.ndarray
    row_labels: np.ndarray
    col_labels: np.ndarray
    q: int = 2
    row_tags: Optional[tuple] = None

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        rows, cols = _as_labels(self.row_labels), _as_labels(self.col_labels)
        if gamma.shape != (rows.shape[0], cols.shape[0]):
            raise ParameterError(
                f"gamma shape {gamma.shape} does not match {rows.shape[0]} rows x {cols.shape[0]} cols"
            )
        if rows.shape[1] != cols.shape[1]:
            raise ParameterError("row and column labels have different arity")
        if rows.size and (rows.min() < 0 or rows.max() >= self.q):
            raise ParameterError("row labels outside the alphabet")
        if cols.size and (cols.min() < 0 or cols.max() >= self.q):
            raise ParameterError("column labels outside the alphabet")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def n(self) -> int:
        return self.row_labels.shape[1]

    def masked(self, J: Sequence[int]) -> np.ndarray:
        return self.gamma * delta_mask(self.row_labels, self.col_labels, J)


@dataclass(frozen=True)
class RatioReport:
    ratio: float
    numerator: float
    denominator: float
    worst_J: Optional[tuple[int, ...]]
    mode: str
    infinite: bool


def _query_sets(n: int, p: int, mode: str):
    if mode == "exact":
        return combinations(range(n), p)
    if mode == "at_most":
        return (J for size in range(1, p + 1) for J in combinations(range(n), size))
    raise ParameterError(f"mode must be 'exact' or 'at_most', got {mode!r}")


def adversary_ratio(a: AdversaryInstance, p: int, mode: str = "exact") -> RatioReport:
    """``||Gamma|| / max_J ||Gamma o Delta_J||`` over ``|J| = p`` (or ``<= p``)."""
    if not 1 <= p <= a.n:
        raise ParameterError(f"need 1 <= p <= n, got p={p}, n={a.n}")
    if a.gamma.size > DENSE_NORM_LIMIT:
        raise ParameterError("adversary matrix exceeds the 4000 x 4000 dense bound")
    D = coordinate_masks(a.row_labels, a.col_labels)
    numerator = spectral_norm(a.gamma)
    worst, worst_J = 0.0, None
    for J in _query_sets(a.n, p, mode):
        mask = np.any(D[list(J)], axis=0)
        value = spectral_norm(a.gamma * mask)
        if value > worst:
            worst, worst_J = value, tuple(J)
    if worst == 0.0:
        return RatioReport(math.inf, numerator, 0.0, None, mode, True)
    return RatioReport(numerator / worst, numerator, worst, worst_J, mode, False)


def or_adversary_instance(n: int) -> AdversaryInstance:
    """All-ones ``1 x n`` matrix: row ``0^n``, columns the weight-1 strings."""
    return AdversaryInstance(np.ones((1, n)), np.zeros((1, n), dtype=np.int64), np.eye(n, dtype=np.int64))


# ---------------------------------------------------------------------------
# the factor-2 monotonicity of masked norms


@dataclass(frozen=True)
class Fact1Report:
    trials: int
    checked: int
    skipped: int
    max_ratio: float
    seed: int


def fact1_trial(rng: np.random.Generator, dims=(6, 6), n_max: int = 5, q_values=(2, 3)):
    """One random ``(Gamma, J subseteq K)`` instance: returns ``(norm_J, norm_K, J, K)``."""
    n = int(rng.integers(1, n_max + 1))
    q = int(rng.choice(q_values))
    R = int(rng.integers(1, dims[0] + 1))
    C = int(rng.integers(1, dims[1] + 1))
    rows = rng.integers(0, q, size=(R, n))
    cols = rng.integers(0, q, size=(C, n))
    gamma = rng.uniform(-1.0, 1.0, size=(R, C))
    K = [j for j in range(n) if rng.random() < 0.5] or [int(rng.integers(n))]
    J = [j for j in K if rng.random() < 0.5]
    norm_J = spectral_norm(gamma * delta_mask(rows, cols, J))
    norm_K = spectral_norm(gamma * delta_mask(rows, cols, K))
    return norm_J, norm_K, tuple(J), tuple(K)


def check_fact1(trials: int = 1000, dims=(6, 6), seed: int = 0, n_max: int = 5, q_values=(2, 3)) -> Fact1Report:
    """Check ``||Gamma o Delta_J|| <= 2 ||Gamma o Delta_K||`` on seeded random trials.

    Trial ``t`` draws from ``default_rng((seed, t))`` so any failure is
    reproducible from the pair alone.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    best, checked, skipped = 0.0, 0, 0
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        norm_J, norm_K, J, K = fact1_trial(rng, dims, n_max, q_values)
        if norm_K <= 1e-15:
            # Delta_J support sits inside Delta_K support, so both vanish
            if norm_J > 1e-12:
                raise PropertyViolation("masked norm nonzero on a subset of a zero mask",
                                        {"seed": seed, "trial": t, "J": J, "K": K})
            skipped += 1
            continue
        if norm_J > 2 * norm_K + 1e-9:
            raise PropertyViolation(
                f"||G o D_J|| = {norm_J} > 2 ||G o D_K|| = {2 * norm_K}",
                {"seed": seed, "trial": t, "J": J, "K": K},
            )
        checked += 1
        best = max(best, norm_J / norm_K)
    return Fact1Report(trials, checked, skipped, best, seed)


# ---------------------------------------------------------------------------
# one query to the lifted string == one p-parallel query


def block_bijection_query(x: Sequence[int], J: Sequence[int], p: int) -> tuple[int, ...]:
    """The lifted-string entry ``X_J = (x_j)_{j in J}``."""
    J = sorted(set(int(j) for j in J))
    if len(J) > p:
        raise ParameterError(f"|J| = {len(J)} exceeds p = {p}")
    return tuple(x[j] for j in J)


class LiftedFunction:
    """``F(X) = f(x)`` on strings ``X`` indexed by all sets of at most ``p`` indices.

    ``query`` hands out one entry of ``X`` and books it as a single
    p-parallel query to ``x`` in ``batches``.
    """

    def __init__(self, f: Callable[[tuple[int, ...]], int], n: int, p: int):
        if not 1 <= p <= n:
            raise ParameterError(f"need 1 <= p <= n, got p={p}, n={n}")
        self.f, self.n, self.p = f, n, p
        self.batches: list[tuple[int, ...]] = []

    def index_sets(self):
        for size in range(self.p + 1):
            yield from combinations(range(self.n), size)

    def lift(self, x: Sequence[int]) -> dict[tuple[int, ...], tuple[int, ...]]:
        return {J: block_bijection_query(x, J, self.p) for J in self.index_sets()}

    def unlift(self, X: dict) -> tuple[int, ...]:
        x = tuple(X[(j,)][0] for j in range(self.n))
        for J, val in X.items():
            if tuple(x[j] for j in J) != tuple(val):
                raise ParameterError(f"X is not the lift of any input (inconsistent at {J})")
        return x

    def query(self, X: dict, J: Sequence[int]) -> tuple[int, ...]:
        J = tuple(sorted(J))
        if len(J) > self.p:
            raise ParameterError(f"|J| = {len(J)} exceeds p = {self.p}")
        self.batches.append(J)
        return X[J]

    def __call__(self, X: dict) -> int:
        return int(self.f(self.unlift(X)))


__all__ = [
    "AdversaryInstance",
    "RatioReport",
    "Fact1Report",
    "LiftedFunction",
    "adversary_ratio",
    "block_bijection_query",
    "check_fact1",
    "coordinate_masks",
    "delta_mask",
    "fact1_trial",
    "or_adversary_instance",
    "spectral_norm",
]
