"""Dual learning-graph solutions and their feasibility check.

A dual assigns ``alpha_S(M)`` to every subset ``S`` and block ``M`` with
``alpha_S(M) = 0`` whenever ``M`` is contained in ``S``.  It is feasible for
parallelism ``p`` when every edge ``e = (S, J)`` of the p-parallel edge set
satisfies::

    L(e) = sum_M (alpha_S(M) - alpha_{S|J}(M))**2 <= 1

and its objective is ``sqrt(sum_M alpha_{}(M)**2)``.

Symmetric duals, where ``alpha_S(M)`` only depends on ``|S|`` (and on
whether ``M`` is inside ``S``), are stored as a stage vector
``alpha[0..n]``.  For the complete uniform structure all k-subsets, ``L``
then depends on ``(|S|, |J|)`` alone and is evaluated by counting blocks by
``(|M & S|, |M & J|)`` with binomial coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Mapping, Optional

import numpy as np

from ..certstruct import CertificateStructure, make_ed_structure, make_uniform_structure
from ..errors import ParameterError, ResourceLimitError
from ..subsets import format_mask, parse_mask
from .edges import EdgeSetP

FEASIBILITY_TOL = 1e-9
MAX_DENSE_SUBSETS = 1 << 16


@dataclass(frozen=True)
class DualSolution:
    structure: CertificateStructure
    stage_alpha: Optional[tuple[float, ...]] = None
    alpha_map: Optional[Mapping[tuple[int, int], float]] = None
    label: str = ""

    def __post_init__(self):
        if (self.stage_alpha is None) == (self.alpha_map is None):
            raise ParameterError("give exactly one of stage_alpha or alpha_map")
        if self.stage_alpha is not None:
            alpha = tuple(float(a) for a in self.stage_alpha)
            if len(alpha) != self.structure.n + 1:
                raise ParameterError(
                    f"stage vector needs n+1={self.structure.n + 1} entries, got {len(alpha)}"
                )
            object.__setattr__(self, "stage_alpha", alpha)
        else:
            masks = self.structure.masks
            clean = {}
            for (S, b), v in self.alpha_map.items():
                if masks[b] & ~S == 0:
                    if v != 0:
                        raise ParameterError(f"alpha_S(M) must vanish when M is inside S (S={S}, block {b})")
                    continue
                if v != 0:
                    clean[(int(S), int(b))] = float(v)
            object.__setattr__(self, "alpha_map", clean)

    @property
    def symmetric(self) -> bool:
        return self.stage_alpha is not None

    @property
    def n(self) -> int:
        return self.structure.n

    def value(self, S: int, block: int) -> float:
        if self.structure.masks[block] & ~S == 0:
            return 0.0
        if self.symmetric:
            return self.stage_alpha[int(S).bit_count()]
        return self.alpha_map.get((S, block), 0.0)

    @property
    def objective(self) -> float:
        return math.sqrt(sum(self.value(0, b) ** 2 for b in range(len(self.structure))))

    def scaled(self, factor: float) -> "DualSolution":
        if self.symmetric:
            return DualSolution(self.structure, tuple(factor * a for a in self.stage_alpha), label=self.label)
        return DualSolution(
            self.structure, alpha_map={k: factor * v for k, v in self.alpha_map.items()}, label=self.label
        )

    def dense_table(self) -> np.ndarray:
        """``table[S, b] = alpha_S(M_b)`` for every subset mask ``S``."""
        size = 1 << self.n
        if size > MAX_DENSE_SUBSETS:
            raise ResourceLimitError(f"2^{self.n} subsets too many for a dense alpha table")
        masks = np.array(self.structure.masks, dtype=np.int64)
        subsets = np.arange(size, dtype=np.int64)
        inside = (masks[None, :] & ~subsets[:, None]) == 0
        if self.symmetric:
            pc = np.array([int(s).bit_count() for s in range(size)])
            table = np.asarray(self.stage_alpha)[pc][:, None] * np.ones((1, masks.size))
        else:
            table = np.zeros((size, masks.size))
            for (S, b), v in self.alpha_map.items():
                table[S, b] = v
        table[inside] = 0.0
        return table

    def to_json(self) -> dict:
        if self.symmetric:
            return {"alpha": list(self.stage_alpha), "objective": self.objective}
        return {
            "alpha_map": {
                f"{format_mask(S)}|{','.join(map(str, self.structure.blocks[b]))}": v
                for (S, b), v in sorted(self.alpha_map.items())
            },
            "objective": self.objective,
        }


def _stage_vector(n: int, p: int, exponent: float, norm: float) -> tuple[float, ...]:
    top = (n / p) ** exponent
    return tuple(max(top - j / p, 0.0) / norm for j in range(n + 1))


def ed_stage_alpha(n: int, p: int) -> tuple[float, ...]:
    """``alpha_j = max((n/p)^(2/3) - j/p, 0) / (2n)``."""
    if n < 2 or not 1 <= p <= n:
        raise ParameterError(f"need n >= 2 and 1 <= p <= n, got n={n}, p={p}")
    return _stage_vector(n, p, 2 / 3, 2 * n)


def ksum_stage_alpha(n: int, k: int, p: int) -> tuple[float, ...]:
    """``alpha_j = max((n/p)^(k/(k+1)) - j/p, 0) / (2 n^(k/2))``."""
    if not 2 <= k <= n:
        raise ParameterError(f"need 2 <= k <= n, got k={k}, n={n}")
    if not 1 <= p <= n:
        raise ParameterError(f"need 1 <= p <= n, got p={p}, n={n}")
    return _stage_vector(n, p, k / (k + 1), 2 * n ** (k / 2))


def stage_objective(alpha, n: int, k: int) -> float:
    """Objective of a stage-vector dual on all k-subsets: ``sqrt(C(n,k)) * alpha_0``."""
    return math.sqrt(comb(n, k)) * alpha[0]


def ed_dual_certificate(n: int, p: int) -> DualSolution:
    """The stage-vector ED dual on all pairs."""
    return DualSolution(make_ed_structure(n), ed_stage_alpha(n, p), label="ed")


def ksum_dual_certificate(n: int, k: int, p: int) -> DualSolution:
    """The stage-vector k-sum dual on all k-subsets."""
    return DualSolution(make_uniform_structure(n, k), ksum_stage_alpha(n, k, p), label=f"{k}-sum")


def ed_objective_closed_form(n: int, p: int) -> float:
    return math.sqrt(n * (n - 1) / 2) * (n / p) ** (2 / 3) / (2 * n)


@dataclass(frozen=True)
class FeasibilityReport:
    max_violation: float
    worst_edge: Optional[tuple[int, int]]
    feasible: bool
    edges_checked: int
    method: str
    objective: float
    per_stage: dict = field(default_factory=dict)

    @property
    def max_L(self) -> float:
        return self.max_violation


def symmetric_edge_load(alpha, n: int, k: int, s: int, m: int) -> float:
    """``L`` for any edge with ``|S| = s``, ``|J| = m`` on the structure of all k-subsets."""
    total = 0.0
    a_s = alpha[s]
    a_t = alpha[s + m]
    rest = n - s - m
    for i in range(0, min(k, s) + 1):
        for j in range(0, min(k - i, m) + 1):
            count = comb(s, i) * comb(m, j) * comb(rest, k - i - j)
            if not count:
                continue
            src = 0.0 if i == k else a_s
            dst = 0.0 if i + j == k else a_t
            total += count * (src - dst) ** 2
    return total


def _verify_symmetric(alpha, n: int, k: int, p: int, stage_cap: int):
    worst, worst_edge, checked = -1.0, None, 0
    per_stage = {}
    sources = 1  # C(n, s), updated incrementally: bigint comb per stage is slow at large n
    for s in range(stage_cap + 1):
        if s:
            sources = sources * (n - s + 1) // s
        for m in range(1, min(p, n - s) + 1):
            L = symmetric_edge_load(alpha, n, k, s, m)
            checked += sources * comb(n - s, m)
            per_stage[(s, m)] = L
            if L > worst:
                worst = L
                worst_edge = ((1 << s) - 1, ((1 << m) - 1) << s)
    return max(worst, 0.0), worst_edge, checked, per_stage


def verify_stage_dual(alpha, n: int, k: int, p: int, stage_cap: Optional[int] = None) -> FeasibilityReport:
    """Symmetric feasibility check that never materialises the blocks.

    Equivalent to :func:`verify_dual_feasibility` with ``method="symmetric"``
    but usable for ground sets far too large to list ``C(n, k)`` blocks.
    """
    alpha = tuple(float(a) for a in alpha)
    if len(alpha) != n + 1:
        raise ParameterError(f"stage vector needs n+1={n + 1} entries, got {len(alpha)}")
    if not 1 <= k <= n or not 1 <= p <= n:
        raise ParameterError(f"need 1 <= k, p <= n, got k={k}, p={p}, n={n}")
    cap = n if stage_cap is None else stage_cap
    if not 0 <= cap <= n:
        raise ParameterError(f"need 0 <= stage_cap <= n, got {cap}")
    worst, edge, checked, per_stage = _verify_symmetric(alpha, n, k, p, cap)
    return FeasibilityReport(
        max_violation=worst,
        worst_edge=edge,
        feasible=worst <= 1 + FEASIBILITY_TOL,
        edges_checked=checked,
        method="symmetric",
        objective=stage_objective(alpha, n, k),
        per_stage=per_stage,
    )


def _verify_naive(d: DualSolution, E: EdgeSetP):
    table = d.dense_table()
    S, J = E.arrays()
    if S.size == 0:
        return 0.0, None, 0
    loads = ((table[S] - table[S | J]) ** 2).sum(axis=1)
    i = int(np.argmax(loads))
    return float(loads[i]), (int(S[i]), int(J[i])), int(S.size)


def verify_dual_feasibility(
    d: DualSolution,
    E: EdgeSetP,
    structure: Optional[CertificateStructure] = None,
    method: str = "auto",
) -> FeasibilityReport:
    """Maximum edge load ``L`` over ``E`` and the edge attaining it.

    ``method`` is ``"symmetric"`` (binomial counting; needs a stage-vector
    dual on a complete uniform structure), ``"naive"`` (per-edge, per-block
    enumeration) or ``"auto"``.
    """
    structure = structure or d.structure
    if structure.n != E.n or d.n != E.n:
        raise ParameterError(f"mismatched ground sets: dual n={d.n}, structure n={structure.n}, edges n={E.n}")
    if structure != d.structure:
        raise ParameterError("dual solution was built for a different certificate structure")
    k = structure.uniform_size()
    can_group = d.symmetric and k is not None
    if method == "auto":
        method = "symmetric" if can_group else "naive"
    per_stage = {}
    if method == "symmetric":
        if not can_group:
            raise ParameterError("symmetric grouping needs a stage-vector dual on all k-subsets")
        worst, edge, checked, per_stage = _verify_symmetric(d.stage_alpha, d.n, k, E.p, E.stage_cap)
    elif method == "naive":
        worst, edge, checked = _verify_naive(d, E)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return FeasibilityReport(
        max_violation=worst,
        worst_edge=edge,
        feasible=worst <= 1 + FEASIBILITY_TOL,
        edges_checked=checked,
        method=method,
        objective=d.objective,
        per_stage=per_stage,
    )


def dual_from_json(structure: CertificateStructure, obj: dict) -> DualSolution:
    if "alpha" in obj:
        return DualSolution(structure, tuple(obj["alpha"]))
    index = {b: i for i, b in enumerate(structure.blocks)}
    amap = {}
    for key, v in obj["alpha_map"].items():
        s_txt, _, m_txt = key.partition("|")
        block = tuple(sorted(int(t) for t in m_txt.split(",")))
        amap[(parse_mask(s_txt), index[block])] = float(v)
    return DualSolution(structure, alpha_map=amap)


__all__ = [
    "DualSolution",
    "FeasibilityReport",
    "ed_dual_certificate",
    "ed_stage_alpha",
    "ksum_stage_alpha",
    "stage_objective",
    "verify_stage_dual",
    "ksum_dual_certificate",
    "ed_objective_closed_form",
    "symmetric_edge_load",
    "verify_dual_feasibility",
    "dual_from_json",
]
