"""The lifted adversary matrix built from a dual solution, and its masked norms.

On ``[q]^n`` let ``E0 = J/q`` (projector onto the uniform vector) and
``E1 = I - E0``.  For a subset ``S`` the projector ``E_S`` is the tensor
product with ``E1`` on coordinates in ``S`` and ``E0`` elsewhere, coordinate
0 being the most significant factor (the same row-major order as
``InducedFunction.block_hits``).

``G_M = sum_S alpha_S(M) E_S`` for each block ``M`` and the lifted matrix
stacks the ``G_M`` vertically.  Keeping rows ``(x, M)`` with ``M``
certifying ``x`` and columns ``y`` with ``f(y) = 0`` gives an adversary
matrix ``Gamma`` for the induced function.

Masking by ``Delta_J`` kills the identity on the ``J`` coordinates, so when
``J`` is inside ``S`` the term ``E_S`` may be replaced by minus the sum of
``E_S'`` over ``S \\ J <= S' < S`` without changing the masked matrix.  After
the substitution the coefficient of ``E_S`` is ``beta_S = alpha_S -
alpha_{S|J}``, and since the ``E_S`` are orthogonal the norm is
``max_S sqrt(sum_M beta_S(M)^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from ..certstruct import InducedFunction
from ..errors import ParameterError, PropertyViolation, ResourceLimitError
from ..learngraph.dual import DualSolution
from ..subsets import submasks
from .ratio import AdversaryInstance, delta_mask, spectral_norm

MAX_GRID = 1296
ALGEBRA_TOL = 1e-12
NORM_TOL = 1e-6


class ProjectorFamily:
    """``E_S`` on ``[q]^n`` as dense ``q^n x q^n`` matrices, cached per ``S``."""

    def __init__(self, q: int, n: int):
        if q < 2 or n < 1:
            raise ParameterError(f"need q >= 2 and n >= 1, got q={q}, n={n}")
        if q**n > MAX_GRID:
            raise ResourceLimitError(f"q^n = {q**n} exceeds the dense bound {MAX_GRID}")
        self.q, self.n = q, n
        self.E0 = np.full((q, q), 1.0 / q)
        self.E1 = np.eye(q) - self.E0
        self._cache: dict[int, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.q**self.n

    def E(self, S: int) -> np.ndarray:
        if not 0 <= S < (1 << self.n):
            raise ParameterError(f"subset mask {S} outside a ground set of size {self.n}")
        if S not in self._cache:
            factors = [self.E1 if S >> j & 1 else self.E0 for j in range(self.n)]
            self._cache[S] = reduce(np.kron, factors)
        return self._cache[S]

    def combine(self, coeffs) -> np.ndarray:
        """``sum_S coeffs[S] E_S`` for a length ``2^n`` coefficient vector."""
        out = np.zeros((self.dim, self.dim))
        for S, c in enumerate(coeffs):
            if c != 0:
                out += c * self.E(S)
        return out

    def check_algebra(self) -> float:
        """Largest entrywise error in ``E_S E_S' = [S=S'] E_S`` and ``sum_S E_S = I``."""
        full = 1 << self.n
        err = 0.0
        total = np.zeros((self.dim, self.dim))
        for S in range(full):
            total += self.E(S)
            for T in range(full):
                expect = self.E(S) if S == T else 0.0
                err = max(err, float(np.abs(self.E(S) @ self.E(T) - expect).max()))
        return max(err, float(np.abs(total - np.eye(self.dim)).max()))


def grid_inputs(q: int, n: int) -> np.ndarray:
    """All of ``[q]^n`` as rows, in projector order."""
    return np.indices((q,) * n).reshape(n, -1).T


@dataclass
class GammaTilde:
    alpha: DualSolution
    fi: InducedFunction
    projectors: ProjectorFamily
    table: np.ndarray  # alpha_S(M_b) as (2^n, blocks)
    blocks: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.fi.n

    @property
    def q(self) -> int:
        return self.fi.q

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack(self.blocks)

    def inputs(self) -> np.ndarray:
        return grid_inputs(self.q, self.n)

    def restricted(self) -> AdversaryInstance:
        """``Gamma``: rows ``(x, M)`` with ``M`` certifying ``x``, columns the 0-inputs."""
        grid = self.fi._grid()
        inputs = grid.T
        zero_cols = np.flatnonzero(self.fi.truth_table() == 0)
        parts, labels, tags = [], [], []
        for b, G in enumerate(self.blocks):
            rows = np.flatnonzero(self.fi.block_hits(b, grid))
            parts.append(G[np.ix_(rows, zero_cols)])
            labels.append(inputs[rows])
            tags.extend((int(r), b) for r in rows)
        return AdversaryInstance(
            np.vstack(parts), np.vstack(labels), inputs[zero_cols], q=self.q, row_tags=tuple(tags)
        )

    def stacked_mask(self, J) -> np.ndarray:
        inputs = self.inputs()
        return np.tile(delta_mask(inputs, inputs, J), (len(self.blocks), 1))


def build_gamma_tilde(alpha: DualSolution, fi: InducedFunction) -> GammaTilde:
    if alpha.structure != fi.structure:
        raise ParameterError("dual solution and function use different certificate structures")
    proj = ProjectorFamily(fi.q, fi.n)
    table = alpha.dense_table()
    blocks = [proj.combine(table[:, b]) for b in range(table.shape[1])]
    return GammaTilde(alpha, fi, proj, table, blocks)


def _substituted_block(proj: ProjectorFamily, coeffs, J: int) -> np.ndarray:
    """Apply ``E_S -> -sum_{S \\ J <= S' < S} E_S'`` to every ``S`` containing ``J``."""
    out = np.zeros((proj.dim, proj.dim))
    for S, c in enumerate(coeffs):
        if c == 0:
            continue
        if J & ~S:
            out += c * proj.E(S)
            continue
        base = S & ~J
        for part in submasks(S & J):
            Sp = base | part
            if Sp != S:
                out -= c * proj.E(Sp)
    return out


def phi_matrix(gt: GammaTilde, J: int) -> np.ndarray:
    """``phi_J`` of the lifted matrix by literal projector substitution."""
    if J == 0:
        raise ParameterError("J must be nonempty")
    return np.vstack([_substituted_block(gt.projectors, gt.table[:, b], J) for b in range(gt.table.shape[1])])


def phi_norm_closed_form(table: np.ndarray, J: int) -> float:
    """``max_S sqrt(sum_M (alpha_S(M) - alpha_{S|J}(M))^2)``."""
    S = np.arange(table.shape[0])
    beta = table[S] - table[S | J]
    return float(math.sqrt((beta**2).sum(axis=1).max()))


@dataclass(frozen=True)
class PhiReport:
    J: int
    masked_equality_error: float
    explicit_norm: float
    closed_form_norm: float
    restricted_masked_norm: float

    @property
    def norms_agree(self) -> bool:
        return abs(self.explicit_norm - self.closed_form_norm) <= NORM_TOL

    @property
    def masked_bound_holds(self) -> bool:
        return self.restricted_masked_norm <= 2 * self.explicit_norm + NORM_TOL


def phi_J(gt: GammaTilde, J: int, gamma: AdversaryInstance | None = None, check: bool = True):
    """``(phi_J matrix, PhiReport)``; with ``check`` raise on any failed assertion."""
    phi = phi_matrix(gt, J)
    J_list = [j for j in range(gt.n) if J >> j & 1]
    mask = gt.stacked_mask(J_list)
    err = float(np.abs(gt.matrix * mask - phi * mask).max())
    gamma = gamma or gt.restricted()
    report = PhiReport(
        J=J,
        masked_equality_error=err,
        explicit_norm=spectral_norm(phi),
        closed_form_norm=phi_norm_closed_form(gt.table, J),
        restricted_masked_norm=spectral_norm(gamma.masked(J_list)),
    )
    if check:
        where = {"J": J_list, "n": gt.n, "q": gt.q}
        if err > ALGEBRA_TOL:
            raise PropertyViolation(f"masked equality off by {err}", where)
        if not report.norms_agree:
            raise PropertyViolation(
                f"explicit norm {report.explicit_norm} != closed form {report.closed_form_norm}", where
            )
        if not report.masked_bound_holds:
            raise PropertyViolation(
                f"||Gamma o Delta_J|| = {report.restricted_masked_norm} > 2 ||phi_J|| = {2 * report.explicit_norm}",
                where,
            )
    return phi, report


@dataclass(frozen=True)
class ChainReport:
    """Every quantity in the chain from a dual solution to the ratio bound.

    ``gamma_norm`` is the norm of the literal row/column restriction.  Only a
    ``1/q`` fraction of rows survives per block, which shrinks the uniform
    component by ``sqrt(q)``; ``rescaled_gamma_norm = sqrt(q) * gamma_norm``
    undoes that.  The ratio itself is scale free.
    """

    gamma_norm: float
    rescaled_gamma_norm: float
    gamma_norm_floor: float
    worst_masked_norm: float
    ratio: float
    ratio_floor: float
    phi_reports: tuple

    @property
    def norm_floor_holds(self) -> bool:
        return self.gamma_norm >= self.gamma_norm_floor - NORM_TOL

    @property
    def rescaled_norm_floor_holds(self) -> bool:
        return self.rescaled_gamma_norm >= self.gamma_norm_floor - NORM_TOL

    @property
    def ratio_holds(self) -> bool:
        return self.ratio >= self.ratio_floor - NORM_TOL


def lower_bound_chain(alpha: DualSolution, fi: InducedFunction, p: int) -> ChainReport:
    """Evaluate every step from the dual to the ratio ``||Gamma|| / max_{|J|<=p} ||Gamma o Delta_J||``."""
    if not 1 <= p <= fi.n:
        raise ParameterError(f"need 1 <= p <= n, got p={p}, n={fi.n}")
    gt = build_gamma_tilde(alpha, fi)
    gamma = gt.restricted()
    alpha0 = float(np.sum(gt.table[0] ** 2))
    reports = []
    for J in range(1, 1 << fi.n):
        if J.bit_count() <= p:
            reports.append(phi_J(gt, J, gamma)[1])
    norm = spectral_norm(gamma.gamma)
    worst = max(r.restricted_masked_norm for r in reports)
    ratio = norm / worst if worst > 0 else math.inf
    return ChainReport(
        gamma_norm=norm,
        rescaled_gamma_norm=math.sqrt(fi.q) * norm,
        gamma_norm_floor=math.sqrt(alpha0 / 2),
        worst_masked_norm=worst,
        ratio=ratio,
        ratio_floor=math.sqrt(alpha0) / (2 * math.sqrt(2)),
        phi_reports=tuple(reports),
    )


__all__ = [
    "ChainReport",
    "GammaTilde",
    "PhiReport",
    "ProjectorFamily",
    "build_gamma_tilde",
    "grid_inputs",
    "lower_bound_chain",
    "phi_J",
    "phi_matrix",
    "phi_norm_closed_form",
]
