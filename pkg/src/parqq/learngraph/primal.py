"""Feasible primal learning graphs by alternating minimisation.

The primal asks for edge weights ``w_e >= 0`` and, for every block ``M``, a
unit flow ``theta(M)`` from the empty set to the absorbing vertices
``{S : M subseteq S}`` such that each block's energy
``sum_e theta_e(M)**2 / w_e`` is at most 1.  The value is ``sqrt(sum_e w_e)``.

Two alternating steps, both of which can only lower the (rescaled) value:

* flow step: for fixed weights the minimum-energy unit flow is the
  electrical flow with conductances ``w``; solved as a grounded Laplacian
  system per block.  Energy equals the source potential.
* weight step: for fixed flows, ``min sum w`` subject to the energy
  constraints has optimum ``w_e = sqrt(sum_M lam_M theta_e(M)**2)`` for the
  right multipliers ``lam``; these are found by the multiplicative update
  ``lam_M <- lam_M * energy_M``.

After every step the weights are rescaled by the largest block energy,
which makes the iterate exactly feasible.  This is a certified-feasibility
heuristic: nothing here claims global optimality.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from ..certstruct import CertificateStructure
from ..errors import ParameterError, ResourceLimitError
from .edges import build_edge_set, edge_key, parse_edge_key

log = logging.getLogger(__name__)

MAX_PRIMAL_N = 8
MAX_PRIMAL_BLOCKS = 70
WEIGHT_FLOOR = 1e-12


@dataclass
class PrimalSolution:
    structure: CertificateStructure
    p: int
    sources: np.ndarray
    increments: np.ndarray
    weights: np.ndarray
    flows: np.ndarray  # shape (edges, blocks)
    converged: bool = True
    rounds: int = 0
    history: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def objective(self) -> float:
        return math.sqrt(self.total_weight)

    def energies(self) -> np.ndarray:
        """Per-block energy ``sum_e theta_e(M)^2 / w_e`` (edges with w=0 must carry no flow)."""
        w = self.weights[:, None]
        sq = self.flows**2
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(sq > 0, sq / w, 0.0)
        return terms.sum(axis=0)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(s), int(j)): i for i, (s, j) in enumerate(zip(self.sources, self.increments))}

    @classmethod
    def from_explicit(
        cls,
        structure: CertificateStructure,
        p: int,
        weights: Mapping[tuple[int, int], float],
        flows: Mapping[int, Mapping[tuple[int, int], float]],
    ) -> "PrimalSolution":
        """Hand-built solution; ``flows`` maps block index to ``{(S, J): theta}``."""
        edges = sorted(set(weights) | {e for f in flows.values() for e in f})
        for S, J in edges:
            if S & J or not J or J.bit_count() > p:
                raise ParameterError(f"({S}, {J}) is not an edge of the {p}-parallel edge set")
        idx = {e: i for i, e in enumerate(edges)}
        w = np.zeros(len(edges))
        for e, v in weights.items():
            w[idx[e]] = v
        theta = np.zeros((len(edges), len(structure)))
        for b, fl in flows.items():
            for e, v in fl.items():
                theta[idx[e], b] = v
        arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
        return cls(structure, p, arr[:, 0], arr[:, 1], w, theta)

    def to_json(self) -> dict:
        weights = {
            edge_key(int(s), int(j)): float(w)
            for s, j, w in zip(self.sources, self.increments, self.weights)
            if w > 0
        }
        flows = {}
        for b, block in enumerate(self.structure.blocks):
            col = self.flows[:, b]
            nz = np.flatnonzero(col)
            flows[",".join(map(str, block))] = {
                edge_key(int(self.sources[i]), int(self.increments[i])): float(col[i]) for i in nz
            }
        return {
            "n": self.n,
            "p": self.p,
            "objective": self.objective,
            "weights": weights,
            "flows": flows,
            "converged": self.converged,
            "rounds": self.rounds,
        }

    @classmethod
    def from_json(cls, structure: CertificateStructure, obj: dict) -> "PrimalSolution":
        weights = {parse_edge_key(k): v for k, v in obj["weights"].items()}
        index = {b: i for i, b in enumerate(structure.blocks)}
        flows = {}
        for bkey, fl in obj["flows"].items():
            block = tuple(int(t) for t in bkey.split(","))
            flows[index[block]] = {parse_edge_key(k): v for k, v in fl.items()}
        return cls.from_explicit(structure, int(obj["p"]), weights, flows)


@dataclass(frozen=True)
class PrimalCheck:
    feasible: bool
    max_energy: float
    max_conservation_error: float
    max_source_error: float
    zero_weight_flow: float


def check_primal_feasibility(sol: PrimalSolution, tol: float = 1e-9) -> PrimalCheck:
    """Recheck energy, conservation and unit-source constraints from scratch."""
    size = 1 << sol.n
    S, T = sol.sources, sol.sources | sol.increments
    masks = sol.structure.masks
    worst_cons = 0.0
    worst_src = 0.0
    for b, m in enumerate(masks):
        theta = sol.flows[:, b]
        net = np.zeros(size)
        np.add.at(net, S, -theta)
        np.add.at(net, T, theta)
        verts = np.arange(size, dtype=np.int64)
        interior = ((m & ~verts) != 0) & (verts != 0)
        worst_cons = max(worst_cons, float(np.abs(net[interior]).max(initial=0.0)))
        worst_src = max(worst_src, abs(float(theta[S == 0].sum()) - 1.0))
    zero_flow = float(np.abs(sol.flows[sol.weights <= 0]).max(initial=0.0))
    max_energy = float(sol.energies().max(initial=0.0))
    feasible = (
        max_energy <= 1 + tol
        and worst_cons <= tol
        and worst_src <= tol
        and zero_flow == 0.0
        and bool(np.all(sol.weights >= 0))
    )
    return PrimalCheck(feasible, max_energy, worst_cons, worst_src, zero_flow)


# ---------------------------------------------------------------------------
# solver


def electrical_flow(size: int, S: np.ndarray, T: np.ndarray, w: np.ndarray, block: int):
    """Minimum-energy unit flow from vertex 0 into ``{V : block subseteq V}``.

    Returns ``(theta, energy)``; edges leaving absorbing vertices or with zero
    conductance carry nothing.  Vertices cut off from the sinks are dropped.
    """
    verts = np.arange(size, dtype=np.int64)
    sink = (block & ~verts) == 0
    active = (w > 0) & ~sink[S]
    ground = size  # all absorbing vertices merged into this node
    a_src = S[active]
    a_dst = np.where(sink[T[active]], ground, T[active])
    a_w = w[active]

    adj = sp.coo_matrix((np.ones(a_src.size), (a_src, a_dst)), shape=(size + 1, size + 1))
    _, comp = csgraph.connected_components(adj, directed=False)
    live = comp == comp[ground]
    if not live[0]:
        return None, math.inf

    # unknown potentials: live non-sink vertices; ground fixed at 0
    unknown = live[:size] & ~sink
    pos = -np.ones(size + 1, dtype=np.int64)
    pos[np.flatnonzero(unknown)] = np.arange(int(unknown.sum()))
    keep = unknown[a_src]
    u, v, c = pos[a_src[keep]], pos[a_dst[keep]], a_w[keep]
    dim = int(unknown.sum())
    rows = [u]
    cols = [u]
    vals = [c]
    inner = v >= 0
    rows += [v[inner], u[inner], v[inner]]
    cols += [v[inner], v[inner], u[inner]]
    vals += [c[inner], -c[inner], -c[inner]]
    lap = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    rhs = np.zeros(dim)
    rhs[pos[0]] = 1.0
    phi = spla.spsolve(lap, rhs) if dim > 1 else rhs / lap.toarray()[0, 0]
    phi = np.atleast_1d(phi)
    full_phi = np.zeros(size + 1)
    full_phi[np.flatnonzero(unknown)] = phi
    theta = np.zeros(S.size)
    idx = np.flatnonzero(active)
    theta[idx] = a_w * (full_phi[a_src] - full_phi[a_dst])
    dead = ~live[a_src]
    theta[idx[dead]] = 0.0
    return theta, float(phi[pos[0]])


def _flow_step(size, S, T, w, masks):
    flows = np.zeros((S.size, len(masks)))
    energies = np.zeros(len(masks))
    for b, m in enumerate(masks):
        theta, energy = electrical_flow(size, S, T, w, m)
        if theta is None:
            return None, None
        flows[:, b] = theta
        energies[b] = energy
    return flows, energies


def _weight_step(sq: np.ndarray, iterations: int = 200, tol: float = 1e-10) -> np.ndarray:
    """Approximately ``argmin sum w`` s.t. ``sum_e sq[e, M] / w_e <= 1`` (unscaled)."""
    lam = np.full(sq.shape[1], 1.0 / sq.shape[1])
    w = np.sqrt(sq @ lam)
    for _ in range(iterations):
        with np.errstate(divide="ignore", invalid="ignore"):
            energy = np.where(sq > 0, sq / w[:, None], 0.0).sum(axis=0)
        if np.all(np.abs(energy[lam > 1e-300] - 1) < tol):
            break
        lam = lam * energy
        w = np.sqrt(sq @ lam)
    return w


def _scale_to_feasible(w: np.ndarray, energies: np.ndarray) -> np.ndarray:
    return w * float(energies.max())


def solve_primal(
    structure: CertificateStructure,
    p: int,
    max_rounds: int = 500,
    rel_tol: float = 1e-6,
    weight_floor: float = WEIGHT_FLOOR,
) -> PrimalSolution:
    """Certified-feasible primal solution for the p-parallel learning graph of ``structure``."""
    n = structure.n
    if n > MAX_PRIMAL_N or len(structure) > MAX_PRIMAL_BLOCKS:
        raise ResourceLimitError(
            f"dense primal solve is limited to n <= {MAX_PRIMAL_N} and <= {MAX_PRIMAL_BLOCKS} blocks"
        )
    if not 1 <= p <= n:
        raise ParameterError(f"need 1 <= p <= n, got p={p}, n={n}")
    E = build_edge_set(n, p)
    S, J = E.arrays()
    T = S | J
    size = 1 << n
    masks = structure.masks

    w = np.ones(S.size)
    flows, energies = _flow_step(size, S, T, w, masks)
    w = _scale_to_feasible(w, energies)
    best = w.sum()
    history = [math.sqrt(best)]
    converged = False
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        new_w = _weight_step(flows**2)
        # edges the new weights would cut while still carrying flow get the floor
        new_w = np.where((new_w <= 0) & np.any(flows != 0, axis=1), weight_floor, new_w)
        new_flows, new_energies = _flow_step(size, S, T, new_w, masks)
        if new_flows is None:
            log.debug("round %d: weight step disconnected a block; stopping", rounds)
            break
        new_w = _scale_to_feasible(new_w, new_energies)
        total = new_w.sum()
        if total >= best:
            converged = True
            break
        change = (best - total) / best
        w, flows, best = new_w, new_flows, total
        history.append(math.sqrt(best))
        if change < rel_tol:
            converged = True
            break

    # weight on edges that carry no flow only inflates the value
    w = np.where(np.any(flows != 0, axis=1), w, 0.0)
    sol = PrimalSolution(structure, p, S, J, w, flows, converged, rounds, history)
    top = float(sol.energies().max())
    if top > 1:
        sol.weights = w * top
    if not converged:
        log.warning("primal solver hit %d rounds without converging", max_rounds)
    return sol


__all__ = [
    "PrimalSolution",
    "PrimalCheck",
    "solve_primal",
    "check_primal_feasibility",
    "electrical_flow",
]
