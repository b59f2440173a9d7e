"""Adversary-dual vectors built from a primal learning graph.

For every input ``z`` and query set ``J`` the vector ``u_{z,J}`` lives in the
span of basis states ``|S, z_S>``:

* 0-inputs: ``u_{y,J} = sum_S sqrt(w_{S,J}) |S, y_S>``
* 1-inputs: ``u_{x,J} = sum_S theta_{S,J}(M_x) / sqrt(w_{S,J}) |S, x_S>``

with ``M_x`` the block certifying ``x``.  The pair sum
``sum_{J : x_J != y_J} <u_{x,J}, u_{y,J}>`` is the flow of ``theta(M_x)``
across the cut ``{S : x_S = y_S}`` and therefore equals 1 for any unit flow.
Vectors are kept as sparse dicts keyed by ``(S, x_S)``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from ..certstruct import InducedFunction
from ..errors import ParameterError
from ..subsets import members
from .primal import PrimalSolution


@dataclass(frozen=True)
class WitnessReport:
    cut_sum: float
    one_input_norm: float
    zero_input_norm: float
    total_weight: float
    block: tuple[int, ...]


def _restrict(z, S: int) -> tuple[int, ...]:
    return tuple(z[i] for i in members(S))


def witness_vectors(sol: PrimalSolution, z, block: int | None):
    """``{J: {(S, z_S): coefficient}}`` for a 1-input (block given) or 0-input (block None)."""
    vecs: dict[int, dict] = defaultdict(dict)
    for i, (S, J) in enumerate(zip(sol.sources, sol.increments)):
        w = sol.weights[i]
        if w <= 0:
            continue
        S, J = int(S), int(J)
        if block is None:
            coeff = math.sqrt(w)
        else:
            theta = sol.flows[i, block]
            if theta == 0:
                continue
            coeff = theta / math.sqrt(w)
        vecs[J][(S, _restrict(z, S))] = coeff
    return vecs


def witness_from_primal(sol: PrimalSolution, fi: InducedFunction, x, y) -> WitnessReport:
    """Cut inner-product sum and the two norm bounds for a (1-input, 0-input) pair."""
    if fi.structure != sol.structure:
        raise ParameterError("primal solution and function use different certificate structures")
    bit_x, block_x = fi.evaluate(x)
    if bit_x != 1:
        raise ParameterError(f"x={tuple(x)} is not a 1-input")
    if fi.evaluate(y)[0] != 0:
        raise ParameterError(f"y={tuple(y)} is not a 0-input")
    b = fi.structure.blocks.index(block_x)
    ux = witness_vectors(sol, x, b)
    uy = witness_vectors(sol, y, None)

    cut = 0.0
    for J, vec in ux.items():
        if _restrict(x, J) == _restrict(y, J):
            continue
        other = uy.get(J, {})
        cut += sum(c * other.get(key, 0.0) for key, c in vec.items())
    norm_x = sum(c * c for vec in ux.values() for c in vec.values())
    norm_y = sum(c * c for vec in uy.values() for c in vec.values())
    return WitnessReport(
        cut_sum=float(cut),
        one_input_norm=float(norm_x),
        zero_input_norm=float(norm_y),
        total_weight=sol.total_weight,
        block=block_x,
    )


def random_one_input(fi: InducedFunction, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform random string with a uniformly chosen block forced into its array."""
    z = [int(v) for v in rng.integers(0, fi.q, size=fi.n)]
    b = int(rng.integers(len(fi.structure)))
    block = fi.structure.blocks[b]
    arr = fi.arrays[b]
    last = len(block) - 1
    z[block[last]] = int(arr.complete(tuple(z[i] for i in block), last))
    return tuple(z)


def random_zero_input(fi: InducedFunction, rng: np.random.Generator, max_tries: int = 10_000):
    for _ in range(max_tries):
        z = tuple(int(v) for v in rng.integers(0, fi.q, size=fi.n))
        if not fi(z):
            return z
    raise ParameterError("could not sample a 0-input by rejection")


def random_input_pair(fi: InducedFunction, rng: np.random.Generator):
    """A planted 1-input and a rejection-sampled 0-input."""
    return random_one_input(fi, rng), random_zero_input(fi, rng)


__all__ = [
    "WitnessReport",
    "witness_from_primal",
    "witness_vectors",
    "random_input_pair",
    "random_one_input",
    "random_zero_input",
]
