"""State-vector simulation of p-parallel Grover search and parallel oracle interrogation.

Query accounting lives in :class:`ParallelQueryLog`: each round is one batch
of at most ``p`` oracle indices, ``0`` standing for the no-op query and
``1..n`` for real positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError, PropertyViolation, ResourceLimitError

MAX_QUBITS = 24
NORM_TOL = 1e-9


class StateVector:
    """``2^n`` complex128 amplitudes; basis index bit ``i`` is qubit ``i``."""

    def __init__(self, n: int, amplitudes: Optional[np.ndarray] = None):
        if not 0 <= n <= MAX_QUBITS:
            raise ResourceLimitError(f"{n} qubits exceeds the simulator cap {MAX_QUBITS}")
        self.n = n
        if amplitudes is None:
            amplitudes = np.zeros(1 << n, dtype=np.complex128)
            amplitudes[0] = 1.0
        self.amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << n,):
            raise ParameterError(f"need {1 << n} amplitudes, got {self.amplitudes.shape}")
        self.check_norm()

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def check_norm(self):
        err = abs(self.norm() - 1.0)
        if err > NORM_TOL:
            raise PropertyViolation(f"state norm drifted by {err}", {"n": self.n})

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def apply_phase(self, signs: np.ndarray):
        self.amplitudes = self.amplitudes * signs
        self.check_norm()

    def hadamard_all(self):
        """``H^{(x)n}`` by an in-place fast Walsh-Hadamard transform."""
        a = self.amplitudes.copy()
        h = 1
        while h < a.size:
            view = a.reshape(-1, 2, h)
            low = view[:, 0].copy()
            view[:, 0] += view[:, 1]
            low -= view[:, 1]
            view[:, 1] = low
            h *= 2
        a /= math.sqrt(a.size)
        self.amplitudes = a
        self.check_norm()


@dataclass
class ParallelQueryLog:
    p: int
    n: int
    rounds: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def record(self, batch: Sequence[int]):
        batch = tuple(int(i) for i in batch)
        if len(batch) > self.p:
            raise PropertyViolation(f"batch of {len(batch)} queries exceeds p={self.p}", {"batch": batch})
        if any(not 0 <= i <= self.n for i in batch):
            raise PropertyViolation(f"query index outside 0..{self.n}", {"batch": batch})
        self.rounds.append(batch)

    @property
    def total_rounds(self) -> int:
        return len(self.rounds)

    def summary(self) -> dict:
        return {
            "p": self.p,
            "total_rounds": self.total_rounds,
            "max_batch": max((len(b) for b in self.rounds), default=0),
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# p-parallel Grover


def grover_iterations(block_size: int) -> int:
    return max(0, round(math.pi / 4 * math.sqrt(block_size) - 0.5))


def grover_closed_form(block_size: int, t: int) -> float:
    theta = math.asin(math.sqrt(1.0 / block_size))
    return math.sin((2 * t + 1) * theta) ** 2


@dataclass(frozen=True)
class GroverResult:
    success: float
    closed_form: float
    iterations: int
    rounds: int
    block: int
    log: ParallelQueryLog


def grover_parallel(n: int, p: int, marked: int, rounds="auto") -> GroverResult:
    """Run Grover on each of the p blocks of size n/p and verify each candidate once.

    ``marked`` is a 0-based index in ``[0, n)``.  All copies advance one
    iteration per round (one oracle query each), then a final round queries
    the p candidates.  The returned success is the probability that the copy
    owning the marked index outputs it.
    """
    if p < 1 or n % p:
        raise ParameterError(f"p must divide n, got n={n}, p={p}")
    if not 0 <= marked < n:
        raise ParameterError(f"marked index must lie in [0, {n}), got {marked}")
    size = n // p
    if size > 1 << MAX_QUBITS:
        raise ResourceLimitError(f"block size {size} too large to simulate")
    t = grover_iterations(size) if rounds == "auto" else int(rounds)
    if t < 0:
        raise ParameterError("rounds must be nonnegative")
    log = ParallelQueryLog(p, n)
    block, offset = divmod(marked, size)

    if size == 1:
        # every block is one index: the verification query alone finds it
        log.record(range(1, p + 1))
        return GroverResult(1.0, 1.0, 0, log.total_rounds, block, log)

    # blocks without the marked index stay uniform; only the owner matters
    amps = np.full(size, 1 / math.sqrt(size))
    oracle = np.ones(size)
    oracle[offset] = -1.0
    for _ in range(t):
        log.record([b * size + 1 for b in range(p)])
        amps = oracle * amps
        amps = 2 * amps.mean() - amps
        if abs(float(amps @ amps) - 1.0) > NORM_TOL:
            raise PropertyViolation("Grover state lost normalisation", {"n": n, "p": p})
    candidates = [b * size + (offset if b == block else 0) + 1 for b in range(p)]
    log.record(candidates)
    log.notes.append("per-block rounds query each copy's oracle in superposition; last round verifies candidates")
    success = float(amps[offset] ** 2)
    return GroverResult(success, grover_closed_form(size, t), t, log.total_rounds, block, log)


# ---------------------------------------------------------------------------
# parallel oracle interrogation


def hoeffding_threshold(n: int, eps: float) -> int:
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    return min(n, math.ceil(n / 2 + math.sqrt(n * math.log(1 / eps) / 2)))


def ball_size(n: int, T: int) -> int:
    return sum(comb(n, i) for i in range(T + 1))


@dataclass(frozen=True)
class InterrogationResult:
    success: float
    closed_form: float
    T: int
    rounds: int
    distribution: np.ndarray
    log: ParallelQueryLog

    def recovered(self) -> int:
        return int(np.argmax(self.distribution))


def _as_bits(x, n: Optional[int] = None) -> tuple[int, np.ndarray]:
    bits = np.asarray(x, dtype=np.int64).ravel()
    if bits.size == 0 or np.any((bits != 0) & (bits != 1)):
        raise ParameterError("x must be a nonempty 0/1 string")
    if n is not None and bits.size != n:
        raise ParameterError(f"x has length {bits.size}, expected {n}")
    return bits.size, bits


def interrogate(x, p: int, eps: float = 0.1, T: Optional[int] = None) -> InterrogationResult:
    """Recover ``x`` from the uniform superposition over strings of weight at most ``T``.

    The phase ``(-1)^{x.y}`` needs one query per 1-position of ``y``; since
    ``|y| <= T`` these fit in ``ceil(T/p)`` rounds of ``p`` (padding with
    the no-op index 0).  The simulator applies the phase as one global
    diagonal and books the rounds accordingly.
    """
    n, bits = _as_bits(x)
    if n > MAX_QUBITS:
        raise ResourceLimitError(f"n={n} exceeds the simulator cap {MAX_QUBITS}")
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if T is None:
        T = hoeffding_threshold(n, eps)
    elif not 0 <= T <= n:
        raise ParameterError(f"T must lie in [0, n], got {T}")

    idx = np.arange(1 << n, dtype=np.int64)
    weight = np.bitwise_count(idx)
    ball = weight <= T
    B = int(ball.sum())
    state = StateVector(n, np.where(ball, 1 / math.sqrt(B), 0.0).astype(np.complex128))

    x_index = int(sum(int(b) << i for i, b in enumerate(bits)))
    parity = np.bitwise_count(idx & x_index) & 1

    log = ParallelQueryLog(p, n)
    rounds = math.ceil(T / p) if T else 0
    for r in range(rounds):
        # queries p of the up-to-T one-positions per round, listed by slot
        lo = r * p
        log.record([j + 1 for j in range(lo, min(lo + p, T))])
    log.notes.append("phase (-1)^{x.y} applied as one diagonal across the logged rounds")
    state.apply_phase(np.where(parity, -1.0, 1.0))
    state.hadamard_all()
    dist = state.probabilities()
    return InterrogationResult(float(dist[x_index]), B / 2**n, T, rounds, dist, log)


@dataclass(frozen=True)
class RoundsRow:
    p: int
    T: int
    rounds: int


def interrogation_rounds_table(n: int, p_values: Sequence[int], eps: float) -> list[RoundsRow]:
    T = hoeffding_threshold(n, eps)
    out = []
    for p in p_values:
        if p < 1:
            raise ParameterError(f"p must be >= 1, got {p}")
        rounds = math.ceil(T / p)
        if rounds > T or (p >= T and rounds != 1):
            raise PropertyViolation("round count out of range", {"n": n, "p": p, "T": T})
        out.append(RoundsRow(p, T, rounds))
    return out


def bits_from_spec(spec: str, n: int) -> np.ndarray:
    """``"random:SEED"`` or a literal 0/1 string of length ``n``."""
    if spec.startswith("random"):
        _, _, seed = spec.partition(":")
        rng = np.random.default_rng(int(seed or 0))
        return rng.integers(0, 2, size=n)
    if len(spec) != n or set(spec) - {"0", "1"}:
        raise ParameterError(f"x must be 'random[:seed]' or a 0/1 string of length {n}")
    return np.array([int(c) for c in spec])


__all__ = [
    "GroverResult",
    "InterrogationResult",
    "ParallelQueryLog",
    "RoundsRow",
    "StateVector",
    "ball_size",
    "bits_from_spec",
    "grover_closed_form",
    "grover_iterations",
    "grover_parallel",
    "hoeffding_threshold",
    "interrogate",
    "interrogation_rounds_table",
]
