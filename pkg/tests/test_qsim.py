import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parqq.errors import ParameterError, PropertyViolation, ResourceLimitError
from parqq.qsim import (
    ParallelQueryLog,
    StateVector,
    ball_size,
    bits_from_spec,
    grover_closed_form,
    grover_parallel,
    hoeffding_threshold,
    interrogate,
    interrogation_rounds_table,
)


def test_state_vector_norm_guard():
    with pytest.raises(PropertyViolation):
        StateVector(1, np.array([1.0, 1.0]))
    s = StateVector(3)
    s.hadamard_all()
    np.testing.assert_allclose(s.probabilities(), np.full(8, 1 / 8))
    s.hadamard_all()
    assert s.probabilities()[0] == pytest.approx(1.0)


def test_hadamard_matches_kron():
    rng = np.random.default_rng(0)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    v /= np.linalg.norm(v)
    H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    full = np.kron(np.kron(H, H), H)
    s = StateVector(3, v)
    s.hadamard_all()
    np.testing.assert_allclose(s.amplitudes, full @ v, atol=1e-12)


def test_query_log_guards():
    log = ParallelQueryLog(2, 4)
    log.record([0, 3])
    with pytest.raises(PropertyViolation):
        log.record([1, 2, 3])
    with pytest.raises(PropertyViolation):
        log.record([5])
    assert log.summary()["total_rounds"] == 1


def test_grover_examples():
    res = grover_parallel(64, 4, 17)
    assert res.iterations == 3
    assert res.success == pytest.approx(math.sin(7 * math.asin(0.25)) ** 2, abs=1e-9)
    assert res.success == pytest.approx(0.9613, abs=1e-4)
    exact = grover_parallel(8, 2, 5)
    assert exact.iterations == 1 and exact.success == pytest.approx(1.0, abs=1e-12)
    degenerate = grover_parallel(6, 6, 2)
    assert degenerate.success == 1.0 and degenerate.rounds == 1


@settings(max_examples=30, deadline=None)
@given(block_exp=st.integers(1, 8), p=st.integers(1, 4), seed=st.integers(0, 1000))
def test_grover_matches_closed_form(block_exp, p, seed):
    size = 2**block_exp
    n = size * p
    marked = seed % n
    res = grover_parallel(n, p, marked)
    assert res.success == pytest.approx(grover_closed_form(size, res.iterations), abs=1e-9)
    assert res.rounds <= math.ceil(math.pi / 4 * math.sqrt(size)) + 1
    assert all(len(b) <= p for b in res.log.rounds)


def test_grover_validation():
    with pytest.raises(ParameterError):
        grover_parallel(10, 3, 0)
    with pytest.raises(ParameterError):
        grover_parallel(8, 2, 8)


def test_interrogation_examples():
    res = interrogate(np.array([1, 0, 1, 1, 0, 0, 1, 0]), p=3, T=6)
    assert res.success == pytest.approx(247 / 256, abs=1e-12)
    assert res.rounds == 2
    assert res.recovered() == 0b01001101
    full = interrogate([1, 0, 1], p=1, T=3)
    assert full.success == pytest.approx(1.0, abs=1e-12)
    assert hoeffding_threshold(16, 0.1) == 13
    table = interrogation_rounds_table(16, [1, 13], 0.1)
    assert [row.rounds for row in table] == [13, 1]


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 10_000), p=st.integers(1, 6), T=st.integers(0, 12))
def test_interrogation_success_is_ball_fraction(n, seed, p, T):
    T = min(T, n)
    x = np.random.default_rng(seed).integers(0, 2, size=n)
    res = interrogate(x, p, T=T)
    assert res.success == pytest.approx(ball_size(n, T) / 2**n, abs=1e-12)
    assert res.rounds == (math.ceil(T / p) if T else 0)
    assert res.distribution.sum() == pytest.approx(1.0)


def test_interrogation_validation():
    with pytest.raises(ParameterError):
        interrogate([0, 2], 1)
    with pytest.raises(ParameterError):
        interrogate([0, 1], 1, eps=1.5)
    with pytest.raises(ResourceLimitError):
        interrogate(np.zeros(25, dtype=int), 1)


def test_bits_from_spec():
    assert list(bits_from_spec("0110", 4)) == [0, 1, 1, 0]
    a, b = bits_from_spec("random:5", 10), bits_from_spec("random:5", 10)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ParameterError):
        bits_from_spec("012", 3)


def test_ball_size():
    assert ball_size(8, 6) == sum(comb(8, i) for i in range(7)) == 247
