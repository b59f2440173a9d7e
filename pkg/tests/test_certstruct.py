import warnings
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parqq.certstruct import (
    CertificateStructure,
    equality_array,
    make_ed_function,
    make_ed_structure,
    make_ksum_structure,
    make_uniform_structure,
    structure_from_json,
    structure_to_json,
    tuple_array,
    verify_orthogonal_array,
    zero_sum_array,
)
from parqq.errors import ParameterError


def test_ed_structure_sizes():
    assert len(make_ed_structure(4)) == 6
    assert make_ed_structure(2).blocks == ((0, 1),)
    assert len(make_ed_structure(8)) == 28
    with pytest.raises(ParameterError):
        make_ed_structure(1)


def test_comparable_blocks_rejected():
    with pytest.raises(ParameterError):
        CertificateStructure.from_blocks(3, [(0,), (0, 1)])
    with pytest.raises(ParameterError):
        CertificateStructure.from_blocks(3, [(0, 1), (1, 0)])
    with pytest.raises(ParameterError):
        CertificateStructure.from_blocks(2, [(0, 2)])


def test_ksum_examples():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        f = make_ksum_structure(4, 2, 12)
        assert f((3, 9, 1, 5)) == 1
        assert f((1, 2, 3, 4)) == 0
        g = make_ksum_structure(3, 3, 2)
        assert g((1, 1, 0)) == 1
        assert g.precondition_met


def test_small_alphabet_flagged():
    with pytest.warns(UserWarning):
        f = make_ksum_structure(4, 2, 3)
    assert not f.precondition_met


def test_orthogonal_array_examples():
    assert verify_orthogonal_array(zero_sum_array(2, 5))
    assert verify_orthogonal_array(equality_array(7))
    assert not verify_orthogonal_array(tuple_array(2, 2, [(0, 0), (0, 1)]))


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 4), q=st.integers(2, 6))
def test_zero_sum_is_orthogonal(k, q):
    assert verify_orthogonal_array(zero_sum_array(k, q))


def test_induced_evaluation_examples():
    ed = make_ed_function(4, 12)
    assert ed.evaluate((1, 3, 1, 2)) == (1, (0, 2))
    assert ed.evaluate((1, 2, 3, 4)) == (0, None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ks = make_ksum_structure(4, 3, 10)
    assert ks.evaluate((2, 3, 5, 9)) == (1, (0, 1, 2))


def test_truth_table_matches_pointwise():
    f = make_ed_function(3, 4)
    table = f.truth_table()
    for idx, x in enumerate(product(range(4), repeat=3)):
        assert table[idx] == f(x)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 5), k=st.integers(1, 3))
def test_uniform_structure_invariants(n, k):
    k = min(k, n)
    s = make_uniform_structure(n, k)
    assert all(len(b) == k for b in s.blocks)
    assert s.uniform_size() == k
    masks = s.masks
    assert len(set(masks)) == len(masks)
    for a in masks:
        for b in masks:
            assert a == b or (a & ~b) != 0


def test_json_round_trip():
    s = CertificateStructure.from_blocks(4, [(0, 1), (1, 2, 3)])
    assert structure_from_json(structure_to_json(s)) == s
    assert structure_from_json({"type": "ed", "n": 3}) == make_ed_structure(3)
    f = structure_from_json({"type": "ed", "n": 3, "q": 6})
    assert f.q == 6 and f.precondition_met
    with pytest.raises(ParameterError):
        structure_from_json({"n": 3})


def test_input_validation():
    f = make_ed_function(3, 6)
    with pytest.raises(ParameterError):
        f((1, 2))
    with pytest.raises(ParameterError):
        f((1, 2, 6))
    assert np.all(f.truth_table() <= 1)
