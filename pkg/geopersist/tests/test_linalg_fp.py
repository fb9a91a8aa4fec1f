"""Tests for linear algebra over F_p."""
from pathlib import Path
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
from linalg_fp import column_space_contains, is_prime, matmul_mod, nullspace_mod, rank_mod, rref_mod


class TestPrimes:
    """Primality of the field characteristic."""

    def test_small_values(self):
        assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]


class TestRank:
    """Rank depends on the characteristic."""

    def test_two_by_two(self):
        A = np.array([[1, 1], [1, -1]])
        assert rank_mod(A, 2) == 1
        assert rank_mod(A, 3) == 2

    def test_empty(self):
        assert rank_mod(np.zeros((0, 3)), 5) == 0

    def test_rref_pivots(self):
        R, pivots = rref_mod(np.array([[2, 4, 1], [1, 2, 0]]), 3)
        assert pivots == [0, 2]
        assert R.tolist() == [[1, 2, 0], [0, 0, 1]]


class TestNullspace:
    """Right null spaces."""

    @settings(max_examples=50, deadline=None)
    @given(p=st.sampled_from([2, 3, 5, 7]), data=st.data())
    def test_rank_nullity(self, p, data):
        m = data.draw(st.integers(1, 5))
        n = data.draw(st.integers(1, 6))
        rows = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=m, max_size=m))
        A = np.array(rows, dtype=np.int64)
        N = nullspace_mod(A, p)
        assert N.shape == (n, n - rank_mod(A, p))
        assert not matmul_mod(A, N, p).any()

    def test_no_rows(self):
        assert nullspace_mod(np.zeros((0, 2), dtype=np.int64), 2).tolist() == [[1, 0], [0, 1]]


class TestColumnSpace:
    """Subspace inclusion."""

    def test_inclusion(self):
        big = np.array([[1, 0], [0, 1], [0, 0]])
        assert column_space_contains(big, np.array([[1], [1], [0]]), 2)
        assert not column_space_contains(big, np.array([[0], [0], [1]]), 2)

    def test_empty_spaces(self):
        assert column_space_contains(np.zeros((2, 0)), np.zeros((2, 0)), 3)
        assert column_space_contains(np.zeros((2, 0)), np.zeros((2, 1)), 3)
        assert not column_space_contains(np.zeros((2, 0)), np.array([[1], [0]]), 3)

    @pytest.mark.parametrize("p", [2, 3])
    def test_matmul_with_no_inner_dimension(self, p):
        assert matmul_mod(np.zeros((2, 0)), np.zeros((0, 3)), p).shape == (2, 3)
