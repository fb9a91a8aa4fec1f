"""
Dense linear algebra over prime fields F_p.

Matrices are numpy int64 arrays with entries reduced into [0, p). Used by the
brute-force homology oracle, induced-map kernels, abelianization ranks and the
kernel-inclusion order of the analysis module.
"""

from typing import List, Tuple

import numpy as np


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def mod_p(A, p: int) -> np.ndarray:
    return np.asarray(np.asarray(A, dtype=np.int64) % p, dtype=np.int64)


def inv_mod_scalar(a: int, p: int) -> int:
    return pow(int(a) % p, p - 2, p)


def rref_mod(A: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form over GF(p). Returns (R, pivot_cols)."""
    R = mod_p(A, p).copy()
    m, n = R.shape
    pivot_cols: List[int] = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        nonzero = np.nonzero(R[row:, col])[0]
        if nonzero.size == 0:
            continue
        pivot = row + int(nonzero[0])
        if pivot != row:
            R[[row, pivot]] = R[[pivot, row]]
        R[row] = (R[row] * inv_mod_scalar(R[row, col], p)) % p
        # Eliminate the column everywhere else in one vectorised step.
        factors = R[:, col].copy()
        factors[row] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            R[hit] = (R[hit] - np.outer(factors[hit], R[row])) % p
        pivot_cols.append(col)
        row += 1
    return R, pivot_cols


def rank_mod(A: np.ndarray, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    _, pivots = rref_mod(A, p)
    return len(pivots)


def nullspace_mod(A: np.ndarray, p: int) -> np.ndarray:
    """Right null space of A over GF(p); the columns of the result form a basis."""
    A = np.asarray(A, dtype=np.int64)
    m, n = A.shape
    if m == 0:
        return np.eye(n, dtype=np.int64)
    R, pivots = rref_mod(A, p)
    free = [j for j in range(n) if j not in set(pivots)]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for row, pc in enumerate(pivots):
            basis[pc, k] = (-R[row, f]) % p
    return basis


def column_space_contains(big: np.ndarray, small: np.ndarray, p: int) -> bool:
    """True iff every column of `small` lies in the column span of `big`."""
    big = np.asarray(big, dtype=np.int64)
    small = np.asarray(small, dtype=np.int64)
    if small.size == 0 or small.shape[1] == 0:
        return True
    if big.size == 0 or big.shape[1] == 0:
        return rank_mod(small, p) == 0
    return rank_mod(big, p) == rank_mod(np.concatenate([big, small], axis=1), p)


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    return mod_p(A @ B, p)
