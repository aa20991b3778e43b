# src/stabilization/limiters.py
"""
Artificial diffusion matrices D, B_AFC(U) and B_MUAS(U).

All operations work on the stored entries of the extended matrix A, so every
matrix returned here shares A's pattern and keeps explicit zeros.
"""
import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.stabilization.pattern import PairPattern
from src.stabilization.schemes import StabScheme

logger = logging.getLogger(__name__)


def _ratio(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """min(1, q/p), and 1 where p vanishes"""
    r = np.ones_like(p)
    nz = p != 0
    r[nz] = np.minimum(1.0, q[nz] / p[nz])
    return r


def _pattern(A: sp.csr_matrix, pattern: Optional[PairPattern]) -> PairPattern:
    return pattern if pattern is not None else PairPattern.from_matrix(A)


def _aligned(A: sp.csr_matrix, pattern: PairPattern) -> np.ndarray:
    """Stored values of A in pattern order"""
    A = sp.csr_matrix(A)
    if not A.has_sorted_indices:
        A = A.sorted_indices()
    if A.nnz != pattern.indices.size or not np.array_equal(A.indptr, pattern.indptr):
        raise ValueError("matrix does not share the stored pattern")
    return A.data


def compute_D(A: sp.csr_matrix, pattern: Optional[PairPattern] = None) -> sp.csr_matrix:
    """d_ij = -max(a_ij, 0, a_ji) for i != j, d_ii = -sum_{j != i} d_ij"""
    pattern = _pattern(A, pattern)
    a = _aligned(A, pattern)
    d = -np.maximum(np.maximum(a, 0.0), a[pattern.transpose])
    return pattern.with_zero_row_sums(d)


def kuzmin_alpha(A: sp.csr_matrix, D: sp.csr_matrix, U: np.ndarray, n_interior: int,
                 pattern: Optional[PairPattern] = None) -> sp.csr_matrix:
    """
    Symmetric limiter values alpha_ij in [0, 1] on A's pattern.

    The value of a pair is taken from the row whose entry a_ij is larger;
    for a_ij == a_ji the row with the smaller index wins.
    """
    pattern = _pattern(A, pattern)
    a = _aligned(A, pattern)
    d = _aligned(D, pattern)
    tr = pattern.transpose
    row, col, off = pattern.row, pattern.col, pattern.off
    n = pattern.shape[0]
    U = np.asarray(U, dtype=float)

    f = np.where(off, d * (U[col] - U[row]), 0.0)
    f_plus = np.maximum(f, 0.0)
    f_minus = np.minimum(f, 0.0)
    upwind = off & (a[tr] <= a)

    p_plus = np.bincount(row, weights=np.where(upwind, f_plus, 0.0), minlength=n)
    p_minus = np.bincount(row, weights=np.where(upwind, f_minus, 0.0), minlength=n)
    q_plus = -np.bincount(row, weights=f_minus, minlength=n)
    q_minus = -np.bincount(row, weights=f_plus, minlength=n)

    r_plus = _ratio(q_plus, p_plus)
    r_minus = _ratio(q_minus, p_minus)
    r_plus[n_interior:] = 1.0
    r_minus[n_interior:] = 1.0

    alpha_row = np.where(f > 0, r_plus[row], np.where(f < 0, r_minus[row], 1.0))
    own = (a > a[tr]) | ((a == a[tr]) & (row < col))
    alpha = np.where(own, alpha_row, alpha_row[tr])
    alpha[~off] = 1.0

    # tied pairs whose rows disagree on alpha
    ties = off & (a == a[tr]) & (d != 0) & (row < col) & (alpha_row != alpha_row[tr])
    if ties.any():
        logger.warning(f"{int(ties.sum())} limiter pairs with a_ij == a_ji resolved by row index")
    return pattern.matrix(alpha)


def afc_B(A: sp.csr_matrix, D: sp.csr_matrix, alpha: sp.csr_matrix,
          pattern: Optional[PairPattern] = None) -> sp.csr_matrix:
    """b_ij = (1 - alpha_ij) d_ij for i != j, zero row sums"""
    pattern = _pattern(A, pattern)
    d = _aligned(D, pattern)
    al = _aligned(alpha, pattern)
    return pattern.with_zero_row_sums((1.0 - al) * d)


def muas_beta(A: sp.csr_matrix, U: np.ndarray, n_interior: int, q_variant: bool = False,
              pattern: Optional[PairPattern] = None) -> sp.csr_matrix:
    """
    Row-oriented MUAS limiter values beta_ij in [0, 1] on A's pattern.

    Args:
        q_variant: use |d_ij| instead of max(|a_ij|, a_ji) as weights of Q_i
    """
    pattern = _pattern(A, pattern)
    a = _aligned(A, pattern)
    tr = pattern.transpose
    row, col, off = pattern.row, pattern.col, pattern.off
    n = pattern.shape[0]
    U = np.asarray(U, dtype=float)

    du = np.where(off, U[row] - U[col], 0.0)
    du_plus = np.maximum(du, 0.0)
    du_minus = np.minimum(du, 0.0)
    downwind = off & (a > 0)

    p_plus = np.bincount(row, weights=np.where(downwind, a * du_plus, 0.0), minlength=n)
    p_minus = np.bincount(row, weights=np.where(downwind, a * du_minus, 0.0), minlength=n)

    if q_variant:
        q = np.maximum(np.maximum(a, 0.0), a[tr])
    else:
        q = np.maximum(np.abs(a), a[tr])
    q = np.where(off, q, 0.0)
    # (u_j - u_i)^+ = -(u_i - u_j)^-
    q_plus = np.bincount(row, weights=q * -du_minus, minlength=n)
    q_minus = np.bincount(row, weights=q * -du_plus, minlength=n)

    r_plus = _ratio(q_plus, p_plus)
    r_minus = _ratio(q_minus, p_minus)
    r_plus[n_interior:] = 1.0
    r_minus[n_interior:] = 1.0

    beta = np.where(du > 0, 1.0 - r_plus[row], np.where(du < 0, 1.0 - r_minus[row], 0.0))
    beta[~off] = 0.0
    return pattern.matrix(beta)


def muas_B(A: sp.csr_matrix, beta: sp.csr_matrix,
           pattern: Optional[PairPattern] = None) -> sp.csr_matrix:
    """b_ij = -max(beta_ij a_ij, 0, beta_ji a_ji) for i != j, zero row sums"""
    pattern = _pattern(A, pattern)
    a = _aligned(A, pattern)
    be = _aligned(beta, pattern)
    ba = be * a
    return pattern.with_zero_row_sums(-np.maximum(np.maximum(ba, 0.0), ba[pattern.transpose]))


class Stabilizer:
    """
    Builds B(U) for one scheme and one extended matrix.

    The pair pattern and D are computed once and reused for every call.
    """

    def __init__(self, A: sp.csr_matrix, n_interior: int, scheme: StabScheme):
        self.A = A
        self.n_interior = n_interior
        self.scheme = scheme
        self.pattern = PairPattern.from_matrix(A)
        self._D: Optional[sp.csr_matrix] = None
        self._zero: Optional[sp.csr_matrix] = None

    @property
    def D(self) -> sp.csr_matrix:
        if self._D is None:
            self._D = compute_D(self.A, self.pattern)
        return self._D

    def __call__(self, U: Optional[np.ndarray] = None) -> sp.csr_matrix:
        return self.matrix(U)

    def matrix(self, U: Optional[np.ndarray] = None) -> sp.csr_matrix:
        """B(U); U may be omitted for linear schemes"""
        if self.scheme is StabScheme.GALERKIN:
            if self._zero is None:
                self._zero = self.pattern.matrix(np.zeros(self.pattern.indices.size))
            return self._zero
        if self.scheme is StabScheme.UPWIND_D:
            return self.D
        if U is None:
            raise ValueError(f"{self.scheme.name} requires a solution vector")
        U = np.asarray(U, dtype=float)
        if U.shape != (self.pattern.shape[0],):
            raise ValueError(f"solution vector must have length {self.pattern.shape[0]}, got {U.shape}")
        if self.scheme is StabScheme.AFC_KUZMIN:
            alpha = kuzmin_alpha(self.A, self.D, U, self.n_interior, self.pattern)
            return afc_B(self.A, self.D, alpha, self.pattern)
        beta = muas_beta(self.A, U, self.n_interior, q_variant=self.scheme is StabScheme.MUAS_DQ,
                         pattern=self.pattern)
        return muas_B(self.A, beta, self.pattern)
