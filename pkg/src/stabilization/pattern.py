# src/stabilization/pattern.py
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class PairPattern:
    """
    Index bookkeeping for a structurally symmetric CSR pattern.

    For every stored entry k = (row[k], col[k]), transpose[k] is the position
    of the entry (col[k], row[k]).
    """
    indptr: np.ndarray
    indices: np.ndarray
    row: np.ndarray
    transpose: np.ndarray
    diagonal: np.ndarray
    shape: tuple

    @property
    def col(self) -> np.ndarray:
        return self.indices

    @property
    def off(self) -> np.ndarray:
        return self.row != self.indices

    @classmethod
    def from_matrix(cls, A: sp.csr_matrix) -> 'PairPattern':
        A = sp.csr_matrix(A)
        if not A.has_sorted_indices:
            A = A.sorted_indices()
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"matrix must be square, got shape {A.shape}")
        row = np.repeat(np.arange(n, dtype=np.int64), np.diff(A.indptr))
        col = A.indices.astype(np.int64)
        keys = row * n + col
        transpose = np.searchsorted(keys, col * n + row)
        transpose = np.minimum(transpose, keys.size - 1)
        if not np.array_equal(keys[transpose], col * n + row):
            raise ValueError("matrix pattern is not structurally symmetric")
        diag_pos = np.flatnonzero(row == col)
        if diag_pos.size != n:
            raise ValueError("every row must store its diagonal entry")
        return cls(indptr=A.indptr.copy(), indices=A.indices.copy(), row=row, transpose=transpose,
                   diagonal=diag_pos, shape=A.shape)

    def matrix(self, data: np.ndarray) -> sp.csr_matrix:
        """CSR matrix on this pattern; explicit zeros are kept"""
        return sp.csr_matrix((data, self.indices, self.indptr), shape=self.shape)

    def row_sums(self, data: np.ndarray) -> np.ndarray:
        return np.bincount(self.row, weights=data, minlength=self.shape[0])

    def with_zero_row_sums(self, off_data: np.ndarray) -> sp.csr_matrix:
        """Matrix with the given off-diagonal values and diagonal set to minus their row sums"""
        data = np.where(self.off, off_data, 0.0)
        data[self.diagonal] = -self.row_sums(data)
        return self.matrix(data)
