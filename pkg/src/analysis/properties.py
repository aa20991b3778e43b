# src/analysis/properties.py
"""
Probes for the structural properties of A and B(U) that the maximum
principles rely on. They report what they find and never raise on failure.
"""
import logging
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.stabilization import PairPattern, muas_beta

logger = logging.getLogger(__name__)


def _sorted(A: sp.spmatrix) -> sp.csr_matrix:
    A = sp.csr_matrix(A)
    return A if A.has_sorted_indices else A.sorted_indices()


def _entries_on(pattern: PairPattern, M: sp.spmatrix) -> np.ndarray:
    """Values of M at the stored positions of the pattern"""
    return np.asarray(sp.csr_matrix(M)[pattern.row, pattern.col]).ravel()


def assumption_min_violations(A: sp.spmatrix, n_interior: int) -> np.ndarray:
    """Pairs (i, j), i < M, j != i, with min(a_ij, a_ji) > 0"""
    A = _sorted(A)
    pattern = PairPattern.from_matrix(A)
    a = A.data
    bad = pattern.off & (pattern.row < n_interior) & (np.minimum(a, a[pattern.transpose]) > 0)
    return np.stack([pattern.row[bad], pattern.col[bad]], axis=1)


def check_b_axioms(B: sp.spmatrix, A: sp.spmatrix, tol: float = 1e-12) -> Dict[str, float]:
    """
    Largest deviations from the axioms on B: symmetry, nonpositive
    off-diagonals, zero row sums and entries outside the stencil of A.
    """
    B = sp.csr_matrix(B)
    A = sp.csr_matrix(A)
    asym = abs(B - B.T)
    off = B - sp.diags(B.diagonal())
    row_sums = np.asarray(B.sum(axis=1)).ravel()
    # off-diagonal entries of B where neither a_ij != 0 nor a_ji > 0
    allowed = ((A != 0).astype(float) + (A.T > 0).astype(float)).tocsr()
    outside = abs(off) - abs(off).multiply(allowed > 0)
    result = {
        'symmetry': float(asym.max()) if asym.nnz else 0.0,
        'positive_offdiagonal': float(max(off.max(), 0.0)) if off.nnz else 0.0,
        'row_sum': float(np.abs(row_sums).max()) if row_sums.size else 0.0,
        'outside_stencil': float(outside.max()) if outside.nnz else 0.0
    }
    result['satisfied'] = all(v <= tol for v in result.values())
    return result


def psd_identity(B: sp.spmatrix, V: np.ndarray) -> Tuple[float, float]:
    """
    Both sides of sum_ij v_i b_ij (v_j - v_i) = -1/2 sum_ij b_ij (v_j - v_i)^2.
    """
    coo = sp.coo_matrix(B)
    V = np.asarray(V, dtype=float)
    diff = V[coo.col] - V[coo.row]
    lhs = float(np.sum(V[coo.row] * coo.data * diff))
    rhs = float(-0.5 * np.sum(coo.data * diff ** 2))
    return lhs, rhs


def a2_violations(A: sp.spmatrix, B: sp.spmatrix, U: np.ndarray, n_interior: int,
                  tol: float = 1e-14) -> np.ndarray:
    """
    Pairs (i, j), j in S_i, with a_ij + b_ij > 0 at interior vertices i that
    are strict local extrema of U over S_i.
    """
    A = _sorted(A)
    pattern = PairPattern.from_matrix(A)
    a = A.data
    b = _entries_on(pattern, B)
    U = np.asarray(U, dtype=float)
    n = pattern.shape[0]
    in_s = pattern.off & ((a != 0) | (a[pattern.transpose] > 0))
    du = U[pattern.row] - U[pattern.col]

    size = np.bincount(pattern.row, weights=in_s, minlength=n)
    not_below = np.bincount(pattern.row, weights=in_s & (du <= 0), minlength=n)
    not_above = np.bincount(pattern.row, weights=in_s & (du >= 0), minlength=n)
    extremum = (size > 0) & ((not_below == 0) | (not_above == 0))
    extremum[n_interior:] = False

    bad = in_s & extremum[pattern.row] & (a + b > tol)
    return np.stack([pattern.row[bad], pattern.col[bad]], axis=1)


def crude_bound_violations(A: sp.spmatrix, B: sp.spmatrix, tol: float = 1e-14) -> np.ndarray:
    """Pairs with |b_ij| > max(|a_ij|, |a_ji|)"""
    A = _sorted(A)
    pattern = PairPattern.from_matrix(A)
    a = np.abs(A.data)
    b = _entries_on(pattern, B)
    bad = pattern.off & (np.abs(b) > np.maximum(a, a[pattern.transpose]) + tol)
    return np.stack([pattern.row[bad], pattern.col[bad]], axis=1)


def a1_continuity_sweep(A: sp.spmatrix, U: np.ndarray, n_interior: int,
                        deltas: Iterable[float] = (1e-2, 1e-4, 1e-6, 1e-8),
                        rng: Optional[np.random.Generator] = None, q_variant: bool = False) -> float:
    """
    Largest observed |phi(U + delta) - phi(U)| / ||delta||_inf with
    phi_ij(U) = beta_ij(U) (u_j - u_i), over pairs with a_ij > 0 and u_i = u_j.

    The value stays bounded (by 2) when the MUAS limiter is Lipschitz at such points.
    """
    rng = rng or np.random.default_rng(0)
    A = _sorted(A)
    pattern = PairPattern.from_matrix(A)
    U = np.asarray(U, dtype=float)
    pairs = pattern.off & (A.data > 0) & (U[pattern.row] == U[pattern.col])
    if not pairs.any():
        return 0.0

    def phi(V):
        beta = muas_beta(A, V, n_interior, q_variant=q_variant, pattern=pattern).data
        return beta * (V[pattern.col] - V[pattern.row])

    base = phi(U)[pairs]
    worst = 0.0
    for t in deltas:
        delta = t * rng.uniform(-1.0, 1.0, U.size)
        size = np.abs(delta).max()
        if size == 0:
            continue
        ratio = np.abs(phi(U + delta)[pairs] - base).max() / size
        worst = max(worst, float(ratio))
    logger.debug(f"continuity sweep over {int(pairs.sum())} pairs: max ratio {worst:.3e}")
    return worst
