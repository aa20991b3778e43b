# src/analysis/dmp.py
"""
Checks of local, general and global discrete maximum principles on a computed solution.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.discretization.assembly import AlgebraicSystem
from src.solver.fixed_point import nonlinear_residual

logger = logging.getLogger(__name__)

Violation = Tuple[int, float, float]


class DmpKind(Enum):
    LOCAL_WEAK = auto()
    LOCAL_STRONG = auto()
    GENERAL = auto()
    GENERAL_STRONG = auto()
    GLOBAL_WEAK = auto()
    GLOBAL_STRONG = auto()


@dataclass
class DmpReport:
    """
    Verdict of one DMP check.

    Each violation is (vertex, value, bound). A report that is not applicable
    (e.g. Q empty, or nonzero row sums for a strong form) has no violations.
    """
    kind: DmpKind
    violations: List[Violation] = field(default_factory=list)
    tolerance: float = 1e-10
    applicable: bool = True
    checked: int = 0
    residual: Optional[float] = None
    note: str = ''

    @property
    def satisfied(self) -> bool:
        return not self.violations

    @property
    def max_violation(self) -> float:
        return max((abs(value - bound) for _, value, bound in self.violations), default=0.0)

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.name,
            'satisfied': self.satisfied,
            'applicable': self.applicable,
            'tolerance': self.tolerance,
            'checked': self.checked,
            'max_violation': self.max_violation,
            'n_violations': len(self.violations),
            'violations': [[int(i), float(v), float(b)] for i, v, b in self.violations[:50]],
            'residual': self.residual,
            'note': self.note
        }


def stencil(A: sp.spmatrix) -> sp.csr_matrix:
    """Boolean matrix of the sets S_i = {j != i : a_ij != 0 or a_ji > 0}"""
    A = sp.csr_matrix(A)
    S = ((A != 0).astype(float) + (A.T > 0).astype(float)).tocsr()
    S.setdiag(0.0)
    S.eliminate_zeros()
    S.sort_indices()
    return S


def shifted_system(system: AlgebraicSystem, s: float) -> AlgebraicSystem:
    """
    The same problem written for u - s: g_i - s sum_j a_ij and u_b - s.

    With constant data u = s solving the PDE the shifted source vanishes up to round-off.
    """
    return AlgebraicSystem(A=system.A, g=system.g - s * system.interior_row_sums,
                           ub=system.ub - s, n_interior=system.n_interior)


def _neighbour_extrema(S: sp.csr_matrix, U: np.ndarray, rows: np.ndarray):
    """Min and max of u over S_i for the given rows; +-inf for empty S_i"""
    lo = np.full(rows.size, np.inf)
    hi = np.full(rows.size, -np.inf)
    sub = S[rows]
    has = np.diff(sub.indptr) > 0
    if has.any():
        vals = U[sub.indices]
        # empty rows are skipped, so consecutive starts still delimit each segment
        starts = sub.indptr[:-1][has]
        hi[has] = np.maximum.reduceat(vals, starts)
        lo[has] = np.minimum.reduceat(vals, starts)
    return lo, hi


def _vanishing_rows(system: AlgebraicSystem, rows: np.ndarray, rowsum_tol: float) -> np.ndarray:
    return np.abs(system.interior_row_sums[rows]) <= rowsum_tol


def _residual(system: AlgebraicSystem, B: Optional[sp.spmatrix], U: np.ndarray) -> Optional[float]:
    return None if B is None else nonlinear_residual(system, B, U)


def check_local_dmp(system: AlgebraicSystem, B: Optional[sp.spmatrix], U: np.ndarray,
                    S: Optional[sp.csr_matrix] = None, strong: bool = False, tol: float = 1e-10,
                    g_tol: float = 1e-12, rowsum_tol: float = 1e-12) -> DmpReport:
    """
    Check u_i <= max_{S_i} u_j^+ where g_i <= 0 and u_i >= min_{S_i} u_j^- where g_i >= 0.

    The strong form drops the positive/negative parts and is only checked on
    rows whose row sums vanish.
    """
    U = np.asarray(U, dtype=float)
    m = system.n_interior
    S = stencil(system.A) if S is None else sp.csr_matrix(S)
    rows = np.arange(m)
    if strong:
        rows = rows[_vanishing_rows(system, rows, rowsum_tol)]
    lo, hi = _neighbour_extrema(S, U, rows)
    if not strong:
        hi = np.maximum(hi, 0.0)
        lo = np.minimum(lo, 0.0)

    u = U[rows]
    g = system.g[rows]
    violations: List[Violation] = []
    upper = (g <= g_tol) & (u > hi + tol)
    lower = (g >= -g_tol) & (u < lo - tol)
    for k in np.flatnonzero(upper | lower):
        violations.append((int(rows[k]), float(u[k]), float(hi[k] if upper[k] else lo[k])))

    kind = DmpKind.LOCAL_STRONG if strong else DmpKind.LOCAL_WEAK
    report = DmpReport(kind=kind, violations=violations, tolerance=tol, applicable=rows.size > 0,
                       checked=int(rows.size), residual=_residual(system, B, U))
    if violations:
        logger.debug(f"{kind.name}: {len(violations)} violations, max {report.max_violation:.3e}")
    return report


def check_general_dmp(system: AlgebraicSystem, B: Optional[sp.spmatrix], U: np.ndarray,
                      R: Iterable[int], S: Optional[sp.csr_matrix] = None, strong: bool = False,
                      tol: float = 1e-10, g_tol: float = 1e-12,
                      rowsum_tol: float = 1e-12) -> DmpReport:
    """
    DMP over an index set R of interior vertices with P = R + union of S_i and Q = P - R.

    If g <= 0 on R, max_R u <= max_Q u^+ (weak) or max_Q u (strong); the
    symmetric statement holds for g >= 0.
    """
    U = np.asarray(U, dtype=float)
    m = system.n_interior
    R = np.unique(np.asarray(list(R), dtype=np.int64))
    if R.size == 0 or R.min() < 0 or R.max() >= m:
        raise ValueError(f"R must be a nonempty subset of the interior indices 0..{m - 1}")
    S = stencil(system.A) if S is None else sp.csr_matrix(S)
    kind = DmpKind.GENERAL_STRONG if strong else DmpKind.GENERAL
    residual = _residual(system, B, U)

    P = np.union1d(R, S[R].indices)
    Q = np.setdiff1d(P, R)
    if Q.size == 0:
        return DmpReport(kind=kind, tolerance=tol, applicable=False, residual=residual,
                         note='Q is empty')
    if strong and not _vanishing_rows(system, R, rowsum_tol).all():
        return DmpReport(kind=kind, tolerance=tol, applicable=False, residual=residual,
                         note='row sums do not vanish on R')

    u_q = U[Q]
    hi = u_q.max() if strong else max(u_q.max(), 0.0)
    lo = u_q.min() if strong else min(u_q.min(), 0.0)
    g = system.g[R]
    u = U[R]
    violations: List[Violation] = []
    if np.all(g <= g_tol):
        violations += [(int(i), float(v), float(hi)) for i, v in zip(R, u) if v > hi + tol]
    if np.all(g >= -g_tol):
        violations += [(int(i), float(v), float(lo)) for i, v in zip(R, u) if v < lo - tol]
    return DmpReport(kind=kind, violations=violations, tolerance=tol, checked=int(R.size),
                     residual=residual)


def check_global_dmp(system: AlgebraicSystem, B: Optional[sp.spmatrix], U: np.ndarray,
                     strong: bool = False, tol: float = 1e-10, g_tol: float = 1e-12,
                     rowsum_tol: float = 1e-12) -> DmpReport:
    """Interior values bounded by boundary extrema (with positive/negative parts in the weak form)"""
    U = np.asarray(U, dtype=float)
    m = system.n_interior
    kind = DmpKind.GLOBAL_STRONG if strong else DmpKind.GLOBAL_WEAK
    residual = _residual(system, B, U)
    if m == 0 or m == system.n_total:
        return DmpReport(kind=kind, tolerance=tol, applicable=False, residual=residual,
                         note='no interior or no boundary vertices')
    if strong and not _vanishing_rows(system, np.arange(m), rowsum_tol).all():
        return DmpReport(kind=kind, tolerance=tol, applicable=False, residual=residual,
                         note='row sums do not vanish')

    ub = U[m:]
    hi = ub.max() if strong else max(ub.max(), 0.0)
    lo = ub.min() if strong else min(ub.min(), 0.0)
    u = U[:m]
    violations: List[Violation] = []
    if np.all(system.g <= g_tol):
        violations += [(int(i), float(u[i]), float(hi)) for i in np.flatnonzero(u > hi + tol)]
    if np.all(system.g >= -g_tol):
        violations += [(int(i), float(u[i]), float(lo)) for i in np.flatnonzero(u < lo - tol)]
    return DmpReport(kind=kind, violations=violations, tolerance=tol, checked=m, residual=residual)
