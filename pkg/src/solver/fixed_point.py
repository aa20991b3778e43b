# src/solver/fixed_point.py
"""
Damped fixed-point iteration for sum_j (a_ij + b_ij(U)) u_j = g_i, i < M, u_i = u_b,i otherwise.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.discretization.assembly import AlgebraicSystem
from src.stabilization import StabScheme, Stabilizer
from src.utils.errors import LinearSolveError

logger = logging.getLogger(__name__)


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 10000
    damping: float = 1.0
    damping_floor: float = 1.0 / 64
    linear_tol: float = 1e-13

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not 0 < self.tol < 1:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if not 0 < self.damping_floor <= self.damping:
            raise ValueError(f"damping_floor must lie in (0, damping], got {self.damping_floor}")
        if not self.linear_tol > 0:
            raise ValueError(f"linear_tol must be positive, got {self.linear_tol}")


@dataclass
class SolveResult:
    """
    Outcome of a nonlinear solve.

    B holds B(U) at the returned U, so the residual can be recomputed without rebuilding it.
    """
    U: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    scheme: StabScheme
    B: sp.csr_matrix
    tolerance: float
    damping_history: List[float] = field(default_factory=list)
    residual_history: List[float] = field(default_factory=list)
    rejected_steps: int = 0

    def summary(self) -> dict:
        return {
            'scheme': self.scheme.cli_name,
            'iterations': self.iterations,
            'final_residual': self.final_residual,
            'converged': self.converged,
            'tolerance': self.tolerance,
            'rejected_steps': self.rejected_steps,
            'final_damping': self.damping_history[-1] if self.damping_history else None
        }


def linear_solve(matrix: sp.spmatrix, rhs: np.ndarray, linear_tol: float = 1e-13) -> np.ndarray:
    """
    Sparse LU solve with one step of iterative refinement.

    The relative residual is measured as ||b - Kx|| / (||K|| ||x|| + ||b||) in the max norm.
    """
    K = sp.csc_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n) or rhs.shape != (n,):
        raise ValueError(f"incompatible shapes: matrix {K.shape}, rhs {rhs.shape}")
    if n == 0:
        return np.zeros(0)

    row_norms = np.asarray(abs(K).sum(axis=1)).ravel()
    if np.any(row_norms == 0):
        row = int(np.argmax(row_norms == 0))
        raise LinearSolveError(row, "zero row in system matrix")

    try:
        lu = splu(K)
    except RuntimeError as e:
        row = int(np.argmin(np.abs(K.diagonal())))
        raise LinearSolveError(row, f"factorization failed: {e}") from e

    x = lu.solve(rhs)
    x += lu.solve(rhs - K @ x)
    if not np.all(np.isfinite(x)):
        row = int(np.argmax(~np.isfinite(x)))
        raise LinearSolveError(row, "non-finite solution")

    residual = np.linalg.norm(rhs - K @ x, np.inf)
    scale = row_norms.max() * np.linalg.norm(x, np.inf) + np.linalg.norm(rhs, np.inf)
    if scale > 0 and residual / scale > linear_tol:
        logger.warning(f"Linear residual {residual / scale:.3e} above tolerance {linear_tol:.1e}")
    return x


def nonlinear_residual(system: AlgebraicSystem, B: sp.spmatrix, U: np.ndarray) -> float:
    """max_i |g_i - sum_j (a_ij + b_ij) u_j| over interior rows"""
    m = system.n_interior
    r = system.g - (system.A[:m] + B[:m]) @ U
    return float(np.linalg.norm(r, np.inf)) if m else 0.0


def fixed_point_step(system: AlgebraicSystem, scheme: StabScheme, U_k: np.ndarray, omega: float,
                     stabilizer: Optional[Stabilizer] = None, B: Optional[sp.spmatrix] = None,
                     linear_tol: float = 1e-13) -> np.ndarray:
    """
    U_k + omega (U_hat - U_k) where (A + B(U_k)) U_hat = g on interior rows and U_hat = u_b elsewhere.

    B may be passed when B(U_k) is already known.
    """
    if not 0 <= omega <= 1:
        raise ValueError(f"omega must lie in [0, 1], got {omega}")
    m = system.n_interior
    U_k = np.asarray(U_k, dtype=float)
    if B is None:
        if stabilizer is None:
            stabilizer = Stabilizer(system.A, m, scheme)
        B = stabilizer(U_k) if not scheme.is_linear else stabilizer.matrix()

    K = (system.A + B).tocsr()
    rhs = system.g - K[:m, m:] @ system.ub
    interior = linear_solve(K[:m, :m], rhs, linear_tol)

    U_next = U_k + omega * (system.with_boundary(interior) - U_k)
    U_next[m:] = system.ub
    return U_next


def solve(system: AlgebraicSystem, scheme: StabScheme,
          opts: Optional[SolverOptions] = None) -> SolveResult:
    """
    Solve the stabilized problem for one scheme.

    Nonlinear schemes start from the UPWIND_D solution; that solve is not
    counted. A step that increases the residual is rejected and the damping
    halved, unless the damping already sits at its floor.
    """
    opts = opts or SolverOptions()
    opts.validate()
    m = system.n_interior
    target = opts.tol * max(1.0, float(np.linalg.norm(system.g, np.inf)) if m else 1.0)
    stabilizer = Stabilizer(system.A, m, scheme)
    start = system.with_boundary(np.zeros(m))

    if scheme.is_linear:
        B = stabilizer.matrix()
        U = fixed_point_step(system, scheme, start, 1.0, B=B, linear_tol=opts.linear_tol)
        res = nonlinear_residual(system, B, U)
        converged = res <= target
        if not converged:
            logger.warning(f"{scheme.name}: linear solve left residual {res:.3e} > {target:.3e}")
        return SolveResult(U=U, iterations=1, final_residual=res, converged=converged, scheme=scheme,
                           B=B, tolerance=target, damping_history=[1.0], residual_history=[res])

    U = fixed_point_step(system, StabScheme.UPWIND_D, start, 1.0, B=stabilizer.D,
                         linear_tol=opts.linear_tol)
    B = stabilizer(U)
    res = nonlinear_residual(system, B, U)
    omega = opts.damping
    iterations = 0
    rejected = 0
    decreases = 0
    damping_history: List[float] = []
    residual_history = [res]

    while res > target and iterations < opts.max_iter:
        U_trial = fixed_point_step(system, scheme, U, omega, B=B, linear_tol=opts.linear_tol)
        B_trial = stabilizer(U_trial)
        res_trial = nonlinear_residual(system, B_trial, U_trial)
        iterations += 1
        damping_history.append(omega)

        if res_trial > res and omega > opts.damping_floor:
            omega = max(0.5 * omega, opts.damping_floor)
            decreases = 0
            rejected += 1
            logger.debug(f"iter {iterations}: residual {res_trial:.3e} rejected, omega -> {omega}")
            continue

        decreases = decreases + 1 if res_trial < res else 0
        U, B, res = U_trial, B_trial, res_trial
        residual_history.append(res)
        if decreases == 3:
            omega = min(1.0, 2.0 * omega)
            decreases = 0
        logger.debug(f"iter {iterations}: residual {res:.3e}, omega {omega}")

    converged = res <= target
    if converged:
        logger.info(f"{scheme.name} converged in {iterations} iterations, residual {res:.3e}")
    else:
        logger.warning(f"{scheme.name} did not converge after {iterations} iterations, "
                       f"residual {res:.3e} > {target:.3e}")
    return SolveResult(U=U, iterations=iterations, final_residual=res, converged=converged,
                       scheme=scheme, B=B, tolerance=target, damping_history=damping_history,
                       residual_history=residual_history, rejected_steps=rejected)
