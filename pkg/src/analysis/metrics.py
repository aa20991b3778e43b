# src/analysis/metrics.py
import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.discretization.assembly import AlgebraicSystem, interpolate
from src.discretization.quadrature import MAX_DEGREE, barycentric, triangle_rule
from src.mesh.generator import Mesh
from src.stabilization import StabScheme, Stabilizer

logger = logging.getLogger(__name__)

GradientField = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ErrorTableRow:
    """
    One line of a convergence table.

    Orders are log2 ratios against the previous row and stay None on the first row.
    """
    ne: int
    err_l2: float
    err_h1: float
    err_h: float
    ord_l2: Optional[float] = None
    ord_h1: Optional[float] = None
    ord_h: Optional[float] = None
    iterations: int = 0
    converged: bool = True

    def as_record(self) -> dict:
        """Row formatted for the CSV table, orders rounded to two decimals"""
        def fmt(order):
            return '' if order is None else f"{order:.2f}"

        return {
            'ne': self.ne,
            'err_l2': f"{self.err_l2:.3e}",
            'ord_l2': fmt(self.ord_l2),
            'err_h1': f"{self.err_h1:.3e}",
            'ord_h1': fmt(self.ord_h1),
            'err_h': f"{self.err_h:.3e}",
            'ord_h': fmt(self.ord_h),
            'iters': self.iterations,
            'converged': str(self.converged).lower()
        }


def _element_gradients(mesh: Mesh) -> Tuple[np.ndarray, np.ndarray]:
    tri = mesh.triangles
    x = mesh.vertices[tri, 0]
    y = mesh.vertices[tri, 1]
    det = 2.0 * mesh.signed_areas
    grads = np.stack([
        np.stack([y[:, 1] - y[:, 2], x[:, 2] - x[:, 1]], axis=1),
        np.stack([y[:, 2] - y[:, 0], x[:, 0] - x[:, 2]], axis=1),
        np.stack([y[:, 0] - y[:, 1], x[:, 1] - x[:, 0]], axis=1)
    ], axis=1) / det[:, None, None]
    return grads, det


def error_norms(mesh: Mesh, u_exact: Callable, grad_u_exact: GradientField, U: np.ndarray,
                B: Optional[sp.spmatrix], epsilon: float, sigma0: float,
                degree: int = MAX_DEGREE, chunk: int = 8192) -> Tuple[float, float, float]:
    """
    L2 norm, H1 seminorm and h-norm of u - u_h.

    The h-norm is sqrt(eps |u - u_h|_1^2 + sigma0 ||u - u_h||_0^2 + e^T B e)
    with e the nodal vector of i_h u - u_h.
    """
    U = np.asarray(U, dtype=float)
    points, weights = triangle_rule(degree)
    lam = barycentric(points)
    grads, det = _element_gradients(mesh)

    l2_sq = 0.0
    h1_sq = 0.0
    for start in range(0, mesh.n_triangles, chunk):
        tri = mesh.triangles[start:start + chunk]
        xq = mesh.vertices[tri, 0] @ lam.T
        yq = mesh.vertices[tri, 1] @ lam.T
        w = det[start:start + chunk, None] * weights

        diff = np.broadcast_to(u_exact(xq, yq), xq.shape) - U[tri] @ lam.T
        l2_sq += float(np.sum(w * diff ** 2))

        grad_h = np.einsum('ti,tik->tk', U[tri], grads[start:start + chunk])
        ux, uy = grad_u_exact(xq, yq)
        ex = np.broadcast_to(ux, xq.shape) - grad_h[:, 0:1]
        ey = np.broadcast_to(uy, xq.shape) - grad_h[:, 1:2]
        h1_sq += float(np.sum(w * (ex ** 2 + ey ** 2)))

    b_term = 0.0
    if B is not None:
        e = interpolate(mesh, u_exact) - U
        b_term = float(e @ (B @ e))
        if b_term < 0:
            # B is positive semidefinite; only round-off makes this negative
            b_term = 0.0
    h_sq = epsilon * h1_sq + sigma0 * l2_sq + b_term
    return float(np.sqrt(l2_sq)), float(np.sqrt(h1_sq)), float(np.sqrt(h_sq))


def _order(prev: float, curr: float) -> float:
    if prev == curr:
        return 0.0
    if prev <= 0 or curr <= 0:
        return float('nan')
    return float(np.log2(prev / curr))


def convergence_orders(rows: Sequence[ErrorTableRow]) -> List[ErrorTableRow]:
    """Rows with orders filled in; ne must double between consecutive rows"""
    rows = list(rows)
    for prev, curr in zip(rows, rows[1:]):
        if curr.ne != 2 * prev.ne:
            raise ValueError(f"ne must double between rows, got {prev.ne} -> {curr.ne}")

    out = [replace(rows[0], ord_l2=None, ord_h1=None, ord_h=None)] if rows else []
    for prev, curr in zip(rows, rows[1:]):
        out.append(replace(curr,
                           ord_l2=_order(prev.err_l2, curr.err_l2),
                           ord_h1=_order(prev.err_h1, curr.err_h1),
                           ord_h=_order(prev.err_h, curr.err_h)))
    return out


def linearity_preservation_probe(system: AlgebraicSystem, mesh: Mesh, scheme: StabScheme,
                                 coefficients: Sequence[float]) -> float:
    """max |b_ij(U)| for U the nodal values of c0 + c1 x + c2 y"""
    c0, c1, c2 = coefficients
    U = c0 + c1 * mesh.vertices[:, 0] + c2 * mesh.vertices[:, 1]
    B = Stabilizer(system.A, system.n_interior, scheme)(U)
    value = float(np.max(np.abs(B.data))) if B.nnz else 0.0
    logger.debug(f"{scheme.name} linearity probe {tuple(coefficients)}: max |b_ij| = {value:.3e}")
    return value
