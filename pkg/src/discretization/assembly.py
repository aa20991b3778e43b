# src/discretization/assembly.py
"""
P1 finite element assembly of the extended N x N Galerkin matrix.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
import scipy.sparse as sp

from src.discretization.quadrature import barycentric, triangle_rule
from src.mesh.generator import Mesh
from src.utils.errors import AssemblyError

logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray, np.ndarray], np.ndarray]
VectorField = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ProblemSpec:
    """
    Data of -eps*Lap(u) + b.grad(u) + c*u = g in the unit square, u = u_b on the boundary.

    Coefficient callables are vectorized over coordinate arrays and may
    return scalars for constant data.
    """
    epsilon: float
    b: VectorField
    c: ScalarField
    g: ScalarField
    u_b: ScalarField
    sigma0: float = 0.0
    name: str = 'problem'

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.sigma0 >= 0:
            raise ValueError(f"sigma0 must be nonnegative, got {self.sigma0}")


@dataclass(frozen=True, eq=False)
class AlgebraicSystem:
    """
    Extended Galerkin matrix with interior right-hand side and Dirichlet data.

    Attributes:
        A: N x N CSR matrix with structurally symmetric pattern, explicit zeros kept
        g: right-hand side for the M interior rows
        ub: Dirichlet values for vertices M..N-1
    """
    A: sp.csr_matrix
    g: np.ndarray
    ub: np.ndarray
    n_interior: int

    @property
    def n_total(self) -> int:
        return self.A.shape[0]

    @property
    def interior_row_sums(self) -> np.ndarray:
        return np.asarray(self.A[:self.n_interior].sum(axis=1)).ravel()

    def with_boundary(self, interior: np.ndarray) -> np.ndarray:
        """Full vector from interior values and the Dirichlet data"""
        return np.concatenate([np.asarray(interior, dtype=float), self.ub])


def _evaluate(name: str, raw, shape: Tuple[int, ...]) -> np.ndarray:
    values = np.broadcast_to(np.asarray(raw, dtype=float), shape)
    bad = ~np.isfinite(values)
    if bad.any():
        triangle = int(np.argwhere(bad)[0][0])
        raise AssemblyError(triangle, f"non-finite {name} coefficient")
    return values


def assemble(mesh: Mesh, problem: ProblemSpec, lump_reaction: bool = False,
             bilinear_degree: int = 2, source_degree: int = 7) -> AlgebraicSystem:
    """
    Assemble a_ij = a_h(phi_j, phi_i) for all i, j, g_i = (g, phi_i) and u_b at the boundary.

    Args:
        mesh: triangulation with interior-first numbering
        problem: coefficient data
        lump_reaction: replace (c u, v) by sum_i (c, phi_i) u_i v_i over interior i
        bilinear_degree: quadrature degree for convection and reaction terms
        source_degree: quadrature degree for (g, phi_i) and lumped (c, phi_i)
    """
    tri = mesh.triangles
    n = mesh.n_total
    m = mesh.n_interior
    x = mesh.vertices[tri, 0]
    y = mesh.vertices[tri, 1]
    det = 2.0 * mesh.signed_areas
    if np.any(det <= 0):
        raise AssemblyError(int(np.argmax(det <= 0)), "non-positive area")

    grads = np.empty(tri.shape + (2,))
    grads[:, 0, 0] = y[:, 1] - y[:, 2]
    grads[:, 0, 1] = x[:, 2] - x[:, 1]
    grads[:, 1, 0] = y[:, 2] - y[:, 0]
    grads[:, 1, 1] = x[:, 0] - x[:, 2]
    grads[:, 2, 0] = y[:, 0] - y[:, 1]
    grads[:, 2, 1] = x[:, 1] - x[:, 0]
    grads /= det[:, None, None]

    local = problem.epsilon * 0.5 * det[:, None, None] * np.einsum('tik,tjk->tij', grads, grads)

    points, weights = triangle_rule(bilinear_degree)
    lam = barycentric(points)
    xq = x @ lam.T
    yq = y @ lam.T
    bx, by = problem.b(xq, yq)
    bx = _evaluate('convection', bx, xq.shape)
    by = _evaluate('convection', by, xq.shape)
    # (b . grad phi_j)(x_q) for each triangle, point and trial index
    b_grad = bx[:, :, None] * grads[:, None, :, 0] + by[:, :, None] * grads[:, None, :, 1]
    local += det[:, None, None] * np.einsum('q,qi,tqj->tij', weights, lam, b_grad)

    src_points, src_weights = triangle_rule(source_degree)
    src_lam = barycentric(src_points)
    xs = x @ src_lam.T
    ys = y @ src_lam.T

    rows = [np.repeat(tri, 3, axis=1).ravel()]
    cols = [np.tile(tri, (1, 3)).ravel()]
    if lump_reaction:
        cs = _evaluate('reaction', problem.c(xs, ys), xs.shape)
        _check_lower_bound(cs, problem.sigma0)
        lumped = np.bincount(tri.ravel(), weights=(det[:, None] * (cs * src_weights) @ src_lam).ravel(),
                             minlength=n)
        rows.append(np.arange(m))
        cols.append(np.arange(m))
        data = [local.ravel(), lumped[:m]]
    else:
        cq = _evaluate('reaction', problem.c(xq, yq), xq.shape)
        _check_lower_bound(cq, problem.sigma0)
        local += det[:, None, None] * np.einsum('q,tq,qi,qj->tij', weights, cq, lam, lam)
        data = [local.ravel()]

    A = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()

    gs = _evaluate('source', problem.g(xs, ys), xs.shape)
    g_local = det[:, None] * ((gs * src_weights) @ src_lam)
    g = np.bincount(tri.ravel(), weights=g_local.ravel(), minlength=n)[:m]

    boundary = mesh.vertices[m:]
    ub = np.broadcast_to(np.asarray(problem.u_b(boundary[:, 0], boundary[:, 1]), dtype=float),
                         (n - m,)).copy()
    if not np.all(np.isfinite(ub)):
        raise ValueError(f"non-finite boundary data for {problem.name}")

    logger.debug(f"Assembled {problem.name}: N={n}, M={m}, nnz={A.nnz}, lumped={lump_reaction}")
    return AlgebraicSystem(A=A, g=g, ub=ub, n_interior=m)


def _check_lower_bound(c: np.ndarray, sigma0: float, tol: float = 1e-14) -> None:
    below = c < sigma0 - tol
    if below.any():
        triangle = int(np.argwhere(below)[0][0])
        raise ValueError(f"reaction coefficient below sigma0={sigma0} on triangle {triangle}")


def interpolate(mesh: Mesh, u: ScalarField) -> np.ndarray:
    """Nodal interpolant of u at all N vertices"""
    v = mesh.vertices
    out = np.broadcast_to(np.asarray(u(v[:, 0], v[:, 1]), dtype=float), (mesh.n_total,))
    return out.copy()
