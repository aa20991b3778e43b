import numpy as np
import pytest
import scipy.sparse as sp

from src.discretization.assembly import AlgebraicSystem, ProblemSpec
from src.mesh.generator import MeshFamily, MeshKind, generate_mesh


def full_pattern(dense) -> sp.csr_matrix:
    """
    CSR matrix storing every (i, j) with a_ij != 0 or a_ji != 0, plus the diagonal.

    Zeros inside that pattern are stored explicitly.
    """
    dense = np.asarray(dense, dtype=float)
    n = dense.shape[0]
    mask = (dense != 0) | (dense.T != 0) | np.eye(n, dtype=bool)
    rows, cols = np.nonzero(mask)
    indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=n))])
    return sp.csr_matrix((dense[rows, cols], cols, indptr), shape=(n, n))


def random_matrix(rng: np.random.Generator, n: int, density: float = 0.3) -> np.ndarray:
    """Dense matrix with a random symmetric sparsity pattern and random signs off the diagonal"""
    mask = np.triu(rng.random((n, n)) < density, 1)
    mask = mask | mask.T
    dense = np.where(mask, rng.normal(size=(n, n)), 0.0)
    dense[np.diag_indices(n)] = np.abs(dense).sum(axis=1) + 1.0
    return dense


def laplace_problem(u_b=None) -> ProblemSpec:
    def zero(x, y):
        return np.zeros_like(x)

    return ProblemSpec(epsilon=1.0, b=lambda x, y: (0.0, 0.0), c=zero, g=zero,
                       u_b=u_b or zero, name='laplace')


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def left_mesh():
    return generate_mesh(MeshFamily(MeshKind.LEFT_DIAG), 4)


@pytest.fixture
def shifted_mesh():
    return generate_mesh(MeshFamily(MeshKind.SHIFTED, 0.5), 4)


@pytest.fixture
def one_node_system():
    """Single interior unknown coupled to two boundary vertices"""
    A = full_pattern([[4.0, 1.0, -4.0],
                      [-2.0, 2.0, 0.0],
                      [-4.0, 0.0, 4.0]])
    return AlgebraicSystem(A=A, g=np.array([1.0]), ub=np.array([0.0, 1.0]), n_interior=1)
