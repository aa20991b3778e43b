import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from src.analysis.properties import assumption_min_violations
from src.discretization.assembly import ProblemSpec, assemble, interpolate
from src.experiments.examples import reaction_problem, smooth_problem, smooth_solution
from src.mesh.generator import MeshFamily, MeshKind, generate_mesh
from src.utils.errors import AssemblyError
from tests.conftest import laplace_problem


def _vertex(mesh, x, y):
    hits = np.flatnonzero(np.isclose(mesh.vertices[:, 0], x) & np.isclose(mesh.vertices[:, 1], y))
    assert hits.size == 1
    return int(hits[0])


def _constant_problem(epsilon=1.0, b=(3.0, 2.0), c=1.0, g=1.0):
    return ProblemSpec(epsilon=epsilon, b=lambda x, y: b, c=lambda x, y: np.full(np.shape(x), c),
                       g=lambda x, y: np.full(np.shape(x), g), u_b=lambda x, y: np.zeros_like(x))


class TestStiffness:
    def test_laplace_stencil_on_left_mesh(self, left_mesh):
        A = assemble(left_mesh, laplace_problem()).A.toarray()
        i = _vertex(left_mesh, 0.5, 0.5)
        assert A[i, i] == pytest.approx(4.0)
        for dx, dy in ((0.25, 0), (-0.25, 0), (0, 0.25), (0, -0.25)):
            assert A[i, _vertex(left_mesh, 0.5 + dx, 0.5 + dy)] == pytest.approx(-1.0)
        for dx, dy in ((0.25, 0.25), (-0.25, -0.25)):
            assert A[i, _vertex(left_mesh, 0.5 + dx, 0.5 + dy)] == pytest.approx(0.0, abs=1e-14)

    def test_matrix_is_extended_to_boundary_rows(self, left_mesh):
        system = assemble(left_mesh, laplace_problem())
        assert system.A.shape == (left_mesh.n_total, left_mesh.n_total)
        corner = _vertex(left_mesh, 0.0, 0.0)
        assert system.A[corner, corner] > 0

    def test_pattern_is_structurally_symmetric(self, shifted_mesh):
        A = assemble(shifted_mesh, _constant_problem()).A
        pattern = A.copy()
        pattern.data[:] = 1
        assert (pattern - pattern.T).nnz == 0
        assert A.has_sorted_indices


class TestRowSums:
    @pytest.mark.parametrize('family', [MeshFamily(MeshKind.LEFT_DIAG), MeshFamily(MeshKind.SHIFTED, 0.5)])
    def test_zero_row_sums_without_reaction(self, family):
        mesh = generate_mesh(family, 5)
        system = assemble(mesh, _constant_problem(epsilon=0.1, c=0.0))
        np.testing.assert_allclose(system.interior_row_sums, 0.0, atol=1e-13)

    def test_nonnegative_row_sums_with_reaction(self, shifted_mesh):
        system = assemble(shifted_mesh, _constant_problem())
        assert np.all(system.interior_row_sums >= -1e-14)


class TestConvection:
    def test_skew_symmetric_between_interior_vertices(self, shifted_mesh):
        m = shifted_mesh.n_interior
        full = assemble(shifted_mesh, _constant_problem(c=0.0)).A.toarray()
        diffusion = assemble(shifted_mesh, _constant_problem(b=(0.0, 0.0), c=0.0)).A.toarray()
        C = (full - diffusion)[:m, :m]
        np.testing.assert_allclose(C, -C.T, atol=1e-13)

    def test_interior_block_is_positive_definite(self, shifted_mesh, rng):
        m = shifted_mesh.n_interior
        A = assemble(shifted_mesh, smooth_problem()).A[:m, :m]
        for _ in range(10):
            v = rng.normal(size=m)
            assert v @ (A @ v) > 0


class TestReaction:
    def test_lumping_without_reaction_changes_nothing(self, shifted_mesh):
        problem = _constant_problem(c=0.0)
        consistent = assemble(shifted_mesh, problem).A
        lumped = assemble(shifted_mesh, problem, lump_reaction=True).A
        assert abs(consistent - lumped).max() == pytest.approx(0.0, abs=1e-15)

    def test_lumping_preserves_interior_row_sums(self, shifted_mesh):
        problem = _constant_problem(epsilon=0.01)
        consistent = assemble(shifted_mesh, problem)
        lumped = assemble(shifted_mesh, problem, lump_reaction=True)
        np.testing.assert_allclose(lumped.interior_row_sums, consistent.interior_row_sums, atol=1e-14)

    def test_lumped_reaction_only_on_diagonal(self, shifted_mesh):
        m = shifted_mesh.n_interior
        no_reaction = assemble(shifted_mesh, _constant_problem(c=0.0)).A.toarray()
        lumped = assemble(shifted_mesh, _constant_problem(), lump_reaction=True).A.toarray()
        diff = lumped - no_reaction
        np.testing.assert_allclose(diff - np.diag(np.diag(diff)), 0.0, atol=1e-15)
        assert np.all(np.diag(diff)[:m] > 0)
        np.testing.assert_allclose(np.diag(diff)[m:], 0.0, atol=1e-15)

    def test_reaction_benchmark_matrix(self):
        mesh = generate_mesh(MeshFamily(MeshKind.LEFT_DIAG), 20)
        system = assemble(mesh, reaction_problem())
        interior_rows = system.A[:mesh.n_interior]
        assert interior_rows.data.min() >= 0.0
        assert len(assumption_min_violations(system.A, mesh.n_interior)) > 0

    def test_sigma0_lower_bound_enforced(self, left_mesh):
        problem = ProblemSpec(epsilon=1.0, b=lambda x, y: (0.0, 0.0), c=lambda x, y: np.zeros_like(x),
                              g=lambda x, y: np.zeros_like(x), u_b=lambda x, y: np.zeros_like(x),
                              sigma0=1.0)
        with pytest.raises(ValueError):
            assemble(left_mesh, problem)


class TestSource:
    def test_unit_source_gives_patch_area(self, left_mesh):
        system = assemble(left_mesh, _constant_problem())
        np.testing.assert_allclose(system.g, 0.25 ** 2, rtol=1e-13)

    def test_non_finite_coefficient_names_triangle(self, left_mesh):
        problem = _constant_problem()
        bad = ProblemSpec(epsilon=1.0, b=problem.b, c=problem.c, u_b=problem.u_b,
                          g=lambda x, y: np.where(x > 0.9, np.nan, 1.0))
        with pytest.raises(AssemblyError) as err:
            assemble(left_mesh, bad)
        tri = left_mesh.triangles[err.value.triangle]
        assert left_mesh.vertices[tri, 0].max() > 0.9

    def test_manufactured_source_matches_polynomial_oracle(self, rng):
        p = [0, 0, 1, -2, 1]
        q = [0, 1, -3, 2]
        coef = 100.0 * np.outer(p, q)
        u_xx = P.polyder(coef, 2, axis=0)
        u_yy = P.polyder(coef, 2, axis=1)
        u_x = P.polyder(coef, 1, axis=0)
        u_y = P.polyder(coef, 1, axis=1)
        x, y = rng.random((2, 50))
        expected = (-10.0 * (P.polyval2d(x, y, u_xx) + P.polyval2d(x, y, u_yy))
                    + 3.0 * P.polyval2d(x, y, u_x) + 2.0 * P.polyval2d(x, y, u_y)
                    + P.polyval2d(x, y, coef))
        np.testing.assert_allclose(smooth_problem().g(x, y), expected, rtol=1e-12, atol=1e-10)
        np.testing.assert_allclose(smooth_solution(x, y), P.polyval2d(x, y, coef), rtol=1e-12, atol=1e-12)

    def test_boundary_data_interpolated(self, left_mesh):
        system = assemble(left_mesh, laplace_problem(u_b=lambda x, y: x + 2 * y))
        boundary = left_mesh.vertices[left_mesh.n_interior:]
        np.testing.assert_allclose(system.ub, boundary[:, 0] + 2 * boundary[:, 1])
        full = interpolate(left_mesh, lambda x, y: x + 2 * y)
        np.testing.assert_allclose(system.with_boundary(full[:left_mesh.n_interior]), full)


class TestProblemSpec:
    def test_requires_positive_epsilon(self):
        with pytest.raises(ValueError):
            _constant_problem(epsilon=0.0)
