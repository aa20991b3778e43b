import logging

import numpy as np
import pytest
import scipy.sparse as sp

from src.analysis.metrics import linearity_preservation_probe
from src.analysis.properties import (a1_continuity_sweep, a2_violations, assumption_min_violations,
                                     check_b_axioms, crude_bound_violations, psd_identity)
from src.discretization.assembly import assemble
from src.experiments.examples import smooth_problem
from src.mesh.generator import MeshFamily, MeshKind, generate_mesh
from src.stabilization import (PairPattern, StabScheme, Stabilizer, afc_B, compute_D, kuzmin_alpha,
                               muas_B, muas_beta)
from tests.conftest import full_pattern, random_matrix

# a12=2, a21=-1, a13=1, a31=0, U=(2, 0, 1): vertex 1 is a strict local maximum
THREE_NODE = [[3.0, 2.0, 1.0],
              [-1.0, 3.0, 0.0],
              [0.0, 0.0, 3.0]]
THREE_NODE_U = np.array([2.0, 0.0, 1.0])


def _random_instances(count=100, seed=7):
    rng = np.random.default_rng(seed)
    for k in range(count):
        n = int(rng.integers(4, 51))
        m = int(rng.integers(1, n + 1))
        A = full_pattern(random_matrix(rng, n, density=float(rng.uniform(0.1, 0.5))))
        if k % 2:
            U = rng.integers(0, 4, n).astype(float)
        else:
            U = rng.normal(size=n)
        yield A, m, U, rng


class TestPairPattern:
    def test_transpose_positions(self):
        A = full_pattern(THREE_NODE)
        pattern = PairPattern.from_matrix(A)
        np.testing.assert_array_equal(pattern.row[pattern.transpose], pattern.col)
        np.testing.assert_array_equal(pattern.col[pattern.transpose], pattern.row)

    def test_rejects_unsymmetric_pattern(self):
        A = sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            PairPattern.from_matrix(A)

    def test_zero_row_sums(self):
        pattern = PairPattern.from_matrix(full_pattern(THREE_NODE))
        M = pattern.with_zero_row_sums(-np.ones(pattern.indices.size))
        np.testing.assert_allclose(np.asarray(M.sum(axis=1)).ravel(), 0.0)
        assert M.nnz == pattern.indices.size


class TestComputeD:
    def test_nonpositive_pair_gives_zero(self):
        D = compute_D(full_pattern([[2.0, -1.0], [-1.0, 2.0]]))
        np.testing.assert_array_equal(D.toarray(), 0.0)

    def test_single_pair(self):
        D = compute_D(full_pattern([[2.0, 3.0], [-1.0, 2.0]])).toarray()
        np.testing.assert_array_equal(D, [[3.0, -3.0], [-3.0, 3.0]])

    def test_three_by_three(self):
        A = full_pattern([[5.0, 1.0, -1.0],
                          [0.0, 5.0, 2.0],
                          [1.0, -1.0, 5.0]])
        D = compute_D(A).toarray()
        assert D[0, 1] == D[1, 0] == -1.0
        assert D[0, 2] == D[2, 0] == -1.0
        assert D[1, 2] == D[2, 1] == -2.0
        np.testing.assert_array_equal(np.diag(D), [2.0, 3.0, 3.0])

    def test_keeps_pattern_of_A(self, rng):
        A = full_pattern(random_matrix(rng, 12))
        D = compute_D(A)
        np.testing.assert_array_equal(D.indptr, A.indptr)
        np.testing.assert_array_equal(D.indices, A.indices)

    def test_rejects_foreign_pattern(self, rng):
        A = full_pattern(random_matrix(rng, 8))
        other = full_pattern(np.eye(8))
        with pytest.raises(ValueError):
            compute_D(other, PairPattern.from_matrix(A))


class TestKuzmin:
    def test_strict_maximum_switches_limiter_off(self):
        A = full_pattern(THREE_NODE)
        D = compute_D(A)
        assert D[0, 1] == -2.0
        assert D[0, 2] == -1.0
        alpha = kuzmin_alpha(A, D, THREE_NODE_U, n_interior=1).toarray()
        assert alpha[0, 1] == alpha[1, 0] == 0.0
        assert alpha[0, 2] == alpha[2, 0] == 0.0
        B = afc_B(A, D, kuzmin_alpha(A, D, THREE_NODE_U, n_interior=1)).toarray()
        assert B[0, 1] == -2.0
        assert B[0, 2] == -1.0

    def test_constant_solution_gives_unit_alpha(self, rng):
        A = full_pattern(random_matrix(rng, 15))
        D = compute_D(A)
        alpha = kuzmin_alpha(A, D, np.full(15, 0.3), n_interior=10)
        np.testing.assert_array_equal(alpha.data, 1.0)
        assert afc_B(A, D, alpha).count_nonzero() == 0

    def test_alpha_limits(self, rng):
        A = full_pattern(random_matrix(rng, 10))
        D = compute_D(A)
        pattern = PairPattern.from_matrix(A)
        ones = pattern.matrix(np.ones(pattern.indices.size))
        zeros = pattern.matrix(np.zeros(pattern.indices.size))
        assert afc_B(A, D, ones).count_nonzero() == 0
        np.testing.assert_allclose(afc_B(A, D, zeros).toarray(), D.toarray())

    def test_alpha_symmetric_and_bounded(self, rng):
        for _ in range(20):
            A = full_pattern(random_matrix(rng, 20))
            alpha = kuzmin_alpha(A, compute_D(A), rng.normal(size=20), n_interior=14)
            assert np.all((alpha.data >= 0) & (alpha.data <= 1))
            assert abs(alpha - alpha.T).max() == 0.0

    def test_ambiguous_tie_is_logged(self, caplog):
        # a_12 = a_21 = 1: row 1 gives alpha 0, row 2 gives alpha 1, the smaller index wins
        A = full_pattern([[4.0, 1.0, -5.0], [1.0, 4.0, -3.0], [-1.0, 2.0, 2.0]])
        U = np.array([1.0, 0.0, -1.0])
        with caplog.at_level(logging.WARNING, logger='src.stabilization.limiters'):
            alpha = kuzmin_alpha(A, compute_D(A), U, n_interior=2).toarray()
        assert alpha[0, 1] == alpha[1, 0] == 0.0
        assert any(record.levelno == logging.WARNING for record in caplog.records)

    def test_unambiguous_tie_is_silent(self, caplog):
        A = full_pattern([[4.0, 1.0, -5.0], [1.0, 4.0, -3.0], [-1.0, 2.0, 2.0]])
        with caplog.at_level(logging.WARNING, logger='src.stabilization.limiters'):
            kuzmin_alpha(A, compute_D(A), np.full(3, 0.5), n_interior=2)
        assert not caplog.records


class TestMuas:
    def test_strict_maximum_gives_full_upwinding(self):
        A = full_pattern(THREE_NODE)
        beta = muas_beta(A, THREE_NODE_U, n_interior=1).toarray()
        assert beta[0, 1] == 1.0
        assert beta[0, 2] == 1.0
        B = muas_B(A, muas_beta(A, THREE_NODE_U, n_interior=1)).toarray()
        assert B[0, 1] == B[1, 0] == -2.0
        assert B[0, 2] == -1.0

    def test_constant_solution_gives_zero_beta(self, rng):
        A = full_pattern(random_matrix(rng, 15))
        beta = muas_beta(A, np.ones(15), n_interior=15)
        np.testing.assert_array_equal(beta.data, 0.0)

    def test_nonpositive_pair_gets_no_diffusion(self):
        A = full_pattern([[2.0, -1.0], [-1.0, 2.0]])
        B = muas_B(A, muas_beta(A, np.array([1.0, 0.0]), n_interior=2))
        np.testing.assert_array_equal(B.toarray(), 0.0)

    def test_unit_beta_reduces_to_D(self, rng):
        A = full_pattern(random_matrix(rng, 12))
        pattern = PairPattern.from_matrix(A)
        B = muas_B(A, pattern.matrix(np.ones(pattern.indices.size)))
        np.testing.assert_allclose(B.toarray(), compute_D(A).toarray())

    def test_double_scaling(self, rng):
        A = full_pattern(random_matrix(rng, 25))
        U = rng.normal(size=25)
        np.testing.assert_array_equal(muas_beta(A, 2 * U, 18).data, muas_beta(A, U, 18).data)


class TestStabilizer:
    def test_linear_schemes(self, rng):
        A = full_pattern(random_matrix(rng, 10))
        assert Stabilizer(A, 6, StabScheme.GALERKIN)().count_nonzero() == 0
        np.testing.assert_allclose(Stabilizer(A, 6, StabScheme.UPWIND_D)().toarray(),
                                   compute_D(A).toarray())

    def test_nonlinear_scheme_requires_solution(self, rng):
        A = full_pattern(random_matrix(rng, 10))
        stabilizer = Stabilizer(A, 6, StabScheme.MUAS)
        with pytest.raises(ValueError):
            stabilizer()
        with pytest.raises(ValueError):
            stabilizer(np.zeros(9))

    def test_matches_free_functions(self, rng):
        A = full_pattern(random_matrix(rng, 16))
        U = rng.normal(size=16)
        D = compute_D(A)
        expected = afc_B(A, D, kuzmin_alpha(A, D, U, 11)).toarray()
        np.testing.assert_array_equal(Stabilizer(A, 11, StabScheme.AFC_KUZMIN)(U).toarray(), expected)
        expected = muas_B(A, muas_beta(A, U, 11, q_variant=True)).toarray()
        np.testing.assert_array_equal(Stabilizer(A, 11, StabScheme.MUAS_DQ)(U).toarray(), expected)

    def test_scheme_names(self):
        for scheme in StabScheme:
            assert StabScheme.from_name(scheme.cli_name) is scheme
        assert StabScheme.GALERKIN.is_linear and not StabScheme.MUAS.is_linear
        with pytest.raises(ValueError):
            StabScheme.from_name('fct')


class TestRandomizedProperties:
    @pytest.mark.parametrize('scheme', [StabScheme.UPWIND_D, StabScheme.AFC_KUZMIN, StabScheme.MUAS,
                                        StabScheme.MUAS_DQ])
    def test_matrix_axioms_and_semidefiniteness(self, scheme):
        for A, m, U, rng in _random_instances():
            B = Stabilizer(A, m, scheme)(U)
            axioms = check_b_axioms(B, A)
            assert axioms['satisfied'], axioms
            lhs, rhs = psd_identity(B, rng.normal(size=U.size))
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-10)
            assert rhs >= -1e-12
            assert len(crude_bound_violations(A, B)) == 0

    @pytest.mark.parametrize('q_variant', [False, True])
    def test_beta_bounded_and_scale_invariant(self, q_variant):
        for A, m, U, _ in _random_instances():
            beta = muas_beta(A, U, m, q_variant=q_variant).data
            assert np.all((beta >= 0) & (beta <= 1))
            for factor in (-3.0, 0.5, 7.0):
                scaled = muas_beta(A, factor * U, m, q_variant=q_variant).data
                np.testing.assert_allclose(scaled, beta, atol=1e-12)

    @pytest.mark.parametrize('scheme', [StabScheme.MUAS, StabScheme.MUAS_DQ])
    def test_upwinding_at_strict_extrema(self, scheme):
        for A, m, U, _ in _random_instances():
            B = Stabilizer(A, m, scheme)(U)
            assert len(a2_violations(A, B, U, m)) == 0

    def test_limiter_continuity_at_ties(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = 20
            A = full_pattern(random_matrix(rng, n, density=0.4))
            U = rng.integers(0, 3, n).astype(float)
            assert a1_continuity_sweep(A, U, 15, rng=rng) <= 2.0 + 1e-12


class TestEquivalence:
    def test_q_variant_matches_afc_when_no_pair_is_positive_both_ways(self, rng):
        mesh = generate_mesh(MeshFamily(MeshKind.LEFT_DIAG), 8)
        system = assemble(mesh, smooth_problem())
        m = mesh.n_interior
        assert len(assumption_min_violations(system.A, m)) == 0
        afc = Stabilizer(system.A, m, StabScheme.AFC_KUZMIN)
        muas_dq = Stabilizer(system.A, m, StabScheme.MUAS_DQ)
        for _ in range(20):
            U = rng.normal(size=mesh.n_total)
            difference = abs(afc(U) - muas_dq(U))
            assert (difference.max() if difference.nnz else 0.0) <= 1e-13


class TestLinearityPreservation:
    @pytest.fixture(scope='class')
    def table_system(self):
        mesh = generate_mesh(MeshFamily(MeshKind.SHIFTED, 0.5), 16)
        return mesh, assemble(mesh, smooth_problem())

    def test_constant_function(self, table_system):
        mesh, system = table_system
        assert linearity_preservation_probe(system, mesh, StabScheme.MUAS, (0.7, 0.0, 0.0)) == 0.0

    def test_muas_preserves_linear_functions(self, table_system):
        mesh, system = table_system
        rng = np.random.default_rng(3)
        for _ in range(5):
            assert linearity_preservation_probe(system, mesh, StabScheme.MUAS, rng.normal(size=3)) <= 1e-12

    def test_afc_does_not(self, table_system):
        mesh, system = table_system
        rng = np.random.default_rng(3)
        worst = max(linearity_preservation_probe(system, mesh, StabScheme.AFC_KUZMIN, rng.normal(size=3))
                    for _ in range(5))
        assert worst > 1e-8
