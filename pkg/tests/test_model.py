"""Energy evaluation, homogeneous reduction, and the MAX-CUT correspondence."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import dcising as dc
from dcising.coupling import CouplingError, CsrCoupling, DenseCoupling
from dcising.model import cut_value, spins_from, validate_spins

from conftest import all_spin_vectors, naive_ground_state, random_symmetric_coupling


def dense(a):
    return DenseCoupling(np.asarray(a, dtype=np.float64))


class TestEnergy:
    def test_antiferro_pair(self, antiferro_pair):
        J = antiferro_pair.coupling
        assert dc.energy(J, np.array([1.0, -1.0])) == -1.0
        assert dc.energy(J, np.array([-1.0, 1.0])) == -1.0
        assert dc.energy(J, np.array([1.0, 1.0])) == 1.0

    def test_zero_coupling(self):
        J = dense(np.zeros((3, 3)))
        for s in all_spin_vectors(3):
            assert dc.energy(J, s) == 0.0

    def test_matches_exhaustive_minimum(self, rng):
        J = random_symmetric_coupling(4, rng)
        spins, best = naive_ground_state(J.array)
        assert dc.energy(J, spins) == pytest.approx(best, abs=1e-12)
        # no configuration goes lower
        energies = [dc.energy(J, s) for s in all_spin_vectors(4)]
        assert min(energies) == pytest.approx(best, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dc.energy(dense(np.zeros((3, 3))), np.ones(4))

    @given(st.integers(0, 2**5 - 1), st.integers(0, 10**6))
    def test_spin_flip_symmetry(self, code, seed):
        rng = np.random.default_rng(seed)
        J = random_symmetric_coupling(5, rng)
        s = 2.0 * ((code >> np.arange(5)) & 1) - 1.0
        assert dc.energy(J, s) == pytest.approx(dc.energy(J, -s), rel=1e-14, abs=1e-14)


class TestEnergyWithField:
    def test_field_only(self):
        n = 5
        J = dense(np.zeros((n, n)))
        h = np.ones(n)
        assert dc.energy_with_field(J, h, np.ones(n)) == -n

    def test_zero_field_reduces_to_energy(self, antiferro_pair):
        J = antiferro_pair.coupling
        s = np.array([1.0, -1.0])
        assert dc.energy_with_field(J, np.zeros(2), s) == dc.energy(J, s)

    def test_matches_exhaustive_minimum(self, rng):
        J = random_symmetric_coupling(3, rng)
        h = rng.standard_normal(3)
        _, best = naive_ground_state(J.array, h)
        energies = [dc.energy_with_field(J, h, s) for s in all_spin_vectors(3)]
        assert min(energies) == pytest.approx(best, abs=1e-12)


class TestHomogenize:
    def test_zero_field_borders_with_zeros(self, rng):
        J = random_symmetric_coupling(4, rng)
        hat = dc.homogenize(J, np.zeros(4))
        assert hat.n == 5
        full = hat.to_dense()
        np.testing.assert_array_equal(full[:4, :4], J.array)
        np.testing.assert_array_equal(full[4], np.zeros(5))
        # ground energies agree when the field is zero
        _, e_orig = naive_ground_state(J.array)
        _, e_hat = naive_ground_state(full)
        assert e_hat == pytest.approx(e_orig, abs=1e-12)

    @given(st.integers(0, 10**6))
    def test_energy_identity_all_configurations(self, seed):
        # E_hat((s, t)) == E(J, h, t s) for every s and t
        rng = np.random.default_rng(seed)
        n = 4
        J = random_symmetric_coupling(n, rng)
        h = rng.standard_normal(n)
        hat = dc.homogenize(J, h)
        for s in all_spin_vectors(n):
            for t in (-1.0, 1.0):
                sigma = np.concatenate([s, [t]])
                lhs = dc.energy(hat, sigma)
                rhs = dc.energy_with_field(J, h, t * s)
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_dehomogenized_ground_state_is_optimal(self, rng):
        for _ in range(5):
            J = random_symmetric_coupling(3, rng)
            h = rng.standard_normal(3)
            hat = dc.homogenize(J, h)
            sigma_star, e_hat = naive_ground_state(hat.to_dense())
            s_star = dc.dehomogenize(sigma_star)
            _, e_best = naive_ground_state(J.array, h)
            assert dc.energy_with_field(J, h, s_star) == pytest.approx(e_best, abs=1e-12)
            assert e_hat == pytest.approx(e_best, abs=1e-12)

    def test_csr_and_bordered_match_dense(self, rng):
        import scipy.sparse as sp

        J = random_symmetric_coupling(6, rng)
        h = rng.standard_normal(6)
        ref = dc.homogenize(J, h).to_dense()
        csr = dc.homogenize(CsrCoupling.from_scipy(sp.csr_matrix(J.array)), h)
        np.testing.assert_allclose(csr.to_dense(), ref, atol=0)
        bordered = dc.BorderedCoupling(J, h)
        np.testing.assert_allclose(bordered.to_dense(), ref, atol=0)
        v = rng.standard_normal(7)
        np.testing.assert_allclose(bordered.dot(v), ref @ v, rtol=1e-13)


class TestDehomogenize:
    def test_positive_auxiliary_is_identity(self):
        sigma = np.array([1.0, 1.0, 1.0, 1.0])
        np.testing.assert_array_equal(dc.dehomogenize(sigma), np.ones(3))

    def test_negative_auxiliary_flips(self, rng):
        s0 = spins_from(rng.standard_normal(5))
        sigma = np.concatenate([s0, [-1.0]])
        np.testing.assert_array_equal(dc.dehomogenize(sigma), -s0)

    def test_energy_preserved(self, rng):
        J = random_symmetric_coupling(4, rng)
        h = rng.standard_normal(4)
        hat = dc.homogenize(J, h)
        sigma = spins_from(rng.standard_normal(5))
        assert dc.energy(hat, sigma) == pytest.approx(
            dc.energy_with_field(J, h, dc.dehomogenize(sigma)), rel=1e-12
        )

    def test_too_short(self):
        with pytest.raises(ValueError):
            dc.dehomogenize(np.array([1.0]))


class TestMaxCut:
    def test_unit_triangle_scaling(self):
        W = dense([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
        J = dc.maxcut_to_ising(W)
        expected = np.full((3, 3), -0.5)
        np.fill_diagonal(expected, 0.0)
        np.testing.assert_array_equal(J.to_dense(), expected)

    def test_rejects_invalid_adjacency(self):
        with pytest.raises(CouplingError):
            dc.maxcut_to_ising(DenseCoupling(np.array([[0.0, 1.0], [2.0, 0.0]]), validate=False))
        with pytest.raises(CouplingError):
            dc.maxcut_to_ising(DenseCoupling(np.array([[1.0, 0.0], [0.0, 0.0]]), validate=False))

    def test_cut_formula_identity_small_graphs(self, rng):
        # cut(W, s) == (1/4) sum_ij (1 - s_i s_j) W_ij on every n <= 4 graph tried
        for n in (2, 3, 4):
            for _ in range(5):
                a = np.triu(rng.integers(0, 3, size=(n, n)).astype(float), 1)
                W = DenseCoupling(a + a.T, validate=False)
                for s in all_spin_vectors(n):
                    direct = cut_value(W, s)
                    formula = 0.25 * float(((1 - np.outer(s, s)) * W.array).sum())
                    assert direct == pytest.approx(formula, abs=1e-12)

    def test_triangle_max_cut_is_two_and_matches_ising_minimizer(self):
        W = dense([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
        J = dc.maxcut_to_ising(W)
        cuts = [cut_value(W, s) for s in all_spin_vectors(3)]
        assert max(cuts) == 2.0
        s_star, _ = naive_ground_state(J.to_dense())
        assert cut_value(W, s_star) == 2.0


class TestCutValue:
    def test_empty_cut(self, rng):
        W = random_symmetric_coupling(5, rng)
        assert cut_value(W, np.ones(5)) == 0.0
        assert cut_value(W, -np.ones(5)) == 0.0

    def test_triangle_partition(self):
        W = dense([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
        assert cut_value(W, np.array([1.0, 1.0, -1.0])) == 2.0

    def test_energy_affine_identity_random(self, rng):
        for _ in range(5):
            n = 6
            a = np.triu(rng.standard_normal((n, n)), 1)
            W = DenseCoupling(a + a.T, validate=False)
            J = dc.maxcut_to_ising(W)
            const = a.sum() / 2.0  # half the total (ordered) weight
            s = spins_from(rng.standard_normal(n))
            assert cut_value(W, s) == pytest.approx(const - dc.energy(J, s), rel=1e-10, abs=1e-10)

    def test_csr_matches_dense(self, rng):
        import scipy.sparse as sp

        a = np.triu((rng.random((8, 8)) < 0.4) * rng.integers(1, 5, (8, 8)).astype(float), 1)
        W_dense = DenseCoupling(a + a.T, validate=False)
        W_csr = CsrCoupling.from_scipy(sp.csr_matrix(a + a.T))
        for _ in range(8):
            s = spins_from(rng.standard_normal(8))
            assert cut_value(W_csr, s) == pytest.approx(cut_value(W_dense, s), abs=1e-12)


class TestStorageAgreement:
    def test_dense_csr_procedural_energies_agree(self, rng):
        import scipy.sparse as sp

        n = 40
        proc = dc.gen_procedural_sin(n, seed=100)
        d = DenseCoupling(proc.to_dense(), validate=False)
        c = CsrCoupling.from_scipy(sp.csr_matrix(d.array))
        for _ in range(5):
            s = spins_from(rng.standard_normal(n))
            e = dc.energy(d, s)
            assert abs(dc.energy(c, s) - e) <= 1e-10 * max(1.0, abs(e))
            assert abs(dc.energy(proc, s) - e) <= 1e-10 * max(1.0, abs(e))


class TestValidation:
    def test_asymmetric_rejected(self):
        with pytest.raises(CouplingError):
            DenseCoupling(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(CouplingError):
            DenseCoupling(np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_csr_invariants(self):
        import scipy.sparse as sp

        m = sp.csr_matrix(np.array([[0.0, 2.0], [2.0, 0.0]]))
        ok = CsrCoupling.from_scipy(m)
        ok.validate()
        with pytest.raises(CouplingError):
            CsrCoupling(2, np.array([2.0]), np.array([5]), np.array([0, 1, 1]))

    def test_spin_validation(self):
        validate_spins(np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            validate_spins(np.array([1.0, 0.5]))

    def test_instance_field_length(self, rng):
        J = random_symmetric_coupling(3, rng)
        with pytest.raises(ValueError):
            dc.ProblemInstance(coupling=J, field=np.ones(4))
