import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import poisson

from conftest import mp_displacement, mp_ndks_amplitude
from ndks.errors import CutoffTooSmall, NonConvergence
from ndks.fock import (
    NdksParams,
    align_phase,
    auto_cutoff,
    build_coherent,
    build_ndks,
    build_pacs,
    choose_cutoff,
    displace_state,
    displacement_element,
    displacement_guard,
    displacement_matrix,
    initial_cutoff,
    interior_size,
    kerr_matrix,
    ladder_matrices,
)

GAMMAS = (0.0, 0.05, 0.12, 0.25, 1.0)
PHOTONS = (0, 2, 3, 4, 6)


class TestParams:
    def test_defaults(self):
        q = NdksParams()
        assert (q.alpha, q.beta, q.gamma, q.p) == (1, 2, 0.05, 0)

    @pytest.mark.parametrize("kw", [dict(p=-1), dict(p=1.5), dict(cutoff=3, p=2),
                                    dict(gamma=math.nan), dict(alpha=complex(math.inf, 0))])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            NdksParams(**kw)

    def test_frozen_and_hashable(self):
        q = NdksParams()
        with pytest.raises(AttributeError):
            q.p = 3
        assert hash(q) == hash(NdksParams())


class TestOperators:
    def test_ladder_dim2(self):
        a, adag, num = ladder_matrices(2)
        assert a[0, 1] == 1.0
        assert np.count_nonzero(a) == 1

    def test_number_from_ladders(self):
        a, adag, num = ladder_matrices(4)
        assert np.allclose(np.diag(adag @ a).real, [0, 1, 2, 3])
        assert np.allclose(num, adag @ a, atol=1e-14)

    def test_commutator_corner_defect(self):
        a, adag, _ = ladder_matrices(8)
        c = a @ adag - adag @ a
        expected = np.eye(8)
        expected[7, 7] = -7.0
        assert np.allclose(c, expected, atol=1e-14)

    def test_kerr(self):
        assert np.array_equal(kerr_matrix(0.0, 6), np.eye(6))
        k = kerr_matrix(0.83, 6)
        assert k[0, 0] == 1 and k[1, 1] == 1
        assert kerr_matrix(1.0, 5)[3, 3] == pytest.approx(np.exp(3j), abs=1e-15)
        assert np.allclose(k.conj().T @ k, np.eye(6), atol=1e-15)

    def test_read_only(self):
        a, _, _ = ladder_matrices(3)
        with pytest.raises(ValueError):
            a[0, 0] = 1


class TestDisplacementElement:
    def test_vacuum_element(self):
        assert displacement_element(0, 0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_zero_shift_is_identity(self):
        for n in range(6):
            for m in range(6):
                assert displacement_element(n, m, 0.0) == (1.0 if n == m else 0.0)

    def test_against_exponential_oracle(self):
        beta = 1 + 0.5j
        dim = 60
        d = displacement_matrix(beta, dim, route="exponential_oracle")
        assert abs(displacement_element(3, 1, beta) - d[3, 1]) < 1e-13

    @pytest.mark.parametrize("n,m,beta", [(3, 1, 1 + 0.5j), (1, 3, 1 + 0.5j), (0, 7, -2.2j),
                                          (40, 12, 3 - 1j), (12, 40, 3 - 1j),
                                          (80, 75, 5.5 + 2j), (5, 90, -6.0 + 1.5j)])
    def test_against_extended_precision(self, n, m, beta):
        ref = mp_displacement(n, m, beta)
        assert abs(displacement_element(n, m, beta) - ref) < 1e-13

    def test_broadcast(self):
        z = np.array([[0.5, 1j], [2 - 1j, -3.0]])
        got = displacement_element(4, 2, z)
        assert got.shape == z.shape
        assert np.allclose(got, np.vectorize(lambda b: mp_displacement(4, 2, b))(z), atol=1e-14)


class TestDisplacementMatrix:
    def test_identity(self):
        for route in ("closed_form", "exponential_oracle"):
            assert np.allclose(displacement_matrix(0.0, 12, route), np.eye(12), atol=1e-15)

    def test_column_zero_is_coherent(self):
        d = displacement_matrix(2.0, 40)
        n = np.arange(40)
        ref = np.exp(-2.0) * 2.0**n / np.sqrt([float(math.factorial(int(k))) for k in n])
        assert np.allclose(d[:, 0], ref, atol=1e-15)

    def test_routes_agree_on_interior(self):
        beta, dim = 2.0, 40
        k = dim - math.ceil(4 * abs(beta))
        c = displacement_matrix(beta, dim, "closed_form")
        o = displacement_matrix(beta, dim, "exponential_oracle")
        assert np.max(np.abs(c[:k, :k] - o[:k, :k])) < 1e-8

    @pytest.mark.parametrize("beta", [0.7, 2.0, -1.5 + 2.5j, 4.0j])
    def test_routes_agree_everywhere(self, beta):
        dim = 64
        c = displacement_matrix(beta, dim, "closed_form")
        o = displacement_matrix(beta, dim, "exponential_oracle")
        assert np.max(np.abs(c - o)) < 1e-10

    def test_unitary_on_interior(self):
        for beta in (1.0, 2.0, 3 + 1j):
            dim = 80
            k = interior_size(beta, dim)
            d = displacement_matrix(beta, dim)
            g = d[:, :k].conj().T @ d[:, :k]
            assert np.max(np.abs(g - np.eye(k))) < 1e-8

    def test_guard(self):
        with pytest.raises(CutoffTooSmall):
            displacement_matrix(3.0, displacement_guard(3.0) - 1)

    @given(st.floats(-np.pi, np.pi), st.floats(0.0, 2.5), st.integers(0, 2**31))
    @settings(max_examples=25, deadline=None)
    def test_norm_preserved_by_kerr_then_displacement(self, gamma, r, seed):
        rng = np.random.default_rng(seed)
        beta = r * np.exp(1j * rng.uniform(0, 2 * np.pi))
        dim = 60
        k = interior_size(beta, dim)
        psi = np.zeros(dim, complex)
        psi[:k] = rng.normal(size=k) + 1j * rng.normal(size=k)
        psi[k // 2:] = 0
        psi /= np.linalg.norm(psi)
        out = displacement_matrix(beta, dim) @ kerr_matrix(gamma, dim) @ psi
        assert abs(np.linalg.norm(out) - 1) < 1e-8


class TestDisplaceState:
    @pytest.mark.parametrize("z", [0.0, 0.4 - 0.3j, -3 + 2j, 6.5 - 4j])
    def test_against_extended_precision(self, z):
        psi = np.zeros(25, complex)
        psi[[0, 3, 11, 24]] = [0.5, -0.5j, 0.5, 0.5]
        out = displace_state(psi, np.array(z), 140)
        for l in (0, 1, 7, 30, 60, 100, 139):
            ref = sum(c * mp_displacement(l, k, z) for k, c in enumerate(psi) if c)
            assert abs(out[l] - ref) < 1e-13

    def test_shape_and_unitarity(self):
        psi = build_coherent(1.3, 30)
        z = np.array([[0.0, 1 + 1j], [-2.0, 3j]])
        out = displace_state(psi, z, 120)
        assert out.shape == (120, 2, 2)
        assert np.allclose(np.sum(np.abs(out) ** 2, axis=0), 1.0, atol=1e-12)

    def test_zero_shift(self):
        psi = build_pacs(0.8, 2, 30)
        out = displace_state(psi, np.array(0.0), 30)
        assert np.allclose(out, psi, atol=1e-15)


class TestCoherentAndPacs:
    def test_vacuum(self):
        psi = build_coherent(0.0, 5)
        assert np.array_equal(psi, [1, 0, 0, 0, 0])

    def test_mean_photon_number(self):
        psi = build_coherent(1.0, 30)
        n = np.arange(30)
        assert abs(np.sum(n * np.abs(psi) ** 2) - 1.0) < 1e-9

    def test_eigenvector_of_annihilation(self):
        alpha = 1.0
        psi = build_coherent(alpha, 30)
        a, _, _ = ladder_matrices(30)
        assert np.max(np.abs((a @ psi - alpha * psi)[:-3])) < 1e-8

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmall):
            build_coherent(3.0, 10)

    def test_single_photon_from_vacuum(self):
        psi = build_pacs(0.0, 1, 6)
        assert np.allclose(psi, [0, 1, 0, 0, 0, 0])

    def test_p0_is_coherent(self):
        assert np.allclose(build_pacs(0.7 - 0.2j, 0, 25), build_coherent(0.7 - 0.2j, 25), atol=1e-16)

    def test_operator_apply_oracle(self):
        dim = 40
        _, adag, _ = ladder_matrices(dim + 10)
        coh = build_coherent(1.0, dim + 10, tail_tol=1e-15)
        ref = np.linalg.matrix_power(adag, 3) @ coh
        ref = ref[:dim] / np.linalg.norm(ref[:dim])
        assert np.max(np.abs(build_pacs(1.0, 3, dim) - ref)) < 1e-9

    @pytest.mark.parametrize("alpha,p", [(1.0, 1), (0.6 + 0.8j, 3), (1.5, 6)])
    def test_nonlinear_eigen_identity(self, alpha, p):
        # (1 - p / (1 + N)) a |alpha^p> = alpha |alpha^p>; with the number
        # factor to the right of a the identity does not hold
        dim = 60
        psi = build_pacs(alpha, p, dim)
        a, _, _ = ladder_matrices(dim)
        f = np.diag(1 - p / (1 + np.arange(dim)))
        assert np.max(np.abs((a @ f @ psi - alpha * psi)[:-3])) > 1e-2
        lhs = f @ a @ psi
        assert np.max(np.abs((lhs - alpha * psi)[:-3])) < 1e-8


class TestNdks:
    def test_coherent_limit_is_poissonian(self):
        q = NdksParams(1, 2, 0, 0, 60)
        probs = np.abs(build_ndks(q)) ** 2
        assert np.max(np.abs(probs - poisson.pmf(np.arange(60), 9.0))) < 1e-10

    def test_zero_shift_and_kerr_gives_pacs(self):
        q = NdksParams(1.2, 0, 0, 3, 40)
        assert np.allclose(build_ndks(q), build_pacs(1.2, 3, 40), atol=1e-14)

    def test_fidelity_at_sub_poissonian_point(self):
        q = NdksParams(1, 2, 0.12, 2, 60)
        f = abs(np.vdot(build_ndks(q, "closed_form"), build_ndks(q, "operator_oracle")))
        assert f > 1 - 1e-10

    @pytest.mark.parametrize("gamma", GAMMAS)
    @pytest.mark.parametrize("p", PHOTONS)
    def test_route_equivalence(self, gamma, p):
        q = auto_cutoff(NdksParams(1, 2, gamma, p))
        a = align_phase(build_ndks(q, "closed_form"))
        b = align_phase(build_ndks(q, "operator_oracle"))
        assert np.max(np.abs(a - b)) < 1e-8

    @pytest.mark.parametrize("alpha,beta,gamma,p", [(1, 2, 0.12, 2), (0.5 + 0.5j, -1 + 1j, 0.7, 1),
                                                    (1, 2, 1.0, 6)])
    def test_against_extended_precision(self, alpha, beta, gamma, p):
        q = auto_cutoff(NdksParams(alpha, beta, gamma, p), 1e-13)
        psi = build_ndks(q)
        for n in (0, 3, 9, 17, 30):
            assert abs(psi[n] - mp_ndks_amplitude(n, alpha, beta, gamma, p)) < 1e-12

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmall):
            build_ndks(NdksParams(1, 2, 0.05, 0, 12))

    def test_unknown_route(self):
        with pytest.raises(ValueError):
            build_ndks(NdksParams(), "magic")


class TestChooseCutoff:
    def test_vacuum(self):
        q = NdksParams(0, 0, 0, 0)
        assert choose_cutoff(q) == initial_cutoff(q) == 10

    def test_tail_verified_post_hoc(self):
        q = NdksParams(1, 2, 0.05, 6)
        n = choose_cutoff(q, 1e-9)
        big = build_ndks(q.with_cutoff(2 * n + 40), tail_tol=1e-14)
        assert np.sum(np.abs(big[n:]) ** 2) < 1e-9

    def test_poisson_lower_bound(self):
        assert choose_cutoff(NdksParams(1, 2, 0.0, 0), 1e-9) >= 25

    def test_hard_max(self):
        with pytest.raises(NonConvergence):
            choose_cutoff(NdksParams(4, 4, 0, 0), max_cutoff=40)

    @pytest.mark.parametrize("tol", [0.0, 1e-2, -1e-9])
    def test_tolerance_domain(self, tol):
        with pytest.raises(ValueError):
            choose_cutoff(NdksParams(), tol)
