import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecdvqe.hilbert import make_layout
from ecdvqe.noise import (KrausSet, NoiseConfig, apply_channel_multimode, apply_single_mode,
                          apply_single_mode_adjoint, kraus_amplitude_damping, mean_photon_number)

from oracles import annihilation, kron_all

KAPPAS = [0.0, 1e-3, 1e-2, 1e-1, 1.0]


def fock(n, L):
    v = np.zeros(L, dtype=complex)
    v[n] = 1
    return np.outer(v, v)


def single(rho, kraus):
    return apply_single_mode(rho, kraus, 0, 1)


def random_density(dim, rng, rank=3):
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestKraus:
    @pytest.mark.parametrize("L", [4, 8, 16])
    @pytest.mark.parametrize("kappa_tau", KAPPAS)
    def test_completeness(self, L, kappa_tau):
        assert kraus_amplitude_damping(kappa_tau, L).completeness_error() < 1e-10

    def test_noiseless_is_identity(self):
        ks = kraus_amplitude_damping(0.0, 8)
        np.testing.assert_allclose(ks.operators[0], np.eye(8), atol=1e-15)
        for k in ks.operators[1:]:
            assert not np.any(k)

    def test_operator_formula(self):
        kt, L = 0.3, 6
        ks = kraus_amplitude_damping(kt, L)
        a = annihilation(L)
        damp = np.diag(np.exp(-kt / 2 * np.arange(L)))
        k2 = np.sqrt((1 - np.exp(-kt)) ** 2 / 2) * damp @ a @ a
        np.testing.assert_allclose(ks.operators[2], k2, atol=1e-14)
        assert len(ks.operators) == L

    def test_corrected_k0_is_diagonal_decay(self):
        # below the cutoff every Fock state keeps its full binomial loss distribution
        ks = kraus_amplitude_damping(0.2, 8)
        np.testing.assert_allclose(np.diag(ks.operators[0]), np.exp(-0.1 * np.arange(8)), atol=1e-12)

    @pytest.mark.parametrize("args", [(-0.1, 4), (0.1, 1)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            kraus_amplitude_damping(*args)

    def test_config_rejects_negative(self):
        with pytest.raises(ValueError):
            NoiseConfig(-1e-3)
        assert NoiseConfig().noiseless and not NoiseConfig(0.1).noiseless


class TestSingleMode:
    def test_strong_loss_drains_to_vacuum(self):
        out = single(fock(5, 16), kraus_amplitude_damping(20.0, 16))
        assert np.real(out[0, 0]) > 0.999

    def test_single_photon_survival(self):
        out = single(fock(1, 8), kraus_amplitude_damping(0.1, 8))
        assert np.real(out[1, 1]) == pytest.approx(np.exp(-0.1), abs=1e-12)
        assert np.real(out[1, 1]) == pytest.approx(0.9048, abs=1e-4)
        assert np.real(out[0, 0]) == pytest.approx(1 - np.exp(-0.1), abs=1e-12)

    @pytest.mark.parametrize("kappa_tau", [1e-3, 1e-2, 1e-1])
    def test_equal_superposition_mean_decay(self, kappa_tau):
        L = 16
        psi = np.full(L, L ** -0.5, dtype=complex)
        rho = np.outer(psi, psi.conj())
        out = single(rho, kraus_amplitude_damping(kappa_tau, L))
        before = mean_photon_number(np.real(np.diag(rho)))
        after = mean_photon_number(np.real(np.diag(out)))
        assert after == pytest.approx(np.exp(-kappa_tau) * before, abs=1e-6)

    def test_distribution_skews_low_with_more_loss(self):
        L = 16
        psi = np.full(L, L ** -0.5, dtype=complex)
        rho = np.outer(psi, psi.conj())
        p0 = [np.real(single(rho, kraus_amplitude_damping(k, L))[0, 0]) for k in (1e-3, 1e-2, 1e-1)]
        assert p0[0] < p0[1] < p0[2]

    @settings(max_examples=30, deadline=None)
    @given(kappa_tau=st.floats(0, 2), seed=st.integers(0, 10**6))
    def test_mean_photon_decay_law(self, kappa_tau, seed):
        L = 12
        rho = random_density(L, np.random.default_rng(seed))
        out = single(rho, kraus_amplitude_damping(kappa_tau, L))
        before = mean_photon_number(np.real(np.diag(rho)))
        after = mean_photon_number(np.real(np.diag(out)))
        assert after == pytest.approx(np.exp(-kappa_tau) * before, abs=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(kappa_tau=st.floats(0, 3), seed=st.integers(0, 10**6))
    def test_shift_path_matches_generic(self, kappa_tau, seed):
        L = 6
        rho = random_density(L, np.random.default_rng(seed))
        ks = kraus_amplitude_damping(kappa_tau, L)
        generic = sum(k @ rho @ k.conj().T for k in ks.operators)
        np.testing.assert_allclose(single(rho, ks), generic, atol=1e-12)

    def test_generic_path_for_non_shift_operators(self):
        rng = np.random.default_rng(0)
        u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        ks = KrausSet((u / np.sqrt(2), np.eye(4, dtype=complex) / np.sqrt(2)), 0.0)
        assert ks.shift_weights() is None
        rho = random_density(4, rng)
        np.testing.assert_allclose(single(rho, ks), 0.5 * (u @ rho @ u.conj().T + rho), atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(kappa_tau=st.floats(0, 2), seed=st.integers(0, 10**6))
    def test_adjoint_duality(self, kappa_tau, seed):
        rng = np.random.default_rng(seed)
        L = 8
        rho = random_density(L, rng)
        obs = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        obs = obs + obs.conj().T
        ks = kraus_amplitude_damping(kappa_tau, L)
        lhs = np.trace(obs @ single(rho, ks))
        rhs = np.trace(apply_single_mode_adjoint(obs, ks, 0, 1) @ rho)
        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestMultiMode:
    def test_noiseless_unchanged(self):
        layout = make_layout(6, (4, 8))
        rho = random_density(layout.dim, np.random.default_rng(1))
        ks = [kraus_amplitude_damping(0.0, L) for L in layout.cutoffs]
        np.testing.assert_allclose(apply_channel_multimode(rho, ks, layout), rho, atol=1e-14)

    @settings(max_examples=20, deadline=None)
    @given(kappa_tau=st.sampled_from(KAPPAS), seed=st.integers(0, 10**6))
    def test_trace_and_hermiticity(self, kappa_tau, seed):
        layout = make_layout(6, (4, 8))
        rho = random_density(layout.dim, np.random.default_rng(seed), rank=5)
        ks = [kraus_amplitude_damping(kappa_tau, L) for L in layout.cutoffs]
        out = apply_channel_multimode(rho, ks, layout)
        assert abs(np.trace(out) - 1) < 1e-10
        assert np.max(np.abs(out - out.conj().T)) < 1e-10

    def test_matches_kronecker_sum(self):
        layout = make_layout(5, (4, 4))
        rho = random_density(layout.dim, np.random.default_rng(2))
        ks = [kraus_amplitude_damping(0.4, 4) for _ in range(2)]
        expected = np.zeros_like(rho)
        for kj in ks[0].operators:
            for kk in ks[1].operators:
                full = kron_all(np.eye(2), kj, kk)
                expected += full @ rho @ full.conj().T
        np.testing.assert_allclose(apply_channel_multimode(rho, ks, layout), expected, atol=1e-12)

    def test_product_state_marginals_independent(self):
        layout = make_layout(7, (8, 8))
        rho = kron_all(fock(0, 2), fock(3, 8), fock(5, 8))
        ks = [kraus_amplitude_damping(0.3, 8) for _ in range(2)]
        out = apply_channel_multimode(rho, ks, layout).reshape(2, 8, 8, 2, 8, 8)
        p = np.real(np.einsum("qabqab->ab", out))
        m1 = np.real(np.diag(single(fock(3, 8), ks[0])))
        m2 = np.real(np.diag(single(fock(5, 8), ks[1])))
        np.testing.assert_allclose(p, np.outer(m1, m2), atol=1e-12)

    def test_purity_falls_with_loss(self):
        layout = make_layout(5, (4, 4))
        rng = np.random.default_rng(3)
        v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
        v /= np.linalg.norm(v)
        rho = np.outer(v, v.conj())
        purity = []
        for kt in (0.0, 1e-3, 1e-2, 1e-1):
            out = apply_channel_multimode(rho, [kraus_amplitude_damping(kt, 4)] * 2, layout)
            purity.append(np.real(np.trace(out @ out)))
        assert all(a >= b for a, b in zip(purity, purity[1:]))

    def test_batched_input(self):
        layout = make_layout(5, (4, 4))
        rng = np.random.default_rng(4)
        batch = np.stack([random_density(layout.dim, rng) for _ in range(3)])
        ks = [kraus_amplitude_damping(0.2, 4)] * 2
        out = apply_channel_multimode(batch, ks, layout)
        for b in range(3):
            np.testing.assert_allclose(out[b], apply_channel_multimode(batch[b], ks, layout), atol=1e-14)

    def test_dimension_checks(self):
        layout = make_layout(5, (4, 4))
        with pytest.raises(ValueError):
            apply_channel_multimode(np.eye(16), [kraus_amplitude_damping(0.1, 4)] * 2, layout)
        with pytest.raises(ValueError):
            apply_channel_multimode(np.eye(32), [kraus_amplitude_damping(0.1, 8)] * 2, layout)
        with pytest.raises(ValueError):
            apply_channel_multimode(np.eye(32), [kraus_amplitude_damping(0.1, 4)], layout)
