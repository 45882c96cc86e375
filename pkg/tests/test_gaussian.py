import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvinterferometry.gaussian import (
    CoherenceParams,
    GaussianState,
    LadderCovariance,
    UnphysicalStateError,
    apply_beamsplitter,
    apply_displacement,
    apply_loss,
    apply_phase,
    beamsplitter_matrix,
    condition_on_homodyne,
    ladder_to_quad,
    lossy_tms_state,
    quad_to_ladder,
    stellar_covariance,
    stellar_state,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    tms_state,
    transform,
    uncertainty_gap,
    wigner_form_tms,
)

PHYS = 0.5 - 1e-10


def is_symplectic(S):
    om = symplectic_form(S.shape[0] // 2)
    return np.allclose(S @ om @ S.T, om, atol=1e-12)


class TestBasics:
    def test_symplectic_form_single_mode(self):
        assert np.array_equal(symplectic_form(1), [[0, 1], [-1, 0]])

    def test_vacuum(self):
        v = GaussianState.vacuum(2)
        assert np.allclose(symplectic_eigenvalues(v), 0.5)
        assert v.mean_photon_number() == pytest.approx(0.0)
        assert uncertainty_gap(v) == pytest.approx(0.0, abs=1e-14)

    def test_state_is_immutable(self):
        v = GaussianState.vacuum(1)
        with pytest.raises(ValueError):
            v.cov[0, 0] = 3.0

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            GaussianState.from_cov([[1.0, 0.1], [0.0, 1.0]])

    def test_rejects_odd_dimension(self):
        with pytest.raises(ValueError):
            GaussianState.from_cov(np.eye(3))

    def test_subvacuum_state_is_unphysical(self):
        assert not GaussianState.from_cov(0.3 * np.eye(2)).is_physical()

    def test_tensor_and_reduce_roundtrip(self):
        a = stellar_state(CoherenceParams(0.4, 0.7, 0.3))
        b = tms_state(0.8)
        ab = tensor(a, b)
        assert ab.n_modes == 4
        assert np.allclose(ab.reduced([2, 3]).cov, b.cov)
        assert np.allclose(ab.reduced([0, 1]).cov, a.cov)


class TestStellar:
    def test_diagonal_and_photon_number(self):
        eps = 0.4
        s = stellar_state(CoherenceParams(eps, 0.7, 0.3))
        assert np.allclose(np.diag(s.cov), 0.5 * (1 + eps))
        assert s.mean_photon_number() == pytest.approx(eps)

    def test_cross_correlation_encodes_g(self):
        eps, g, th = 0.2, 0.6, 1.1
        V = stellar_covariance(eps, g, th)
        # <a1 a2^dag> = eps g / 2 in terms of quadratures
        corr = 0.5 * (V[0, 2] + V[1, 3]) + 0.5j * (V[1, 2] - V[0, 3])
        assert corr == pytest.approx(0.5 * eps * g * np.exp(1j * th))

    def test_zero_epsilon_is_vacuum(self):
        assert np.allclose(stellar_covariance(0.0, 0.9, 0.4), 0.5 * np.eye(4))

    def test_fully_coherent_light_has_a_vacuum_mode(self):
        nu = symplectic_eigenvalues(stellar_state(CoherenceParams(3.0, 1.0, 0.0)))
        assert nu[0] == pytest.approx(0.5, abs=1e-12)

    def test_symplectic_spectrum(self):
        eps, g = 0.3, 0.5
        nu = symplectic_eigenvalues(stellar_state(CoherenceParams(eps, g)))
        assert np.allclose(nu, 0.5 + 0.5 * eps * np.array([1 - g, 1 + g]))

    @pytest.mark.parametrize("eps,g", [(-0.1, 0.5), (0.1, 1.2), (0.1, -0.1), (np.nan, 0.5)])
    def test_invalid_params(self, eps, g):
        with pytest.raises(UnphysicalStateError):
            stellar_state(CoherenceParams(eps, g))


class TestSqueezedResource:
    def test_tms_quadrature_correlations(self):
        r = 1.2
        V = tms_state(r).cov
        var_q_sum = V[0, 0] + V[2, 2] + 2 * V[0, 2]
        var_p_diff = V[1, 1] + V[3, 3] - 2 * V[1, 3]
        assert var_q_sum == pytest.approx(np.exp(-2 * r))
        assert var_p_diff == pytest.approx(np.exp(-2 * r))

    def test_tms_is_pure(self):
        assert np.allclose(symplectic_eigenvalues(tms_state(1.5)), 0.5)

    def test_lossless_tms_matches_pure(self):
        assert np.allclose(lossy_tms_state(1.3, 1.0).cov, tms_state(1.3).cov, atol=1e-12)

    def test_full_loss_is_vacuum(self):
        assert np.allclose(lossy_tms_state(2.0, 0.0).cov, 0.5 * np.eye(4))

    @pytest.mark.parametrize("r,T", [(0.5, 0.9), (2.0, 0.95), (5.0, 0.7), (0.0, 0.5)])
    def test_lossy_tms_matches_loss_channels(self, r, T):
        s = tms_state(r)
        s = apply_loss(apply_loss(s, 0, T * T), 1, T * T)
        assert np.allclose(lossy_tms_state(r, T).cov, s.cov, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("r,T", [(0.4, 0.8), (1.7, 0.95), (3.0, 0.6)])
    def test_wigner_form_is_inverse_covariance(self, r, T):
        # W ~ exp(-x^T Q x) with Q = V^{-1}/2
        Q = wigner_form_tms(r, T)
        V = lossy_tms_state(r, T).cov
        assert np.allclose(Q, 0.5 * np.linalg.inv(V), rtol=1e-9, atol=1e-9)

    def test_strong_squeezing_passes_uncertainty(self):
        assert lossy_tms_state(5.0, 1.0).is_physical()

    @pytest.mark.parametrize("r,T", [(-0.1, 0.5), (1.0, 1.1), (1.0, -0.1)])
    def test_invalid_link(self, r, T):
        with pytest.raises(ValueError):
            lossy_tms_state(r, T)


class TestOperations:
    def test_beamsplitter_is_symplectic(self):
        for t, ph in [(np.sqrt(0.5), 0.0), (0.3, 1.2), (1.0, 0.0)]:
            assert is_symplectic(beamsplitter_matrix(t, ph))

    def test_balanced_beamsplitter_mixes_thermal_modes(self):
        # two equal uncorrelated thermal modes are invariant under any BS
        s = GaussianState.from_cov(np.eye(4))
        assert np.allclose(apply_beamsplitter(s, 0, 1).cov, np.eye(4))

    def test_beamsplitter_moves_displacement(self):
        s = apply_displacement(GaussianState.vacuum(2), 0, 1.0, 0.0)
        out = apply_beamsplitter(s, 0, 1)
        assert np.allclose(out.mean, [1 / np.sqrt(2), 0, -1 / np.sqrt(2), 0])

    def test_phase_rotates_mean(self):
        s = apply_displacement(GaussianState.vacuum(1), 0, 1.0, 0.0)
        out = apply_phase(s, 0, np.pi / 2)
        assert np.allclose(out.mean, [0.0, 1.0], atol=1e-15)

    def test_phase_on_stellar_shifts_theta(self):
        p = CoherenceParams(0.3, 0.6, 0.2)
        shifted = apply_phase(stellar_state(p), 1, 0.5)
        # a2 -> e^{i d} a2 multiplies <a1 a2^dag> by e^{-i d}
        assert np.allclose(shifted.cov, stellar_covariance(0.3, 0.6, 0.2 - 0.5))

    def test_loss_to_vacuum(self):
        s = apply_loss(tms_state(1.0), 0, 0.0)
        assert np.allclose(s.cov[:2, :2], 0.5 * np.eye(2))

    def test_transform_rejects_non_symplectic(self):
        with pytest.raises(ValueError):
            transform(GaussianState.vacuum(1), 2 * np.eye(2))

    def test_homodyne_conditioning_on_tms(self):
        r = 1.0
        post, marg = condition_on_homodyne(tms_state(r), 0, "q", 0.7)
        c, s = np.cosh(2 * r), np.sinh(2 * r)
        assert marg.variance == pytest.approx(0.5 * c)
        assert post.mean[0] == pytest.approx(-s / c * 0.7)
        assert post.cov[0, 0] == pytest.approx(0.5 / c)
        assert post.cov[1, 1] == pytest.approx(0.5 * c)

    def test_homodyne_pdf_normalised(self):
        _, marg = condition_on_homodyne(stellar_state(CoherenceParams(0.5, 0.3)), 1, "p", 0.0)
        x = np.linspace(-12, 12, 20001)
        assert np.trapezoid(marg.pdf(x), x) == pytest.approx(1.0, rel=1e-9)

    def test_homodyne_bad_quadrature(self):
        with pytest.raises(ValueError):
            condition_on_homodyne(GaussianState.vacuum(1), 0, "x", 0.0)


class TestLadder:
    def test_roundtrip(self):
        s = tensor(stellar_state(CoherenceParams(0.4, 0.7, 0.3)))
        assert np.allclose(ladder_to_quad(quad_to_ladder(s)).cov, s.cov)

    def test_thermal_ladder_entries(self):
        # for thermal light <a a^dag + a^dag a>/2 sits off-diagonal in (a, a^dag) ordering
        sig = quad_to_ladder(GaussianState.from_cov(1.5 * np.eye(2))).sigma
        assert np.allclose(sig, [[0.0, 1.5], [1.5, 0.0]])

    def test_rejects_non_real(self):
        with pytest.raises(ValueError):
            ladder_to_quad(LadderCovariance(np.array([[1.0, 0.5j], [0.5j, 1.0]])))


unit = st.floats(0.0, 1.0)


@settings(max_examples=1000, deadline=None)
@given(eps=st.floats(0.0, 50.0), g=unit, theta=st.floats(-np.pi, np.pi))
def test_stellar_states_are_physical(eps, g, theta):
    s = stellar_state(CoherenceParams(eps, g, theta))
    assert symplectic_eigenvalues(s)[0] >= PHYS


@settings(max_examples=1000, deadline=None)
@given(r=st.floats(0.0, 3.5), T=unit)
def test_lossy_tms_symplectic_spectrum(r, T):
    assert symplectic_eigenvalues(lossy_tms_state(r, T))[0] >= PHYS


@settings(max_examples=1000, deadline=None)
@given(r=st.floats(0.0, 5.0), T=unit)
def test_lossy_tms_uncertainty_relation(r, T):
    # beyond r ~ 3.5 rounding of the O(e^{2r}) entries moves the computed
    # symplectic spectrum by more than 1e-10; V + i Omega/2 >= 0 stays sharp
    assert lossy_tms_state(r, T).is_physical()


@settings(max_examples=300, deadline=None)
@given(
    eps=st.floats(0.0, 5.0), g=unit, theta=st.floats(-np.pi, np.pi),
    t=unit, phase=st.floats(-np.pi, np.pi), delta=st.floats(-np.pi, np.pi),
)
def test_passive_optics_preserve_spectrum(eps, g, theta, t, phase, delta):
    s = stellar_state(CoherenceParams(eps, g, theta))
    out = apply_phase(apply_beamsplitter(s, 0, 1, t, phase), 1, delta)
    assert np.allclose(symplectic_eigenvalues(out), symplectic_eigenvalues(s), atol=1e-10)
    assert out.mean_photon_number() == pytest.approx(s.mean_photon_number(), abs=1e-10)
