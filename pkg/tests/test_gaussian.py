import numpy as np
import pytest
from hypothesis import given, strategies as st

from telebounds import gaussian as gs
from telebounds import linalg as la
from telebounds.errors import BoundaryError, DomainError, TruncationError

mus = st.floats(0.5, 6.0)
nbars = st.floats(0.0, 3.0)


def thermal_populations(nbar, cut):
    k = np.arange(cut)
    return (nbar / (nbar + 1)) ** k / (nbar + 1)


def params_strategy():
    loss = st.builds(lambda e, n: gs.GaussianChannelParams("thermal_loss", e, n),
                     st.floats(0.0, 0.99), nbars)
    amp = st.builds(lambda e, n: gs.GaussianChannelParams("amplifier", e, n),
                    st.floats(1.01, 3.0), nbars)
    add = st.builds(lambda w: gs.GaussianChannelParams("additive_noise", w=w), st.floats(0.0, 3.0))
    return st.one_of(loss, amp, add)


class TestTmsv:
    def test_vacuum(self):
        assert np.allclose(gs.tmsv(0.5).cm, np.eye(4) / 2)

    @given(mus)
    def test_pure(self, mu):
        cm = gs.tmsv(mu).cm
        assert np.linalg.det(cm) == pytest.approx(1 / 16, rel=1e-8)
        assert np.allclose(gs.symplectic_eigenvalues(cm), 0.5, atol=1e-8)

    def test_mu_one_entries(self):
        cm = gs.tmsv(1.0).cm
        c = np.sqrt(3) / 2
        expected = np.array([[1, 0, c, 0], [0, 1, 0, -c], [c, 0, 1, 0], [0, -c, 0, 1]])
        assert np.allclose(cm, expected)

    def test_invalid_mu(self):
        with pytest.raises(DomainError):
            gs.tmsv(0.4)


class TestChoiApprox:
    @given(nbars, mus)
    def test_unit_gain_is_identity(self, nbar, mu):
        g = gs.choi_approx(gs.GaussianChannelParams("additive_noise", w=0.0), mu)
        assert np.allclose(g.cm, gs.tmsv(mu).cm)

    def test_loss_output_block(self):
        params = gs.GaussianChannelParams("thermal_loss", 0.5, 1.0)
        cm = gs.choi_approx(params, 2.0).cm
        # V -> eta V + |1 - eta| (nbar + 1/2) applied to the TMSV output block
        eta, v = 0.5, gs.tmsv(2.0).cm[2, 2]
        assert cm[2, 2] == pytest.approx(eta * v + (1 - eta) * 1.5)
        assert cm[2, 2] == pytest.approx(1.75)
        assert cm[0, 2] == pytest.approx(np.sqrt(eta) * gs.tmsv(2.0).cm[0, 2])

    @given(params_strategy(), mus)
    def test_bona_fide(self, params, mu):
        assert gs.is_bona_fide(gs.choi_approx(params, mu).cm)

    def test_family_validation(self):
        with pytest.raises(DomainError):
            gs.GaussianChannelParams("thermal_loss", 1.2, 1.0)
        with pytest.raises(DomainError):
            gs.GaussianChannelParams("amplifier", 0.5, 1.0)
        with pytest.raises(ValueError):
            gs.GaussianChannelParams("squeezer", 0.5)

    def test_non_bona_fide_rejected(self):
        with pytest.raises(DomainError):
            gs.GaussianState(np.eye(4) * 0.3)


class TestFockTruncation:
    def test_vacuum(self):
        rho, deficit = gs.fock_truncate(gs.tmsv(0.5), nmax=4)
        expected = np.zeros_like(rho)
        expected[0, 0] = 1
        assert np.allclose(rho, expected, atol=1e-15)
        assert abs(deficit) < 1e-15

    @pytest.mark.parametrize("eta,nbar,mu", [(0.5, 1.0, 2.0), (0.3, 0.5, 1.0), (1.5, 0.2, 1.0)])
    def test_thermal_marginals(self, eta, nbar, mu):
        params = gs.GaussianChannelParams("thermal_loss" if eta < 1 else "amplifier", eta, nbar)
        g = gs.choi_approx(params, mu)
        nmax = 40
        rho, _ = gs.fock_truncate(g, nmax)
        cut = nmax + 1
        out = la.partial_trace(rho, [cut, cut], {1})
        ref = la.partial_trace(rho, [cut, cut], {0})
        n_out = g.cm[2, 2] - 0.5
        n_ref = g.cm[0, 0] - 0.5
        assert np.allclose(np.diag(out).real[:15], thermal_populations(n_out, 15), atol=1e-8)
        assert np.allclose(np.diag(ref).real[:15], thermal_populations(n_ref, 15), atol=1e-8)
        assert np.max(np.abs(out - np.diag(np.diag(out)))) < 1e-12

    @pytest.mark.parametrize("mu", [0.75, 1.0, 2.0])
    def test_tmsv_schmidt_coefficients(self, mu):
        r = np.arccosh(2 * mu) / 2
        t = np.tanh(r) ** 2
        nmax = 30
        rho, deficit = gs.fock_truncate(gs.tmsv(mu), nmax)
        cut = nmax + 1
        lam = (1 - t) * t ** np.arange(cut)
        psi = np.zeros(cut * cut)
        psi[np.arange(cut) * (cut + 1)] = np.sqrt(lam)
        assert np.allclose(rho, np.outer(psi, psi), atol=1e-10)
        assert deficit == pytest.approx(t**cut, abs=1e-12)

    def test_truncation_error(self):
        with pytest.raises(TruncationError):
            gs.fock_truncate(gs.tmsv(20.0), nmax=5)


class TestFidelity:
    @given(params_strategy(), mus)
    def test_identical(self, params, mu):
        g = gs.choi_approx(params, mu)
        assert gs.gaussian_fidelity(g, g) == pytest.approx(1.0, abs=1e-7)

    @given(nbars, nbars, st.floats(0.1, 0.9), mus)
    def test_symmetric(self, n0, n1, eta, mu):
        a = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", eta, n0), mu)
        b = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", eta, n1), mu)
        assert gs.gaussian_fidelity(a, b) == pytest.approx(gs.gaussian_fidelity(b, a), abs=1e-12)

    @pytest.mark.parametrize("p0,p1", [
        (("thermal_loss", 0.5, 0.5), ("thermal_loss", 0.5, 1.0)),
        (("thermal_loss", 0.2, 0.0), ("thermal_loss", 0.2, 0.3)),
        (("amplifier", 1.5, 0.2), ("amplifier", 1.5, 0.4)),
    ])
    def test_fock_oracle_mu_one(self, p0, p1):
        a = gs.choi_approx(gs.GaussianChannelParams(*p0), 1.0)
        b = gs.choi_approx(gs.GaussianChannelParams(*p1), 1.0)
        ra, _ = gs.fock_truncate(a, 30)
        rb, _ = gs.fock_truncate(b, 30)
        assert gs.gaussian_fidelity(a, b) == pytest.approx(la.fidelity(ra, rb), abs=1e-6)

    def test_fock_oracle_when_deficit_tiny(self):
        a = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", 0.3, 0.2), 0.8)
        b = gs.choi_approx(gs.GaussianChannelParams("additive_noise", w=0.1), 0.8)
        ra, da = gs.fock_truncate(a, 30)
        rb, db = gs.fock_truncate(b, 30)
        assert max(da, db) < 1e-8
        assert gs.gaussian_fidelity(a, b) == pytest.approx(la.fidelity(ra, rb), abs=1e-6)

    def test_mp_agrees_with_double(self):
        a = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", 0.5, 1.0), 4.0)
        b = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", 0.5, 1.3), 4.0)
        assert float(gs.gaussian_fidelity_mp(a, b)) == pytest.approx(gs.gaussian_fidelity(a, b), abs=1e-10)

    @pytest.mark.parametrize("n0,n1", [(1.0, 2.0), (0.5, 0.8), (0.0, 1.0)])
    def test_converges_to_asymptote(self, n0, n1):
        target = gs.asymptotic_thermal_fidelity(n0, n1)
        gaps = []
        for mu in (1, 2, 4, 8, 16):
            a = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", 0.5, n0), mu)
            b = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", 0.5, n1), mu)
            gaps.append(abs(gs.gaussian_fidelity(a, b) - target))
        assert all(x > y for x, y in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.05


class TestAsymptotic:
    @given(nbars)
    def test_equal(self, n):
        assert gs.asymptotic_thermal_fidelity(n, n) == pytest.approx(1.0, abs=1e-12)

    def test_value(self):
        # 2*1*2 + 1 + 2 + 1 = 8 and 2*sqrt(1*2*2*3) = 4*sqrt(3)
        expected = np.sqrt(8 + 4 * np.sqrt(3)) / 4
        assert gs.asymptotic_thermal_fidelity(1, 2) == pytest.approx(expected, abs=1e-14)
        assert expected < 1

    def test_matches_large_mu(self):
        a = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", 0.5, 1.0), 1e5)
        b = gs.choi_approx(gs.GaussianChannelParams("thermal_loss", 0.5, 2.0), 1e5)
        assert gs.gaussian_fidelity(a, b) == pytest.approx(gs.asymptotic_thermal_fidelity(1, 2), abs=1e-4)

    @pytest.mark.parametrize("n", [0.5, 1.0, 3.0])
    def test_second_order(self, n):
        d = 1e-3
        approx = 1 - d**2 / (8 * n * (n + 1))
        assert gs.asymptotic_thermal_fidelity(n, n + d) == pytest.approx(approx, abs=1e-9)

    def test_additive(self):
        f, q = gs.asymptotic_additive_fidelity_qcb(2.0, 2.0)
        assert f == pytest.approx(1.0) and q == pytest.approx(1.0)
        f, _ = gs.asymptotic_additive_fidelity_qcb(1.0, 4.0)
        assert f == pytest.approx(0.8)
        w, dw = 1.5, 1e-3
        _, q = gs.asymptotic_additive_fidelity_qcb(w, w + dw)
        assert q == pytest.approx(1 - dw**2 / (8 * w**2), abs=1e-9)
        with pytest.raises(BoundaryError):
            gs.asymptotic_additive_fidelity_qcb(0.0, 1.0)

    @given(st.floats(0.1, 4), st.floats(0.1, 4))
    def test_additive_qcb_below_fidelity(self, w0, w1):
        f, q = gs.asymptotic_additive_fidelity_qcb(w0, w1)
        assert q <= f + 1e-10
