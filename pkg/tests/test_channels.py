import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from telebounds import channels as ch
from telebounds import linalg as la
from telebounds.errors import DomainError, ShapeError

from conftest import probabilities, random_probs, seeds

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
GAMMA = 0.5
AMP_DAMP = [np.array([[1, 0], [0, np.sqrt(1 - GAMMA)]]), np.array([[0, np.sqrt(GAMMA)], [0, 0]])]


def kraus_sum(kraus, rho):
    out = np.zeros((kraus[0].shape[0],) * 2, dtype=complex)
    for k in kraus:
        out += k @ rho @ k.conj().T
    return out


def pauli_eigenstates():
    vecs = [[1, 0], [0, 1], [1, 1], [1, -1], [1, 1j], [1, -1j]]
    return [la.projector(np.array(v) / np.linalg.norm(v)) for v in vecs]


class TestPauliOperators:
    def test_qubit_representatives(self):
        ops = ch.generalized_pauli_operators(2)
        for got, want in zip(ops, [I2, Z, X, X @ Z]):
            phase = np.vdot(want, got) / 2
            assert abs(abs(phase) - 1) < 1e-12
            assert np.allclose(got, phase * want)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_unitary(self, d):
        for U in ch.generalized_pauli_operators(d):
            assert np.allclose(U @ U.conj().T, np.eye(d), atol=1e-12)

    def test_qutrit_orthogonality(self):
        ops = ch.generalized_pauli_operators(3)
        gram = np.array([[np.trace(a.conj().T @ b) for b in ops] for a in ops])
        assert np.allclose(gram, 3 * np.eye(9), atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3])
    def test_bell_projectors_resolve_identity(self, d):
        assert np.allclose(sum(ch.bell_projectors(d)), np.eye(d * d), atol=1e-10)


class TestMakeChannel:
    def test_depolarizing_zero_is_identity(self):
        c = ch.depolarizing(0.0)
        assert len(c.kraus) == 1 and np.allclose(c.kraus[0], I2)

    def test_erasure_one_is_constant(self, rng):
        c = ch.erasure(1.0)
        flag = np.diag([0, 0, 1.0])
        for _ in range(5):
            assert np.allclose(ch.apply_channel(c, la.random_density(2, rng)), flag)

    def test_depolarizing_three_quarters_fully_mixes(self):
        c = ch.depolarizing(0.75)
        kraus = [np.sqrt(0.25) * I2] + [np.sqrt(0.25) * P for P in (X, X @ Z, Z)]
        for rho in pauli_eigenstates():
            assert np.allclose(kraus_sum(kraus, rho), I2 / 2)
            assert np.allclose(ch.apply_channel(c, rho), I2 / 2)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            ch.depolarizing(1.2)
        with pytest.raises(DomainError):
            ch.erasure(-0.1)

    def test_non_tp_kraus_rejected(self):
        with pytest.raises(DomainError):
            ch.from_kraus([np.eye(2) * 0.9])

    def test_spec_json_round_trip(self):
        spec = ch.ChannelSpec("kraus", 2, {"kraus": AMP_DAMP})
        back = ch.ChannelSpec.from_json(json.dumps(spec.to_dict()))
        a, b = ch.make_channel(spec), ch.make_channel(back)
        for x, y in zip(a.kraus, b.kraus):
            assert np.allclose(x, y)


class TestApplyChannel:
    def test_identity(self, rng):
        rho = la.random_density(2, rng)
        assert np.allclose(ch.apply_channel(ch.depolarizing(0.0), rho), rho)

    def test_dephasing_half_on_plus(self):
        plus = la.projector(np.array([1, 1]) / np.sqrt(2))
        expected = 0.5 * plus + 0.5 * Z @ plus @ Z
        assert np.allclose(expected, I2 / 2)
        assert np.allclose(ch.apply_channel(ch.dephasing(0.5), plus), I2 / 2)

    @given(seeds, st.sampled_from(["depolarizing", "dephasing", "erasure"]), probabilities)
    def test_cptp(self, seed, family, p):
        rng = np.random.default_rng(seed)
        c = ch.make_channel(ch.ChannelSpec(family, 2, {"p": p}))
        out = ch.apply_channel(c, la.random_density(2, rng))
        assert abs(np.trace(out) - 1) < 1e-12
        assert np.linalg.eigvalsh(out)[0] >= -1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            ch.apply_channel(ch.depolarizing(0.1), np.eye(3) / 3)


class TestChoi:
    def test_identity_is_bell_state(self):
        rho = ch.choi_matrix(ch.depolarizing(0.0)).state
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert np.allclose(rho, la.projector(phi))
        assert np.linalg.matrix_rank(rho, tol=1e-10) == 1

    @given(probabilities)
    def test_depolarizing_bell_spectrum(self, p):
        rho = ch.choi_matrix(ch.depolarizing(p)).state
        vecs = ch.bell_vectors(2)
        diag = [np.vdot(v, rho @ v).real for v in vecs]
        assert np.allclose(diag, [1 - p, p / 3, p / 3, p / 3], atol=1e-12)

    @given(probabilities)
    def test_erasure_entrywise(self, pi):
        rho = ch.choi_matrix(ch.erasure(pi)).state
        phi = np.zeros(6)
        phi[0] = phi[4] = 1 / np.sqrt(2)  # |00> + |11> in 2 x 3
        flag = np.diag([0, 0, 1.0])
        expected = (1 - pi) * np.outer(phi, phi) + pi * np.kron(I2 / 2, flag)
        assert np.allclose(rho, expected, atol=1e-14)

    @given(seeds)
    def test_pauli_choi_is_bell_diagonal(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 4))
        probs = random_probs(rng, d * d)
        rho = ch.choi_matrix(ch.pauli(probs, d)).state
        vecs = np.array(ch.bell_vectors(d)).T
        in_bell = vecs.conj().T @ rho @ vecs
        assert np.max(np.abs(in_bell - np.diag(np.diag(in_bell)))) <= 1e-12
        assert np.allclose(np.diag(in_bell).real, probs, atol=1e-12)
        assert np.allclose(rho, ch.bell_diagonal(probs, d), atol=1e-12)

    @given(seeds, st.sampled_from(["depolarizing", "dephasing", "erasure"]), probabilities)
    def test_input_marginal_maximally_mixed(self, seed, family, p):
        c = ch.make_channel(ch.ChannelSpec(family, 2, {"p": p}))
        choi = ch.choi_matrix(c)
        red = la.partial_trace(choi.state, [choi.d_in, choi.d_out], {0})
        assert np.allclose(red, I2 / 2, atol=1e-10)

    def test_raw_kraus_marginal(self):
        choi = ch.choi_matrix(ch.from_kraus(AMP_DAMP))
        assert np.allclose(la.partial_trace(choi.state, [2, 2], {0}), I2 / 2, atol=1e-10)


class TestCovariance:
    @pytest.mark.parametrize("family,d", [("depolarizing", 2), ("dephasing", 2), ("erasure", 2),
                                          ("depolarizing", 3), ("erasure", 3)])
    def test_builtins_covariant(self, family, d):
        report = ch.check_teleportation_covariance(ch.make_channel(ch.ChannelSpec(family, d, {"p": 0.3})))
        assert report.covariant and len(report.corrections) == d * d

    def test_depolarizing_corrections_are_the_teleportation_unitaries(self):
        c = ch.depolarizing(0.3)
        report = ch.check_teleportation_covariance(c)
        units = [np.outer(np.eye(2)[i], np.eye(2)[j]) for i in range(2) for j in range(2)]
        for U, V in zip(ch.teleportation_unitaries(2), report.corrections):
            # V equals U up to a phase
            assert abs(abs(np.vdot(U, V)) - 2) < 1e-12
            for m in units:
                lhs = kraus_sum(c.kraus, U @ m @ U.conj().T)
                rhs = V @ kraus_sum(c.kraus, m) @ V.conj().T
                assert np.allclose(lhs, rhs)

    @given(seeds)
    def test_random_pauli_covariant(self, seed):
        rng = np.random.default_rng(seed)
        assert ch.check_teleportation_covariance(ch.pauli(random_probs(rng, 9), 3))

    def test_amplitude_damping_falsified_by_x(self):
        report = ch.check_teleportation_covariance(ch.from_kraus(AMP_DAMP))
        assert not report.covariant
        witness = ch.teleportation_unitaries(2)[report.witness]
        assert np.allclose(np.abs(witness), np.abs(X))
        assert report.residual > 1e-3


class TestClosedForms:
    def test_identical(self):
        assert ch.pauli_choi_fidelity([0.7, 0.1, 0.1, 0.1], [0.7, 0.1, 0.1, 0.1]) == pytest.approx(1.0)

    def test_orthogonal_support(self):
        assert ch.pauli_choi_fidelity([1, 0, 0, 0], [0, 0.5, 0.5, 0]) == 0.0

    @pytest.mark.parametrize("p", [0.1, 0.3, 0.6])
    def test_second_order_expansion(self, p):
        dp = 1e-3
        p0 = np.array([1 - p, p / 3, p / 3, p / 3])
        p1 = np.array([1 - p - dp, (p + dp) / 3, (p + dp) / 3, (p + dp) / 3])
        approx = 1 - np.sum((p1 - p0) ** 2 / p0) / 8
        assert ch.pauli_choi_fidelity(p0, p1) == pytest.approx(approx, abs=1e-8)

    @given(seeds)
    def test_matches_matrix_fidelity(self, seed):
        rng = np.random.default_rng(seed)
        for d in (2, 3):
            a, b = random_probs(rng, d * d), random_probs(rng, d * d)
            ra, rb = ch.bell_diagonal(a, d), ch.bell_diagonal(b, d)
            assert ch.pauli_choi_fidelity(a, b) == pytest.approx(la.fidelity(ra, rb), abs=1e-10)

    def test_relative_entropy_values(self):
        assert ch.pauli_relative_entropy(0.3, 0.3) == pytest.approx(0.0)
        expected = 0.75 * np.log2(1.5) + 0.25 * np.log2(0.5)
        assert ch.pauli_relative_entropy(0.25, 0.5) == pytest.approx(expected, abs=1e-14)
        assert ch.pauli_relative_entropy(0.3, 0.0) == np.inf

    @given(probabilities, probabilities)
    def test_relative_entropy_matches_choi(self, p, q):
        ra = ch.choi_matrix(ch.depolarizing(p)).state
        rb = ch.choi_matrix(ch.depolarizing(q)).state
        assert ch.pauli_relative_entropy(p, q) == pytest.approx(la.relative_entropy(ra, rb), abs=1e-10)
