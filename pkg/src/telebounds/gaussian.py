"""Two-mode zero-mean Gaussian states.

Conventions: quadrature ordering ``(q1, p1, q2, p2)``, vacuum variance 1/2,
symplectic form ``Omega = diag(w, w)`` with ``w = [[0, 1], [-1, 0]]``.
Mode 1 is the reference (idler) mode of the TMSV, mode 2 is the one sent
through the channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from ._optimize import minimize_unit_interval
from .errors import BoundaryError, DomainError, TruncationError

_W = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA = np.kron(np.eye(2), _W)

BONA_FIDE_TOL = 1e-10
GAUSSIAN_FAMILIES = ("thermal_loss", "amplifier", "additive_noise")


def symplectic_form(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), _W)


@dataclass(frozen=True, eq=False)
class GaussianState:
    cm: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        cm = np.asarray(self.cm, dtype=float)
        object.__setattr__(self, "cm", cm)
        if cm.shape[0] != cm.shape[1] or cm.shape[0] % 2:
            raise DomainError(f"covariance matrix must be 2N x 2N, got {cm.shape}")
        if np.max(np.abs(cm - cm.T)) > 1e-12:
            raise DomainError("covariance matrix is not symmetric")
        if not is_bona_fide(cm):
            raise DomainError("covariance matrix violates the uncertainty principle")

    @property
    def modes(self) -> int:
        return self.cm.shape[0] // 2


def is_bona_fide(cm: np.ndarray, tol: float = BONA_FIDE_TOL) -> bool:
    n = cm.shape[0] // 2
    w = np.linalg.eigvalsh(cm + 0.5j * symplectic_form(n))
    return bool(w[0] >= -tol)


def symplectic_eigenvalues(cm: np.ndarray) -> np.ndarray:
    n = cm.shape[0] // 2
    w = np.linalg.eigvals(1j * symplectic_form(n) @ cm)
    return np.sort(np.abs(w))[::2]


@dataclass(frozen=True)
class GaussianChannelParams:
    """``family`` is thermal_loss (0 <= eta < 1), amplifier (eta > 1) or
    additive_noise (eta = 1, variance ``w``)."""

    family: str
    eta: float = 1.0
    nbar: float = 0.0
    w: float = 0.0

    def __post_init__(self):
        if self.family == "thermal_loss":
            if not 0.0 <= self.eta < 1.0:
                raise DomainError(f"thermal-loss transmissivity {self.eta} outside [0, 1)")
        elif self.family == "amplifier":
            if self.eta <= 1.0:
                raise DomainError(f"amplifier gain {self.eta} must exceed 1")
        elif self.family == "additive_noise":
            if self.w < 0:
                raise DomainError("additive noise variance must be nonnegative")
        else:
            raise ValueError(f"unknown Gaussian family {self.family!r}")
        if self.nbar < 0:
            raise DomainError("thermal photon number must be nonnegative")

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianChannelParams":
        fam = data["family"]
        eta = float(data.get("eta", 1.0))
        return cls(fam, eta=eta, nbar=float(data.get("nbar", 0.0)), w=float(data.get("w", 0.0)))

    def to_dict(self) -> dict:
        return {"family": self.family, "eta": self.eta, "nbar": self.nbar, "w": self.w}

    @property
    def noise(self) -> float:
        """The estimated noise parameter: ``nbar`` or ``w``."""
        return self.w if self.family == "additive_noise" else self.nbar

    def with_noise(self, value: float) -> "GaussianChannelParams":
        if self.family == "additive_noise":
            return GaussianChannelParams(self.family, self.eta, self.nbar, value)
        return GaussianChannelParams(self.family, self.eta, value, self.w)


def _check_mu(mu: float) -> None:
    if mu < 0.5:
        raise DomainError(f"TMSV variance mu={mu} below the vacuum value 1/2")


def tmsv(mu: float) -> GaussianState:
    _check_mu(mu)
    c = np.sqrt(mu * mu - 0.25)
    z = np.diag([c, -c])
    cm = np.block([[mu * np.eye(2), z], [z, mu * np.eye(2)]])
    return GaussianState(cm)


def choi_approx(params: GaussianChannelParams, mu: float) -> GaussianState:
    """Output of the channel acting on mode 2 of a TMSV with variance ``mu``."""
    _check_mu(mu)
    if params.family == "additive_noise":
        c = np.sqrt(mu * mu - 0.25)
        b = mu + params.w
    else:
        eta = params.eta
        c = np.sqrt(eta * (mu * mu - 0.25))
        b = eta * mu + abs(1 - eta) * (params.nbar + 0.5)
    z = np.diag([c, -c])
    cm = np.block([[mu * np.eye(2), z], [z, b * np.eye(2)]])
    return GaussianState(cm)


# ---------------------------------------------------------------------------
# Fidelity
# ---------------------------------------------------------------------------

def _ordered(a: "GaussianState", b: "GaussianState"):
    # a fixed argument order makes the result exactly symmetric
    return (a, b) if tuple(a.cm.ravel()) <= tuple(b.cm.ravel()) else (b, a)


def _aux(v1, v2, om, inv):
    vs = v1 + v2
    return om.T @ inv(vs) @ (om / 4 + v2 @ om @ v1) @ om, vs


def gaussian_fidelity(a: GaussianState, b: GaussianState) -> float:
    """Bures fidelity of two zero-mean Gaussian states.

    Multimode formula ``F = (F_tot / det(V1 + V2))^{1/4}``.  With ``+-i v_k``
    the eigenvalues of ``V_aux Omega``, ``F_tot = prod_k (2 v_k + sqrt(4 v_k^2 - 1))``
    over all ``2N`` eigenvalues, which avoids a matrix square root that is
    singular when either state has a pure mode.
    """
    a, b = _ordered(a, b)
    om = symplectic_form(a.modes)
    m, vs = _aux(a.cm, b.cm, om, np.linalg.inv)
    v = np.abs(np.linalg.eigvals(m).imag)
    ftot = np.prod(2 * v + np.sqrt(np.clip(4 * v * v - 1, 0.0, None)))
    f = (ftot / np.linalg.det(vs)) ** 0.25
    return float(min(1.0, f))


def _mp_matrix(x: np.ndarray) -> mp.matrix:
    return mp.matrix([[mp.mpf(float(v)) for v in row] for row in x])


def gaussian_fidelity_mp(a: GaussianState, b: GaussianState, dps: int = 50) -> mp.mpf:
    """Same formula as :func:`gaussian_fidelity` in ``dps``-digit arithmetic."""
    a, b = _ordered(a, b)
    with mp.workdps(dps):
        om = _mp_matrix(symplectic_form(a.modes))
        m, vs = _aux(_mp_matrix(a.cm), _mp_matrix(b.cm), om, lambda x: x**-1)
        ftot = mp.mpf(1)
        for ev in mp.eig(m, left=False, right=False):
            v = abs(mp.im(ev))
            ftot *= 2 * v + mp.sqrt(max(4 * v * v - 1, 0))
        return (ftot / mp.det(vs)) ** mp.mpf(0.25)


def gaussian_infidelity(a: GaussianState, b: GaussianState, dps: int = 50) -> float:
    """``1 - F`` evaluated without cancellation, for finite-difference QFIs."""
    with mp.workdps(dps):
        return float(1 - gaussian_fidelity_mp(a, b, dps))


# ---------------------------------------------------------------------------
# Fock-space representation
# ---------------------------------------------------------------------------

def _husimi_amat(cm: np.ndarray) -> tuple[np.ndarray, float]:
    """Matrix ``A`` and prefactor ``T`` of the Fock generating function."""
    n = cm.shape[0] // 2
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    vx = cm[np.ix_(perm, perm)]  # (q..., p...)
    eye = np.eye(n)
    w = np.block([[eye, 1j * eye], [eye, -1j * eye]]) / np.sqrt(2)
    sigma = w @ vx @ w.conj().T  # complex covariance of (a, a^dag)
    sigma_q = sigma + np.eye(2 * n) / 2
    x = np.block([[0 * eye, eye], [eye, 0 * eye]])
    a = x @ (np.eye(2 * n) - np.linalg.inv(sigma_q)).conj()
    t = 1.0 / np.sqrt(np.linalg.det(sigma_q).real)
    return a, t


def _hermite_table(a: np.ndarray, cut: int) -> np.ndarray:
    """Normalized multivariate Hermite numbers ``H_k(0) / sqrt(k!)``.

    Recurrence ``G[k + e_i] = sum_j a_ij sqrt(k_j) G[k - e_j] / sqrt(k_i + 1)``,
    filled one axis at a time so each step is a vectorized slice update.
    """
    sq = np.sqrt(np.arange(cut))

    def fill(k: int) -> np.ndarray:
        if k == 0:
            return np.ones((), dtype=complex)
        g = np.zeros((cut,) * k, dtype=complex)
        g[..., 0] = fill(k - 1)
        for m in range(cut - 1):
            cur = g[..., m]
            acc = np.zeros_like(cur)
            for j in range(k - 1):
                shifted = np.zeros_like(cur)
                dst = [slice(None)] * (k - 1)
                src = [slice(None)] * (k - 1)
                dst[j], src[j] = slice(1, None), slice(0, -1)
                shape = [1] * (k - 1)
                shape[j] = cut - 1
                shifted[tuple(dst)] = cur[tuple(src)] * sq[1:].reshape(shape)
                acc += a[k - 1, j] * shifted
            if m > 0:
                acc += a[k - 1, k - 1] * sq[m] * g[..., m - 1]
            g[..., m + 1] = acc / np.sqrt(m + 1)
        return g

    return fill(a.shape[0])


def fock_truncate(
    g: GaussianState, nmax: int = 30, max_deficit: float = 1e-3
) -> tuple[np.ndarray, float]:
    """Density matrix of ``g`` on Fock states with at most ``nmax`` photons per mode.

    Returns ``(rho, deficit)`` where ``deficit = 1 - Tr rho``.  Subsystem
    order is mode 1 then mode 2, each of dimension ``nmax + 1``.
    """
    if nmax < 1:
        raise ValueError("nmax must be at least 1")
    if np.any(np.asarray(g.mean) != 0):
        raise DomainError("only zero-mean states are supported")
    a, t = _husimi_amat(g.cm)
    cut = nmax + 1
    table = _hermite_table(a, cut) * t
    d = cut ** g.modes
    rho = table.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    deficit = float(1.0 - np.trace(rho).real)
    if deficit > max_deficit:
        raise TruncationError(f"Fock truncation at nmax={nmax} loses weight {deficit:.2e}")
    return rho, deficit


# ---------------------------------------------------------------------------
# Asymptotic (mu -> infinity) closed forms
# ---------------------------------------------------------------------------

def asymptotic_thermal_fidelity(n0: float, n1: float) -> float:
    """Fidelity between asymptotic Choi matrices of two thermal-loss (or
    amplifier) channels with equal gain and thermal photon numbers ``n0, n1``."""
    if n0 < 0 or n1 < 0:
        raise DomainError("thermal photon numbers must be nonnegative")
    inner = 2 * n0 * n1 + n0 + n1 + 1 + 2 * np.sqrt(n0 * n1 * (n0 + 1) * (n1 + 1))
    return float(np.sqrt(inner) / (n0 + n1 + 1))


def asymptotic_additive_fidelity_qcb(w0: float, w1: float) -> tuple[float, float]:
    """Asymptotic fidelity and Chernoff overlap for additive-noise channels."""
    if w0 <= 0 or w1 <= 0:
        raise BoundaryError("additive-noise variances must be positive")
    fid = 2 * np.sqrt(w0 * w1) / (w0 + w1)

    def q_s(s):
        return w0 ** (1 - s) * w1**s / ((1 - s) * w0 + s * w1)

    res = minimize_unit_interval(q_s, limit0=1.0, limit1=1.0)
    return float(fid), res.value
