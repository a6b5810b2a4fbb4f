"""Quantum Fisher information of channel families evaluated on Choi matrices.

For a teleportation-covariant family ``E_theta`` the adaptive QFI over ``n``
probings is ``n * B`` with ``B = 8 (1 - F(rho_theta, rho_theta+dtheta)) / dtheta^2``
evaluated on the Choi matrix.  Finite differences use the symmetric pair
``theta -/+ dtheta/2`` so the truncation error is second order in ``dtheta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import channels as ch
from . import gaussian as gs
from . import linalg as la
from .errors import BoundaryError, DomainError, ShapeError

DISCRETE_FAMILIES = ("depolarizing", "dephasing", "erasure")
QCRB_CAVEAT = "multiparameter QCRB: not known to be achievable"


# ---------------------------------------------------------------------------
# Parameterized Choi families
# ---------------------------------------------------------------------------

def discrete_choi(family: str, theta: float, d: int = 2) -> np.ndarray:
    """Choi matrix of a one-parameter discrete family at error probability ``theta``."""
    spec = ch.ChannelSpec(family, d, {"p": theta})
    if family in ("depolarizing", "dephasing"):
        return ch.bell_diagonal(ch.pauli_probs(spec), d)
    return ch.choi_matrix(ch.make_channel(spec)).state


def pauli_choi_family(d: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    """``Theta = (p_1, ..., p_{d^2-1}) -> sum_k p_k beta_k`` with ``p_0 = 1 - sum(Theta)``."""
    projs = ch.bell_projectors(d)

    def family(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        probs = np.concatenate([[1.0 - theta.sum()], theta])
        return sum(q * P for q, P in zip(probs, projs))

    return family


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def qfi_probability(p: float) -> float:
    """``[p(1-p)]^{-1}``: depolarizing, dephasing and erasure channels."""
    if not 0.0 < p < 1.0:
        raise BoundaryError(f"QFI diverges at the boundary p={p} (needs 0 < p < 1)")
    return 1.0 / (p * (1.0 - p))


def qfi_thermal(nbar: float, eta: float, mu: float | None = None) -> float:
    """QFI for the thermal photon number of a loss/amplifier channel.

    With ``mu`` it is the finite-squeezing value; without, the ``mu -> inf`` limit.
    """
    if nbar <= 0:
        raise BoundaryError(f"QFI diverges at nbar={nbar} (needs nbar > 0)")
    limit = 1.0 / (nbar * (nbar + 1.0))
    if mu is None:
        return limit
    a = abs(1.0 - eta) * (2.0 + 4.0 * nbar) * mu
    return limit * (a + 1.0 - eta) / (a + 1.0 + eta)


def qfi_additive(w: float, mu: float | None = None) -> float:
    if w <= 0:
        raise BoundaryError(f"QFI diverges at w={w} (needs w > 0)")
    if mu is None:
        return 1.0 / (w * w)
    return 8.0 * mu / (8.0 * w * w * mu + 4.0 * w)


# ---------------------------------------------------------------------------
# Single-parameter QFI
# ---------------------------------------------------------------------------

def qfi_from_fidelity(rho_theta: np.ndarray, rho_theta_plus: np.ndarray, dtheta: float) -> float:
    if dtheta <= 0:
        raise DomainError("dtheta must be positive")
    f = la.fidelity(rho_theta, rho_theta_plus)
    return max(0.0, 8.0 * (1.0 - f) / dtheta**2)


def fd_qfi(family: Callable[[float], np.ndarray], theta: float, dtheta: float) -> float:
    """Symmetric-pair fidelity QFI of a state family ``theta -> rho``."""
    return qfi_from_fidelity(family(theta - dtheta / 2), family(theta + dtheta / 2), dtheta)


def gaussian_fd_qfi(params: gs.GaussianChannelParams, mu: float, dtheta: float) -> float:
    """Finite-difference QFI of the noise parameter on finite-``mu`` Choi states."""
    x = params.noise
    a = gs.choi_approx(params.with_noise(x - dtheta / 2), mu)
    b = gs.choi_approx(params.with_noise(x + dtheta / 2), mu)
    return max(0.0, 8.0 * gs.gaussian_infidelity(a, b) / dtheta**2)


@dataclass(frozen=True)
class EstimationTask:
    """``family`` is a discrete family name or a :class:`GaussianChannelParams`
    (whose noise parameter is then the one estimated, and ``theta`` overrides it)."""

    family: str | gs.GaussianChannelParams
    theta: float
    dtheta: float = 1e-4
    n: int = 1
    mu: float | None = None
    d: int = 2

    def __post_init__(self):
        if self.dtheta <= 0:
            raise DomainError("dtheta must be positive")
        if self.n < 1:
            raise DomainError("n must be at least 1")


@dataclass
class QfiResult:
    B: float
    adaptive_qfi: float
    qcrb: float
    method: str  # closed_form | finite_difference
    mu_used: float | None = None
    b_closed: float | None = None
    b_numeric: float | None = None
    relative_gap: float | None = None
    richardson_ok: bool | None = None


def _result(task: EstimationTask, closed: float | None, numeric: float | None,
            richardson_ok: bool | None) -> QfiResult:
    B = closed if closed is not None else numeric
    gap = None
    if closed is not None and numeric is not None:
        gap = abs(numeric - closed) / closed
    return QfiResult(
        B=B,
        adaptive_qfi=task.n * B,
        qcrb=1.0 / (task.n * B) if B > 0 else float("inf"),
        method="closed_form" if closed is not None else "finite_difference",
        mu_used=task.mu,
        b_closed=closed,
        b_numeric=numeric,
        relative_gap=gap,
        richardson_ok=richardson_ok,
    )


def _richardson(fd: Callable[[float], float], dtheta: float, value: float) -> bool:
    half = fd(dtheta / 2)
    return bool(value > 0 and abs(half - value) / value < 1e-3)


def channel_qfi(task: EstimationTask, numeric: bool = True) -> QfiResult:
    """Per-probe QFI ``B``, adaptive QFI ``n B`` and the QCRB ``1/(n B)``.

    Closed forms are used whenever they exist; the finite-difference Choi
    value is computed alongside (``numeric=True``) so the two can be compared.
    """
    fam = task.family
    theta, dt = task.theta, task.dtheta
    if isinstance(fam, gs.GaussianChannelParams):
        params = fam.with_noise(theta)
        if params.family == "additive_noise":
            closed = qfi_additive(theta, task.mu)
        else:
            closed = qfi_thermal(theta, params.eta, task.mu)
        if task.mu is None or not numeric:
            return _result(task, closed, None, None)
        if theta - dt / 2 <= 0:
            raise BoundaryError(f"finite difference at {theta} crosses the boundary 0")

        def fd(h):
            return gaussian_fd_qfi(params, task.mu, h)

        value = fd(dt)
        return _result(task, closed, value, _richardson(fd, dt, value))

    if fam not in DISCRETE_FAMILIES:
        raise ValueError(f"no QFI rule for family {fam!r}")
    closed = qfi_probability(theta)
    if not numeric:
        return _result(task, closed, None, None)
    if not 0.0 < theta - dt / 2 or not theta + dt / 2 < 1.0:
        raise BoundaryError(f"finite difference at p={theta} leaves (0, 1)")

    def fd(h):
        return fd_qfi(lambda p: discrete_choi(fam, p, task.d), theta, h)

    value = fd(dt)
    return _result(task, closed, value, _richardson(fd, dt, value))


# ---------------------------------------------------------------------------
# Multiparameter QFI
# ---------------------------------------------------------------------------

def sld(rho: np.ndarray, drho: np.ndarray, kernel_tol: float = 1e-12) -> np.ndarray:
    """Symmetric logarithmic derivative ``L`` solving ``drho = (rho L + L rho) / 2``.

    In the eigenbasis of ``rho``: ``L_jk = 2 <e_j|drho|e_k> / (D_j + D_k)``,
    dropping pairs with ``D_j + D_k <= kernel_tol``.
    """
    drho = np.asarray(drho, dtype=complex)
    if np.max(np.abs(drho - la.dagger(drho)), initial=0.0) > 1e-10:
        raise DomainError("state derivative is not Hermitian")
    w, v = la.psd_eigh(rho)
    denom = w[:, None] + w[None, :]
    mask = denom > kernel_tol
    d_eig = la.dagger(v) @ drho @ v
    l_eig = np.zeros_like(d_eig)
    l_eig[mask] = 2.0 * d_eig[mask] / denom[mask]
    out = v @ l_eig @ la.dagger(v)
    return 0.5 * (out + la.dagger(out))


@dataclass
class MultiParamQfi:
    matrix: np.ndarray
    params: list[str]
    slds: list[np.ndarray] = field(repr=False, default_factory=list)

    def qcrb(self, n: int = 1) -> tuple[np.ndarray, str]:
        """``I^{-1} / n`` together with the achievability caveat."""
        return np.linalg.inv(self.matrix) / n, QCRB_CAVEAT


def qfi_matrix(
    family: Callable[[np.ndarray], np.ndarray],
    theta: Sequence[float],
    steps: Sequence[float] | float = 1e-5,
    names: Sequence[str] | None = None,
) -> MultiParamQfi:
    """QFI matrix ``I_{mu nu} = Re Tr[rho (L_mu L_nu + L_nu L_mu) / 2]`` with
    derivatives from central differences of ``family``."""
    theta = np.asarray(theta, dtype=float)
    m = theta.size
    steps = np.broadcast_to(np.asarray(steps, dtype=float), (m,))
    rho = family(theta)
    slds = []
    for mu in range(m):
        e = np.zeros(m)
        e[mu] = steps[mu]
        drho = (family(theta + e) - family(theta - e)) / (2 * steps[mu])
        slds.append(sld(rho, drho))
    mat = np.empty((m, m))
    for a in range(m):
        for b in range(a, m):
            val = np.trace(rho @ (slds[a] @ slds[b] + slds[b] @ slds[a])).real / 2
            mat[a, b] = mat[b, a] = val
    names = list(names) if names is not None else [f"theta{i}" for i in range(m)]
    return MultiParamQfi(mat, names, slds)


def curve_qfi(qm: MultiParamQfi, velocity: Sequence[float]) -> float:
    v = np.asarray(velocity, dtype=float)
    if v.shape != (qm.matrix.shape[0],):
        raise ShapeError(f"velocity of length {v.size} for a {qm.matrix.shape[0]}-parameter QFI")
    return float(max(0.0, v @ qm.matrix @ v))
