"""Error probabilities for discriminating two equiprobable channels.

For teleportation-covariant channels every adaptive strategy is bounded by the
Helstrom error on ``n`` copies of the Choi matrices, which in turn sits in the
chain::

    max(fidelity_lower, pinsker_lower) <= p_err <= Q^n / 2 <= F^n / 2
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import channels as ch
from . import gaussian as gs
from . import linalg as la
from ._optimize import minimize_unit_interval
from .errors import DimensionLimitError, DomainError, ShapeError, TruncationError

ORDER_TOL = 1e-10
LN_SQRT2 = math.log(math.sqrt(2.0))


# ---------------------------------------------------------------------------
# State-level quantities
# ---------------------------------------------------------------------------

def helstrom_ncopy(rho0: np.ndarray, rho1: np.ndarray, n: int = 1, cap: int = la.DIM_CAP) -> float:
    """Minimum error probability ``[1 - D(rho0^{⊗n}, rho1^{⊗n})] / 2``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if rho0.shape[0] ** n > cap:
        raise DimensionLimitError(
            f"{n} copies of a {rho0.shape[0]}-dimensional state exceed the cap {cap}; "
            "use bound_chain for bounds instead"
        )
    a = la.tensor_power(rho0, n, cap=cap)
    b = la.tensor_power(rho1, n, cap=cap)
    return 0.5 * (1.0 - la.trace_distance(a, b))


class _Spectral(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    overlap: np.ndarray


def _spectral(rho0, rho1) -> _Spectral:
    if rho0.shape != rho1.shape:
        raise ShapeError(f"shape mismatch {rho0.shape} vs {rho1.shape}")
    a, va = la.psd_eigh(rho0)
    b, vb = la.psd_eigh(rho1)
    a = np.where(a > la.SUPPORT_TOL, a, 0.0)
    b = np.where(b > la.SUPPORT_TOL, b, 0.0)
    return _Spectral(a, b, np.abs(la.dagger(va) @ vb) ** 2)


def _power(x: np.ndarray, s: float) -> np.ndarray:
    out = np.zeros_like(x)
    mask = x > 0
    out[mask] = x[mask] ** s
    return out


def _qs(sp: _Spectral, s: float) -> float:
    return float(_power(sp.a, s) @ sp.overlap @ _power(sp.b, 1.0 - s))


def chernoff_qs(rho0: np.ndarray, rho1: np.ndarray, s: float) -> float:
    """``Q_s = Tr(rho0^s rho1^{1-s})``."""
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s={s} outside [0, 1]")
    return _qs(_spectral(rho0, rho1), s)


def chernoff(rho0: np.ndarray, rho1: np.ndarray) -> tuple[float, float]:
    """Quantum Chernoff overlap ``Q = inf_s Q_s`` and the minimizing ``s``.

    The endpoint limits ``s -> 0+`` (``Tr P0 rho1``, ``P0`` the support
    projector of ``rho0``) and ``s -> 1-`` are compared with the interior
    minimum, since the infimum may sit at either end.
    """
    sp = _spectral(rho0, rho1)
    res = minimize_unit_interval(
        lambda s: _qs(sp, s),
        limit0=_qs(sp, 0.0),
        limit1=_qs(sp, 1.0),
    )
    return res.value, res.s


def thermal_qcb(n0: float, n1: float) -> tuple[float, float]:
    """Asymptotic Chernoff overlap of two thermal-loss (or amplifier) channels
    with equal gain, ``inf_s [(n0+1)^s (n1+1)^{1-s} - n0^s n1^{1-s}]^{-1}``,
    optimized over the open interval."""
    if n0 < 0 or n1 < 0:
        raise DomainError("thermal photon numbers must be nonnegative")

    def pw(x, s):
        return 0.0 if x == 0.0 else x**s

    def q(s):
        return 1.0 / ((n0 + 1) ** s * (n1 + 1) ** (1 - s) - pw(n0, s) * pw(n1, 1 - s))

    # one-sided limits: x^s -> 1 for x > 0 but 0^s = 0 for every s > 0
    lim0 = 1.0 / ((n1 + 1) - (n1 if n0 > 0 else 0.0))
    lim1 = 1.0 / ((n0 + 1) - (n0 if n1 > 0 else 0.0))
    res = minimize_unit_interval(q, limit0=lim0, limit1=lim1)
    return res.value, res.s


# ---------------------------------------------------------------------------
# Estimation <-> infinitesimal discrimination
# ---------------------------------------------------------------------------

class BridgeBounds(NamedTuple):
    lower: float
    upper: float
    asymptotic_perr: float | None


def infinitesimal_bridge(i_theta: float, dtheta: float, n: int,
                         qcb_equals_fidelity: bool = False) -> BridgeBounds:
    """Bounds on the ``n``-copy error for ``rho_theta`` vs ``rho_theta+dtheta``
    implied by a QFI ``i_theta``."""
    if i_theta < 0:
        raise DomainError("QFI must be nonnegative")
    x = n * i_theta * dtheta**2
    lower = 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - math.exp(-x / 4))))
    upper = 0.5 * math.exp(-x / 8)
    return BridgeBounds(lower, upper, upper if qcb_equals_fidelity else None)


def qfi_bounds_from_error(p_theta: float, dtheta: float) -> tuple[float, float]:
    """QFI sandwich implied by a single-copy error probability ``p_theta``."""
    if not 0.0 <= p_theta <= 0.5:
        raise DomainError("error probability must lie in [0, 1/2]")
    g = 1.0 - 2.0 * p_theta
    lower = 8.0 * (1.0 - math.sqrt(max(0.0, 1.0 - g * g))) / dtheta**2
    upper = 8.0 * g / dtheta**2
    return lower, upper


def vacuum_discrimination(dn: float, n: int) -> tuple[float, float]:
    """Vacuum noise vs thermal noise ``dn``: the bound ``(1 + dn)^{-n} / 2``
    and its first-order form ``exp(-n dn) / 2``."""
    if dn < 0:
        raise DomainError("dn must be nonnegative")
    return 0.5 * (1.0 + dn) ** (-n), 0.5 * math.exp(-n * dn)


# ---------------------------------------------------------------------------
# Bound reports
# ---------------------------------------------------------------------------

@dataclass
class DiscriminationTask:
    ch0: ch.ChannelSpec | gs.GaussianChannelParams
    ch1: ch.ChannelSpec | gs.GaussianChannelParams
    n: int = 1
    mu: float | None = None
    nmax: int = 30

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be at least 1")
        g0 = isinstance(self.ch0, gs.GaussianChannelParams)
        g1 = isinstance(self.ch1, gs.GaussianChannelParams)
        if g0 != g1:
            raise ValueError("cannot discriminate a discrete channel from a bosonic one")
        if g0:
            if self.ch0.family != self.ch1.family or self.ch0.eta != self.ch1.eta:
                raise ValueError("Gaussian channels must share family and gain")
        elif self.ch0.d != self.ch1.d:
            raise ValueError("discrete channels must act on the same dimension")

    @property
    def gaussian(self) -> bool:
        return isinstance(self.ch0, gs.GaussianChannelParams)


@dataclass
class BoundReport:
    n: int
    fidelity: float
    qcb: float
    s_star: float
    fidelity_lower: float
    pinsker_lower: float | None
    lower: float
    active_lower: str
    qcb_upper: float
    fidelity_upper: float
    helstrom: float | None = None
    relative_entropy: float | None = None
    asymptotic: bool = False
    finite_mu: dict | None = None
    notes: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def ordering_violations(self, tol: float = ORDER_TOL) -> list[str]:
        """Links of the bound chain that fail by more than ``tol``."""
        bad = []
        top = self.helstrom if self.helstrom is not None else self.qcb_upper
        if self.lower > top + tol:
            bad.append("lower <= helstrom")
        if self.helstrom is not None and self.helstrom > self.qcb_upper + tol:
            bad.append("helstrom <= qcb_upper")
        if self.qcb_upper > self.fidelity_upper + tol:
            bad.append("qcb_upper <= fidelity_upper")
        for name in ("lower", "qcb_upper", "fidelity_upper", "helstrom"):
            v = getattr(self, name)
            if v is not None and not (-tol <= v <= 0.5 + tol):
                bad.append(f"{name} in [0, 1/2]")
        return bad


PROVENANCE = {
    "fidelity_lower": "(1 - sqrt(1 - F^(2n))) / 2",
    "pinsker_lower": "(1 - sqrt(n ln(sqrt 2) min{S(0||1), S(1||0)})) / 2, clamped at 0",
    "qcb_upper": "Q^n / 2 with Q = inf_s Tr(rho0^s rho1^(1-s))",
    "fidelity_upper": "F^n / 2",
    "helstrom": "(1 - D(rho0^(⊗n), rho1^(⊗n))) / 2",
}


def _assemble(n, fid, q, s_star, s_rel, helstrom, asymptotic, provenance, notes=None,
              finite_mu=None) -> BoundReport:
    fid_lower = 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - fid ** (2 * n))))
    pinsker = None
    if s_rel is not None:
        arg = n * LN_SQRT2 * s_rel
        pinsker = 0.5 * (1.0 - math.sqrt(arg)) if arg < 1.0 else 0.0
    lower, active = fid_lower, "fidelity"
    if pinsker is not None and pinsker > fid_lower:
        lower, active = pinsker, "pinsker"
    return BoundReport(
        n=n, fidelity=fid, qcb=q, s_star=s_star,
        fidelity_lower=fid_lower, pinsker_lower=pinsker, lower=lower, active_lower=active,
        qcb_upper=0.5 * q**n, fidelity_upper=0.5 * fid**n,
        helstrom=helstrom, relative_entropy=s_rel, asymptotic=asymptotic,
        finite_mu=finite_mu, notes=list(notes or []), provenance=provenance,
    )


def discrete_bound_chain(rho0: np.ndarray, rho1: np.ndarray, n: int,
                         cap: int = la.DIM_CAP) -> BoundReport:
    """Bound report for ``n`` copies of two explicit states (e.g. Choi matrices)."""
    fid = la.fidelity(rho0, rho1)
    q, s_star = chernoff(rho0, rho1)
    s_rel = min(la.relative_entropy(rho0, rho1), la.relative_entropy(rho1, rho0))
    notes = []
    try:
        helstrom = helstrom_ncopy(rho0, rho1, n, cap=cap)
    except DimensionLimitError as exc:
        helstrom = None
        notes.append(f"bound-only: {exc}")
    return _assemble(n, fid, q, s_star, s_rel, helstrom, False, dict(PROVENANCE), notes)


def _gaussian_finite_mu(task: DiscriminationTask) -> dict:
    a = gs.choi_approx(task.ch0, task.mu)
    b = gs.choi_approx(task.ch1, task.mu)
    out = {"mu": task.mu, "nmax": task.nmax, "fidelity": gs.gaussian_fidelity(a, b)}
    try:
        ra, da = gs.fock_truncate(a, task.nmax)
        rb, db = gs.fock_truncate(b, task.nmax)
    except TruncationError as exc:
        out["note"] = f"bound-only: {exc}"
        return out
    q, s = chernoff(ra, rb)
    out.update({"qcb": q, "s_star": s, "deficit": max(da, db)})
    return out


def bound_chain(task: DiscriminationTask) -> BoundReport:
    """Assemble every bound of the chain for two channels and ``n`` uses.

    Discrete channels use their Choi matrices (exact Helstrom included when
    the ``n``-copy dimension fits the cap).  Gaussian channels use the
    asymptotic closed forms; with ``mu`` set, finite-squeezing fidelity and
    Fock-truncated Chernoff values are attached under ``finite_mu``.
    """
    n = task.n
    if not task.gaussian:
        rho0 = ch.choi_matrix(ch.make_channel(task.ch0)).state
        rho1 = ch.choi_matrix(ch.make_channel(task.ch1)).state
        return discrete_bound_chain(rho0, rho1, n)

    fam = task.ch0.family
    prov = {k: v for k, v in PROVENANCE.items() if k in ("fidelity_lower", "qcb_upper", "fidelity_upper")}
    notes = ["exact Helstrom not computed for bosonic channels",
             "asymptotic relative entropy not available; Pinsker bound omitted"]
    if fam == "additive_noise":
        fid, q = gs.asymptotic_additive_fidelity_qcb(task.ch0.w, task.ch1.w)
        s_star = float("nan")
        w0, w1 = task.ch0.w, task.ch1.w
        if w0 != w1:
            res = minimize_unit_interval(
                lambda s: w0 ** (1 - s) * w1**s / ((1 - s) * w0 + s * w1), limit0=1.0, limit1=1.0
            )
            s_star = res.s
        prov["fidelity"] = "2 sqrt(w0 w1) / (w0 + w1)"
        prov["qcb"] = "inf_s w0^(1-s) w1^s / ((1-s) w0 + s w1)"
    else:
        fid = gs.asymptotic_thermal_fidelity(task.ch0.nbar, task.ch1.nbar)
        q, s_star = thermal_qcb(task.ch0.nbar, task.ch1.nbar)
        prov["fidelity"] = "asymptotic thermal-channel Choi fidelity F(n0, n1)"
        prov["qcb"] = "inf_s [(n0+1)^s (n1+1)^(1-s) - n0^s n1^(1-s)]^(-1)"
    finite = _gaussian_finite_mu(task) if task.mu is not None else None
    return _assemble(n, fid, q, s_star, None, None, True, prov, notes, finite)
