"""Discrete-variable channels: generalized Pauli, depolarizing, dephasing, erasure.

Weyl operators are ordered ``P_k = X^a Z^b`` with ``k = a*d + b``.  For a qubit
this gives ``(I, Z, X, XZ)``, so the dephasing channel puts its weight on
``k = 1`` and the depolarizing channel spreads ``p`` over ``k = 1, 2, 3``.

The generalized Bell basis is ``|beta_k> = (I ⊗ P_k)|Phi>`` with
``|Phi> = d^{-1/2} sum_j |jj>``.  Choi matrices are ``(I ⊗ E)(Phi)`` with the
reference leg first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import linalg as la
from .errors import DomainError, ShapeError

FAMILIES = ("depolarizing", "dephasing", "erasure", "pauli", "kraus")


# ---------------------------------------------------------------------------
# Weyl operators and Bell basis
# ---------------------------------------------------------------------------

def shift_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.roll(np.eye(d), 1, axis=0).astype(complex)  # X|j> = |j+1>
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return x, z


def generalized_pauli_operators(d: int) -> list[np.ndarray]:
    """The ``d**2`` Weyl operators ``X^a Z^b``, listed with index ``a*d + b``."""
    if d < 2:
        raise DomainError("generalized Pauli operators need d >= 2")
    x, z = shift_clock(d)
    ops = []
    for a in range(d):
        xa = np.linalg.matrix_power(x, a)
        for b in range(d):
            ops.append(xa @ np.linalg.matrix_power(z, b))
    return ops


def max_entangled(d: int) -> np.ndarray:
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / np.sqrt(d)
    return v


def bell_vectors(d: int) -> list[np.ndarray]:
    phi = max_entangled(d)
    eye = np.eye(d)
    return [np.kron(eye, p) @ phi for p in generalized_pauli_operators(d)]


def bell_projectors(d: int) -> list[np.ndarray]:
    return [la.projector(v) for v in bell_vectors(d)]


# ---------------------------------------------------------------------------
# Channel data
# ---------------------------------------------------------------------------

def check_pauli_distribution(probs: Sequence[float], d: int | None = None) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if d is not None and p.size != d * d:
        raise ShapeError(f"Pauli distribution for d={d} needs {d * d} entries, got {p.size}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise DomainError("Pauli probabilities must be nonnegative and sum to 1")
    return p


@dataclass(frozen=True)
class ChannelSpec:
    """Serializable channel description: ``{"family", "d", "params"}``."""

    family: str
    d: int = 2
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelSpec":
        if "family" not in data:
            raise ValueError("channel spec needs a 'family' key")
        return cls(family=data["family"], d=int(data.get("d", 2)), params=dict(data.get("params", {})))

    @classmethod
    def from_json(cls, text: str) -> "ChannelSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "kraus" in params:
            params["kraus"] = kraus_to_json(params["kraus"])
        return {"family": self.family, "d": self.d, "params": params}

    def with_param(self, name: str, value: Any) -> "ChannelSpec":
        params = dict(self.params)
        params[name] = value
        return ChannelSpec(self.family, self.d, params)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    kraus: tuple
    d_in: int
    d_out: int
    spec: ChannelSpec

    @property
    def family(self) -> str:
        return self.spec.family

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    state: np.ndarray
    d_in: int
    d_out: int


def kraus_to_json(kraus: Sequence) -> list:
    """Kraus matrices as nested lists of ``[re, im]`` pairs."""
    out = []
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        out.append([[[float(z.real), float(z.imag)] for z in row] for row in k])
    return out


def kraus_from_json(data: Sequence) -> list[np.ndarray]:
    mats = []
    for k in data:
        arr = np.asarray(k, dtype=float)
        if arr.ndim == 3 and arr.shape[-1] == 2:
            mats.append(arr[..., 0] + 1j * arr[..., 1])
        else:
            mats.append(np.asarray(k, dtype=complex))
    return mats


def pauli_probs(spec: ChannelSpec) -> np.ndarray:
    """Weyl-basis error distribution of a Pauli-type channel spec."""
    d = spec.d
    if spec.family == "pauli":
        return check_pauli_distribution(spec.params["probs"], d)
    p = float(spec.params["p"])
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p} outside [0, 1]")
    probs = np.zeros(d * d)
    probs[0] = 1.0 - p
    if spec.family == "depolarizing":
        probs[1:] = p / (d * d - 1)
    elif spec.family == "dephasing":
        probs[1] = p  # Z, i.e. a = 0, b = 1
    else:
        raise ValueError(f"{spec.family} is not a Pauli family")
    return probs


def _check_completeness(kraus: Sequence[np.ndarray], tol: float = 1e-10) -> None:
    d_in = kraus[0].shape[1]
    s = sum(la.dagger(k) @ k for k in kraus)
    if np.max(np.abs(s - np.eye(d_in))) > tol:
        raise DomainError("Kraus operators are not trace preserving")


def make_channel(spec: ChannelSpec | dict) -> QuantumChannel:
    """Build a channel from its family label and parameters."""
    if isinstance(spec, dict):
        spec = ChannelSpec.from_dict(spec)
    d = spec.d
    fam = spec.family
    if fam in ("depolarizing", "dephasing", "pauli"):
        probs = pauli_probs(spec)
        kraus = [np.sqrt(q) * P for q, P in zip(probs, generalized_pauli_operators(d)) if q > 0]
        return QuantumChannel(tuple(kraus), d, d, spec)
    if fam == "erasure":
        pi = float(spec.params["p"])
        if not 0.0 <= pi <= 1.0:
            raise DomainError(f"erasure probability {pi} outside [0, 1]")
        embed = np.eye(d + 1, d, dtype=complex)
        kraus = []
        if pi < 1:
            kraus.append(np.sqrt(1 - pi) * embed)
        if pi > 0:
            for j in range(d):
                k = np.zeros((d + 1, d), dtype=complex)
                k[d, j] = np.sqrt(pi)
                kraus.append(k)
        return QuantumChannel(tuple(kraus), d, d + 1, spec)
    if fam == "kraus":
        raw = spec.params["kraus"]
        if isinstance(raw[0], list):
            kraus = kraus_from_json(raw)
        else:
            kraus = [np.asarray(k, dtype=complex) for k in raw]
        _check_completeness(kraus)
        d_out, d_in = kraus[0].shape
        return QuantumChannel(tuple(kraus), d_in, d_out, ChannelSpec(fam, d_in, {"kraus": kraus}))
    raise ValueError(f"unknown channel family {fam!r}; expected one of {FAMILIES}")


def depolarizing(p: float, d: int = 2) -> QuantumChannel:
    return make_channel(ChannelSpec("depolarizing", d, {"p": p}))


def dephasing(p: float, d: int = 2) -> QuantumChannel:
    return make_channel(ChannelSpec("dephasing", d, {"p": p}))


def erasure(p: float, d: int = 2) -> QuantumChannel:
    return make_channel(ChannelSpec("erasure", d, {"p": p}))


def pauli(probs: Sequence[float], d: int = 2) -> QuantumChannel:
    return make_channel(ChannelSpec("pauli", d, {"probs": list(map(float, probs))}))


def from_kraus(kraus: Sequence[np.ndarray]) -> QuantumChannel:
    return make_channel(ChannelSpec("kraus", np.asarray(kraus[0]).shape[1], {"kraus": list(kraus)}))


def apply_channel(ch: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.d_in, ch.d_in):
        raise ShapeError(f"channel expects a {ch.d_in}-dimensional input, got shape {rho.shape}")
    return sum(k @ rho @ la.dagger(k) for k in ch.kraus)


def choi_matrix(ch: QuantumChannel) -> ChoiMatrix:
    d = ch.d_in
    phi = la.projector(max_entangled(d))
    state, _ = la.apply_kraus(phi, list(ch.kraus), [d, d], [1])
    return ChoiMatrix(state, d, ch.d_out)


def bell_diagonal(probs: Sequence[float], d: int) -> np.ndarray:
    """``sum_k p_k beta_k``: the Choi matrix of a Pauli channel built directly."""
    return sum(q * P for q, P in zip(probs, bell_projectors(d)))


# ---------------------------------------------------------------------------
# Teleportation covariance
# ---------------------------------------------------------------------------

@dataclass
class CovarianceReport:
    covariant: bool
    corrections: list | None  # V_k for each teleportation unitary U_k
    witness: int | None = None  # index k of a falsifying U_k
    residual: float = 0.0

    def __bool__(self) -> bool:
        return self.covariant


def teleportation_unitaries(d: int) -> list[np.ndarray]:
    """Unitaries left on the receiver after Bell outcome ``k``: ``conj(P_k)``."""
    return [P.conj() for P in generalized_pauli_operators(d)]


def _correction_candidates(ch: QuantumChannel) -> list[np.ndarray]:
    d = ch.d_in
    paulis = generalized_pauli_operators(d)
    if ch.d_out == d:
        return paulis
    if ch.d_out == d + 1:
        # erasure-style output: act on the d-dimensional block, leave the flag fixed
        out = []
        for P in paulis:
            V = np.eye(d + 1, dtype=complex)
            V[:d, :d] = P
            out.append(V)
        return out
    raise ShapeError(f"covariance check needs d_out in {{d_in, d_in+1}}, got {ch.d_out} vs {ch.d_in}")


def check_teleportation_covariance(ch: QuantumChannel, tol: float = 1e-10) -> CovarianceReport:
    """Search, for every teleportation unitary ``U_k``, a correction ``V_k`` with
    ``E(U rho U^dag) = V E(rho) V^dag`` on all matrix units ``|i><j|``.

    Candidates for ``V_k`` are the Weyl operators (block-extended by the
    identity on the erasure flag).  Returns the first falsifying ``k`` if none
    of them works.
    """
    d = ch.d_in
    units = []
    for i in range(d):
        for j in range(d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = 1.0
            units.append(m)
    images = [apply_channel(ch, m) for m in units]
    candidates = _correction_candidates(ch)
    corrections = []
    worst = 0.0
    for k, U in enumerate(teleportation_unitaries(d)):
        lhs = [apply_channel(ch, U @ m @ la.dagger(U)) for m in units]
        best, best_V = np.inf, None
        for V in candidates:
            res = max(np.max(np.abs(l - V @ r @ la.dagger(V))) for l, r in zip(lhs, images))
            if res < best:
                best, best_V = res, V
            if res <= tol:
                break
        if best > tol:
            return CovarianceReport(False, None, witness=k, residual=float(best))
        worst = max(worst, best)
        corrections.append(best_V)
    return CovarianceReport(True, corrections, residual=float(worst))


# ---------------------------------------------------------------------------
# Closed forms for Pauli-type Choi matrices
# ---------------------------------------------------------------------------

def pauli_choi_fidelity(p0: Sequence[float], p1: Sequence[float]) -> float:
    """Bhattacharyya overlap ``sum_k sqrt(p0_k p1_k)`` of two Pauli distributions."""
    a = np.asarray(p0, dtype=float)
    b = np.asarray(p1, dtype=float)
    if a.shape != b.shape:
        raise ShapeError("distributions must have the same length")
    return float(np.sqrt(a * b).sum())


def pauli_relative_entropy(p: float, q: float) -> float:
    """Base-2 relative entropy between depolarizing/dephasing/erasure Choi matrices
    with error probabilities ``p`` and ``q``."""
    return classical_relative_entropy([1 - p, p], [1 - q, q])


def classical_relative_entropy(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    total = 0.0
    for a, b in zip(p, q):
        if a <= 0:
            continue
        if b <= 0:
            return float("inf")
        total += a * np.log2(a / b)
    return float(total)
