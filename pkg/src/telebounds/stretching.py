"""Teleportation simulation and stretching of adaptive protocols.

An adaptive protocol over ``n`` rounds is a register (list of subsystem
dimensions), a preparation ``ops[0]`` applied to ``|0...0>``, and after every
transmission of subsystem ``probe_slots[i]`` through the channel an arbitrary
CPTP map ``ops[i + 1]`` on the whole register.  Measurements are deferred, so
every map is given by Kraus operators and the output is a single state.

``run_adaptive`` evaluates the protocol directly.  ``run_stretched`` replaces
each transmission by teleportation over a fresh copy of the channel's Choi
matrix and evaluates the resulting channel-independent map on ``rho_E^{⊗n}``.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import channels as ch
from . import linalg as la
from . import metrology as met
from .errors import CovarianceError, DomainError, ShapeError

Kraus = list  # list of 2-D complex arrays
MAX_FUZZ_REGISTER = 16


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class AdaptiveProtocol:
    register_dims: list[int]
    ops: list[Kraus]  # n + 1 maps: preparation, then one after each round
    probe_slots: list[int]

    def __post_init__(self):
        if len(self.ops) != len(self.probe_slots) + 1:
            raise ShapeError("need exactly one map per round plus the preparation")
        for i, kraus in enumerate(self.ops):
            d = kraus[0].shape[1]
            s = sum(la.dagger(k) @ k for k in kraus)
            if np.max(np.abs(s - np.eye(d))) > 1e-10:
                raise DomainError(f"map {i} is not trace preserving")
        if any(not 0 <= s < len(self.register_dims) for s in self.probe_slots):
            raise ShapeError("probe slot outside the register")

    @property
    def n(self) -> int:
        return len(self.probe_slots)

    def to_dict(self) -> dict:
        return {
            "register_dims": list(self.register_dims),
            "probe_slots": list(self.probe_slots),
            "ops": [ch.kraus_to_json(k) for k in self.ops],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AdaptiveProtocol":
        return cls(
            register_dims=[int(x) for x in data["register_dims"]],
            ops=[ch.kraus_from_json(k) for k in data["ops"]],
            probe_slots=[int(x) for x in data["probe_slots"]],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "AdaptiveProtocol":
        return cls.from_dict(json.loads(text))


def _vacuum(dims: Sequence[int]) -> np.ndarray:
    D = int(np.prod(dims))
    rho = np.zeros((D, D), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def _apply_register_map(rho, kraus, dims, targets):
    D = int(np.prod([dims[t] for t in targets]))
    if kraus[0].shape != (D, D):
        raise ShapeError(f"register map of shape {kraus[0].shape} does not fit register dimension {D}")
    return la.apply_kraus(rho, kraus, dims, targets)


def run_adaptive(prot: AdaptiveProtocol, channel: ch.QuantumChannel) -> np.ndarray:
    """Exact output state ``Lambda_n ∘ E ∘ ... ∘ E ∘ Lambda_0 (|0><0|)``."""
    dims = list(prot.register_dims)
    reg = list(range(len(dims)))
    rho, dims = _apply_register_map(_vacuum(dims), prot.ops[0], dims, reg)
    for i, slot in enumerate(prot.probe_slots):
        if dims[slot] != channel.d_in:
            raise ShapeError(f"round {i}: slot {slot} has dimension {dims[slot]}, channel expects {channel.d_in}")
        rho, dims = la.apply_kraus(rho, list(channel.kraus), dims, [slot])
        rho, dims = _apply_register_map(rho, prot.ops[i + 1], dims, reg)
    return rho


def output_dims(prot: AdaptiveProtocol, channel: ch.QuantumChannel) -> list[int]:
    dims = list(prot.register_dims)
    for slot in prot.probe_slots:
        dims[slot] = channel.d_out
    return dims


# ---------------------------------------------------------------------------
# Teleportation simulation
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class TeleportationSimulation:
    """Bell detection on (input, resource input leg) followed by the
    correction ``V_k^dag`` on the resource output leg, averaged over ``k``."""

    resource: ch.ChoiMatrix
    bell_vectors: list[np.ndarray]
    corrections: list[np.ndarray]

    @property
    def bell_basis(self) -> list[np.ndarray]:
        return [la.projector(v) for v in self.bell_vectors]

    def lo_cc_kraus(self) -> list[np.ndarray]:
        """Kraus operators ``<beta_k| ⊗ V_k^dag`` of the teleportation LOCC,
        mapping (input ⊗ resource) to the output system."""
        out = []
        for v, V in zip(self.bell_vectors, self.corrections):
            out.append(np.kron(v.conj()[None, :], la.dagger(V)))
        return out


def teleportation_simulation(channel: ch.QuantumChannel, strict: bool = True) -> TeleportationSimulation:
    """Simulation of ``channel`` by teleportation over its Choi matrix.

    With ``strict`` a non-covariant channel raises :class:`CovarianceError`;
    otherwise identity corrections are used, and the mismatch surfaces in
    :func:`teleport_simulate` with ``verify=True``.
    """
    report = ch.check_teleportation_covariance(channel)
    if report.covariant:
        corrections = report.corrections
    elif strict:
        raise CovarianceError(
            f"channel is not teleportation covariant (falsified by U_{report.witness})",
            witness=report.witness,
        )
    else:
        corrections = [np.eye(channel.d_out, dtype=complex)] * channel.d_in**2
    return TeleportationSimulation(
        ch.choi_matrix(channel), ch.bell_vectors(channel.d_in), list(corrections)
    )


def _teleport_in_place(sim, rho, dims, slot, res_pos):
    """Teleport subsystem ``slot`` over the resource at ``res_pos, res_pos + 1``."""
    return la.apply_kraus(rho, sim.lo_cc_kraus(), dims, [slot, res_pos, res_pos + 1])


def teleport_simulate(
    sim: TeleportationSimulation,
    rho: np.ndarray,
    dims: Sequence[int] | None = None,
    slot: int = 0,
    channel: ch.QuantumChannel | None = None,
    verify: bool = False,
) -> np.ndarray:
    """``T(rho ⊗ rho_E)``: subsystem ``slot`` of ``rho`` goes through the simulated channel.

    Other subsystems are untouched, so correlations with them are teleported
    too.  With ``verify`` (and ``channel``) the result is compared with the
    direct channel action and a mismatch raises :class:`CovarianceError`.
    """
    d_in, d_out = sim.resource.d_in, sim.resource.d_out
    dims = [rho.shape[0]] if dims is None else list(dims)
    if dims[slot] != d_in:
        raise ShapeError(f"slot {slot} has dimension {dims[slot]}, simulation expects {d_in}")
    full = la.tensor(rho, sim.resource.state, cap=np.iinfo(np.int64).max)
    out, _ = _teleport_in_place(sim, full, dims + [d_in, d_out], slot, len(dims))
    if verify:
        if channel is None:
            raise ValueError("verify needs the channel")
        direct, _ = la.apply_kraus(rho, list(channel.kraus), dims, [slot])
        residual = 2 * la.trace_distance(out, direct)
        if residual > 1e-10:
            raise CovarianceError("teleportation simulation does not reproduce the channel",
                                  residual=residual)
    return out


# ---------------------------------------------------------------------------
# Stretching
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class StretchedProtocol:
    """The channel-free map ``Lambda_bar`` acting on ``n`` Choi copies."""

    register_dims: list[int]
    ops: list[Kraus]
    probe_slots: list[int]
    lo_cc: list[np.ndarray]  # teleportation Kraus operators, shared by all rounds
    d_in: int
    d_out: int

    @property
    def n(self) -> int:
        return len(self.probe_slots)

    def same_map(self, other: "StretchedProtocol") -> bool:
        """True when both carry identical Kraus data."""
        if (self.register_dims, self.probe_slots, self.d_in, self.d_out) != (
            other.register_dims, other.probe_slots, other.d_in, other.d_out
        ):
            return False
        pairs = list(zip(self.lo_cc, other.lo_cc))
        for a, b in zip(self.ops, other.ops):
            if len(a) != len(b):
                return False
            pairs += list(zip(a, b))
        return len(self.lo_cc) == len(other.lo_cc) and all(np.array_equal(x, y) for x, y in pairs)

    def apply(self, choi_state: np.ndarray) -> np.ndarray:
        """Evaluate ``Lambda_bar(rho_E^{⊗n})``.

        The input is ``|0..0><0..0| ⊗ rho_E^{⊗n}`` with the Choi copies after
        the register; round ``i`` consumes the first remaining copy.
        """
        R = len(self.register_dims)
        choi_dims = [self.d_in, self.d_out]
        dims = list(self.register_dims) + choi_dims * self.n
        cap = np.iinfo(np.int64).max
        state = la.tensor_all([_vacuum(self.register_dims)] + [choi_state] * self.n, cap=cap)
        reg = list(range(R))
        state, dims = _apply_register_map(state, self.ops[0], dims, reg)
        for i, slot in enumerate(self.probe_slots):
            if dims[slot] != self.d_in:
                raise ShapeError(f"round {i}: slot {slot} has dimension {dims[slot]}")
            state, dims = la.apply_kraus(state, self.lo_cc, dims, [slot, R, R + 1])
            state, dims = _apply_register_map(state, self.ops[i + 1], dims, reg)
        return state


def stretch(prot: AdaptiveProtocol, channel: ch.QuantumChannel) -> StretchedProtocol:
    sim = teleportation_simulation(channel)
    return StretchedProtocol(
        list(prot.register_dims), prot.ops, list(prot.probe_slots),
        sim.lo_cc_kraus(), channel.d_in, channel.d_out,
    )


def run_stretched(prot: AdaptiveProtocol, channel: ch.QuantumChannel) -> np.ndarray:
    return stretch(prot, channel).apply(ch.choi_matrix(channel).state)


# ---------------------------------------------------------------------------
# Protocol QFI and random protocols
# ---------------------------------------------------------------------------

def family_channel(family: str, d: int = 2) -> Callable[[float], ch.QuantumChannel]:
    return lambda theta: ch.make_channel(ch.ChannelSpec(family, d, {"p": theta}))


def protocol_qfi(prot: AdaptiveProtocol, family: str | Callable, theta: float,
                 dtheta: float = 1e-4, d: int = 2) -> float:
    """``8 (1 - F) / dtheta^2`` between protocol outputs at ``theta -/+ dtheta/2``."""
    make = family_channel(family, d) if isinstance(family, str) else family
    a = run_adaptive(prot, make(theta - dtheta / 2))
    b = run_adaptive(prot, make(theta + dtheta / 2))
    return met.qfi_from_fidelity(a, b, dtheta)


def random_cptp(dim: int, rng: np.random.Generator, env_dim: int = 2) -> Kraus:
    """Kraus operators of a random Stinespring isometry ``dim -> dim ⊗ env``."""
    z = rng.normal(size=(dim * env_dim, dim)) + 1j * rng.normal(size=(dim * env_dim, dim))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return [q[j * dim:(j + 1) * dim, :] for j in range(env_dim)]


def random_protocol(
    n: int,
    d_in: int,
    d_out: int,
    rng: np.random.Generator,
    register_dims: Sequence[int] | None = None,
    env_dim: int = 2,
) -> AdaptiveProtocol:
    """Random ``n``-round protocol; probe slots are drawn among subsystems that
    still have the channel's input dimension."""
    dims = list(register_dims) if register_dims is not None else [d_in] * (n + 1)
    if sum(1 for x in dims if x == d_in) < (n if d_out != d_in else 1):
        raise ShapeError("register has too few probe-sized subsystems")
    start = list(dims)
    ops = [random_cptp(int(np.prod(dims)), rng, env_dim)]
    slots = []
    for _ in range(n):
        candidates = [i for i, x in enumerate(dims) if x == d_in]
        slot = int(rng.choice(candidates))
        slots.append(slot)
        dims[slot] = d_out
        ops.append(random_cptp(int(np.prod(dims)), rng, env_dim))
    return AdaptiveProtocol(start, ops, slots)


def _unitary_from_state(psi: np.ndarray) -> np.ndarray:
    """Householder unitary sending ``|0>`` to ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    phase = psi[0] / abs(psi[0]) if abs(psi[0]) > 1e-15 else 1.0
    target = psi / phase
    e0 = np.zeros_like(target)
    e0[0] = 1.0
    u = e0 - target
    if np.linalg.norm(u) < 1e-15:
        return phase * np.eye(psi.size, dtype=complex)
    h = np.eye(psi.size, dtype=complex) - 2 * np.outer(u, u.conj()) / np.vdot(u, u)
    return phase * h


def bell_probe_protocol(n: int, d_in: int, d_out: int) -> AdaptiveProtocol:
    """Non-adaptive protocol sending half of a maximally entangled pair per round.

    Its output is exactly ``rho_E^{⊗n}``.
    """
    dims = [d_in] * (2 * n)
    psi = la.tensor_all([ch.max_entangled(d_in)[:, None]] * n, cap=np.iinfo(np.int64).max)[:, 0]
    ops = [[_unitary_from_state(psi)]]
    cur = list(dims)
    for i in range(n):
        cur[2 * i + 1] = d_out
        ops.append([np.eye(int(np.prod(cur)), dtype=complex)])
    return AdaptiveProtocol(dims, ops, [2 * i + 1 for i in range(n)])


def channel_ignoring_protocol(n: int, d_in: int, d_out: int) -> AdaptiveProtocol:
    """Sends one probe per round and finally resets the register to ``|0..0>``,
    so the output never depends on the channel."""
    dims = [d_in] * n
    ops = [[np.eye(d_in**n, dtype=complex)]]
    for i in range(1, n):
        ops.append([np.eye(d_out**i * d_in ** (n - i), dtype=complex)])
    D = d_out**n
    reset = []
    for j in range(D):
        k = np.zeros((D, D), dtype=complex)
        k[0, j] = 1.0
        reset.append(k)
    ops.append(reset)
    return AdaptiveProtocol(dims, ops, list(range(n)))


# ---------------------------------------------------------------------------
# No-go fuzzing
# ---------------------------------------------------------------------------

@dataclass
class FuzzReport:
    family: str
    theta: float
    n: int
    trials: int
    seed: int
    bound: float  # n * B
    ratios: list[float] = field(default_factory=list)
    planted_ratio: float | None = None
    stretch_residuals: list[float] = field(default_factory=list)

    @property
    def max_ratio(self) -> float | None:
        vals = list(self.ratios) + ([self.planted_ratio] if self.planted_ratio is not None else [])
        return max(vals) if vals else None

    @property
    def max_residual(self) -> float | None:
        return max(self.stretch_residuals) if self.stretch_residuals else None

    def passed(self, ratio_tol: float = 1e-4, planted_min: float = 0.999,
               residual_tol: float = 1e-9) -> bool:
        if self.trials == 0:
            return True
        ok = self.max_ratio <= 1 + ratio_tol and self.planted_ratio >= planted_min
        if self.stretch_residuals:
            ok = ok and self.max_residual < residual_tol
        return bool(ok)

    def to_dict(self) -> dict:
        return {
            "family": self.family, "theta": self.theta, "n": self.n, "trials": self.trials,
            "seed": self.seed, "bound": self.bound, "max_ratio": self.max_ratio,
            "planted_ratio": self.planted_ratio, "max_residual": self.max_residual,
            "ratios": list(self.ratios),
        }


def _fuzz_trial(args):
    family, theta, n, d, dtheta, bound, seed_seq, check_stretch = args
    rng = np.random.default_rng(seed_seq)
    make = family_channel(family, d)
    probe = make(theta)
    prot = random_protocol(n, probe.d_in, probe.d_out, rng)
    ratio = protocol_qfi(prot, make, theta, dtheta) / bound
    residual = None
    if check_stretch:
        residual = 2 * la.trace_distance(run_adaptive(prot, probe), run_stretched(prot, probe))
    return ratio, residual


def fuzz_no_go(
    family: str,
    theta: float,
    trials: int,
    n: int = 2,
    d: int = 2,
    seed: int = 0,
    dtheta: float = 1e-3,
    check_stretch: bool = False,
    workers: int = 1,
) -> FuzzReport:
    """Sample random adaptive protocols and record ``I(P) / (n B)``.

    The Bell-probe protocol is planted alongside the random ones as a
    tightness witness.  Each trial has its own seed spawned from ``seed``, so
    results do not depend on ``workers``.
    """
    if n > 3:
        raise DomainError("fuzzing is limited to n <= 3")
    if d ** (n + 1) > MAX_FUZZ_REGISTER:
        raise DomainError(f"register of dimension {d ** (n + 1)} exceeds {MAX_FUZZ_REGISTER}")
    B = met.qfi_probability(theta)
    report = FuzzReport(family, theta, n, trials, seed, n * B)
    if trials == 0:
        return report
    make = family_channel(family, d)
    probe = make(theta)
    planted = bell_probe_protocol(n, probe.d_in, probe.d_out)
    report.planted_ratio = protocol_qfi(planted, make, theta, dtheta) / report.bound
    seeds = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(family, theta, n, d, dtheta, report.bound, s, check_stretch) for s in seeds]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(_fuzz_trial, jobs))
    else:
        results = [_fuzz_trial(j) for j in jobs]
    report.ratios = [r for r, _ in results]
    report.stretch_residuals = [x for _, x in results if x is not None]
    return report
