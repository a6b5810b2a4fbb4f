"""Dense Hermitian linear algebra and state functionals.

Matrices are plain ``numpy`` arrays.  Every spectral function (square roots,
fractional powers, logarithms) goes through :func:`psd_eigh`, so there is a
single tolerance policy: eigenvalues in ``[-NEG_TOL, 0)`` are clamped to zero,
anything more negative is a :class:`~telebounds.errors.DomainError`.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionLimitError, DomainError, ShapeError

DIM_CAP = 4096
HERM_TOL = 1e-10
NEG_TOL = 1e-10
TRACE_TOL = 1e-10
SUPPORT_TOL = 1e-12


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def _hermitian_part(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if np.max(np.abs(a - dagger(a)), initial=0.0) > HERM_TOL:
        raise DomainError("matrix is not Hermitian within tolerance")
    return 0.5 * (a + dagger(a))


def psd_eigh(a: np.ndarray, neg_tol: float = NEG_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a PSD matrix with small negative eigenvalues clamped."""
    w, v = np.linalg.eigh(_hermitian_part(a))
    if w.size and w[0] < -neg_tol:
        raise DomainError(f"matrix is not PSD: minimum eigenvalue {w[0]:.3e}")
    return np.clip(w, 0.0, None), v


def check_density(rho: np.ndarray, trace_tol: float = TRACE_TOL) -> np.ndarray:
    """Validate the density-matrix invariants and return the Hermitian part."""
    h = _hermitian_part(rho)
    tr = np.trace(np.asarray(rho))
    if abs(tr.real - 1.0) > trace_tol or abs(tr.imag) > 1e-12:
        raise DomainError(f"trace {tr} differs from 1")
    psd_eigh(h)
    return h


def is_density(rho: np.ndarray) -> bool:
    try:
        check_density(rho)
    except (DomainError, ShapeError):
        return False
    return True


# ---------------------------------------------------------------------------
# Tensor bookkeeping
# ---------------------------------------------------------------------------

def tensor(a: np.ndarray, b: np.ndarray, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product, refusing results with more than ``cap`` rows or columns."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise DimensionLimitError(f"tensor product of dimension {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def tensor_all(mats: Sequence[np.ndarray], cap: int = DIM_CAP) -> np.ndarray:
    return reduce(lambda x, y: tensor(x, y, cap=cap), mats)


def tensor_power(a: np.ndarray, n: int, cap: int = DIM_CAP) -> np.ndarray:
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    return tensor_all([a] * n, cap=cap)


def _check_dims(rho: np.ndarray, dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"dims {list(dims)} do not match matrix shape {rho.shape}")


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int] | set) -> np.ndarray:
    """Reduced state on the subsystems listed in ``keep`` (kept in ascending order)."""
    rho = np.asarray(rho)
    dims = list(dims)
    _check_dims(rho, dims)
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # contract each traced ket index with its bra partner, highest axis first
    for i in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + m)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def permute_subsystems(rho: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems so that new subsystem ``j`` is old subsystem ``perm[j]``."""
    dims = list(dims)
    _check_dims(rho, dims)
    n = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    t = t.transpose(list(perm) + [p + n for p in perm])
    d = rho.shape[0]
    return t.reshape(d, d)


def apply_kraus(
    rho: np.ndarray,
    kraus: Sequence[np.ndarray],
    dims: Sequence[int],
    targets: Sequence[int],
) -> tuple[np.ndarray, list[int]]:
    """Apply a CP map given by Kraus operators on the ``targets`` subsystems.

    Square Kraus operators keep the subsystem layout.  Rectangular ones
    replace the targeted block by one subsystem of the output dimension,
    placed where ``targets[0]`` was.  Returns ``(new_rho, new_dims)``.
    """
    dims = list(dims)
    _check_dims(rho, dims)
    targets = list(targets)
    n = len(dims)
    rest = [i for i in range(n) if i not in targets]
    d_t = int(np.prod([dims[i] for i in targets]))
    d_r = int(np.prod([dims[i] for i in rest])) if rest else 1
    d_out = kraus[0].shape[0]
    t = np.asarray(rho, dtype=complex).reshape(dims + dims)
    order = targets + rest
    t = t.transpose(order + [i + n for i in order]).reshape(d_t, d_r, d_t, d_r)
    out = np.zeros((d_out, d_r, d_out, d_r), dtype=complex)
    for k in kraus:
        if k.shape != (d_out, d_t):
            raise ShapeError(f"Kraus operator of shape {k.shape} cannot act on dimension {d_t}")
        out += np.einsum("ai,ijkl,bk->ajbl", k, t, k.conj(), optimize=True)
    if d_out == d_t:
        new_dims = dims
        block = [dims[i] for i in order]
        perm = list(np.argsort(order))
    else:
        pos = sum(1 for i in rest if i < targets[0])
        new_dims = [dims[i] for i in rest]
        new_dims.insert(pos, d_out)
        block = [d_out] + [dims[i] for i in rest]
        perm = list(range(1, pos + 1)) + [0] + list(range(pos + 1, len(new_dims)))
    m = len(new_dims)
    out = out.reshape(block + block).transpose(perm + [i + m for i in perm])
    D = int(np.prod(new_dims))
    return out.reshape(D, D), list(new_dims)


def embed_operator(op: np.ndarray, dims: Sequence[int], target: int) -> np.ndarray:
    """Return ``I ⊗ ... ⊗ op ⊗ ... ⊗ I`` with ``op`` on subsystem ``target``."""
    mats = [op if i == target else np.eye(d) for i, d in enumerate(dims)]
    return tensor_all(mats, cap=np.iinfo(np.int64).max)


# ---------------------------------------------------------------------------
# Spectral functions
# ---------------------------------------------------------------------------

def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    """Square root of a PSD matrix.

    Eigenvalues below the numerical-rank cutoff ``10 d eps max(w)`` are set to
    zero: their square roots would be pure rounding noise of order 1e-8.
    """
    w, v = psd_eigh(rho)
    if w.size:
        w = np.where(w > 10 * w.size * np.finfo(float).eps * w[-1], w, 0.0)
    return (v * np.sqrt(w)) @ dagger(v)


def matrix_fractional_power(rho: np.ndarray, s: float) -> np.ndarray:
    """``rho**s`` for PSD ``rho`` and ``s`` in [0, 1].

    Zero eigenvalues stay zero for every ``s`` (so ``s = 0`` gives the
    projector onto the support).
    """
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"exponent {s} outside [0, 1]")
    w, v = psd_eigh(rho)
    ws = np.zeros_like(w)
    mask = w > SUPPORT_TOL
    ws[mask] = w[mask] ** s
    return (v * ws) @ dagger(v)


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Bures fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))``.

    Evaluated as the trace norm of ``sqrt(rho) sqrt(sigma)``.
    """
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    sv = np.linalg.svd(psd_sqrt(rho) @ psd_sqrt(sigma), compute_uv=False)
    return float(min(1.0, sv.sum()))


def fidelity_nested(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Textbook nested-square-root form; kept as a cross-check for :func:`fidelity`."""
    rs = psd_sqrt(sigma)
    inner = rs @ np.asarray(rho) @ rs
    return float(np.trace(psd_sqrt(inner)).real)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    psd_eigh(rho)
    psd_eigh(sigma)
    w = np.linalg.eigvalsh(_hermitian_part(rho - sigma))
    return float(0.5 * np.abs(w).sum())


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Base-2 quantum relative entropy ``Tr rho (log rho - log sigma)``.

    Returns ``inf`` when the support of ``rho`` is not contained in that of
    ``sigma``.
    """
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    lr, vr = psd_eigh(rho)
    ls, vs = psd_eigh(sigma)
    overlap = np.abs(dagger(vr) @ vs) ** 2  # overlap[i, j] = |<r_i|s_j>|^2
    rmask = lr > SUPPORT_TOL
    smask = ls > SUPPORT_TOL
    leak = lr[rmask] @ overlap[np.ix_(rmask, ~smask)].sum(axis=1) if (~smask).any() else 0.0
    if leak > SUPPORT_TOL:
        return float("inf")
    term_rho = np.sum(lr[rmask] * np.log2(lr[rmask]))
    log_s = np.zeros_like(ls)
    log_s[smask] = np.log2(ls[smask])
    term_sigma = lr[rmask] @ overlap[rmask] @ log_s
    return float(max(0.0, term_rho - term_sigma))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random state from the induced (Ginibre) measure."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
