"""Dense complex linear algebra shared by the rest of the package.

Index convention (fixed everywhere): a bipartite d**2 x d**2 matrix ``U`` has
row index ``(k, i) -> k*d + i`` and column index ``(l, j) -> l*d + j``, so
``U.reshape(d, d, d, d)[k, i, l, j] == U[k*d + i, l*d + j]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, LabelError, SingularError

CONSTRUCTION_TOL = 1e-12
CERTIFY_TOL = 1e-10


# --- randomness -------------------------------------------------------------

def make_rng(seed=None) -> np.random.Generator:
    """Return a counter-based (Philox) generator.

    ``seed`` may be an int, a ``SeedSequence`` or an existing ``Generator``
    (returned unchanged).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    """Derive ``n`` independent child seeds from a master seed.

    A ``Generator`` is accepted too; its children are drawn from its stream.
    """
    if isinstance(seed, np.random.Generator):
        return [np.random.SeedSequence(int(x)) for x in seed.integers(0, 2**63, size=n)]
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(seed)
    return ss.spawn(n)


# --- index helpers ----------------------------------------------------------

def local_dim(U: np.ndarray) -> int:
    """Local dimension ``d`` of a square ``d**2 x d**2`` matrix."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {U.shape}")
    d = math.isqrt(U.shape[0])
    if d * d != U.shape[0]:
        raise DimensionError(f"dimension {U.shape[0]} is not a perfect square")
    return d


def flatten_pair(k: int, i: int, d: int) -> int:
    return k * d + i


def unflatten_pair(n: int, d: int) -> tuple[int, int]:
    return divmod(n, d)


def reshuffle(U: np.ndarray) -> np.ndarray:
    """Realignment ``(U^R)[(k,i),(l,j)] = U[(k,l),(i,j)]``.

    As a permutation of flat positions this is
    ``(k*d+i, l*d+j) <- (k*d+l, i*d+j)``.
    """
    d = local_dim(U)
    T = np.asarray(U).reshape(d, d, d, d)
    return T.transpose(0, 2, 1, 3).reshape(d * d, d * d)


def partial_transpose(U: np.ndarray) -> np.ndarray:
    """Partial transpose on the first factor, ``(U^G)[(k,i),(l,j)] = U[(l,i),(k,j)]``."""
    d = local_dim(U)
    T = np.asarray(U).reshape(d, d, d, d)
    return T.transpose(2, 1, 0, 3).reshape(d * d, d * d)


def partial_trace(rho: np.ndarray, keep, dims: Sequence[int], labels: Sequence | None = None) -> np.ndarray:
    """Trace out every party not listed in ``keep``.

    Parameters
    ----------
    rho : ndarray
        Square operator on the tensor product of ``dims``.
    keep : iterable
        Parties to keep, given as labels when ``labels`` is supplied and as
        positions otherwise. Kept parties stay in their original order.
    dims : sequence of int
        Local dimensions.
    labels : sequence, optional
        Party names, one per entry of ``dims``.

    Returns
    -------
    ndarray
        Reduced operator; a 1x1 matrix when nothing is kept.
    """
    rho = np.asarray(rho)
    dims = [int(x) for x in dims]
    n = len(dims)
    total = int(np.prod(dims)) if dims else 1
    if rho.shape != (total, total):
        raise DimensionError(f"operator shape {rho.shape} does not match dims {dims}")
    if labels is None:
        labels = list(range(n))
    labels = list(labels)
    if len(labels) != n:
        raise DimensionError("one label per party is required")
    keep_pos = set()
    for lab in keep:
        if lab not in labels:
            raise LabelError(f"party {lab!r} not present in {labels}")
        keep_pos.add(labels.index(lab))
    kept = sorted(keep_pos)
    traced = [p for p in range(n) if p not in keep_pos]
    T = rho.reshape(dims + dims)
    perm = kept + traced + [n + p for p in kept] + [n + p for p in traced]
    T = T.transpose(perm)
    dk = int(np.prod([dims[p] for p in kept])) if kept else 1
    dt = int(np.prod([dims[p] for p in traced])) if traced else 1
    T = T.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", T)


def reduced_purity(psi: np.ndarray, keep: Sequence[int], dims: Sequence[int]) -> float:
    """Purity Tr(rho_keep^2) of a pure state, without forming rho."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    rest = [p for p in range(n) if p not in keep]
    T = np.asarray(psi).reshape(dims).transpose(keep + rest)
    dk = int(np.prod([dims[p] for p in keep])) if keep else 1
    M = T.reshape(dk, -1)
    G = M @ M.conj().T
    return float(np.real(np.vdot(G, G)))


# --- standard matrices ------------------------------------------------------

def fourier_matrix(d: int) -> np.ndarray:
    """``F[j, k] = exp(2 pi i j k / d) / sqrt(d)``."""
    if d < 1:
        raise DimensionError("d must be >= 1")
    jk = np.outer(np.arange(d), np.arange(d))
    return np.exp(2j * np.pi * jk / d) / math.sqrt(d)


def swap_matrix(d: int) -> np.ndarray:
    """Swap ``S = sum_ij |ij><ji|``."""
    S = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            S[i * d + j, j * d + i] = 1.0
    return S


def swap_power(d: int, kappa: float) -> np.ndarray:
    """``S**kappa`` from the spectral split of S into symmetric and antisymmetric parts."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [0, 1]")
    S = swap_matrix(d)
    eye = np.eye(d * d)
    sym = (eye + S) / 2
    anti = (eye - S) / 2
    return sym + np.exp(1j * np.pi * kappa) * anti


def permutation_matrix(images: Sequence[int]) -> np.ndarray:
    """Matrix with ``P[images[x], x] = 1`` (sends ``|x>`` to ``|images[x]>``)."""
    n = len(images)
    P = np.zeros((n, n))
    P[np.asarray(images), np.arange(n)] = 1.0
    return P


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase correction."""
    rng = make_rng(seed)
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * ph


def haar_state(d: int, seed=None, size: int | None = None) -> np.ndarray:
    """Haar-random unit vector(s) in C^d; ``size`` adds a leading batch axis."""
    rng = make_rng(seed)
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


# --- unitarity and polar decomposition ---------------------------------------

def unitarity_residual(M: np.ndarray) -> float:
    """``||M M^dag - I||_inf`` (largest absolute entry)."""
    M = np.asarray(M)
    return float(np.max(np.abs(M @ M.conj().T - np.eye(M.shape[0]))))


def is_unitary(M: np.ndarray, tol: float = CERTIFY_TOL) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and unitarity_residual(M) < tol


def polar_factor(M: np.ndarray) -> np.ndarray:
    """Unitary polar factor ``P Q^dag`` of ``M = P Sigma Q^dag``.

    Works on a single matrix or a stack ``(..., n, n)``. Raises
    :class:`SingularError` if any matrix has ``sigma_min < 1e-14 sigma_max``.
    """
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DimensionError(f"polar_factor needs square matrices, got {M.shape}")
    P, s, Qh = np.linalg.svd(M)
    bad = s[..., -1] < 1e-14 * s[..., 0]
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))
        where = "" if M.ndim == 2 else f" (stack index {tuple(idx[0])})"
        raise SingularError(f"rank-deficient matrix in polar decomposition{where}")
    return P @ Qh


# --- Choi states ------------------------------------------------------------

@dataclass(frozen=True)
class ChoiState:
    """Pure state ``(U (x) I)|Psi+>`` with labelled parties.

    ``amplitudes`` is ordered outputs first, then inputs, each party of
    dimension ``local_dim``.
    """

    local_dim: int
    parties: tuple
    amplitudes: np.ndarray

    @property
    def dims(self) -> list[int]:
        return [self.local_dim] * len(self.parties)

    def purity(self, keep) -> float:
        for p in keep:
            if p not in self.parties:
                raise LabelError(f"party {p!r} not present")
        pos = [self.parties.index(p) for p in keep]
        return reduced_purity(self.amplitudes, pos, self.dims)

    def reduced(self, keep) -> np.ndarray:
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return partial_trace(rho, keep, self.dims, self.parties)


def choi_state(U: np.ndarray, d: int | None = None) -> ChoiState:
    """Choi state of a unitary on ``n`` parties of dimension ``d``.

    With ``d`` omitted the matrix is taken as bipartite (parties A, B, A', B').
    """
    U = np.asarray(U)
    D = U.shape[0]
    if d is None:
        d = local_dim(U)
    n = round(math.log(D, d))
    if d ** n != D:
        raise DimensionError(f"{D} is not a power of {d}")
    if n == 2:
        parties = ("A", "B", "A'", "B'")
    else:
        parties = tuple(str(p + 1) for p in range(n)) + tuple(f"{p + 1}'" for p in range(n))
    amps = U.astype(complex).reshape(-1) / math.sqrt(D)
    return ChoiState(d, parties, amps)


# --- matrix file format -----------------------------------------------------

def matrix_to_json(M: np.ndarray) -> dict:
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionError("only 2-D matrices serialise")
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "re": [float(x) for x in np.real(M).ravel()],
        "im": [float(x) for x in np.imag(M).ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    from .errors import FormatError

    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re, im = obj["re"], obj["im"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed matrix object: {exc}") from None
    if len(re) != rows * cols or len(im) != rows * cols:
        raise FormatError(
            f"matrix declares {rows}x{cols} but carries {len(re)} real / {len(im)} imaginary entries"
        )
    return (np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)).reshape(rows, cols)
