"""Coherifications of permutation tensors.

A basis family is stored as ``V`` with ``V[k, l, :] = a_{k,l}`` (row ``l`` of
the ``k``-th ``d x d`` matrix). The coherification is
``U[(k,i), (l,j)] = A[k,l,j] * a_{k,l}[i]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import tensor as T
from .errors import BasisError, DimensionError, FormatError, InputError, StructureError
from .latin import LatinHypercube, LatinSquare, PermutationTensor, tensor_from_hypercube

DENSITY_TOL = 1e-8


class Certificate(NamedTuple):
    passed: bool
    residual: float
    details: dict


def _check_orthonormal_rows(V, tol, what):
    G = V @ np.conj(np.swapaxes(V, -1, -2))
    err = np.max(np.abs(G - np.eye(V.shape[-1])), axis=(-1, -2))
    if np.any(err > tol):
        k = int(np.argmax(err))
        raise BasisError(f"{what} {k} is not orthonormal (deviation {err[k]:.3g})")


@dataclass(frozen=True, eq=False)
class BasisFamily:
    """``d`` orthonormal bases of C^d, stacked as ``V[k, l, :] = a_{k,l}``."""

    d: int
    V: np.ndarray
    tol: float = T.CONSTRUCTION_TOL

    def __post_init__(self):
        V = np.asarray(self.V, dtype=complex)
        if V.shape != (self.d, self.d, self.d):
            raise BasisError(f"expected shape {(self.d,) * 3}, got {V.shape}")
        _check_orthonormal_rows(V, self.tol, "basis")
        V = V.copy()
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    def vector(self, k, l):
        return self.V[k, l]

    def to_json(self) -> dict:
        return {"d": self.d, "V": [T.matrix_to_json(m) for m in self.V]}

    @classmethod
    def from_json(cls, obj, tol=1e-10):
        try:
            d = int(obj["d"])
            mats = [T.matrix_from_json(m) for m in obj["V"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed basis family: {exc}") from None
        return cls(d, np.stack(mats), tol=tol)

    @classmethod
    def computational(cls, d):
        """``a_{k,l} = |l>`` for every ``k``."""
        return cls(d, np.broadcast_to(np.eye(d), (d, d, d)))

    @classmethod
    def haar(cls, d, seed=None):
        seeds = T.spawn_seeds(seed, d)
        return cls(d, np.stack([T.haar_unitary(d, s) for s in seeds]))


@dataclass(frozen=True, eq=False)
class MultiBasisFamily:
    """For each first index ``i1`` an orthonormal basis of C^(d^(m-2)).

    ``V[i1, I, :] = a_{(i1; I)}`` where ``I`` flattens ``(i2, ..., i_{m-1})``
    row-major.
    """

    d: int
    arity: int
    V: np.ndarray
    tol: float = T.CONSTRUCTION_TOL

    def __post_init__(self):
        K = self.d ** (self.arity - 2)
        V = np.asarray(self.V, dtype=complex)
        if V.shape != (self.d, K, K):
            raise BasisError(f"expected shape {(self.d, K, K)}, got {V.shape}")
        _check_orthonormal_rows(V, self.tol, "basis")
        V = V.copy()
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @classmethod
    def haar(cls, d, arity, seed=None):
        K = d ** (arity - 2)
        seeds = T.spawn_seeds(seed, d)
        return cls(d, arity, np.stack([T.haar_unitary(K, s) for s in seeds]))


# --- unitaries --------------------------------------------------------------

def build_unitary(A: PermutationTensor, bases: BasisFamily) -> np.ndarray:
    """Bipartite coherification ``U[(k,i),(l,j)] = A[k,l,j] a_{k,l}[i]``."""
    if A.arity != 3:
        raise DimensionError("build_unitary needs an arity-3 tensor")
    if A.d != bases.d:
        raise DimensionError(f"tensor order {A.d} differs from basis dimension {bases.d}")
    d = A.d
    U = np.einsum("klj,kli->kilj", A.entries, bases.V)
    return U.reshape(d * d, d * d)


def multistoch_build(A: PermutationTensor, bases: MultiBasisFamily) -> np.ndarray:
    """``U[(i1, J), (i2..im)] = A[i1, i2..im] a_{(i1; i2..i_{m-1})}[J]``."""
    if A.d != bases.d or A.arity != bases.arity:
        raise DimensionError("tensor and basis family disagree on order or arity")
    d, m = A.d, A.arity
    K = d ** (m - 2)
    Ar = A.entries.reshape(d, K, d)
    U = np.einsum("aIe,aIJ->aJIe", Ar, bases.V)
    return U.reshape(d * K, K * d)


def extract_bases(U: np.ndarray, A: PermutationTensor) -> np.ndarray:
    """Recover ``V[k, l, :]`` (or ``V[i1, I, :]``) from a coherification."""
    d, m = A.d, A.arity
    K = d ** (m - 2)
    U = np.asarray(U).reshape(d, K, K, d)
    last = np.argmax(A.entries.reshape(d, K, d), axis=2)  # (i1, I) -> i_m
    i1, I = np.indices((d, K))
    return U[i1, :, I, last]


def bases_from_mols(L: LatinSquare, M: LatinSquare) -> BasisFamily:
    """``a_{k,l} = |M_lj>`` with ``j`` such that ``L_lj = k`` (0-based)."""
    d = L.d
    V = np.zeros((d, d, d))
    for l in range(d):
        for j in range(d):
            V[L.cells[l, j] - 1, l, M.cells[l, j] - 1] = 1.0
    return BasisFamily(d, V)


def bases_from_hypercubes(cubes) -> MultiBasisFamily:
    """Basis family whose coherification of ``tensor_from_hypercube(cubes[0])``
    equals ``multipartite_unitary_from_hypercubes(cubes)``."""
    cubes = list(cubes)
    d, n = cubes[0].d, cubes[0].arity
    m = n + 1
    K = d ** (m - 2)
    V = np.zeros((d, K, K))
    L1 = cubes[0].cells - 1
    for x in np.ndindex(*(d,) * n):
        i1 = L1[x]
        I = 0
        for t in x[:-1]:
            I = I * d + t
        J = 0
        for c in cubes[1:]:
            J = J * d + (c.cells[x] - 1)
        V[i1, I, J] = 1.0
    return MultiBasisFamily(d, m, V)


# --- dynamical matrix -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DynamicalMatrix:
    """Choi matrix ``D[(i1, c), (i1', c')]`` of a coherified channel, with
    ``c`` the flattened input multi-index ``(i2, ..., im)``."""

    d: int
    arity: int
    entries: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def output_trace(self) -> np.ndarray:
        """Trace over the output party; the identity for a trace-preserving map."""
        n = self.d ** (self.arity - 1)
        Dr = self.entries.reshape(self.d, n, self.d, n)
        return np.einsum("acad->cd", Dr)

    def diagonal_tensor(self) -> np.ndarray:
        return np.real(np.diagonal(self.entries)).reshape((self.d,) * self.arity)

    def check(self, tol=T.CERTIFY_TOL) -> bool:
        n = self.d ** (self.arity - 1)
        return (
            self.min_eigenvalue() > -tol
            and np.max(np.abs(self.output_trace() - np.eye(n))) < tol
        )


def dynamical_matrix(U: np.ndarray, A: PermutationTensor, tol=T.CONSTRUCTION_TOL) -> DynamicalMatrix:
    """``D = sum_J U[(i1,J), c] conj(U[(i1',J), c'])``."""
    d, m = A.d, A.arity
    K = d ** (m - 2)
    N = d ** (m - 1)
    U = np.asarray(U)
    if U.shape != (N, N):
        raise DimensionError(f"expected a {N}x{N} unitary for arity {m}, got {U.shape}")
    Ur = U.reshape(d, K, N)
    mask = A.entries.reshape(d, N).astype(bool)
    stray = np.abs(Ur) * (~mask)[:, None, :]
    if stray.max() > tol:
        raise StructureError("U has support where the permutation tensor vanishes")
    D = np.einsum("aJc,bJe->acbe", Ur, Ur.conj()).reshape(d * N, d * N)
    return DynamicalMatrix(d, m, D)


def c2_coherence(D: DynamicalMatrix) -> float:
    """Norm-2 coherence ``(sum|D|^2 - sum|diag D|^2) / d^(2(m-1))``."""
    E = D.entries
    off = np.sum(np.abs(E) ** 2) - np.sum(np.abs(np.diagonal(E)) ** 2)
    return float(off / D.d ** (2 * (D.arity - 1)))


# --- channels ---------------------------------------------------------------

def _validate_density(rho, d):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise InputError(f"density matrix must be {d}x{d}, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > DENSITY_TOL:
        raise InputError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > DENSITY_TOL:
        raise InputError(f"density matrix has trace {np.trace(rho).real:.6g}")
    if np.linalg.eigvalsh(rho).min() < -DENSITY_TOL:
        raise InputError("density matrix is not positive semidefinite")
    return rho


def apply_channel(U: np.ndarray, inputs, validate=True) -> np.ndarray:
    """``Tr_{2..n}[U (rho_1 x ... x rho_n) U^dag]`` for ``n`` local inputs."""
    inputs = list(inputs)
    n = len(inputs)
    d = np.asarray(inputs[0]).shape[0]
    U = np.asarray(U)
    if U.shape != (d ** n, d ** n):
        raise DimensionError(f"unitary of shape {U.shape} does not act on {n} parties of dimension {d}")
    if validate:
        inputs = [_validate_density(r, d) for r in inputs]
    rho = inputs[0]
    for r in inputs[1:]:
        rho = np.kron(rho, r)
    out = U @ rho @ U.conj().T
    return T.partial_trace(out, [0], [d] * n)


def closed_form_entanglements(A: PermutationTensor, bases: BasisFamily) -> tuple[float, float]:
    """Operator entanglements ``(E(|U>), E(|US>))`` from basis overlaps only.

    ``E(|U>) = 1 - d^-4 sum A_klj A_k'l'j |<a_kl|a_k'l'>|^2`` and
    ``E(|US>) = 1 - d^-4 sum_{k,k',l} |<a_kl|a_k'l>|^2``.
    """
    d = A.d
    G = np.abs(np.einsum("kli,mni->klmn", bases.V.conj(), bases.V)) ** 2
    Aj = A.entries.astype(float)
    s_u = np.einsum("klj,mnj,klmn->", Aj, Aj, G)
    s_us = np.einsum("klml->", G)
    return 1 - s_u / d ** 4, 1 - s_us / d ** 4


def is_tristochastic_channel(U: np.ndarray, A: PermutationTensor, tol=T.CERTIFY_TOL) -> Certificate:
    """Certify quantum tristochasticity through the two overlap sums.

    ``mixed_second`` is ``sum_{k!=k'} A_klj A_k'l'j |<a_kl|a_k'l'>|^2`` (zero iff
    a maximally mixed second input always yields a maximally mixed output);
    ``mixed_first`` is ``sum_{k!=k'} |<a_kl|a_k'l>|^2``. Both sums are of
    nonnegative terms, so their vanishing is a sound certificate.
    """
    d = A.d
    V = extract_bases(U, A)
    G = np.abs(np.einsum("kli,mni->klmn", V.conj(), V)) ** 2
    off = 1.0 - np.eye(d)
    Aj = A.entries.astype(float)
    r1 = float(np.einsum("klj,mnj,klmn,km->", Aj, Aj, G, off))
    r2 = float(np.einsum("klml,km->", G, off))
    res = max(r1, r2)
    return Certificate(res < tol, res, {"mixed_second": r1, "mixed_first": r2})


def _random_density(d, rng):
    # mixture of a Haar pure state and a random diagonal, full rank generically
    psi = T.haar_state(d, rng)
    w = rng.uniform(0.2, 1.0)
    p = rng.dirichlet(np.ones(d))
    return w * np.outer(psi, psi.conj()) + (1 - w) * np.diag(p)


def is_multistochastic_channel(U: np.ndarray, A=None, tol=T.CERTIFY_TOL, d=None, trials=50, seed=0) -> Certificate:
    """Insert ``I/d`` in each input slot with random states elsewhere and
    check that the output is maximally mixed."""
    U = np.asarray(U)
    if d is None:
        if A is None:
            raise DimensionError("either A or d is required")
        d = A.d
    D = U.shape[0]
    n = round(np.log(D) / np.log(d))
    rng = T.make_rng(seed)
    mixed = np.eye(d) / d
    worst = 0.0
    per_slot = []
    for slot in range(n):
        slot_worst = 0.0
        for _ in range(trials):
            ins = [mixed if s == slot else _random_density(d, rng) for s in range(n)]
            out = apply_channel(U, ins, validate=False)
            slot_worst = max(slot_worst, float(np.max(np.abs(out - mixed))))
        per_slot.append(slot_worst)
        worst = max(worst, slot_worst)
    return Certificate(worst < tol, worst, {"per_slot": per_slot})


def coherify_hypercubes(cubes) -> tuple[PermutationTensor, MultiBasisFamily]:
    """Tensor from the first cube and the basis family from the rest."""
    cubes = list(cubes)
    if not isinstance(cubes[0], LatinHypercube):
        raise DimensionError("expected Latin hypercubes")
    return tensor_from_hypercube(cubes[0]), bases_from_hypercubes(cubes)
