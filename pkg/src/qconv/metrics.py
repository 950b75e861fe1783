"""Entanglement metrics of bipartite and multipartite unitaries.

Operator entanglement is the linear entropy of the Choi state across the
``(A, A') | (B, B')`` cut. With ``E(|S>) = 1 - 1/d**2``,

* entangling power ``e_p = [E(U) + E(US) - E(S)] / E(S)``
* gate typicality ``g_t = [E(U) - E(US) + E(S)] / (2 E(S))``
* disentangling power ``d_p = e_p / (d - 1)``
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import tensor as T
from .coherify import BasisFamily, Certificate, build_unitary
from .errors import DimensionError, NoConstructionError, UnitarityError
from .latin import PermutationTensor, cyclic_tensor


@dataclass(frozen=True)
class GateMetrics:
    d: int
    e_p: float
    g_t: float
    d_p: float
    E_U: float
    E_US: float
    residual_R: float
    residual_G: float

    def to_json(self) -> dict:
        return asdict(self)


class Estimate(NamedTuple):
    mean: float
    stderr: float


def _require_unitary(U, tol=T.CERTIFY_TOL):
    res = T.unitarity_residual(U)
    if res > tol:
        raise UnitarityError(f"matrix is not unitary (residual {res:.3g})")


def _linear_entropy_of_realignment(M, d):
    G = M @ M.conj().T
    return 1.0 - float(np.real(np.vdot(G, G))) / d ** 4


def op_entanglement(U: np.ndarray, check=True) -> float:
    """``E(|U>) = 1 - ||U^R U^R^dag||_F^2 / d^4``."""
    U = np.asarray(U)
    d = T.local_dim(U)
    if check:
        _require_unitary(U)
    return _linear_entropy_of_realignment(T.reshuffle(U), d)


def swap_entanglement(d: int) -> float:
    return 1.0 - 1.0 / d ** 2


def _entanglements(U, check):
    U = np.asarray(U)
    d = T.local_dim(U)
    if check:
        _require_unitary(U)
    E_U = _linear_entropy_of_realignment(T.reshuffle(U), d)
    # (US)^R is U^Gamma up to a column permutation, which leaves the Gram matrix intact
    E_US = _linear_entropy_of_realignment(T.partial_transpose(U), d)
    return d, E_U, E_US


def entangling_power(U: np.ndarray, check=True) -> float:
    d, E_U, E_US = _entanglements(U, check)
    E_S = swap_entanglement(d)
    return (E_U + E_US - E_S) / E_S


def gate_typicality(U: np.ndarray, check=True) -> float:
    d, E_U, E_US = _entanglements(U, check)
    E_S = swap_entanglement(d)
    return (E_U - E_US + E_S) / (2 * E_S)


def disentangling_power(U: np.ndarray, check=True) -> float:
    d = T.local_dim(U)
    return entangling_power(U, check) / (d - 1)


def gate_metrics(U: np.ndarray, check=True) -> GateMetrics:
    d, E_U, E_US = _entanglements(U, check)
    E_S = swap_entanglement(d)
    e_p = (E_U + E_US - E_S) / E_S
    g_t = (E_U - E_US + E_S) / (2 * E_S)
    return GateMetrics(
        d=d,
        e_p=e_p,
        g_t=g_t,
        d_p=e_p / (d - 1),
        E_U=E_U,
        E_US=E_US,
        residual_R=T.unitarity_residual(T.reshuffle(U)),
        residual_G=T.unitarity_residual(T.partial_transpose(U)),
    )


def is_2unitary(U: np.ndarray, tol=T.CERTIFY_TOL) -> Certificate:
    """Unitarity of ``U``, ``U^R`` and ``U^Gamma`` (largest entry deviation)."""
    U = np.asarray(U)
    try:
        T.local_dim(U)
    except DimensionError:
        return Certificate(False, math.inf, {})
    parts = {
        "U": T.unitarity_residual(U),
        "R": T.unitarity_residual(T.reshuffle(U)),
        "G": T.unitarity_residual(T.partial_transpose(U)),
    }
    res = max(parts.values())
    return Certificate(res < tol, res, parts)


def _is_prime(n):
    return n >= 2 and all(n % p for p in range(2, math.isqrt(n) + 1))


def mub_bases(d: int) -> BasisFamily:
    """``d`` mutually unbiased bases ``a_{k,l}[i] = w^(k i^2 + l i) / sqrt(d)``.

    Together with the computational basis these are the ``d + 1`` quadratic
    MUBs of an odd prime dimension.
    """
    if d == 2 or not _is_prime(d):
        raise NoConstructionError(f"quadratic MUB construction needs an odd prime, got {d}")
    k, l, i = np.indices((d, d, d))
    phase = (k * i * i + l * i) % d
    return BasisFamily(d, np.exp(2j * np.pi * phase / d) / math.sqrt(d))


def mub_unitary(d: int) -> np.ndarray:
    """Coherification of the cyclic tensor with quadratic MUBs."""
    return build_unitary(cyclic_tensor(d), mub_bases(d))


def _batched_output_entropy(U, psi_a, psi_b, d):
    inp = (psi_a[:, :, None] * psi_b[:, None, :]).reshape(len(psi_a), d * d)
    out = (inp @ U.T).reshape(-1, d, d)
    rho = out @ np.conj(np.swapaxes(out, 1, 2))
    return 1.0 - np.real(np.einsum("nij,nij->n", rho, rho.conj()))


def ep_monte_carlo(U: np.ndarray, n_samples: int, seed=None, chunk=20000) -> Estimate:
    """Haar product-state estimate of ``e_p``, scaled by ``(d+1)/(d-1)``."""
    U = np.asarray(U)
    d = T.local_dim(U)
    _require_unitary(U)
    rng = T.make_rng(seed)
    vals = []
    left = n_samples
    while left > 0:
        m = min(chunk, left)
        a = T.haar_state(d, rng, size=m)
        b = T.haar_state(d, rng, size=m)
        vals.append(_batched_output_entropy(U, a, b, d))
        left -= m
    x = np.concatenate(vals) * (d + 1) / (d - 1)
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.inf
    return Estimate(float(x.mean()), se)


# --- multipartite -----------------------------------------------------------

def _subset_purities(psi, nparties, d):
    pur = {}
    for mask in range(1 << nparties):
        keep = [p for p in range(nparties) if mask >> p & 1]
        if mask == 0:
            pur[mask] = 1.0
        else:
            pur[mask] = T.reduced_purity(psi, keep, [d] * nparties)
    return pur


def split_entanglements(U: np.ndarray, d: int, m: int) -> dict:
    """``E_{p|q}`` for every unordered split of the ``m - 1`` output parties.

    ``E_{p|q} = 2 (1 - (d/(d+1))^n sum_x Tr rho_{p u x}^2)`` where ``n = m - 1``,
    ``x`` runs over all subsets of the input parties and ``rho`` is a marginal
    of the Choi state. The bracket is the Haar average of ``1 - Tr rho_p^2``
    over product inputs.
    """
    n = m - 1
    U = np.asarray(U)
    if U.shape != (d ** n, d ** n):
        raise DimensionError(f"expected {d ** n}x{d ** n} for {n} parties of dimension {d}")
    _require_unitary(U)
    psi = T.choi_state(U, d).amplitudes
    pur = _subset_purities(psi, 2 * n, d)
    pref = (d / (d + 1)) ** n
    out = {}
    for pmask in range(1, 1 << n):
        # unordered: keep the representative not containing the last party
        if pmask >> (n - 1) & 1 or pmask == (1 << n) - 1:
            continue
        s = sum(pur[pmask | (x << n)] for x in range(1 << n))
        out[pmask] = 2 * (1 - pref * s)
    return out


def _ame_split_value(d, n, pmask):
    pref = (d / (d + 1)) ** n
    s = 0.0
    for x in range(1 << n):
        size = bin(pmask).count("1") + bin(x).count("1")
        s += float(d) ** (-min(size, 2 * n - size))
    return 2 * (1 - pref * s)


def multipartite_ep(U: np.ndarray, d: int, m: int, normalized: bool = True) -> float:
    """Average split entanglement of an ``(m-1)``-party unitary.

    With ``normalized=True`` each split is divided by its value for a perfect
    tensor (absolutely maximally entangled Choi state), so the result is 1 for
    multi-unitary gates and equals :func:`entangling_power` when ``m = 3``.
    ``normalized=False`` returns the bare average of ``E_{p|q}``.
    """
    n = m - 1
    if n < 2:
        raise DimensionError("need at least two parties")
    splits = split_entanglements(U, d, m)
    if normalized:
        vals = [v / _ame_split_value(d, n, p) for p, v in splits.items()]
    else:
        vals = list(splits.values())
    return float(np.mean(vals))


# --- coherification bounds --------------------------------------------------

def ep_bounds(d: int) -> tuple[float, float]:
    return 1 - 1 / (d + 1), 1.0


def gt_bounds(d: int) -> tuple[float, float]:
    return 0.5 - 1 / (2 * d + 2), 0.5 + 1 / (2 * d + 2)


def ep_bounds_check(U: np.ndarray, slack: float = 1e-10) -> bool:
    d = T.local_dim(U)
    lo, hi = ep_bounds(d)
    e = entangling_power(U)
    return lo - slack <= e <= hi + slack


def random_coherification(d: int, seed=None, A: PermutationTensor | None = None) -> np.ndarray:
    if A is None:
        A = cyclic_tensor(d)
    return build_unitary(A, BasisFamily.haar(d, seed))


def scatter(d: int, n: int, seed=None, A: PermutationTensor | None = None):
    """``(e_p, g_t)`` of ``n`` Haar-random coherifications."""
    if A is None:
        A = cyclic_tensor(d)
    out = np.empty((n, 2))
    for t, s in enumerate(T.spawn_seeds(seed, n)):
        U = build_unitary(A, BasisFamily.haar(d, s))
        g = gate_metrics(U, check=False)
        out[t] = g.e_p, g.g_t
    return out


def swap_power_curve(d: int, n: int = 101):
    """``(kappa, e_p, g_t)`` along ``S**kappa``."""
    rows = []
    for kappa in np.linspace(0, 1, n):
        g = gate_metrics(T.swap_power(d, kappa))
        rows.append((float(kappa), g.e_p, g.g_t))
    return rows


def local_rotation(U: np.ndarray, seed=None) -> np.ndarray:
    """``(v1 x v2) U (v1' x v2')`` for Haar-random local factors."""
    d = T.local_dim(U)
    s = T.spawn_seeds(seed, 4)
    v = [T.haar_unitary(d, x) for x in s]
    return np.kron(v[0], v[1]) @ U @ np.kron(v[2], v[3])

