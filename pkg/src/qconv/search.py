"""Alternating polar-decomposition search for 2-unitary coherifications.

For an arity-3 permutation tensor ``A`` and vectors ``a_{k,l}`` three families
of ``d x d`` matrices must all be unitary:

* ``V_k``   : fixed ``k``, row ``l`` is ``a_{k,l}``
* ``V'_j``  : fixed ``j``, row ``k`` is ``a_{k,l}`` with ``A[k,l,j] = 1``
* ``V''_l`` : fixed ``l``, row ``j`` is ``a_{k,l}`` with ``A[k,l,j] = 1``

Unitarity of the first family makes the coherification unitary, of the second
makes its reshuffling unitary and of the third its partial transpose. A sweep
replaces every matrix of each family by its unitary polar factor in turn.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import tensor as T
from .coherify import BasisFamily, build_unitary
from .errors import SearchFailed, SingularError
from .latin import PermutationTensor


@dataclass(frozen=True)
class TensorMaps:
    """Index maps of an arity-3 permutation tensor."""

    d: int
    j_of: np.ndarray  # j_of[k, l]
    l_of: np.ndarray  # l_of[k, j]
    k_of: np.ndarray  # k_of[l, j]

    @classmethod
    def from_tensor(cls, A: PermutationTensor) -> "TensorMaps":
        E = A.entries
        return cls(A.d, np.argmax(E, axis=2), np.argmax(E, axis=1), np.argmax(E, axis=0))


@dataclass(frozen=True, eq=False)
class SearchState:
    A: PermutationTensor
    V: np.ndarray
    residuals: tuple = (math.inf, math.inf, math.inf)
    iteration: int = 0
    history: list = field(default_factory=list)
    seed: object = None

    @property
    def max_residual(self) -> float:
        return max(self.residuals)

    @property
    def bases(self) -> BasisFamily:
        return BasisFamily(self.A.d, self.V, tol=1e-8)

    def unitary(self) -> np.ndarray:
        return build_unitary(self.A, self.bases)


def assemble_vprime(V: np.ndarray, maps: TensorMaps) -> np.ndarray:
    """``out[j, k] = a_{k, l_of[k, j]}``."""
    d = maps.d
    k = np.arange(d)[None, :]
    j = np.arange(d)[:, None]
    return V[k, maps.l_of[k, j]]


def assemble_vsecond(V: np.ndarray, maps: TensorMaps) -> np.ndarray:
    """``out[l, j] = a_{k_of[l, j], l}``."""
    d = maps.d
    l = np.arange(d)[:, None]
    j = np.arange(d)[None, :]
    return V[maps.k_of[l, j], l]


def _scatter_vprime(Vp, maps):
    d = maps.d
    V = np.empty_like(Vp)
    k = np.arange(d)[None, :]
    j = np.arange(d)[:, None]
    V[k, maps.l_of[k, j]] = Vp
    return V


def _scatter_vsecond(Vs, maps):
    d = maps.d
    V = np.empty_like(Vs)
    l = np.arange(d)[:, None]
    j = np.arange(d)[None, :]
    V[maps.k_of[l, j], l] = Vs
    return V


def _family_residual(M):
    G = M @ np.conj(np.swapaxes(M, -1, -2))
    return float(np.max(np.abs(G - np.eye(M.shape[-1]))))


def residuals(V: np.ndarray, maps: TensorMaps) -> tuple[float, float, float]:
    return (
        _family_residual(V),
        _family_residual(assemble_vprime(V, maps)),
        _family_residual(assemble_vsecond(V, maps)),
    )


def _polar(M, family):
    try:
        return T.polar_factor(M)
    except SingularError as exc:
        raise SingularError(f"{family}: {exc}") from None


def sweep_array(V: np.ndarray, maps: TensorMaps) -> np.ndarray:
    """One ``V -> V' -> V''`` round of polar projections on a raw array."""
    V = _polar(V, "V")
    V = _scatter_vprime(_polar(assemble_vprime(V, maps), "V'"), maps)
    V = _scatter_vsecond(_polar(assemble_vsecond(V, maps), "V''"), maps)
    return V


def sinkhorn_sweep(state: SearchState) -> SearchState:
    maps = TensorMaps.from_tensor(state.A)
    V = sweep_array(state.V, maps)
    res = residuals(V, maps)
    return replace(state, V=V, residuals=res, iteration=state.iteration + 1,
                   history=state.history + [max(res)])


# --- cyclic amplitude constraint ----------------------------------------------

def cyclic_project(V: np.ndarray, pin_first: bool = True) -> np.ndarray:
    """Impose ``|a_{k,l}[i]| = |a_{k,l+n}[i+n]|`` (indices mod ``d``).

    Moduli are replaced by their root-mean-square along each orbit
    ``{(l+n, i+n)}`` with phases kept, every vector is renormalised and, with
    ``pin_first``, ``V_0`` is set to the identity.
    """
    V = np.asarray(V, dtype=complex)
    d = V.shape[0]
    l, i = np.indices((d, d))
    diag = (i - l) % d  # orbit label of (l, i)
    mod2 = np.abs(V) ** 2
    orbit_mean = np.zeros((d, d))
    for c in range(d):
        orbit_mean[:, c] = mod2[:, diag == c].mean(axis=1)
    target = np.sqrt(orbit_mean[:, diag])
    ph = np.exp(1j * np.angle(V))
    out = target * ph
    out /= np.linalg.norm(out, axis=2, keepdims=True)
    if pin_first:
        out[0] = np.eye(d)
    return out


def cyclic_violation(V: np.ndarray) -> float:
    d = V.shape[0]
    A = np.abs(V)
    shifted = np.roll(np.roll(A, -1, axis=1), -1, axis=2)
    return float(np.max(np.abs(A - shifted)))


# --- driver -----------------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    tol: float = 1e-12
    max_sweeps: int = 20000
    constraint: str | None = None  # None or "cyclic"
    stall_window: int = 50
    stall_eps: float = 1e-14


def _random_start(d, rng, constraint):
    V = np.stack([T.haar_unitary(d, rng) for _ in range(d)])
    if constraint == "cyclic":
        V = cyclic_project(V)
    return V


def search(A: PermutationTensor, init=None, config: SearchConfig = SearchConfig()) -> SearchState:
    """Run sweeps from ``init`` (a BasisFamily, an array or a seed).

    Returns the state on success (all three residuals below ``config.tol``).

    Raises
    ------
    SearchFailed
        When ``max_sweeps`` is exhausted, the residual stalls or a family
        becomes singular; ``best`` holds the lowest-residual state reached.
    """
    d = A.d
    maps = TensorMaps.from_tensor(A)
    seed = None
    if isinstance(init, BasisFamily):
        V = init.V.copy()
    elif isinstance(init, np.ndarray):
        V = np.array(init, dtype=complex)
    else:
        seed = init
        V = _random_start(d, T.make_rng(init), config.constraint)
    history = []
    best_res, best_V = math.inf, V
    for it in range(1, config.max_sweeps + 1):
        try:
            V = sweep_array(V, maps)
        except SingularError as exc:
            best = SearchState(A, best_V, residuals(best_V, maps), len(history), history, seed)
            raise SearchFailed(f"sweep {it} hit a singular matrix ({exc})", best=best, history=[history]) from None
        if config.constraint == "cyclic":
            V = cyclic_project(V)
        res = residuals(V, maps)
        r = max(res)
        history.append(r)
        if r < best_res:
            best_res, best_V = r, V
        if r < config.tol:
            return SearchState(A, V, res, it, history, seed)
        w = config.stall_window
        if it > w and history[-w - 1] - r < config.stall_eps:
            break
    best = SearchState(A, best_V, residuals(best_V, maps), len(history), history, seed)
    raise SearchFailed(f"no convergence after {len(history)} sweeps (best residual {best_res:.3g})",
                       best=best, history=[history])


def search_restarts(A: PermutationTensor, seed, restarts: int, config: SearchConfig = SearchConfig(),
                    stop_at_first: bool = True):
    """Independent restarts under derived sub-seeds.

    Returns ``(successes, log)`` where ``log`` holds one dict per restart.
    Raises :class:`SearchFailed` if no restart converges.
    """
    successes, log = [], []
    best = None
    for r, s in enumerate(T.spawn_seeds(seed, restarts)):
        try:
            st = search(A, s, config)
        except SearchFailed as exc:
            log.append({"restart": r, "success": False, "sweeps": exc.best.iteration,
                        "residual": exc.best.max_residual, "trace": exc.history[0]})
            if best is None or exc.best.max_residual < best.max_residual:
                best = exc.best
            continue
        log.append({"restart": r, "success": True, "sweeps": st.iteration,
                    "residual": st.max_residual, "trace": st.history})
        successes.append(st)
        if stop_at_first:
            break
    if not successes:
        raise SearchFailed(f"all {restarts} restarts failed", best=best, history=[e["trace"] for e in log])
    return successes, log


# --- tangent-space dimension -------------------------------------------------

def _realify(V):
    return np.concatenate([V.real.ravel(), V.imag.ravel()])


def _complexify(x, shape):
    n = x.size // 2
    return (x[:n] + 1j * x[n:]).reshape(shape)


def _constraint_map(V, maps):
    out = []
    for M in (V, assemble_vprime(V, maps), assemble_vsecond(V, maps)):
        G = M @ np.conj(np.swapaxes(M, -1, -2)) - np.eye(M.shape[-1])
        out.append(G.real.ravel())
        out.append(G.imag.ravel())
    return np.concatenate(out)


def _phase_directions(V):
    out = []
    for idx in np.ndindex(*V.shape[:-1]):
        dV = np.zeros_like(V)
        dV[idx] = 1j * V[idx]
        out.append(_realify(dV))
    return out


def _common_unitary_directions(V):
    """``V -> V W^T`` for the ``d**2`` Hermitian generators of ``U(d)``."""
    d = V.shape[-1]
    E = np.eye(d)
    out = []
    for a in range(d):
        for b in range(a, d):
            Eab = np.outer(E[a], E[b])
            gens = [1j * Eab] if a == b else [1j * (Eab + Eab.T), Eab - Eab.T]
            out.extend(_realify(V @ G.T) for G in gens)
    return out


def _local_phase_directions(V, maps):
    """Diagonal local phases on the output label ``k`` and the input labels ``l``, ``j``."""
    d = maps.d
    out = []
    for mask in ([np.arange(d)[:, None] == np.full((d, d), c) for c in range(d)]
                 + [np.arange(d)[None, :] == np.full((d, d), c) for c in range(d)]
                 + [maps.j_of == c for c in range(d)]):
        dV = np.where(mask[..., None], 1j * V, 0)
        out.append(_realify(dV))
    return out


def _span_dim(vectors, threshold):
    s = np.linalg.svd(np.array(vectors).T, compute_uv=False)
    return int(np.sum(s > threshold * s[0]))


def solution_nullity(A: PermutationTensor, V: np.ndarray, threshold: float = 1e-6) -> dict:
    """Dimension of the solution set's tangent space at ``V``.

    The Jacobian of the Gram residuals of all three families is evaluated
    analytically in the real coordinates of ``V``. Two families of exact
    symmetries are removed by measuring their span numerically (they overlap,
    for instance when every basis is monomial):

    * ``local``: a common ``W in U(d)`` acting on every vector together with
      diagonal local phases on the labels ``k``, ``l`` and ``j``; these are
      local-unitary dressings of the gate. ``nonlocal = raw - local``.
    * ``W`` together with an arbitrary phase per vector, which amounts to
      multiplying the gate by a diagonal unitary. ``beyond_phases`` is what
      remains after removing this larger span.

    ``modulo_phases`` is ``raw - d**2``.
    """
    d = A.d
    maps = TensorMaps.from_tensor(A)
    V = np.asarray(V, dtype=complex)
    n = V.size
    f0 = _constraint_map(V, maps)
    J = np.empty((f0.size, 2 * n))
    for c in range(2 * n):
        e = np.zeros(2 * n)
        e[c] = 1.0
        dV = _complexify(e, V.shape)
        cols = []
        for M, dM in ((V, dV),
                      (assemble_vprime(V, maps), assemble_vprime(dV, maps)),
                      (assemble_vsecond(V, maps), assemble_vsecond(dV, maps))):
            dG = dM @ np.conj(np.swapaxes(M, -1, -2)) + M @ np.conj(np.swapaxes(dM, -1, -2))
            cols.append(dG.real.ravel())
            cols.append(dG.imag.ravel())
        J[:, c] = np.concatenate(cols)
    s = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(s > threshold * s[0]))
    raw = 2 * n - rank
    W = _common_unitary_directions(V)
    local = _span_dim(W + _local_phase_directions(V, maps), threshold)
    trivial = _span_dim(W + _phase_directions(V), threshold)
    return {"raw": raw, "modulo_phases": raw - d * d, "local": local, "nonlocal": raw - local,
            "beyond_phases": raw - trivial, "rank": rank, "singular_values": s}
