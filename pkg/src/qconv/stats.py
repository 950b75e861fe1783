"""Output-entanglement samples and the two-sample Kolmogorov-Smirnov test."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogorov

from . import tensor as T
from .errors import InputError, UnitarityError

P_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class EntanglementSample:
    """Linear entropies of ``U(|a> (x) |b>)`` for Haar-random ``a``, ``b``."""

    gate_id: str
    d: int
    values: np.ndarray
    seed: object = None

    def __post_init__(self):
        hi = 1 - 1 / self.d
        v = self.values
        if v.size and (v.min() < -1e-12 or v.max() > hi + 1e-12):
            raise ValueError("linear entropy outside [0, 1 - 1/d]")

    @property
    def n(self) -> int:
        return int(self.values.size)

    def mean(self) -> tuple[float, float]:
        v = self.values
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def sample_entanglement(U: np.ndarray, n: int, seed=None, gate_id: str = "U", chunk: int = 20000) -> EntanglementSample:
    """``n`` i.i.d. values of ``1 - Tr rho_A^2`` on Haar product inputs."""
    U = np.asarray(U)
    d = T.local_dim(U)
    res = T.unitarity_residual(U)
    if res > T.CERTIFY_TOL:
        raise UnitarityError(f"matrix is not unitary (residual {res:.3g})")
    rng = T.make_rng(seed)
    out = np.empty(n)
    UT = U.T
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        a = T.haar_state(d, rng, size=m)
        b = T.haar_state(d, rng, size=m)
        psi = (a[:, :, None] * b[:, None, :]).reshape(m, d * d) @ UT
        X = psi.reshape(m, d, d)
        rho = X @ np.conj(np.swapaxes(X, 1, 2))
        out[start:start + m] = 1 - np.real(np.einsum("nij,nij->n", rho, rho.conj()))
    np.clip(out, 0.0, 1 - 1 / d, out=out)
    return EntanglementSample(gate_id, d, out, seed)


def _values(x):
    if isinstance(x, EntanglementSample):
        return x.values
    return np.asarray(x, dtype=float).ravel()


def ks_statistic(x, y) -> float:
    """Supremum distance between the two empirical CDFs."""
    x = np.sort(_values(x))
    y = np.sort(_values(y))
    if x.size == 0 or y.size == 0:
        raise InputError("KS test needs two nonempty samples")
    grid = np.concatenate([x, y])
    Fx = np.searchsorted(x, grid, side="right") / x.size
    Fy = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(Fx - Fy)))


def ks_two_sample(x, y) -> tuple[float, float]:
    """``(D, p)`` with ``p`` from the asymptotic Kolmogorov distribution.

    The effective size is ``n m / (n + m)``. ``p`` is clamped below at
    ``1e-300``; use :func:`format_p` to print it.
    """
    D = ks_statistic(x, y)
    n, m = _values(x).size, _values(y).size
    en = math.sqrt(n * m / (n + m))
    p = float(kolmogorov(en * D)) if D > 0 else 1.0
    return D, max(p, P_FLOOR)


def format_p(p: float) -> str:
    return "< 1e-300" if p <= P_FLOOR else f"{p:.6g}"


def ks_critical_value(n: int, m: int, level: float = 0.05) -> float:
    """Asymptotic critical value: ``c(level) sqrt((n + m)/(n m))``."""
    c = math.sqrt(-0.5 * math.log(level / 2))
    return c * math.sqrt((n + m) / (n * m))


def histogram(samples, d: int, bins: int = 200):
    """Counts over ``bins`` uniform bins on ``[0, 1 - 1/d]``."""
    edges = np.linspace(0, 1 - 1 / d, bins + 1)
    counts = [np.histogram(_values(s), bins=edges)[0] for s in samples]
    return edges, counts


def write_histogram_csv(path, a, b, d: int, bins: int = 200) -> None:
    edges, (ca, cb) = histogram([a, b], d, bins)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count_a", "count_b"])
        for lo, hi, x, y in zip(edges[:-1], edges[1:], ca, cb):
            w.writerow([repr(float(lo)), repr(float(hi)), int(x), int(y)])


def null_calibration(U: np.ndarray, n: int, trials: int, seed=None, level: float = 0.05) -> int:
    """Number of rejections at ``level`` among ``trials`` same-gate comparisons."""
    rejections = 0
    for s in T.spawn_seeds(seed, trials):
        s1, s2 = s.spawn(2)
        _, p = ks_two_sample(sample_entanglement(U, n, s1), sample_entanglement(U, n, s2))
        rejections += p < level
    return rejections
