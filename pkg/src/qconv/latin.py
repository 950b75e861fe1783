"""Latin squares and hypercubes, finite-field constructions, permutation tensors.

Symbols are 1-based at every public boundary (``cells`` hold values in
``1..d``); arithmetic inside is 0-based.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, NoConstructionError, OrthogonalityError, FormatError

# fixed irreducible polynomials, coefficients low -> high degree
_FIXED_POLYS = {4: (1, 1, 1), 8: (1, 1, 0, 1), 9: (1, 0, 1)}


def prime_power(n: int):
    """Return ``(p, k)`` with ``n == p**k`` for prime ``p``, else ``None``."""
    if n < 2:
        return None
    for p in range(2, int(n ** 0.5) + 1):
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            return (p, k) if n == 1 else None
    return (n, 1)


class GF:
    """Arithmetic in GF(q) with elements encoded as ``0..q-1``.

    An element is the integer whose base-``p`` digits are the coefficients of
    its polynomial representative (digit ``i`` multiplies ``x**i``).
    """

    def __init__(self, q: int):
        pk = prime_power(q)
        if pk is None:
            raise NoConstructionError(f"{q} is not a prime power")
        self.q = q
        self.p, self.k = pk
        self.poly = _FIXED_POLYS.get(q) or (None if self.k == 1 else _first_irreducible(self.p, self.k))
        self.add, self.mul = _tables(q)

    def elements(self):
        return range(self.q)

    def neg(self, a):
        return int(np.nonzero(self.add[a] == 0)[0][0])

    def sub(self, a, b):
        return int(self.add[a, self.neg(b)])

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(np.nonzero(self.mul[a] == 1)[0][0])

    def det(self, M) -> int:
        """Determinant by Laplace expansion (matrices here are at most 4x4)."""
        M = [list(r) for r in M]
        n = len(M)
        if n == 1:
            return int(M[0][0])
        total = 0
        for c in range(n):
            minor = [row[:c] + row[c + 1:] for row in M[1:]]
            term = int(self.mul[M[0][c], self.det(minor)])
            total = int(self.add[total, term]) if c % 2 == 0 else self.sub(total, term)
        return total


def _poly_mulmod(a, b, p, poly):
    """Multiply coefficient tuples modulo the monic ``poly`` over GF(p)."""
    k = len(poly) - 1
    prod = [0] * (2 * k)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    for deg in range(2 * k - 1, k - 1, -1):
        c = prod[deg]
        if c:
            for t in range(k + 1):
                prod[deg - k + t] = (prod[deg - k + t] - c * poly[t]) % p
    return prod[:k]


def _digits(n, p, k):
    out = []
    for _ in range(k):
        n, r = divmod(n, p)
        out.append(r)
    return out


def _undigits(ds, p):
    return sum(c * p ** i for i, c in enumerate(ds))


def _first_irreducible(p, k):
    for tail in itertools.product(range(p), repeat=k):
        poly = tuple(tail) + (1,)
        if poly[0] == 0:
            continue
        # irreducible (degree <= 3 suffices by root test; higher uses factor scan)
        if _is_irreducible(poly, p):
            return poly
    raise NoConstructionError(f"no irreducible polynomial of degree {k} over GF({p})")


def _is_irreducible(poly, p):
    k = len(poly) - 1
    # trial division by all monic polynomials of degree 1..k//2
    for deg in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=deg):
            div = list(tail) + [1]
            rem = list(poly)
            for top in range(k, deg - 1, -1):
                c = rem[top]
                if c:
                    for t in range(deg + 1):
                        rem[top - deg + t] = (rem[top - deg + t] - c * div[t]) % p
            if not any(rem[:deg]):
                return False
    return True


@lru_cache(maxsize=None)
def _tables(q):
    p, k = prime_power(q)
    if k == 1:
        a = np.arange(q)
        return (a[:, None] + a[None, :]) % q, (a[:, None] * a[None, :]) % q
    poly = _FIXED_POLYS.get(q) or _first_irreducible(p, k)
    add = np.zeros((q, q), dtype=int)
    mul = np.zeros((q, q), dtype=int)
    for a in range(q):
        da = _digits(a, p, k)
        for b in range(q):
            db = _digits(b, p, k)
            add[a, b] = _undigits([(x + y) % p for x, y in zip(da, db)], p)
            mul[a, b] = _undigits(_poly_mulmod(da, db, p, poly), p)
    return add, mul


# --- value types ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatinHypercube:
    """Integer tensor of shape ``(d,)*arity`` with symbols ``1..d``; every
    axis-aligned line holds each symbol exactly once."""

    d: int
    arity: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=int).reshape((self.d,) * self.arity)
        object.__setattr__(self, "cells", cells)
        cells.setflags(write=False)
        if cells.min() < 1 or cells.max() > self.d:
            raise DimensionError(f"symbols must lie in 1..{self.d}")
        full = np.arange(1, self.d + 1)
        for ax in range(self.arity):
            lines = np.sort(np.moveaxis(cells, ax, -1).reshape(-1, self.d), axis=1)
            if not np.all(lines == full):
                raise DimensionError(f"axis {ax} has a line missing a symbol")

    def __eq__(self, other):
        return (
            isinstance(other, LatinHypercube)
            and self.d == other.d
            and self.arity == other.arity
            and np.array_equal(self.cells, other.cells)
        )

    def __hash__(self):
        return hash((self.d, self.arity, self.cells.tobytes()))

    def to_json(self) -> dict:
        return {"d": self.d, "arity": self.arity, "cells": [int(x) for x in self.cells.ravel()]}

    @classmethod
    def from_json(cls, obj):
        try:
            d, arity, cells = int(obj["d"]), int(obj["arity"]), obj["cells"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed Latin object: {exc}") from None
        if len(cells) != d ** arity:
            raise FormatError(f"expected {d ** arity} cells, got {len(cells)}")
        if arity == 2:
            return LatinSquare(d, cells)
        return cls(d, arity, np.asarray(cells))


class LatinSquare(LatinHypercube):
    def __init__(self, d, cells):
        super().__init__(d, 2, np.asarray(cells))

    def __repr__(self):
        return f"LatinSquare(d={self.d}, cells={self.cells.tolist()})"


@dataclass(frozen=True, eq=False)
class PermutationTensor:
    """0/1 tensor of shape ``(d,)*arity`` whose every single-index sum is 1."""

    d: int
    arity: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries).reshape((self.d,) * self.arity)
        if not np.all((e == 0) | (e == 1)):
            raise DimensionError("permutation tensor entries must be 0 or 1")
        e = e.astype(np.int8)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        for ax in range(self.arity):
            if not np.all(e.sum(axis=ax) == 1):
                raise DimensionError(f"sum along index {ax} is not identically 1")

    def __eq__(self, other):
        return isinstance(other, PermutationTensor) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def first_index(self) -> np.ndarray:
        """Array ``K[i2, ..., im]`` of the unique first index with entry 1."""
        return np.argmax(self.entries, axis=0)

    def to_json(self) -> dict:
        return {"d": self.d, "arity": self.arity, "entries": [int(x) for x in self.entries.ravel()]}

    @classmethod
    def from_json(cls, obj):
        try:
            d, arity, entries = int(obj["d"]), int(obj["arity"]), obj["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed tensor object: {exc}") from None
        if len(entries) != d ** arity:
            raise FormatError(f"expected {d ** arity} entries, got {len(entries)}")
        return cls(d, arity, np.asarray(entries))


# --- squares ----------------------------------------------------------------

def mols(d: int) -> list[LatinSquare]:
    """The ``d-1`` squares ``L_a[i, j] = a*i + j`` over GF(d), ``a != 0``.

    Raises
    ------
    NoConstructionError
        For ``d`` in {1, 2, 6} or any ``d`` that is not a prime power.
    """
    if d == 6:
        raise NoConstructionError("no pair of orthogonal Latin squares of order 6 exists")
    if d == 2:
        raise NoConstructionError("no pair of orthogonal Latin squares of order 2 exists")
    if d < 3 or prime_power(d) is None:
        raise NoConstructionError(f"order {d} is not a prime power >= 3")
    F = GF(d)
    idx = np.arange(d)
    out = []
    for a in range(1, d):
        cells = F.add[F.mul[a, idx][:, None], idx[None, :]]
        out.append(LatinSquare(d, cells + 1))
    return out


def are_orthogonal(L: LatinHypercube, M: LatinHypercube) -> bool:
    """True iff the superimposed pairs ``(L_ij, M_ij)`` are all distinct."""
    if L.d != M.d or L.arity != 2 or M.arity != 2:
        raise DimensionError("orthogonality needs two Latin squares of the same order")
    pairs = (L.cells - 1) * L.d + (M.cells - 1)
    return len(np.unique(pairs)) == L.d * L.d


def cyclic_square(d: int) -> LatinSquare:
    """``L[j, k] = ((j + k) mod d) + 1`` (0-based indices)."""
    idx = np.arange(d)
    return LatinSquare(d, (idx[:, None] + idx[None, :]) % d + 1)


def tensor_from_hypercube(L: LatinHypercube) -> PermutationTensor:
    """``A[i1, i2, ..., im] = delta(i1, L[i2, ..., im])``."""
    d = L.d
    A = (np.arange(d).reshape((d,) + (1,) * L.arity) == (L.cells - 1)[None]).astype(np.int8)
    return PermutationTensor(d, L.arity + 1, A)


def tensor_from_square(L: LatinSquare) -> PermutationTensor:
    return tensor_from_hypercube(L)


def hypercube_from_tensor(A: PermutationTensor) -> LatinHypercube:
    cells = A.first_index() + 1
    if A.arity == 3:
        return LatinSquare(A.d, cells)
    return LatinHypercube(A.d, A.arity - 1, cells)


def square_from_tensor(A: PermutationTensor) -> LatinSquare:
    if A.arity != 3:
        raise DimensionError("a square needs an arity-3 tensor")
    return hypercube_from_tensor(A)


def cyclic_tensor(d: int) -> PermutationTensor:
    """``A[k, l, j] = delta(k, (l + j) mod d)``."""
    return tensor_from_square(cyclic_square(d))


def perm_2unitary_from_mols(L: LatinSquare, M: LatinSquare) -> np.ndarray:
    """``P = sum_{l,j} |L_lj, M_lj><l, j|`` for an orthogonal pair."""
    if not are_orthogonal(L, M):
        raise OrthogonalityError("the two squares are not orthogonal")
    return multipartite_unitary_from_hypercubes([L, M])


# --- hypercubes -------------------------------------------------------------

def _linear_cubes(F: GF, G: np.ndarray) -> list[LatinHypercube]:
    n, k = G.shape
    d = F.q
    grids = np.indices((d,) * n).reshape(n, -1)
    out = []
    for c in range(k):
        acc = np.zeros(grids.shape[1], dtype=int)
        for s in range(n):
            acc = F.add[acc, F.mul[G[s, c], grids[s]]]
        out.append(LatinHypercube(d, n, acc.reshape((d,) * n) + 1) if n != 2 else LatinSquare(d, acc.reshape(d, d) + 1))
    return out


def _superregular(F: GF, G) -> bool:
    """All square minors of ``G`` nonzero."""
    G = np.asarray(G)
    n, k = G.shape
    for size in range(1, min(n, k) + 1):
        for rows in itertools.combinations(range(n), size):
            for cols in itertools.combinations(range(k), size):
                if F.det(G[np.ix_(rows, cols)]) == 0:
                    return False
    return True


def _power(F: GF, a, e):
    r = 1
    for _ in range(e):
        r = int(F.mul[r, a])
    return r


def _search_superregular(F: GF, n: int, k: int, budget: int = 200_000):
    """Backtracking search for an ``n x k`` superregular matrix with first row
    and column fixed to 1 (row/column scalings preserve superregularity)."""
    G = np.ones((n, k), dtype=int)
    cells = [(r, c) for r in range(1, n) for c in range(1, k)]
    nodes = 0

    def ok_upto(r, c):
        # minors whose bottom-right corner is (r, c)
        for size in range(2, min(r, c) + 2):
            for rows in itertools.combinations(range(r), size - 1):
                for cols in itertools.combinations(range(c), size - 1):
                    sub = G[np.ix_(rows + (r,), cols + (c,))]
                    if F.det(sub) == 0:
                        return False
        return True

    def rec(t):
        nonlocal nodes
        if t == len(cells):
            return True
        r, c = cells[t]
        for v in range(1, F.q):
            nodes += 1
            if nodes > budget:
                return False
            G[r, c] = v
            if ok_upto(r, c) and rec(t + 1):
                return True
        G[r, c] = 1
        return False

    return G.copy() if rec(0) else None


def latin_hypercubes(d: int, arity: int, how_many: int) -> list[LatinHypercube]:
    """Mutually orthogonal Latin hypercubes from linear forms over GF(d).

    Cube ``a`` has cells ``a*i2 + i3 + a**2*i4 + a**3*i5 + ...``; nonzero
    ``a`` are taken in increasing encoding whenever the coefficient matrix
    stays superregular (every square minor nonzero), which makes the cubes
    mutually orthogonal and their joint orthogonal array MDS. If that family
    is too small a backtracking search over superregular coefficient
    matrices is tried.
    """
    if arity < 2 or how_many < 1:
        raise DimensionError("need arity >= 2 and how_many >= 1")
    if prime_power(d) is None:
        raise NoConstructionError(f"order {d} is not a prime power")
    F = GF(d)
    chosen = []
    for a in range(1, d):
        coeff = [a, 1] + [_power(F, a, e) for e in range(2, arity)]
        trial = chosen + [coeff]
        if _superregular(F, np.array(trial).T):
            chosen = trial
        if len(chosen) == how_many:
            return _linear_cubes(F, np.array(chosen).T)
    G = _search_superregular(F, arity, how_many) if how_many > 1 else np.ones((arity, 1), int)
    if G is None:
        raise NoConstructionError(
            f"no {how_many} mutually orthogonal linear Latin hypercubes of order {d}, arity {arity}"
        )
    return _linear_cubes(F, G)


def are_orthogonal_hypercubes(A: LatinHypercube, B: LatinHypercube) -> bool:
    """Every aligned pair of 2-index subsquares is orthogonal."""
    if A.d != B.d or A.arity != B.arity:
        raise DimensionError("hypercubes differ in order or arity")
    d, n = A.d, A.arity
    for s, t in itertools.combinations(range(n), 2):
        a = np.moveaxis(A.cells - 1, (s, t), (-2, -1)).reshape(-1, d * d)
        b = np.moveaxis(B.cells - 1, (s, t), (-2, -1)).reshape(-1, d * d)
        codes = np.sort(a * d + b, axis=1)
        if not np.all(codes == np.arange(d * d)):
            return False
    return True


def _check_mutual(cubes):
    for A, B in itertools.combinations(cubes, 2):
        if not are_orthogonal_hypercubes(A, B):
            raise OrthogonalityError("hypercubes are not mutually orthogonal")


def multipartite_unitary_from_hypercubes(cubes) -> np.ndarray:
    """``U = sum_x |L1(x) ... Ln(x)><x|`` for ``n`` cubes of arity ``n``."""
    cubes = list(cubes)
    n = len(cubes)
    if n < 2:
        raise DimensionError("need at least two hypercubes")
    d = cubes[0].d
    if any(c.d != d or c.arity != n for c in cubes):
        raise DimensionError("need n hypercubes of arity n and equal order")
    _check_mutual(cubes)
    D = d ** n
    rows = np.zeros(D, dtype=int)
    for c in cubes:
        rows = rows * d + (c.cells.ravel() - 1)
    if len(np.unique(rows)) != D:
        raise OrthogonalityError("hypercubes do not define a permutation")
    U = np.zeros((D, D))
    U[rows, np.arange(D)] = 1.0
    return U


def orthogonal_array(cubes) -> np.ndarray:
    """Rows ``(i2, ..., im, L1, ..., Ln)`` (0-based symbols)."""
    cubes = list(cubes)
    d, n = cubes[0].d, cubes[0].arity
    coords = np.indices((d,) * n).reshape(n, -1).T
    syms = np.stack([c.cells.ravel() - 1 for c in cubes], axis=1)
    return np.concatenate([coords, syms], axis=1)


def min_hamming_distance(rows: np.ndarray) -> int:
    rows = np.asarray(rows)
    best = rows.shape[1]
    for r in range(len(rows) - 1):
        diff = np.count_nonzero(rows[r + 1:] != rows[r], axis=1)
        best = min(best, int(diff.min()))
    return best


def oa_transform(cubes) -> list[LatinHypercube]:
    """Swap coordinate and symbol columns of the orthogonal array.

    Returns cubes ``M`` with ``M_k(L1(x), ..., Ln(x)) = x_k``, so that
    ``U = sum_y |y><M1(y) ... Mn(y)|`` for the ``U`` built from ``cubes``.
    """
    cubes = list(cubes)
    _check_mutual(cubes)
    d, n = cubes[0].d, cubes[0].arity
    if len(cubes) != n:
        raise DimensionError("oa_transform needs n hypercubes of arity n")
    oa = orthogonal_array(cubes)
    syms = oa[:, n:]
    flat = np.zeros(len(oa), dtype=int)
    for c in range(n):
        flat = flat * d + syms[:, c]
    if len(np.unique(flat)) != len(oa):
        raise OrthogonalityError("hypercubes do not define a permutation")
    out = []
    for k in range(n):
        cells = np.empty(len(oa), dtype=int)
        cells[flat] = oa[:, k]
        cells = cells.reshape((d,) * n) + 1
        out.append(LatinSquare(d, cells) if n == 2 else LatinHypercube(d, n, cells))
    return out
