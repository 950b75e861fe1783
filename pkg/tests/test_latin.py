import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qconv import latin as L
from qconv import metrics as M
from qconv.errors import DimensionError, NoConstructionError, OrthogonalityError

# squares printed for d = 3 and d = 4
PAPER_L3 = [[1, 2, 3], [3, 1, 2], [2, 3, 1]]
PAPER_M3 = [[1, 2, 3], [2, 3, 1], [3, 1, 2]]
PAPER_L4 = [[1, 2, 3, 4], [2, 1, 4, 3], [3, 4, 1, 2], [4, 3, 2, 1]]
PAPER_M4 = [[1, 2, 3, 4], [3, 4, 1, 2], [4, 3, 2, 1], [2, 1, 4, 3]]
PAPER_TENSOR3 = np.array([
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
    [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
])


def sq(cells):
    return L.LatinSquare(len(cells), np.array(cells))


@pytest.mark.parametrize("q,expected", [(2, (2, 1)), (4, (2, 2)), (9, (3, 2)), (12, None), (1, None), (49, (7, 2))])
def test_prime_power(q, expected):
    assert L.prime_power(q) == expected


@pytest.mark.parametrize("q", [4, 8, 9])
def test_gf_field_axioms(q):
    F = L.GF(q)
    for a in range(1, q):
        assert F.mul[a, F.inv(a)] == 1
    x = np.arange(q)
    assert np.all(F.mul[x[:, None], x[None, :]] == F.mul[x[None, :], x[:, None]])
    for a, b, c in itertools.product(range(q), repeat=3):
        assert F.mul[a, F.add[b, c]] == F.add[F.mul[a, b], F.mul[a, c]]


@pytest.mark.parametrize("d", [3, 4, 5, 7, 8, 9])
def test_mols_pairwise_orthogonal(d):
    squares = L.mols(d)
    assert len(squares) == d - 1
    for a, b in itertools.combinations(squares, 2):
        assert L.are_orthogonal(a, b)


@pytest.mark.parametrize("d", [1, 2, 6, 10, 12])
def test_mols_no_construction(d):
    with pytest.raises(NoConstructionError):
        L.mols(d)


def _canonical(a, b):
    """Relabel rows, columns and symbols so that the pair is in a normal form."""
    d = a.d
    best = None
    for rp in itertools.permutations(range(d)):
        A = a.cells[list(rp)]
        B = b.cells[list(rp)]
        # columns ordered by the first row of A, symbols of A fixed by its first row
        cols = np.argsort(A[0])
        A, B = A[:, cols], B[:, cols]
        sa = {s: i + 1 for i, s in enumerate(A[0])}
        sb = {s: i + 1 for i, s in enumerate(B[0])}
        key = (tuple(np.vectorize(sa.get)(A).ravel()), tuple(np.vectorize(sb.get)(B).ravel()))
        best = key if best is None or key < best else best
    return best


def test_mols3_contains_printed_pair_up_to_relabelling():
    got = L.mols(3)
    target = _canonical(sq(PAPER_L3), sq(PAPER_M3))
    assert any(_canonical(x, y) == target for x, y in itertools.permutations(got, 2))


def test_mols4_matches_printed_pair():
    a, b = L.mols(4)[:2]
    assert a == sq(PAPER_L4) and b == sq(PAPER_M4)


def test_printed_pairs_orthogonal():
    assert L.are_orthogonal(sq(PAPER_L3), sq(PAPER_M3))
    assert L.are_orthogonal(sq(PAPER_L4), sq(PAPER_M4))
    assert not L.are_orthogonal(sq(PAPER_L4), sq(PAPER_L4))


def test_orthogonality_order_mismatch():
    with pytest.raises(DimensionError):
        L.are_orthogonal(sq(PAPER_L3), sq(PAPER_L4))


def test_latin_invariant_enforced():
    with pytest.raises(DimensionError):
        L.LatinSquare(2, np.array([[1, 1], [2, 2]]))


def test_tensor_from_printed_square():
    A = L.tensor_from_square(sq(PAPER_L3))
    np.testing.assert_array_equal(A.entries, PAPER_TENSOR3)


def test_cyclic_tensor_definition():
    A = L.cyclic_tensor(5)
    k, l, j = np.indices((5, 5, 5))
    np.testing.assert_array_equal(A.entries, (k == (l + j) % 5).astype(int))


@given(st.sampled_from([3, 4, 5, 7]), st.integers(0, 5))
def test_square_tensor_round_trip(d, which):
    s = L.mols(d)[which % (d - 1)]
    A = L.tensor_from_square(s)
    assert L.square_from_tensor(A) == s
    assert L.tensor_from_square(L.square_from_tensor(A)) == A


def test_permutation_tensor_rejects_bad_sums():
    with pytest.raises(DimensionError):
        L.PermutationTensor(2, 3, np.ones((2, 2, 2), dtype=int))


@pytest.mark.parametrize("d", [3, 4, 5, 7])
def test_perm_2unitary_has_unit_entangling_power(d):
    P = L.perm_2unitary_from_mols(*L.mols(d)[:2])
    assert np.all(P.sum(axis=0) == 1) and np.all(P.sum(axis=1) == 1)
    assert M.entangling_power(P) == pytest.approx(1.0, abs=1e-12)


def test_perm_2unitary_rejects_non_orthogonal():
    s = L.mols(3)[0]
    with pytest.raises(OrthogonalityError):
        L.perm_2unitary_from_mols(s, s)


def test_two_hypercubes_reduce_to_mols():
    a, b = L.mols(5)[:2]
    np.testing.assert_array_equal(L.multipartite_unitary_from_hypercubes([a, b]), L.perm_2unitary_from_mols(a, b))


def test_latin_hypercubes_d4():
    cubes = L.latin_hypercubes(4, 3, 3)
    assert len(cubes) == 3
    for a, b in itertools.combinations(cubes, 2):
        assert L.are_orthogonal_hypercubes(a, b)
    U = L.multipartite_unitary_from_hypercubes(cubes)
    assert U.shape == (64, 64)
    assert np.all(U.sum(axis=0) == 1) and np.all(U.sum(axis=1) == 1)


def test_latin_hypercubes_bound():
    # at most d - arity + 1 cubes from the linear construction: 3 - 3 + 1 = 1 < 3
    with pytest.raises(NoConstructionError):
        L.latin_hypercubes(3, 3, 3)


def test_hypercube_orthogonality_negative_cases():
    a, b = L.latin_hypercubes(4, 3, 2)
    assert L.are_orthogonal_hypercubes(a, b)
    assert not L.are_orthogonal_hypercubes(a, a)
    relabel = np.array([2, 3, 4, 1])
    a2 = L.LatinHypercube(4, 3, relabel[a.cells - 1])
    assert not L.are_orthogonal_hypercubes(a, a2)


@pytest.mark.parametrize("d", [3, 4])
def test_oa_transform_preserves_orthogonality_and_distance(d):
    pair = L.mols(d)[:2]
    new = L.oa_transform(pair)
    assert L.are_orthogonal(*new)
    P = L.perm_2unitary_from_mols(*pair)
    # adjoint-side indexing: U = sum_y |y><M1(y) M2(y)|
    Q = np.zeros_like(P)
    for y1, y2 in itertools.product(range(d), repeat=2):
        Q[y1 * d + y2, (new[0].cells[y1, y2] - 1) * d + new[1].cells[y1, y2] - 1] = 1
    np.testing.assert_array_equal(P, Q)
    rows = L.orthogonal_array(pair)
    rows2 = L.orthogonal_array(new)
    assert {tuple(r) for r in rows} == {tuple(np.roll(r, 2)) for r in rows2}
    assert L.min_hamming_distance(rows) == L.min_hamming_distance(rows2) == 3


def test_oa_transform_cubes_mds():
    cubes = L.latin_hypercubes(4, 3, 3)
    new = L.oa_transform(cubes)
    for a, b in itertools.combinations(new, 2):
        assert L.are_orthogonal_hypercubes(a, b)
    assert L.min_hamming_distance(L.orthogonal_array(new)) == 4


def test_latin_json_round_trip():
    c = L.latin_hypercubes(4, 3, 1)[0]
    assert L.LatinHypercube.from_json(c.to_json()) == c
    s = sq(PAPER_L4)
    assert L.LatinHypercube.from_json(s.to_json()) == s
