import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qconv import coherify as C
from qconv import latin as L
from qconv import metrics as M
from qconv import tensor as T
from qconv.errors import DimensionError, NoConstructionError, UnitarityError

seeds = st.integers(0, 2**32 - 1)


def p_gate(d):
    return L.perm_2unitary_from_mols(*L.mols(d)[:2])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_canonical_values(d):
    I, S = np.eye(d * d), T.swap_matrix(d)
    assert M.op_entanglement(I) == pytest.approx(0, abs=1e-12)
    assert M.op_entanglement(S) == pytest.approx(1 - 1 / d**2, abs=1e-12)
    assert M.entangling_power(I) == pytest.approx(0, abs=1e-12)
    assert M.entangling_power(S) == pytest.approx(0, abs=1e-12)
    assert M.gate_typicality(I) == pytest.approx(0, abs=1e-12)
    assert M.gate_typicality(S) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_swap_entanglement_from_partial_trace(d):
    # the reduced state of |S> on (A, A') is I / d^2
    c = T.choi_state(T.swap_matrix(d))
    assert 1 - c.purity(["A", "A'"]) == pytest.approx(M.swap_entanglement(d), abs=1e-14)


@pytest.mark.parametrize("d", [3, 4, 5, 7])
def test_mols_gates_are_2unitary(d):
    P = p_gate(d)
    assert M.entangling_power(P) == pytest.approx(1, abs=1e-12)
    assert M.op_entanglement(P) == pytest.approx(1 - 1 / d**2, abs=1e-12)
    assert M.is_2unitary(P, tol=1e-12).passed


def test_swap_is_not_2unitary():
    cert = M.is_2unitary(T.swap_matrix(3))
    assert not cert.passed and cert.details["R"] == 0 and cert.details["G"] > 1


def test_is_2unitary_bad_shape():
    assert not M.is_2unitary(np.eye(8)).passed


@pytest.mark.parametrize("d", [3, 5, 7])
def test_mub_values(d):
    V = M.mub_bases(d).V
    ov = np.abs(np.einsum("kli,mni->klmn", V.conj(), V)) ** 2
    k = np.arange(d)
    cross = ov.transpose(0, 2, 1, 3)[k[:, None] != k[None, :]]
    np.testing.assert_allclose(cross, 1 / d, atol=1e-12)
    g = M.gate_metrics(M.mub_unitary(d))
    assert g.e_p == pytest.approx(1 - 2 / (d * d + d), abs=1e-10)
    assert g.g_t == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("d", [2, 4, 9, 6])
def test_mub_requires_odd_prime(d):
    with pytest.raises(NoConstructionError):
        M.mub_bases(d)


def test_non_unitary_rejected():
    with pytest.raises(UnitarityError):
        M.entangling_power(2 * np.eye(9))


@given(st.sampled_from([2, 3]), seeds)
def test_gate_metrics_invariants(d, seed):
    g = M.gate_metrics(T.haar_unitary(d * d, seed))
    assert g.d_p == pytest.approx(g.e_p / (d - 1), abs=1e-12)
    assert -1e-12 <= g.e_p <= 1 + 1e-10
    assert -1e-12 <= g.g_t <= 1 + 1e-12
    assert g.residual_R >= 0 and g.residual_G >= 0


@settings(max_examples=50)
@given(st.sampled_from([2, 3]), seeds)
def test_local_invariance(d, seed):
    U = T.haar_unitary(d * d, seed)
    V = M.local_rotation(U, seed + 1)
    a, b = M.gate_metrics(U), M.gate_metrics(V)
    for name in ("e_p", "g_t", "d_p"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-10)


def test_theorem_biconditional():
    A3 = L.cyclic_tensor(3)
    for U, A in [(p_gate(3), L.tensor_from_square(L.mols(3)[0])),
                 (p_gate(4), L.tensor_from_square(L.mols(4)[0])),
                 (p_gate(5), L.tensor_from_square(L.mols(5)[0])),
                 (M.mub_unitary(3), A3), (M.mub_unitary(5), L.cyclic_tensor(5))]:
        e1 = abs(M.entangling_power(U) - 1) < 1e-10
        assert e1 == M.is_2unitary(U, 1e-10).passed == C.is_tristochastic_channel(U, A, 1e-10).passed


# --- Monte Carlo -------------------------------------------------------------

def test_monte_carlo_identity_is_zero():
    est = M.ep_monte_carlo(np.eye(9), 1000, seed=0)
    assert est.mean == pytest.approx(0, abs=1e-12)


def test_monte_carlo_p9():
    est = M.ep_monte_carlo(p_gate(3), 10_000, seed=1)
    assert abs(est.mean - 1) < 3 * est.stderr


@pytest.mark.parametrize("seed", range(3))
def test_monte_carlo_random_coherification(seed):
    U = M.random_coherification(3, seed)
    est = M.ep_monte_carlo(U, 10_000, seed=seed + 100)
    assert abs(est.mean - M.entangling_power(U)) < 3 * est.stderr


def test_monte_carlo_seed_determinism():
    U = T.haar_unitary(9, 3)
    assert M.ep_monte_carlo(U, 500, seed=4) == M.ep_monte_carlo(U, 500, seed=4)


# --- coherification bounds -----------------------------------------------------

def test_bounds_hold_on_random_coherifications():
    pts = M.scatter(3, 300, seed=2)
    lo, hi = M.ep_bounds(3)
    glo, ghi = M.gt_bounds(3)
    assert np.all(pts[:, 0] >= lo - 1e-10) and np.all(pts[:, 0] <= hi + 1e-10)
    assert np.all(pts[:, 1] >= glo - 1e-10) and np.all(pts[:, 1] <= ghi + 1e-10)


@pytest.mark.parametrize("d", [3, 4])
def test_extremal_coherifications(d):
    A = L.cyclic_tensor(d)
    # a_{k,l} independent of k: the first input is carried to the second output
    # (swap-like), so g_t sits at the upper end
    W = T.haar_unitary(d, 1)
    U1 = C.build_unitary(A, C.BasisFamily(d, np.broadcast_to(W, (d, d, d))))
    # a_{k,l}[i] = A[k,l,i]: the second input stays put, g_t at the lower end
    U2 = C.build_unitary(A, C.BasisFamily(d, A.entries.astype(complex)))
    g1, g2 = M.gate_metrics(U1), M.gate_metrics(U2)
    assert g1.e_p == pytest.approx(1 - 1 / (d + 1), abs=1e-12)
    assert g2.e_p == pytest.approx(1 - 1 / (d + 1), abs=1e-12)
    assert g1.g_t == pytest.approx(M.gt_bounds(d)[1], abs=1e-12)
    assert g2.g_t == pytest.approx(M.gt_bounds(d)[0], abs=1e-12)


def test_ep_bounds_check():
    assert M.ep_bounds_check(M.random_coherification(3, 0))
    assert not M.ep_bounds_check(np.eye(9))


def test_swap_power_curve_endpoints():
    rows = M.swap_power_curve(3, 5)
    assert rows[0][1] == pytest.approx(0, abs=1e-12) and rows[-1][2] == pytest.approx(1, abs=1e-12)
    # the square root of swap is the most entangling point on the path
    assert max(r[1] for r in rows) == pytest.approx(rows[2][1])


# --- multipartite ------------------------------------------------------------

@pytest.mark.parametrize("seed", range(20))
def test_multipartite_reduces_to_bipartite(seed):
    U = T.haar_unitary(9, seed)
    assert M.multipartite_ep(U, 3, 3) == pytest.approx(M.entangling_power(U), abs=1e-10)


def test_multipartite_identity_is_zero():
    assert M.multipartite_ep(np.eye(8), 2, 4) == pytest.approx(0, abs=1e-12)
    assert M.multipartite_ep(np.eye(27), 3, 4, normalized=False) == pytest.approx(0, abs=1e-12)


def test_multipartite_cubes_are_maximal():
    U = L.multipartite_unitary_from_hypercubes(L.latin_hypercubes(4, 3, 3))
    assert M.multipartite_ep(U, 4, 4) == pytest.approx(1, abs=1e-10)


def test_multipartite_shape_error():
    with pytest.raises(DimensionError):
        M.multipartite_ep(np.eye(9), 2, 4)


def test_split_entanglements_match_ame_value():
    U = L.multipartite_unitary_from_hypercubes(L.latin_hypercubes(4, 3, 3))
    splits = M.split_entanglements(U, 4, 4)
    assert len(splits) == 3
    for p, v in splits.items():
        assert v == pytest.approx(M._ame_split_value(4, 3, p), abs=1e-12)
