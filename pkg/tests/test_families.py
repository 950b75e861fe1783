import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qconv import families as F
from qconv import invariants as I
from qconv import latin as L
from qconv import metrics as M
from qconv import tensor as T
from qconv.coherify import build_unitary

phase = st.floats(0, 2 * math.pi, allow_nan=False)


# --- U81 ---------------------------------------------------------------------

@given(phase, phase)
def test_circulant_unitary(a1, a2):
    B = F.circulant_unitary(a1, a2)
    assert T.unitarity_residual(B) < 1e-12
    for r in range(3):
        np.testing.assert_allclose(B[r], np.roll(B[0], r), atol=1e-14)


@given(phase, phase, phase, phase)
def test_u81_params_amplitudes(a, b, c, e):
    p = F.U81Params.from_phases(a, b, c, e)
    for k, amp in p.amplitudes().items():
        assert amp["a"] ** 2 + amp["b"] ** 2 + amp["c"] ** 2 == pytest.approx(1, abs=1e-12)
    assert F.U81Params.from_json(p.to_json()) == p


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1))
def test_u81_random_is_2unitary(seed):
    U = F.build_u81(F.U81Params.random(seed))
    assert M.is_2unitary(U, 1e-9).passed


def test_u81_permutation_limit_is_exact_permutation():
    U = F.build_u81(F.U81Params.permutation_limit())
    assert set(np.unique(U)) <= {0, 1}
    assert np.all(U.real.sum(axis=0) == 1) and np.all(U.real.sum(axis=1) == 1)
    assert M.is_2unitary(U, 1e-12).passed


def test_u81_symmetric_point_amplitudes():
    amp = F.U81Params.symmetric().amplitudes()
    for k in (2, 3):
        for key in "abc":
            assert amp[k][key] == pytest.approx(1 / math.sqrt(3), abs=1e-14)


def test_p81_pairs():
    for pair in [(0, 1), (0, 2), (2, 5)]:
        assert M.is_2unitary(F.build_p81(pair), 1e-12).passed


# --- d = 6 -------------------------------------------------------------------

def test_d6_candidate():
    U = F.build_d6_candidate()
    assert U.dtype == float
    np.testing.assert_allclose(U @ U.T, np.eye(36), atol=1e-14)
    assert M.entangling_power(U) == pytest.approx((208 + math.sqrt(3)) / 210, abs=1e-12)


def test_d6_square_is_latin():
    assert L.LatinSquare(6, F.D6_SQUARE).d == 6
    assert F.d6_tensor().entries.sum() == 36


# --- P16 ---------------------------------------------------------------------

def test_p16_circuit_shape():
    c = F.p16_circuit()
    assert c.n_gates == 18 and c.depth == 11
    assert c.nearest_neighbour() and c.layers_disjoint()


def test_p16_circuit_equals_matrix():
    np.testing.assert_array_equal(F.circuit_to_unitary(F.p16_circuit()), F.build_p16())


def test_cnot_convention():
    # qubit 0 is the most significant bit
    X = F.cnot_matrix(0, 1, 2)
    np.testing.assert_array_equal(X, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def test_p16_core():
    rep = F.p16_core_report()
    assert rep["core_gates"] == 12 and rep["core_depth"] == 8
    assert rep["stripped_layers_local"] and rep["invariants_equal"] and rep["reassembled_equal"]
    assert rep["invariant_p16"] == 256


def test_magic_basis_mapping():
    rep = F.verify_basis_mapping()
    assert rep["gram_residual"] < 1e-14
    assert rep["inputs_maximally_entangled"]
    assert rep["all_product"] and rep["max_second_schmidt"] < 1e-12
    assert rep["rows_share_first_factor"] and rep["columns_share_second_factor"]
    for r, f in enumerate(rep["first"]):
        np.testing.assert_allclose(np.abs(f), np.eye(4)[r], atol=1e-12)
    expected = np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -1, 1, -1]]) / 2
    for c, f in enumerate(rep["second"]):
        assert abs(abs(np.vdot(f, expected[c])) - 1) < 1e-12


def test_magic_basis_not_product_under_identity():
    assert not F.verify_basis_mapping(np.eye(16))["all_product"]


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_rank_theorem(m, n):
    assert F.rank_theorem_check(None, m, n, trials=100, seed=10 * m + n) == min(m, n)


def test_rank_theorem_violation_detected():
    # under the identity the magic basis stays entangled, so rank exceeds min(m, n)
    with pytest.raises(AssertionError):
        F.rank_theorem_check(np.eye(16), 1, 1, trials=5, seed=0)


# --- three ququarts ------------------------------------------------------------

def test_ghz_basis_images_are_product():
    rep = F.ghz_mapping_report()
    assert rep["gram_residual"] < 1e-14
    assert rep["inputs_maximally_entangled_single_cuts"]
    assert rep["all_product"]
    assert rep["multipartite_ep"] == pytest.approx(1, abs=1e-10)


# --- U49 -----------------------------------------------------------------------

def test_u49_search_solution(u49_solution):
    bases, cert, log = u49_solution
    assert not F.is_monomial(bases)
    assert cert.residual < 1e-8
    assert cert.e_p == pytest.approx(1, abs=1e-8)
    assert cert.checks["amplitudes"] and cert.checks["s2"]
    assert cert.s2 == pytest.approx(115 / 343, abs=1e-6)
    assert cert.cyclic_violation < 1e-8
    # every skipped successful restart was a phased permutation
    assert all(e["monomial"] for e in log[:-1] if e["success"])


def test_u49_frozen_values(u49_solution):
    # values of the first non-monomial solution under seed 1
    bases, cert, log = u49_solution
    assert len(log) == 5
    assert cert.invariant == pytest.approx(192.0091, abs=1e-3)
    assert cert.invariant_scaled == pytest.approx(7 * cert.invariant)


def test_u49_coherences(u49_solution):
    U = build_unitary(L.cyclic_tensor(7), u49_solution[0])
    assert I.s_alpha_unitary(U, 0) == pytest.approx(31 / 7, abs=1e-12)
    assert I.s_alpha_unitary(U, math.inf) == pytest.approx((7 + 6 * math.sqrt(14)) / 49, abs=1e-8)


def test_is_monomial():
    assert F.is_monomial(F.u81_bases(F.U81Params.permutation_limit()))
    assert not F.is_monomial(F.u81_bases(F.U81Params.symmetric()))


# --- AME states ----------------------------------------------------------------

def test_ame_from_permutation_and_u81():
    for U, d in [(L.perm_2unitary_from_mols(*L.mols(3)[:2]), 3), (F.build_u81(F.U81Params.random(5)), 9)]:
        psi = F.ame_state(U)
        assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-12)
        assert F.is_ame(psi, d).passed


def test_ame_fails_for_non_2unitary():
    cert = F.is_ame(F.ame_state(T.swap_matrix(3)), 3)
    assert not cert.passed and len(cert.details) == 6


def test_ame_from_u49(u49_solution):
    U = build_unitary(L.cyclic_tensor(7), u49_solution[0])
    assert F.is_ame(F.ame_state(U), 7).passed
