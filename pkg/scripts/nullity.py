"""Tangent-space dimension of the 2-unitarity constraints at known solutions.

The nonlocal part counts directions that survive after removing local
unitaries and phases, which bounds the number of free nonlocal parameters.
"""
from qconv import coherify as C
from qconv import families as F
from qconv import latin as L
from qconv import search as S


def main():
    a, b = L.mols(3)[:2]
    cases = [
        ("P9 (monomial)", L.tensor_from_square(a), C.bases_from_mols(a, b).V),
        ("U81 random", L.cyclic_tensor(9), F.u81_bases(F.U81Params.random(3)).V),
    ]
    bases, _, _ = F.u49_ansatz_search(seed=1, restarts=20)
    cases.insert(1, ("U49", L.cyclic_tensor(7), bases.V))
    keys = ("raw", "modulo_phases", "local", "nonlocal", "beyond_phases")
    print(f"{'solution':16s} " + " ".join(f"{k:>14s}" for k in keys))
    for name, A, V in cases:
        n = S.solution_nullity(A, V)
        print(f"{name:16s} " + " ".join(f"{n[k]:14d}" for k in keys))


if __name__ == "__main__":
    main()
