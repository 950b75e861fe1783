"""Coherence summary (S0, S2, S_inf and the probed S2 range) for the named gates.

    python3 scripts/coherence_table.py --u49 runs/u49/bases.json
"""
import argparse
import math

from qconv import coherify as C
from qconv import families as F
from qconv import invariants as I
from qconv import latin as L


def gates(u49_path):
    out = {
        "P9": L.perm_2unitary_from_mols(*L.mols(3)[:2]),
        "P81": F.build_p81(),
        "U81 symmetric": F.build_u81(F.U81Params.symmetric()),
    }
    if u49_path:
        import json
        obj = json.loads(open(u49_path).read())
        bases = C.BasisFamily.from_json(obj.get("bases", obj), tol=1e-8)
    else:
        bases, _, _ = F.u49_ansatz_search(seed=1, restarts=20)
    out["U49"] = C.build_unitary(L.cyclic_tensor(7), bases)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--u49", help="bases JSON written by u49_search.py")
    ap.add_argument("--budget", type=int, default=0, help="annealing steps on top of the probes")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print(f"{'gate':14s} {'S0':>9s} {'S2':>9s} {'S_inf':>9s} {'S2 lo':>9s} {'S2 hi':>9s}")
    for name, U in gates(args.u49).items():
        r = I.coherence_range_estimate(U, 2, budget=args.budget, seed=args.seed)
        vals = [I.s_alpha_unitary(U, a) for a in (0, 2, math.inf)]
        print(f"{name:14s} " + " ".join(f"{v:9.6f}" for v in vals + [r.lo_estimate, r.hi_estimate]))


if __name__ == "__main__":
    main()
