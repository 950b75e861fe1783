"""Unconstrained alternating-projection search on the d = 6 Latin tensor.

No 2-unitary coherification of this tensor is known, so every restart is
expected to stall. The script reports the best residual and the entangling
power of the polar-projected gate for each restart.

    python3 scripts/d6_search.py --restarts 50 --seed 0
"""
import argparse

import numpy as np

from qconv import coherify as C
from qconv import families as F
from qconv import metrics as M
from qconv import search as S
from qconv import tensor as T
from qconv.errors import SearchFailed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--restarts", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    A = F.d6_tensor()
    best = (-1.0, None)
    for r, s in enumerate(T.spawn_seeds(args.seed, args.restarts)):
        try:
            st = S.search(A, s)
        except SearchFailed as exc:
            st = exc.best
        V = T.polar_factor(st.V)
        U = C.build_unitary(A, C.BasisFamily(6, V))
        e = M.entangling_power(T.polar_factor(U))
        print(f"restart {r:3d}  sweeps {st.iteration:5d}  residual {st.max_residual:.3e}  e_p {e:.6f}")
        if e > best[0]:
            best = (e, r)
    ref = M.entangling_power(F.build_d6_candidate())
    print(f"best e_p {best[0]:.6f} at restart {best[1]}; structured candidate {ref:.6f}; gap {ref - best[0]:.2e}")


if __name__ == "__main__":
    main()
