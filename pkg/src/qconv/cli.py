"""``qconv`` command-line entry point.

Matrices travel as JSON objects ``{"rows", "cols", "re", "im"}``, optionally
wrapped as ``{"matrix": ...}``. When ``--in``/``--out`` are omitted, stdin and
stdout are used so commands compose in pipelines::

    qconv family d6 | qconv metrics gate

Exit status is 0 on success, 2 on a domain error (a JSON object with
``error`` and ``message`` goes to stderr) and 1 on I/O failures.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import coherify as C
from . import families as F
from . import invariants as I
from . import latin as L
from . import metrics as M
from . import search as S
from . import stats as ST
from . import tensor as T
from .errors import FormatError, InputError, QconvError, SearchFailed

# --- I/O helpers ------------------------------------------------------------


class _Run:
    """Bookkeeping for the manifest of one invocation."""

    def __init__(self, argv):
        self.argv = list(argv)
        self.t0 = time.time()
        self.inputs = {}
        self.outputs = []
        self.seeds = {}

    def manifest(self) -> dict:
        return {
            "command": ["qconv"] + self.argv,
            "seeds": self.seeds,
            "version": __version__,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_time_s": round(time.time() - self.t0, 3),
        }


RUN: _Run | None = None


def _read_text(path):
    if path in (None, "-"):
        text = sys.stdin.read()
        name = "<stdin>"
    else:
        text = Path(path).read_text()
        name = str(path)
    if RUN is not None:
        RUN.inputs[name] = hashlib.sha256(text.encode()).hexdigest()
    return text


def read_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path or '<stdin>'}: {exc}") from None


def _register_output(path):
    if RUN is not None:
        RUN.outputs.append(str(path))
        _write_manifest(Path(path).parent)


def _write_manifest(directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "manifest.json").write_text(json.dumps(RUN.manifest(), indent=2) + "\n")


def write_json(obj, path=None):
    text = json.dumps(obj, indent=None if path is None else 1) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    _register_output(p)


def write_text(text, path=None):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    _register_output(p)


def load_matrix(path) -> np.ndarray:
    obj = read_json(path)
    if isinstance(obj, dict) and "matrix" in obj:
        obj = obj["matrix"]
    return T.matrix_from_json(obj)


def matrix_doc(U, name, **extra):
    doc = {"kind": "unitary", "name": name, "matrix": T.matrix_to_json(U)}
    doc.update(extra)
    return doc


def rounded(d: dict, digits: int = 6) -> dict:
    """Human-rounded copy of the numeric entries of ``d``."""
    out = {}
    for k, v in d.items():
        if isinstance(v, float):
            out[k] = float(f"{v:.{digits}g}")
    return out


def _seed(args, name="seed"):
    s = getattr(args, name, None)
    if RUN is not None:
        RUN.seeds[name] = s
    return s


# --- latin ------------------------------------------------------------------

def cmd_latin(args):
    if args.action == "mols":
        squares = L.mols(args.d)
        write_json({"d": args.d, "squares": [s.to_json() for s in squares]}, args.out)
    else:
        cubes = L.latin_hypercubes(args.d, args.arity, args.count)
        write_json({"d": args.d, "hypercubes": [c.to_json() for c in cubes]}, args.out)
    return 0


# --- coherify ---------------------------------------------------------------

def _tensor(spec, d):
    if spec == "cyclic":
        if d is None:
            raise InputError("--d is required with --tensor cyclic")
        return L.cyclic_tensor(d)
    return L.PermutationTensor.from_json(read_json(spec))


def _bases(spec, d, seed):
    if spec == "haar":
        return C.BasisFamily.haar(d, seed)
    if spec == "mub":
        return M.mub_bases(d)
    if spec == "computational":
        return C.BasisFamily.computational(d)
    return C.BasisFamily.from_json(read_json(spec))


def cmd_coherify(args):
    A = _tensor(args.tensor, args.d)
    bases = _bases(args.bases, A.d, _seed(args))
    U = C.build_unitary(A, bases)
    write_json(matrix_doc(U, "coherification", tensor=A.to_json()), args.out)
    return 0


# --- metrics ----------------------------------------------------------------

def cmd_metrics(args):
    if args.action == "gate":
        U = load_matrix(args.inp)
        g = M.gate_metrics(U).to_json()
        cert = M.is_2unitary(U)
        g["is_2unitary"] = cert.passed
        g["rounded"] = rounded(g)
        write_json(g, args.out)
    elif args.action == "multi":
        U = load_matrix(args.inp)
        e = M.multipartite_ep(U, args.d, args.m, normalized=not args.raw)
        write_json({"d": args.d, "m": args.m, "multipartite_ep": e, "normalized": not args.raw}, args.out)
    else:
        pts = M.scatter(args.d, args.n, _seed(args))
        lo_e, hi_e = M.ep_bounds(args.d)
        lo_g, hi_g = M.gt_bounds(args.d)
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["e_p", "g_t"])
        for e, g in pts:
            w.writerow([repr(float(e)), repr(float(g))])
        write_text(buf.getvalue(), args.out)
        inside = bool(np.all((pts[:, 0] >= lo_e - 1e-12) & (pts[:, 0] <= hi_e + 1e-12)
                             & (pts[:, 1] >= lo_g - 1e-12) & (pts[:, 1] <= hi_g + 1e-12)))
        print(json.dumps({"n": args.n, "all_inside_bounds": inside, "mean_e_p": float(pts[:, 0].mean())}),
              file=sys.stderr)
    return 0


# --- invariants and coherence -----------------------------------------------

def cmd_invariant(args):
    U = load_matrix(args.inp)
    q = I.PermQuadruple.parse(args.quadruple) if args.quadruple else I.STANDARD_QUADRUPLE
    v = complex(I.local_invariant(U, q))
    d = T.local_dim(U)
    write_json({"quadruple": args.quadruple or "standard", "re": v.real, "im": v.imag,
                "scaled_by_d": d * v.real}, args.out)
    return 0


def _alpha(text):
    return math.inf if text in ("inf", "infinity") else float(text)


def cmd_coherence(args):
    U = load_matrix(args.inp)
    r = I.coherence_range_estimate(U, _alpha(args.alpha), args.budget, _seed(args))
    write_json(r.to_json(), args.out)
    return 0


# --- families ---------------------------------------------------------------

def cmd_family(args):
    name = args.name
    if name == "u81":
        p = F.U81Params.from_json(read_json(args.params)) if args.params else F.U81Params.symmetric()
        U = F.build_u81(p)
        write_json(matrix_doc(U, "U81", params=p.to_json()), args.out)
    elif name == "p81":
        write_json(matrix_doc(F.build_p81(tuple(args.pair)), "P81", pair=list(args.pair)), args.out)
    elif name == "d6":
        write_json(matrix_doc(F.build_d6_candidate(), "d6"), args.out)
    elif name == "p16":
        P = F.build_p16()
        if args.verify_circuit:
            c = F.p16_circuit()
            equal = bool(np.array_equal(F.circuit_to_unitary(c), P))
            core = F.p16_core_report()
            core = {k: (v.real if isinstance(v, complex) else v) for k, v in core.items()}
            rep = {"gates": c.n_gates, "depth": c.depth, "nearest_neighbour": c.nearest_neighbour(),
                   "circuit_equals_matrix": equal, "core": core}
            write_json(rep, args.out)
            return 0 if equal else 2
        write_json(matrix_doc(P, "P16"), args.out)
    elif name == "cube64":
        U = F.build_3unitary_d4()
        rep = F.ghz_mapping_report(U)
        write_json(matrix_doc(U, "U64", report=rep), args.out)
    elif name == "u49":
        bases, cert, log = F.u49_ansatz_search(_seed(args), args.restarts)
        write_json({"bases": bases.to_json(), "certificate": cert.to_json(), "log": log}, args.out)
    return 0


# --- search -----------------------------------------------------------------

def cmd_search(args):
    A = _tensor(args.tensor, args.d)
    cfg = S.SearchConfig(tol=args.tol, max_sweeps=args.max_sweeps,
                         constraint=None if args.constraint == "none" else args.constraint)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for r, s in enumerate(T.spawn_seeds(_seed(args), args.restarts)):
        try:
            st = S.search(A, s, cfg)
            ok = True
        except SearchFailed as exc:
            st, ok = exc.best, False
        rec = {"restart": r, "success": ok, "sweeps": st.iteration, "residual": st.max_residual,
               "trace": st.history, "V": [T.matrix_to_json(m) for m in st.V]}
        if ok:
            U = st.unitary()
            rec["e_p"] = M.entangling_power(U)
            rec["invariant"] = float(np.real(I.local_invariant(U)))
        write_json(rec, out / f"restart_{r:03d}.json")
        summary.append({k: rec.get(k) for k in ("restart", "success", "sweeps", "residual", "e_p", "invariant")})
    write_json({"d": A.d, "restarts": summary, "successes": sum(x["success"] for x in summary)},
               out / "summary.json")
    return 0 if any(x["success"] for x in summary) else 2


# --- stats ------------------------------------------------------------------

def cmd_stats(args):
    Ua, Ub = load_matrix(args.a), load_matrix(args.b)
    sa, sb = T.spawn_seeds(_seed(args), 2)
    a = ST.sample_entanglement(Ua, args.n, sa, "a")
    b = ST.sample_entanglement(Ub, args.n, sb, "b")
    D, p = ST.ks_two_sample(a, b)
    res = {"n": args.n, "statistic": D, "p": p, "p_display": ST.format_p(p),
           "critical_5pct": ST.ks_critical_value(args.n, args.n),
           "mean_a": a.mean()[0], "mean_b": b.mean()[0]}
    if args.hist:
        ST.write_histogram_csv(args.hist, a, b, a.d)
        _register_output(args.hist)
    write_json(res, args.out)
    return 0


# --- repro ------------------------------------------------------------------

def _verdict(ok):
    return "PASS" if ok else "FAIL"


def _repro_fig2(args, out):
    pts = M.scatter(3, args.n, _seed(args))
    np.savetxt(out / "fig2_scatter.csv", pts, delimiter=",", header="e_p,g_t", comments="", fmt="%.17g")
    curve = np.array(M.swap_power_curve(3, 101))
    np.savetxt(out / "fig2_swap_power.csv", curve, delimiter=",", header="kappa,e_p,g_t", comments="", fmt="%.17g")
    _register_output(out / "fig2_scatter.csv")
    _register_output(out / "fig2_swap_power.csv")
    lo_e, _ = M.ep_bounds(3)
    lo_g, hi_g = M.gt_bounds(3)
    inside = bool(np.all((pts[:, 0] >= lo_e - 1e-12) & (pts[:, 0] <= 1 + 1e-12)
                         & (pts[:, 1] >= lo_g - 1e-12) & (pts[:, 1] <= hi_g + 1e-12)))
    return [("scatter inside e_p in [3/4, 1], g_t in [3/8, 5/8]", inside)]


def _repro_fig4(args, out):
    seeds = T.spawn_seeds(_seed(args), 4)
    U = F.build_u81(F.U81Params.random(seeds[0]))
    P1, P2 = F.build_p81((0, 1)), F.build_p81((0, 2))
    su = ST.sample_entanglement(U, args.n, seeds[1], "U81")
    s1 = ST.sample_entanglement(P1, args.n, seeds[2], "P81a")
    s2 = ST.sample_entanglement(P2, args.n, seeds[3], "P81b")
    edges, counts = ST.histogram([su, s1, s2], 9)
    with open(out / "fig4_hist.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count_U81", "count_P81a", "count_P81b"])
        for i in range(len(edges) - 1):
            w.writerow([repr(float(edges[i])), repr(float(edges[i + 1]))] + [int(c[i]) for c in counts])
    _register_output(out / "fig4_hist.csv")
    crit = ST.ks_critical_value(args.n, args.n)
    rows = {}
    for (na, a), (nb, b) in (((su.gate_id, su), (s1.gate_id, s1)), ((su.gate_id, su), (s2.gate_id, s2)),
                             ((s1.gate_id, s1), (s2.gate_id, s2))):
        D, p = ST.ks_two_sample(a, b)
        rows[f"{na} vs {nb}"] = {"statistic": D, "p": p, "p_display": ST.format_p(p)}
    (out / "fig4_ks.json").write_text(json.dumps(rows, indent=1) + "\n")
    _register_output(out / "fig4_ks.json")
    return [("KS U81 vs P81 p < 1e-6", rows["U81 vs P81a"]["p"] < 1e-6),
            ("pairwise statistics > 5 x critical value",
             all(r["statistic"] > 5 * crit for r in rows.values()))]


def _load_or_search_u49(args):
    if getattr(args, "u49", None):
        obj = read_json(args.u49)
        return C.BasisFamily.from_json(obj.get("bases", obj), tol=1e-8)
    bases, _, _ = F.u49_ansatz_search(_seed(args), 20)
    return bases


def _repro_tableA(args, out):
    U81 = F.build_u81(F.U81Params.symmetric())
    U49 = C.build_unitary(L.cyclic_tensor(7), _load_or_search_u49(args))
    FF9 = np.kron(T.fourier_matrix(9), T.fourier_matrix(9))
    rows = []
    checks = []
    table = (
        ("U49", U49, {"S0": 31 / 7, "S2": 115 / 343, "Sinf": (7 + 6 * math.sqrt(14)) / 49}),
        ("U81", U81, {"S0": 7 / 3, "S2": 5 / 9, "Sinf": (3 + 2 * math.sqrt(3)) / 9}),
    )
    for name, U, ref in table:
        vals = {"S0": I.s_alpha_unitary(U, 0), "S2": I.s_alpha_unitary(U, 2), "Sinf": I.s_alpha_unitary(U, math.inf)}
        for k, v in vals.items():
            ok = abs(v - ref[k]) < 1e-10
            rows.append({"gate": name, "quantity": k, "value": v, "reference": ref[k], "verdict": _verdict(ok)})
            checks.append((f"{name} {k} = {ref[k]:.6g}", ok))
    probe = I.s_alpha_unitary(FF9 @ U81, 2)
    ok = abs(probe - 5 / 729) < 1e-10
    rows.append({"gate": "U81", "quantity": "S2 Fourier probe", "value": probe, "reference": 5 / 729,
                 "verdict": _verdict(ok)})
    checks.append(("U81 S2 Fourier probe = 5/729", ok))
    with open(out / "tableA.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["gate", "quantity", "value", "reference", "verdict"])
        w.writeheader()
        for r in rows:
            w.writerow({**r, "value": repr(r["value"]), "reference": repr(r["reference"])})
    _register_output(out / "tableA.csv")
    return checks


def _repro_inv49(args, out):
    bases = _load_or_search_u49(args)
    cert = F.certify_u49(bases)
    (out / "inv49.json").write_text(json.dumps(cert.to_json(), indent=1) + "\n")
    _register_output(out / "inv49.json")
    lo, hi = F.INV49_INTERVAL
    P49 = L.perm_2unitary_from_mols(*L.mols(7)[:2])
    p49 = int(round(I.local_invariant(P49).real))
    return [(f"invariant {cert.invariant:.4f} in [{lo}, {hi}]", cert.checks["invariant"]),
            (f"invariant x d {cert.invariant_scaled:.4f} in [{lo}, {hi}]", cert.checks["invariant_scaled"]),
            (f"P49 invariant {p49} = 343", p49 == 343),
            (f"P49 invariant x d {7 * p49} = 343", 7 * p49 == 343)]


REPRO = {"fig2": _repro_fig2, "fig4": _repro_fig4, "tableA": _repro_tableA, "inv49": _repro_inv49}


def cmd_repro(args):
    if args.figure not in REPRO:
        raise InputError(f"unknown figure or table {args.figure!r}; choose from {sorted(REPRO)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    checks = REPRO[args.figure](args, out)
    lines = [f"{_verdict(ok)} {label}" for label, ok in checks]
    (out / f"{args.figure}_summary.txt").write_text("\n".join(lines) + "\n")
    _register_output(out / f"{args.figure}_summary.txt")
    print("\n".join(lines))
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qconv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def io_args(sp, inp=True):
        if inp:
            sp.add_argument("--in", dest="inp", default=None, help="input JSON (default stdin)")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    s = sub.add_parser("latin", help="Latin squares and hypercubes")
    s.add_argument("action", choices=["mols", "hypercubes"])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--arity", type=int, default=3)
    s.add_argument("--count", type=int, default=2)
    io_args(s, inp=False)
    s.set_defaults(func=cmd_latin)

    s = sub.add_parser("coherify", help="build a coherification")
    s.add_argument("action", choices=["build"])
    s.add_argument("--tensor", default="cyclic", help="'cyclic' or a tensor JSON file")
    s.add_argument("--d", type=int)
    s.add_argument("--bases", default="haar", help="haar, mub, computational or a bases JSON file")
    s.add_argument("--seed", type=int, default=0)
    io_args(s, inp=False)
    s.set_defaults(func=cmd_coherify)

    s = sub.add_parser("metrics", help="entangling power and related metrics")
    s.add_argument("action", choices=["gate", "scatter", "multi"])
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--raw", action="store_true", help="multi: do not normalise splits")
    io_args(s)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("invariant", help="local-unitary invariant")
    s.add_argument("action", choices=["eval"])
    s.add_argument("--quadruple", default=None, help='e.g. "id,(12)(34),(13)(24),(14)(23)"')
    io_args(s)
    s.set_defaults(func=cmd_invariant)

    s = sub.add_parser("coherence", help="coherence range estimate")
    s.add_argument("action", choices=["range"])
    s.add_argument("--alpha", default="2")
    s.add_argument("--budget", type=int, default=20000)
    s.add_argument("--seed", type=int, default=0)
    io_args(s)
    s.set_defaults(func=cmd_coherence)

    s = sub.add_parser("family", help="named gate families")
    s.add_argument("name", choices=["u81", "p81", "d6", "p16", "cube64", "u49"])
    s.add_argument("--params", default=None, help="u81: JSON with alpha2, alpha3")
    s.add_argument("--pair", type=int, nargs=2, default=[0, 1], help="p81: indices into mols(9)")
    s.add_argument("--verify-circuit", action="store_true")
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--seed", type=int, default=1)
    io_args(s, inp=False)
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("search", help="alternating polar search")
    s.add_argument("action", choices=["run"])
    s.add_argument("--d", type=int)
    s.add_argument("--tensor", default="cyclic")
    s.add_argument("--constraint", choices=["none", "cyclic"], default="none")
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--max-sweeps", type=int, default=20000)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("stats", help="KS comparison of output entanglement")
    s.add_argument("action", choices=["compare"])
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--hist", default=None, help="CSV with 200 bins")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("repro", help="regenerate figure and table data")
    s.add_argument("figure", help="fig2, fig4, tableA or inv49")
    s.add_argument("--out", default="repro")
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--u49", default=None, help="stored output of 'family u49'")
    s.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    global RUN
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    RUN = _Run(argv)
    try:
        return args.func(args)
    except QconvError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 2
    except (OSError, UnicodeDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": "IO", "message": str(exc)}) + "\n")
        return 1
    finally:
        RUN = None


if __name__ == "__main__":
    sys.exit(main())
