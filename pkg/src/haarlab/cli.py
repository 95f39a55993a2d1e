"""Command line entry point ``haarlab``.

Exit status is 0 exactly when every hard assertion of the command passed.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from haarlab import lab
from haarlab.atoms import atomic_decomposition, validate_decomposition
from haarlab.dyadic import IntervalCollection, all_intervals, carleson_constant, carleson_sums
from haarlab.haar import SCALAR, NormedSpace, hp_norm, vector_square_function
from haarlab.io import dumps_csv, dumps_json, read_haar, read_tau
from haarlab.maximal import EXACT_CAP, c1, carleson_ratio_sup, maximal_report, mu
from haarlab.rearrange import GENERATOR_KINDS, Rearrangement, generate, opnorm_lower


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--p", type=_floats, default=None, help="exponent or comma separated list")
    p.add_argument("--q", type=_floats, default=None, help="exponent or comma separated list")
    p.add_argument("--space", type=NormedSpace.parse, default=SCALAR, help="r,m for l^r_m (r may be inf)")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=Path, default=None, help="rearrangement file")
    p.add_argument("--kind", choices=GENERATOR_KINDS, default="randominjection",
                   help="generator used when --tau is absent")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _tau(args) -> Rearrangement:
    if args.tau is not None:
        return read_tau(args.tau)
    return generate(args.kind, args.depth or 3, args.seed)


def _collection(text: str | None, default) -> IntervalCollection:
    return IntervalCollection.parse(text) if text else IntervalCollection(default)


def _emit(args, payload: dict, rows: list[dict] | None = None) -> None:
    text = dumps_csv(rows if rows is not None else [payload]) if args.format == "csv" else dumps_json(payload)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def _first(values, default: float) -> float:
    return values[0] if values else default


def cmd_carleson(args) -> bool:
    C = _collection(args.collection, all_intervals(args.depth or 2))
    sums = carleson_sums(C)
    _emit(args, {"collection": C, "carleson_constant": carleson_constant(C), "maximal": C.maximal()},
          [{"interval": I, "sum": s} for I, s in sums.items()])
    return True


def cmd_mu(args) -> bool:
    tau = _tau(args)
    H = _collection(args.H, tau.image)
    rep = maximal_report(H, tau)
    m = mu(H, tau)
    _emit(args, {**rep.to_dict(), "mu": {"level": m.level, "values": m.values}},
          [{"cell": i, "mu": float(v)} for i, v in enumerate(m.values)])
    return True


def cmd_c1(args) -> bool:
    tau = _tau(args)
    val, H = c1(tau, args.search, max_intervals=args.max_intervals, seed=args.seed)
    out = {"c1": val, "set": H, "search": args.search, "intervals": len(tau.image)}
    if args.carleson:
        cval, CH = carleson_ratio_sup(tau, args.search, max_intervals=args.max_intervals, seed=args.seed)
        out.update(carleson_ratio=cval, carleson_set=CH)
    _emit(args, out)
    return True


def cmd_opnorm(args) -> bool:
    tau = _tau(args)
    rows = []
    for p in args.p or (1.0,):
        res = opnorm_lower(tau, p, args.space, restarts=args.restarts, iterations=args.iterations,
                           seed=args.seed)
        rows.append({"p": p, "space": str(args.space), "lower_bound": res.bound,
                     "evaluations": res.evaluations, "witness": res.witness})
    _emit(args, {"rows": rows}, rows)
    return True


def cmd_atoms(args) -> bool:
    if args.f is not None:
        f = read_haar(args.f)
    else:
        rng = lab.case_rng("cli-atoms", args.seed)
        d = args.depth or 4
        f = lab.random_haar(rng, lab.random_subset(rng, all_intervals(d)), SCALAR, d)
    p = _first(args.p, 1.0)
    dec = atomic_decomposition(f, p)
    rep = validate_decomposition(f, p, dec)
    _emit(args, {"decomposition": dec, "validation": rep}, rep.checks)
    return rep.passed


def cmd_norm(args) -> bool:
    f = read_haar(args.f)
    mode = "montecarlo" if args.mode == "mc" else "exact"
    rows = [{"p": p, "hp_norm": hp_norm(f, p, mode, samples=args.samples, seed=args.seed)}
            for p in (args.p or (1.0, 2.0))]
    S = vector_square_function(f, mode, samples=args.samples, seed=args.seed)
    _emit(args, {"rows": rows, "square_function": S.values}, rows)
    return True


def _config(args) -> lab.ExperimentConfig:
    base = lab.ExperimentConfig()
    return base.with_(depth=args.depth or base.depth, space=args.space, seed=args.seed,
                      mode="montecarlo" if args.mode == "mc" else "exact", samples=args.samples,
                      cases=args.cases, p_list=args.p or base.p_list, q_list=args.q or base.q_list,
                      out=str(args.out) if args.out else None)


def cmd_verify(args) -> bool:
    cfg = _config(args)
    suites = lab.SUITES if args.suite == "all" else (args.suite,)
    result = lab.run_all(cfg, suites)
    rows = [{"suite": s, "case_seed": r.get("case_seed", r.get("fixed")), "passed": r["passed"]}
            for s, rep in result["suites"].items() for r in rep["records"]]
    _emit(args, result, rows)
    return result["passed"]


def cmd_sweep(args) -> bool:
    tau = _tau(args)
    res = lab.extrapolation_sweep(tau, args.p or (1.5,), args.q or (1.0, 0.5), args.space,
                                  restarts=args.restarts, iterations=args.iterations, seed=args.seed)
    _emit(args, res, res["rows"])
    return res["passed"]


def cmd_gen_tau(args) -> bool:
    tau = generate(args.kind, args.depth or 3, args.seed)
    text = tau.dumps()
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return True


def cmd_type_witness(args) -> bool:
    tau = _tau(args)
    C = _collection(args.C, tau.domain)
    space = args.space if args.compare else None
    res = lab.type_witnesses(tau, C, args.n, _first(args.p, 1.5), space, seed=args.seed)
    _emit(args, res)
    return res["passed"]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="haarlab", description="Haar rearrangement operator toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(fn=fn)
        return p

    p = add("carleson", cmd_carleson, "Carleson constant of a collection")
    p.add_argument("--collection", help="e.g. 0:0,1:0,2:1 (default: D_{<=depth})")
    p = add("mu", cmd_mu, "maximal function report for H inside tau(D)")
    p.add_argument("--H", help="collection inside tau(D) (default: all of tau(D))")
    p = add("c1", cmd_c1, "the constant C_1 of a rearrangement")
    p.add_argument("--search", choices=("exact", "greedy"), default="exact")
    p.add_argument("--max-intervals", type=int, default=EXACT_CAP)
    p.add_argument("--carleson", action="store_true", help="also report the Carleson ratio supremum")
    for name, fn, help_ in (("opnorm", cmd_opnorm, "operator norm lower bounds"),
                            ("sweep", cmd_sweep, "extrapolation sweep over p and q")):
        p = add(name, fn, help_)
        p.add_argument("--restarts", type=int, default=16)
        p.add_argument("--iterations", type=int, default=60)
    p = add("atoms", cmd_atoms, "atomic decomposition and its validation")
    p.add_argument("--f", type=Path, help="Haar expansion file (default: seeded random)")
    p = add("norm", cmd_norm, "square function and H^p norms of a Haar expansion")
    p.add_argument("--f", type=Path, required=True)
    p = add("verify", cmd_verify, "run verification suites")
    p.add_argument("suite", choices=(*lab.SUITES, "all"))
    p.add_argument("--cases", type=int, default=200)
    add("gen-tau", cmd_gen_tau, "write a seeded rearrangement")
    p = add("type-witness", cmd_type_witness, "type witnesses for a collection")
    p.add_argument("--C", help="collection inside the domain (default: whole domain)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--compare", action="store_true", help="evaluate the Rademacher comparison")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ok = args.fn(args)
    except (ValueError, RuntimeError) as e:
        print(f"haarlab: error: {e}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
