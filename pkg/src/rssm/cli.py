"""Command-line interface.

Subcommands:

* ``solve``         — run the search on a built-in objective.
* ``verify-bounds`` — check sharp interpolation bounds on one simplex.
* ``worst-case``    — emit the extremal quadratic for a query.
* ``audit``         — re-check a saved trace against the per-step analysis.
* ``scaling``       — sweep an (n, epsilon) grid and fit iteration orders.

Exit codes: 0 success, 1 a check/run failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import objectives
from .simplex import Simplex, make_regular_simplex
from .interpolation import bound_report, mu_certificate, g_matrix, query_point
from .solver import SolverConfig, Trace, run, EvaluationError
from .complexity import constants_for_trace, audit_trace
from .experiments import ExperimentPlan, run_scaling, write_csv

QUERY_KINDS = ("reflection", "centroid", "shrink")
CLASSES = ("nonconvex", "convex")


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or ():
        key, _, value = pair.partition("=")
        if not _:
            raise argparse.ArgumentTypeError(
                f"expected KEY=VALUE, got {pair!r}")
        params[key.replace("-", "_")] = float(value)
    return params


def _parse_point(text: str, n: int) -> np.ndarray:
    vals = [float(v) for v in text.split(",")]
    if len(vals) == 1:
        return np.full(n, vals[0])
    if len(vals) != n:
        raise ValueError(f"--start needs 1 or {n} components, got {len(vals)}")
    return np.array(vals)


def _dump(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# solve


def _cmd_solve(args) -> int:
    if args.objective == "list":
        for name in objectives.builtin_names():
            print(name)
        return 0
    try:
        params = _parse_params(args.param)
        obj = objectives.builtin(args.objective, args.n, seed=args.seed,
                                 **params)
        L = args.L if args.L is not None else obj.L
        cfg = SolverConfig(
            n=args.n, delta0=args.delta0, gamma=args.gamma,
            epsilon=args.epsilon, mode=args.mode, beta=args.beta,
            eta=args.eta, L=L, algorithm=args.algorithm,
            stopping=args.stopping, max_iterations=args.max_iter,
            max_evaluations=args.max_evals,
            center=_parse_point(args.start, args.n))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        trace = run(obj, cfg)
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            fh.write(trace.to_json())

    summ = trace.summary
    final_gap = ""
    if obj.f_star is not None:
        final_gap = repr(summ["final_S"] / (args.n + 1.0) - obj.f_star)
    if args.summary:
        print(",".join([
            args.objective, str(args.n), repr(args.epsilon),
            str(summ["N_r"]), str(summ["N_s"]), str(summ["eval_count"]),
            final_gap, trace.reason]))
    else:
        print(f"reason: {trace.reason}")
        print(f"iterations: {summ['iterations']} "
              f"(reflections {summ['N_r']}, shrinks {summ['N_s']})")
        print(f"evaluations: {summ['eval_count']} "
              f"(objective calls {summ['objective_calls']})")
        print(f"best value: {summ['best_value']!r}")
        print(f"best point: {summ['best_point']}")
        print(f"simplex gradient norm: {summ['final_gradient_norm']:.6e}")
        if final_gap:
            print(f"value gap: {final_gap}")
    return 0


# ---------------------------------------------------------------------------
# verify-bounds / worst-case


def _load_or_make_simplex(args) -> Simplex:
    if getattr(args, "simplex_json", None):
        with open(args.simplex_json) as fh:
            return Simplex.from_json(fh.read())
    return make_regular_simplex(np.zeros(args.n), args.radius, args.n)


def _cmd_verify_bounds(args) -> int:
    try:
        s = _load_or_make_simplex(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    reports = []
    failed = False
    for kind in QUERY_KINDS:
        gamma = args.gamma if kind == "shrink" else None
        for cls in CLASSES:
            rep = bound_report(s, kind, cls, args.L, gamma=gamma)
            entry = rep.to_dict()
            mu_ok = None
            if rep.mu is not None and rep.mu.available:
                mu_ok = rep.mu.sharp
            entry["checks"] = {
                "attained": rep.attained,
                "dominated": rep.dominated,
                "mu_nonnegative": mu_ok,
            }
            if not rep.attained or not rep.dominated or mu_ok is False:
                failed = True
            reports.append(entry)
    _dump({"radius": s.radius, "n": s.dim, "L": args.L,
           "reports": reports, "all_ok": not failed})
    return 1 if failed else 0


def _cmd_worst_case(args) -> int:
    try:
        s = _load_or_make_simplex(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    gamma = args.gamma if args.kind == "shrink" else None
    rep = bound_report(s, args.kind, args.cls, args.L, gamma=gamma,
                       sign=args.sign)
    x = query_point(s, args.kind, gamma=gamma)
    g = g_matrix(s, x)
    payload = rep.to_dict()
    payload["query"] = x.tolist()
    payload["quadratic"] = {
        "H": rep.quadratic.H.tolist(),
        "spectral_norm": rep.quadratic.spectral_norm(),
        "convex": rep.quadratic.is_convex(),
    }
    payload["g_eigenvalues"] = g.eigenvalues.tolist()
    _dump(payload)
    return 0 if rep.attained else 1


# ---------------------------------------------------------------------------
# audit


def _cmd_audit(args) -> int:
    convex_case = args.case in ("convex", "strongly_convex")
    if convex_case and args.R is None:
        print("error: --R is required for convex cases", file=sys.stderr)
        return 2
    if args.case == "strongly_convex" and args.mu is None:
        print("error: --mu is required for the strongly_convex case",
              file=sys.stderr)
        return 2
    try:
        with open(args.trace_in) as fh:
            trace = Trace.from_json(fh.read())
        consts = constants_for_trace(trace, L=args.L, R=args.R, mu=args.mu,
                                     eta_split=args.eta_split)
        report = audit_trace(trace, consts, case=args.case, f_star=args.fstar)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.to_json())
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# scaling


def _cmd_scaling(args) -> int:
    try:
        plan = ExperimentPlan(
            objective=args.objective,
            dims=tuple(int(v) for v in args.dims.split(",")),
            epsilons=tuple(float(v) for v in args.epsilons.split(",")),
            repetitions=args.reps, base_seed=args.seed,
            center_distance=args.center_distance, delta0=args.delta0,
            gamma=args.gamma, beta=args.beta,
            max_iterations=args.max_iter, max_evaluations=args.max_evals,
            objective_params=_parse_params(args.param))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    result = run_scaling(plan)
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            write_csv(result.rows, fh)
        out = sys.stdout
    else:
        write_csv(result.rows, sys.stdout)
        out = sys.stderr
    for n, entry in sorted(result.fits.items()):
        exp = entry["exponent"]
        semi = entry["semilog"]
        parts = [f"n={n}"]
        if exp is not None:
            parts.append(f"exponent={exp.slope:.4f} (corr {exp.correlation:.4f})")
        if semi is not None:
            parts.append(f"semilog slope={semi.slope:.4f} "
                         f"(corr {semi.correlation:.4f})")
        if entry["note"]:
            parts.append(entry["note"])
        print("fit: " + "  ".join(parts), file=out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rssm",
        description="Regular simplicial search with sharp interpolation "
                    "error bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the search on a built-in objective")
    p.add_argument("--objective", required=True,
                   help="objective name, or 'list' to print the registry")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--delta0", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--eta", type=float, default=1e-3)
    p.add_argument("--L", type=float, default=None,
                   help="smoothness constant; defaults to objective metadata")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--mode", choices=("theoretical", "practical"),
                   default="practical")
    p.add_argument("--algorithm", choices=("rssm", "reflection_only"),
                   default="rssm")
    p.add_argument("--stopping",
                   choices=("simplex_gradient", "true_gradient", "gap", "none"),
                   default="simplex_gradient")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--max-evals", type=int, default=10_000_000)
    p.add_argument("--start", default="0",
                   help="start centroid: scalar or comma-separated vector")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="objective parameter, e.g. --param L=2")
    p.add_argument("--trace-out", default=None, help="write trace JSON here")
    p.add_argument("--summary", action="store_true",
                   help="print one CSV line: objective,n,epsilon,N_r,N_s,"
                        "evals,final_gap,reason")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify-bounds",
                       help="check sharp bounds for every query kind")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5,
                   help="shrink factor for the shrink query")
    p.add_argument("--simplex-json", default=None,
                   help="load this simplex instead of generating one")
    p.set_defaults(func=_cmd_verify_bounds)

    p = sub.add_parser("worst-case",
                       help="emit the bound-attaining extremal quadratic")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--kind", choices=QUERY_KINDS, default="reflection")
    p.add_argument("--cls", choices=CLASSES, default="nonconvex")
    p.add_argument("--sign", choices=("positive", "negative"), default=None)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--simplex-json", default=None)
    p.set_defaults(func=_cmd_worst_case)

    p = sub.add_parser("audit", help="re-check a saved trace JSON")
    p.add_argument("--trace-in", required=True)
    p.add_argument("--case",
                   choices=("nonconvex", "pl", "convex", "strongly_convex"),
                   default="nonconvex")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--fstar", type=float, default=None)
    p.add_argument("--eta-split", type=float, default=0.5)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("scaling", help="run an (n, epsilon) scaling sweep")
    p.add_argument("--objective", required=True)
    p.add_argument("--dims", default="4", help="comma-separated dimensions")
    p.add_argument("--epsilons", default="1e-1,1e-2,1e-3,1e-4",
                   help="strictly decreasing comma-separated tolerances")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--center-distance", type=float, default=2.0)
    p.add_argument("--delta0", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument("--max-evals", type=int, default=10_000_000)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--csv-out", default=None)
    p.set_defaults(func=_cmd_scaling)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
