"""Command-line interface.

Subcommands: norm, dual, eigenvalue, solve, oracle, compare, bound.
Exit codes: 0 success, 1 usage error, 2 computational failure
(non-convergence / unverifiable replicates), 3 detected violation of
the oracle inequality (slack below -1e-7).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import harness
from .cones import cone_from_json, pontil_maurer_bound
from .core import CsvParseError, DimensionError, IndexSet, load_matrix, load_vector
from .eigenvalues import l1_eigenvalue, omega_eigenvalue
from .harness import ExperimentConfig, comparison_check, dumps17, pontil_maurer_check, run_experiment
from .norms import L1Norm, NotAllowedSetError, norm_from_file
from .solvers import SolveOptions, solve_penalized_ls

USAGE_ERROR, COMPUTE_ERROR, VIOLATION = 1, 2, 3


def _parse_vector(text):
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip() != ""])
    except ValueError:
        raise SystemExit(_usage_error("E_VECTOR", f"cannot parse vector {text!r}"))


def _parse_set(text, p):
    try:
        return IndexSet(tuple(int(tok) for tok in text.split(",") if tok.strip() != ""), p)
    except (ValueError, IndexError) as exc:
        raise SystemExit(_usage_error("E_SET", str(exc)))


def _usage_error(code, message):
    print(f"{code}: {message}", file=sys.stderr)
    return USAGE_ERROR


def _emit(obj, out, fmt="json"):
    text = dumps17(obj) if fmt == "json" else obj
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_norm(args, dual=False):
    v = _parse_vector(args.vector)
    norm = norm_from_file(args.norm_spec, p=v.size)
    value = norm.dual(v) if dual else norm.value(v)
    _emit({"value": value}, args.out)
    return 0


def cmd_eigenvalue(args):
    X = load_matrix(args.matrix)
    S = _parse_set(args.set, X.p)
    t0 = time.perf_counter()
    if args.norm_spec:
        norm = norm_from_file(args.norm_spec, p=X.p)
        result = omega_eigenvalue(X.X, S, args.big_l, norm, seed=args.seed or 0)
    else:
        result = l1_eigenvalue(X.X, S, args.big_l)
    payload = result.as_dict()
    payload["wall_clock_seconds"] = time.perf_counter() - t0
    _emit(payload, args.out)
    return 0


def cmd_solve(args):
    X = load_matrix(args.matrix)
    Y = load_vector(args.y)
    norm = norm_from_file(args.norm_spec, p=X.p) if args.norm_spec else L1Norm(X.p)
    opts = SolveOptions(max_iterations=args.max_iter, tolerance=args.tol)
    fit = solve_penalized_ls(X.X, Y, args.lam, norm, opts)
    _emit(
        {
            "beta": fit.beta.tolist(),
            "objective": fit.objective,
            "kkt_residual": fit.kkt_residual,
            "iterations": fit.iterations,
            "converged": fit.converged,
        },
        args.out,
    )
    return 0 if fit.converged else COMPUTE_ERROR


def cmd_oracle(args):
    config = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    summary = run_experiment(config, args.out or "report.jsonl")
    print(dumps17(summary), file=sys.stderr)
    if summary["failed"] > 0:
        return VIOLATION
    if summary["unverifiable"] > 0:
        return COMPUTE_ERROR
    return 0


def cmd_compare(args):
    X = load_matrix(args.matrix)
    S = _parse_set(args.set, X.p)
    with open(args.cone_spec) as fh:
        spec = json.load(fh)
    spec.setdefault("p", X.p)
    cone = cone_from_json(spec)
    record = comparison_check(X.X, S, args.big_l, cone, seed=args.seed or 0)
    _emit(record, args.out)
    ok = record.get("l1_ordering_holds", True) and record.get("cone_ordering_holds", True)
    return 0 if ok else VIOLATION


def cmd_bound(args):
    X = load_matrix(args.matrix)
    with open(args.cone_spec) as fh:
        spec = json.load(fh)
    spec.setdefault("p", X.p)
    cone = cone_from_json(spec)
    payload = {"lambda_eps": pontil_maurer_bound(X.X, cone)}
    if args.draws:
        payload.update(pontil_maurer_check(X.X, cone, draws=args.draws, seed=args.seed or 0))
    _emit(payload, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparsenorms",
        description="Structured sparsity norms, eigenvalue constants and the oracle-inequality harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write output to a file instead of stdout")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = sub.add_parser("norm", help="evaluate a norm at a vector")
    sp.add_argument("--norm-spec", required=True)
    sp.add_argument("--vector", required=True, help='comma separated, e.g. "3,-4"')
    common(sp)

    sp = sub.add_parser("dual", help="evaluate a dual norm at a vector")
    sp.add_argument("--norm-spec", required=True)
    sp.add_argument("--vector", required=True)
    common(sp)

    sp = sub.add_parser("eigenvalue", help="eigenvalue constant of a design")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--set", required=True, help='comma separated 1-based indices, e.g. "3"')
    sp.add_argument("--big-l", type=float, required=True, help="the stretch constant L")
    sp.add_argument("--norm-spec", help="norm JSON; omit for the l1 norm")
    common(sp)

    sp = sub.add_parser("solve", help="norm-penalized least squares")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--norm-spec")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=100_000)
    common(sp)

    sp = sub.add_parser("oracle", help="run a Monte Carlo oracle experiment")
    sp.add_argument("--config", required=True)
    common(sp)

    sp = sub.add_parser("compare", help="eigenvalue ordering record")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--set", required=True)
    sp.add_argument("--big-l", type=float, required=True)
    sp.add_argument("--cone-spec", required=True)
    common(sp)

    sp = sub.add_parser("bound", help="dual-noise expectation bound")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--cone-spec", required=True)
    sp.add_argument("--draws", type=int, default=0, help="also run the Monte Carlo check")
    common(sp)
    return parser


HANDLERS = {
    "norm": cmd_norm,
    "dual": lambda args: cmd_norm(args, dual=True),
    "eigenvalue": cmd_eigenvalue,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "bound": cmd_bound,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    try:
        return HANDLERS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    except (CsvParseError, DimensionError, NotAllowedSetError, ValueError, OSError) as exc:
        return _usage_error("E_INPUT", str(exc))
    except RuntimeError as exc:
        print(f"E_COMPUTE: {exc}", file=sys.stderr)
        return COMPUTE_ERROR


if __name__ == "__main__":
    sys.exit(main())
