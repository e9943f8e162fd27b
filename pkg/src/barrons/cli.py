"""Command line front end.

Exit codes: 0 on success, 1 for bad inputs or configuration, 2 when the
inner solver fails, 3 when a trace fails verification.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .domain import ProblemDims
from .harness import (
    LEARNER_NAMES,
    load_trace,
    run_experiment,
    run_market,
    sweep,
    verify_trace,
    write_sweep_csv,
    write_sweep_json,
)
from .markets import MARKET_KINDS, MarketSpec, generate, load_csv, write_csv
from .solver import SolverConfig, SolverFailure

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


def _add_market_args(parser, require=True):
    group = parser.add_mutually_exclusive_group(required=require)
    group.add_argument("--market", choices=MARKET_KINDS, help="built-in market family")
    group.add_argument("--csv", type=Path, help="CSV of raw price relatives, one round per row")
    parser.add_argument("--n", type=int, required=True, help="number of assets")
    parser.add_argument("--t-horizon", type=int, help="number of rounds (built-in markets)")
    parser.add_argument("--seed", type=int, default=0, help="market seed")
    parser.add_argument("--eps", type=float, help="small price relative for the blowup market")
    parser.add_argument("--flip-period", type=int, help="rounds between blowup regime flips")
    parser.add_argument("--sigma", type=float, help="log-volatility for the iid market")


def _add_learner_args(parser):
    parser.add_argument("--learner", choices=LEARNER_NAMES, required=True)
    parser.add_argument("--beta", type=float, help="inverse curvature weight")
    parser.add_argument("--eta", type=float, help="base learning rate")
    parser.add_argument("--gamma", type=float, help="leader barrier weight")
    parser.add_argument("--mix", type=float, help="uniform mixing weight")
    parser.add_argument("--g-est", type=float, help="gradient bound estimate for eg")
    parser.add_argument("--resolution", type=float, help="grid pitch for up-grid")
    parser.add_argument("--solver-tol", type=float, help="solver first-order tolerance")
    parser.add_argument("--max-newton-iters", type=int, help="per-stage iteration budget")
    parser.add_argument("--strict", action="store_true", help="raise on the first invariant violation")


def _market_params(args) -> dict:
    params = {}
    if args.eps is not None:
        params["epsilon"] = args.eps
    if args.flip_period is not None:
        params["flip_period"] = args.flip_period
    if args.sigma is not None:
        params["sigma"] = args.sigma
    return params


def _learner_params(args) -> dict:
    params = {}
    for name in ("beta", "eta", "gamma", "mix", "resolution"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    if args.g_est is not None:
        params["g_est"] = args.g_est
    return params


def _solver_cfg(args):
    kwargs = {}
    if args.solver_tol is not None:
        kwargs["kkt_tol"] = args.solver_tol
    if args.max_newton_iters is not None:
        kwargs["max_newton_iters"] = args.max_newton_iters
    return SolverConfig(**kwargs) if kwargs else None


def _cmd_run(args) -> int:
    solver_cfg = _solver_cfg(args)
    params = _learner_params(args)
    if args.csv is not None:
        rounds, dims = load_csv(args.csv, args.n)
        result = run_experiment(
            args.learner,
            rounds,
            dims,
            params=params,
            solver_cfg=solver_cfg,
            strict=args.strict,
            market_desc=f"csv:{args.csv.name}",
            seed=None,
            out_path=args.out,
        )
    else:
        if args.t_horizon is None:
            raise ValueError("--t-horizon is required with --market")
        spec = MarketSpec(
            args.market,
            ProblemDims(args.n, args.t_horizon),
            seed=args.seed,
            params=_market_params(args),
        )
        result = run_market(
            args.learner,
            spec,
            params=params,
            solver_cfg=solver_cfg,
            strict=args.strict,
            out_path=args.out,
        )
    summary = result.summary
    print(f"learner={args.learner} rounds={summary['rounds_played']} total_loss={summary['total_loss']:.6f}")
    print(f"best_crp_loss={summary['best_crp_loss']:.6f} regret={summary['regret']:.6f}")
    print(f"epochs={summary['epoch_count']} restarts={summary['restarts']} max_grad={summary['max_grad_inf_norm']:.3f}")
    violations = summary["invariant_violations"]
    if violations:
        print(f"invariant violations: {len(violations)}", file=sys.stderr)
        for line in violations[:10]:
            print(f"  {line}", file=sys.stderr)
    if args.out is not None:
        print(f"trace written to {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    t_values = [int(v) for v in args.t_values.split(",") if v.strip()]
    rows = sweep(
        args.learner,
        args.market,
        args.n,
        t_values,
        reps=args.reps,
        seed=args.seed,
        params=_learner_params(args),
        market_params=_market_params(args),
        solver_cfg=_solver_cfg(args),
    )
    write_sweep_csv(rows, args.out)
    json_path = args.out.with_suffix(".json")
    write_sweep_json(rows, json_path)
    failures = [row for row in rows if row["error"]]
    print(
        f"{len(rows)} runs, {len(failures)} failed, "
        f"table written to {args.out} and {json_path}"
    )
    for row in failures[:10]:
        print(f"  T={row['T']} seed={row['seed']}: {row['error']}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    trace = load_trace(args.trace)
    problems = verify_trace(trace)
    recorded = trace.get("summary", {}).get("invariant_violations", [])
    if problems:
        print(f"{args.trace}: {len(problems)} problems", file=sys.stderr)
        for line in problems[:20]:
            print(f"  {line}", file=sys.stderr)
        return EXIT_VERIFY
    if recorded:
        print(f"{args.trace}: consistent, but the run itself recorded {len(recorded)} violations")
    else:
        print(f"{args.trace}: ok")
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.t_horizon is None:
        raise ValueError("--t-horizon is required")
    spec = MarketSpec(
        args.market,
        ProblemDims(args.n, args.t_horizon),
        seed=args.seed,
        params=_market_params(args),
    )
    rounds = generate(spec)
    write_csv(rounds, args.out)
    print(f"{len(rounds)} rounds written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barrons",
        description="Online portfolio selection with barrier-regularized Newton steps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one learner over one market")
    _add_learner_args(p_run)
    _add_market_args(p_run)
    p_run.add_argument("--out", type=Path, help="write the JSON trace here")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of runs over horizons and seeds")
    _add_learner_args(p_sweep)
    p_sweep.add_argument("--market", choices=MARKET_KINDS, required=True)
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--t-values", required=True, help="comma separated horizons")
    p_sweep.add_argument("--reps", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--eps", type=float)
    p_sweep.add_argument("--flip-period", type=int)
    p_sweep.add_argument("--sigma", type=float)
    p_sweep.add_argument("--out", type=Path, required=True, help="CSV results table")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="recheck a persisted trace")
    p_verify.add_argument("trace", type=Path)
    p_verify.set_defaults(func=_cmd_verify)

    p_gen = sub.add_parser("gen", help="write a built-in market to CSV")
    p_gen.add_argument("--market", choices=MARKET_KINDS, required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--t-horizon", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--eps", type=float)
    p_gen.add_argument("--flip-period", type=int)
    p_gen.add_argument("--sigma", type=float)
    p_gen.add_argument("--out", type=Path, required=True)
    p_gen.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverFailure as failure:
        print(f"solver failure: {failure}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
