"""Command-line interface.

Subcommands: ``generate`` (write a synthetic scenario), ``solve`` (run one
solver on a scenario file), ``sweep`` (run a full experiment sweep to CSV),
and ``validate`` (check an allocation against a scenario).

Conventions: human-readable summaries go to stdout, diagnostics to stderr,
machine-readable artifacts only to files. Exit codes are stable: 0 success,
1 validation failure, 2 usage error, 3 I/O or file-format error. The
``EDGEMORE_SEED`` environment variable supplies a default seed where no
flag is given.
"""

from __future__ import annotations

import argparse
import os
import sys

from ._version import __version__
from .exact import SolveLimits, solve_exact
from .files import (
    SchemaError,
    read_allocation,
    read_scenario,
    write_allocation,
    write_report,
    write_scenario,
)
from .generator import GenParams, ParameterError, generate, generator_meta, mean_demand
from .harness import profile_config, run_sweep, write_results
from .heuristics import solve_greedy, solve_naive
from .model import ResourceVector, validate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3

_SEED_ENV = "EDGEMORE_SEED"


class _UsageError(Exception):
    pass


def _env_seed() -> int:
    raw = os.environ.get(_SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise _UsageError(f"{_SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgemore",
        description="Multi-tenant edge resource allocation: generator, solvers, experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--quiet", action="store_true", help="suppress summaries (file outputs unaffected)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic scenario file")
    gen.add_argument("--providers", type=int, default=50, help="number of service providers")
    gen.add_argument("--nodes", type=int, default=8, help="number of edge nodes")
    gen.add_argument("--options", type=int, default=5, help="options per provider")
    gen.add_argument("--containers", type=int, default=8, help="containers per option")
    gen.add_argument("--load-factor", type=float, default=1.8, help="demand/capacity ratio")
    gen.add_argument("--cpu", type=float, default=16.0, help="per-node CPU capacity")
    gen.add_argument("--ram", type=float, default=32.0, help="per-node RAM capacity")
    gen.add_argument("--seed", type=int, default=None, help="generator seed")
    gen.add_argument("--out", required=True, help="output scenario path")

    solve = sub.add_parser("solve", help="run one solver on a scenario file")
    solve.add_argument("--scenario", required=True, help="scenario file to solve")
    solve.add_argument("--solver", required=True, choices=("exact", "greedy", "naive"))
    solve.add_argument("--seed", type=int, default=None, help="seed for the naive solver")
    solve.add_argument(
        "--time-limit-ms", type=int, default=None, help="wall-clock cap for the exact solver"
    )
    solve.add_argument("--out-allocation", default=None, help="write the allocation here")
    solve.add_argument("--out-report", default=None, help="write the solve report here")

    sweep = sub.add_parser("sweep", help="run an experiment sweep and write CSV")
    sweep.add_argument("--figure", required=True, choices=("fig3", "fig4"))
    sweep.add_argument("--profile", default="desk", choices=("desk", "paper"))
    sweep.add_argument("--runs", type=int, default=20, help="runs per sweep point")
    sweep.add_argument("--base-seed", type=int, default=None, help="base seed for all runs")
    sweep.add_argument(
        "--solvers",
        default="exact,greedy,naive",
        help="comma-separated subset of exact,greedy,naive",
    )
    sweep.add_argument(
        "--jobs",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes (results independent of this)",
    )
    sweep.add_argument("--detail-log", default=None, help="optional JSONL per-solve log")
    sweep.add_argument("--out", required=True, help="output CSV path")

    val = sub.add_parser("validate", help="check an allocation against a scenario")
    val.add_argument("--scenario", required=True)
    val.add_argument("--allocation", required=True)

    return parser


def cmd_generate(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    params = GenParams(
        n_providers=args.providers,
        n_nodes=args.nodes,
        options_per_provider=args.options,
        containers_per_option=args.containers,
        load_factor=args.load_factor,
        node_capacity=ResourceVector((args.cpu, args.ram)),
        seed=seed,
    )
    scenario = generate(params)
    write_scenario(scenario, args.out, generator_meta(params))
    if not args.quiet:
        mean = mean_demand(params)
        total = args.providers * args.options * args.containers
        print(
            f"generated {args.providers} providers x {args.options} options x "
            f"{args.containers} containers ({total} total) on {args.nodes} nodes; "
            f"mean demand cpu={mean[0]:.6g} ram={mean[1]:.6g} -> {args.out}"
        )
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    if args.solver == "exact":
        limits = (
            SolveLimits(time_limit_ms=args.time_limit_ms)
            if args.time_limit_ms is not None
            else None
        )
        alloc, report = solve_exact(scenario, limits)
    elif args.solver == "greedy":
        alloc, report = solve_greedy(scenario)
    else:
        seed = args.seed if args.seed is not None else _env_seed()
        alloc, report = solve_naive(scenario, seed)
    if args.out_allocation:
        write_allocation(alloc, args.out_allocation)
    if args.out_report:
        write_report(report, args.out_report)
    if not args.quiet:
        usage = " ".join(
            f"{name}_usage={frac:.6g}"
            for (name, _unit), frac in zip(scenario.resource_types, report.usage_fraction)
        )
        print(
            f"{report.solver_name}: objective={report.objective:.9g} "
            f"utility_pct={report.utility_pct:.6g} {usage} "
            f"runtime_ms={report.runtime_ms:.3f} "
            f"proven_optimal={'true' if report.proven_optimal else 'false'}"
        )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    base_seed = args.base_seed if args.base_seed is not None else _env_seed()
    solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    config = profile_config(
        args.figure,
        args.profile,
        runs_per_point=args.runs,
        base_seed=base_seed,
        solvers=solvers,
    )
    result = run_sweep(config, jobs=args.jobs, detail_log_path=args.detail_log)
    write_results(result, args.out)
    if not args.quiet:
        for row in result.rows:
            print(
                f"{row.sweep_kind}={row.sweep_value} {row.solver}: "
                f"utility_pct={row.mean_utility_pct:.3f} "
                f"[{row.ci95_low:.3f}, {row.ci95_high:.3f}] "
                f"proven {row.n_proven_optimal}/{row.n_runs}"
            )
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    alloc = read_allocation(args.allocation)
    result = validate(scenario, alloc)
    if result.ok:
        if not args.quiet:
            print("OK")
        return EXIT_OK
    for v in result.violations:
        print(f"{v.kind}: {v.message}")
    return EXIT_INVALID


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code is None:
            return EXIT_OK
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "generate": cmd_generate,
        "solve": cmd_solve,
        "sweep": cmd_sweep,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (_UsageError, ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
