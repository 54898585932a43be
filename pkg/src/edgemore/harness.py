"""Experiment sweeps comparing solvers across workload sizes.

Two sweep kinds are supported: growing the number of options each provider
declares ("options") and growing the node fleet ("nodes"). Every sweep
point is replicated over seeded runs and aggregated with the mean and the
empirical 95% interval.

Seeding: each run's scenario seed is derived from the sweep's base seed by
a splitmix64 chain. The options sweep deliberately leaves the swept value
out of the chain, so run r sees the same provider streams at every J and a
larger J strictly extends the option set; together with an exact solver
this makes per-run utility non-decreasing in J, which the tests assert.
The nodes sweep folds the swept value in, since its scenarios differ in
shape anyway.

Runs may execute in parallel worker processes; records are keyed and
re-emitted in deterministic order, so outputs are identical to a
sequential run except measured runtimes.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
from dataclasses import dataclass, replace
from math import fsum

import numpy as np

from ._version import __version__
from .exact import SolveLimits, solve_exact
from .generator import GenParams, PRNG_NAME, generate, params_to_dict
from .heuristics import solve_greedy, solve_naive
from .model import EdgemoreError, Scenario, SolveReport

KIND_OPTIONS = "options"
KIND_NODES = "nodes"

SOLVER_NAMES = ("exact", "greedy", "naive")

CSV_HEADER = (
    "sweep_kind,sweep_value,solver,mean_utility_pct,ci95_low,ci95_high,"
    "mean_cpu_usage,mean_ram_usage,mean_runtime_ms,n_runs,n_proven_optimal"
)

_MASK64 = 2**64 - 1


class EmptySampleError(EdgemoreError):
    """Aggregation was asked for statistics of zero samples."""


def _splitmix64(x: int) -> int:
    """One step of the splitmix64 permutation (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(base_seed: int, *parts: int) -> int:
    """Fold integer parts into a 64-bit seed, one splitmix64 step per part."""
    x = base_seed & _MASK64
    for p in parts:
        x = _splitmix64(x ^ (p & _MASK64))
    return x


@dataclass(frozen=True)
class SweepConfig:
    """Full description of one sweep; hashable into output metadata."""

    sweep_kind: str
    sweep_values: tuple[int, ...]
    base_params: GenParams
    solvers: tuple[str, ...] = SOLVER_NAMES
    runs_per_point: int = 20
    base_seed: int = 0
    limits: SolveLimits | None = None

    def __post_init__(self) -> None:
        if self.sweep_kind not in (KIND_OPTIONS, KIND_NODES):
            raise ValueError(
                f"sweep_kind must be '{KIND_OPTIONS}' or '{KIND_NODES}', got {self.sweep_kind!r}"
            )
        values = tuple(self.sweep_values)
        object.__setattr__(self, "sweep_values", values)
        if not values:
            raise ValueError("sweep_values must be non-empty")
        if any(not isinstance(v, int) or isinstance(v, bool) or v < 1 for v in values):
            raise ValueError(f"sweep_values must be integers >= 1, got {values}")
        if any(a >= b for a, b in zip(values, values[1:])):
            raise ValueError(f"sweep_values must be strictly increasing, got {values}")
        solvers = tuple(self.solvers)
        object.__setattr__(self, "solvers", solvers)
        if not solvers:
            raise ValueError("solvers must be non-empty")
        for s in solvers:
            if s not in SOLVER_NAMES:
                raise ValueError(f"unknown solver {s!r}; choose from {SOLVER_NAMES}")
        if len(set(solvers)) != len(solvers):
            raise ValueError(f"duplicate solver in {solvers}")
        if self.runs_per_point < 1:
            raise ValueError(f"runs_per_point must be >= 1, got {self.runs_per_point}")
        if not (0 <= self.base_seed <= _MASK64):
            raise ValueError(f"base_seed must be in [0, 2^64), got {self.base_seed}")


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one solver on one generated run."""

    sweep_kind: str
    sweep_value: int
    run_index: int
    seed: int
    solver: str
    objective: float
    utility_pct: float
    cpu_usage: float
    ram_usage: float
    runtime_ms: float
    proven_optimal: bool


@dataclass(frozen=True)
class SweepRow:
    """Aggregated statistics for one (sweep value, solver) cell."""

    sweep_kind: str
    sweep_value: int
    solver: str
    mean_utility_pct: float
    ci95_low: float
    ci95_high: float
    mean_cpu_usage: float
    mean_ram_usage: float
    mean_runtime_ms: float
    n_runs: int
    n_proven_optimal: int


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple[SweepRow, ...]
    records: tuple[RunRecord, ...]


def derive_params(config: SweepConfig, value: int, run: int) -> GenParams:
    """Generator parameters for one (sweep value, run) cell, seed included."""
    seed = run_seed(config, value, run)
    if config.sweep_kind == KIND_OPTIONS:
        return replace(config.base_params, options_per_provider=value, seed=seed)
    return replace(config.base_params, n_nodes=value, seed=seed)


def run_seed(config: SweepConfig, value: int, run: int) -> int:
    if config.sweep_kind == KIND_OPTIONS:
        # Independent of the swept value: the same run must see the same
        # providers at every J, differing only by appended options.
        return mix_seed(config.base_seed, 0, run)
    return mix_seed(config.base_seed, value, run)


def _solve_with(name: str, scenario: Scenario, seed: int, limits: SolveLimits | None):
    if name == "exact":
        return solve_exact(scenario, limits)
    if name == "greedy":
        return solve_greedy(scenario)
    if name == "naive":
        return solve_naive(scenario, seed)
    raise ValueError(f"unknown solver {name!r}")


def _run_cell(config: SweepConfig, value: int, run: int) -> list[RunRecord]:
    """All configured solvers on the scenario for one (value, run) cell."""
    params = derive_params(config, value, run)
    scenario = generate(params)
    records = []
    for name in config.solvers:
        _alloc, report = _solve_with(name, scenario, params.seed, config.limits)
        records.append(_record_from_report(config, value, run, params.seed, report))
    return records


def _record_from_report(
    config: SweepConfig, value: int, run: int, seed: int, report: SolveReport
) -> RunRecord:
    return RunRecord(
        sweep_kind=config.sweep_kind,
        sweep_value=value,
        run_index=run,
        seed=seed,
        solver=report.solver_name,
        objective=report.objective,
        utility_pct=report.utility_pct,
        cpu_usage=report.usage_fraction[0],
        ram_usage=report.usage_fraction[1],
        runtime_ms=report.runtime_ms,
        proven_optimal=report.proven_optimal,
    )


def aggregate(samples: list[float]) -> tuple[float, float, float]:
    """Mean plus the empirical 2.5th and 97.5th percentiles.

    Percentiles use linear interpolation between order statistics. The
    interval is the sample spread, not a parametric confidence interval.
    """
    if len(samples) == 0:
        raise EmptySampleError("cannot aggregate zero samples")
    mean = fsum(samples) / len(samples)
    lo, hi = np.percentile(np.asarray(samples, dtype=float), [2.5, 97.5])
    return mean, float(lo), float(hi)


def run_sweep(
    config: SweepConfig, jobs: int = 1, detail_log_path=None
) -> SweepResult:
    """Execute the sweep and aggregate per (value, solver).

    ``jobs`` > 1 distributes (value, run) cells over worker processes; the
    result is identical to a sequential run apart from measured runtimes.
    ``detail_log_path`` optionally writes one JSON line per solve.
    """
    cells = [(value, run) for value in config.sweep_values for run in range(config.runs_per_point)]
    by_cell: dict[tuple[int, int], list[RunRecord]] = {}
    if jobs <= 1 or len(cells) <= 1:
        for value, run in cells:
            by_cell[(value, run)] = _run_cell(config, value, run)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(_run_cell, config, value, run): (value, run)
                for value, run in cells
            }
            for fut in concurrent.futures.as_completed(futures):
                by_cell[futures[fut]] = fut.result()

    records: list[RunRecord] = []
    for value, run in cells:
        records.extend(by_cell[(value, run)])

    rows = []
    for value in config.sweep_values:
        for solver in config.solvers:
            group = [
                r for r in records if r.sweep_value == value and r.solver == solver
            ]
            mean_u, lo, hi = aggregate([r.utility_pct for r in group])
            rows.append(
                SweepRow(
                    sweep_kind=config.sweep_kind,
                    sweep_value=value,
                    solver=solver,
                    mean_utility_pct=mean_u,
                    ci95_low=lo,
                    ci95_high=hi,
                    mean_cpu_usage=fsum(r.cpu_usage for r in group) / len(group),
                    mean_ram_usage=fsum(r.ram_usage for r in group) / len(group),
                    mean_runtime_ms=fsum(r.runtime_ms for r in group) / len(group),
                    n_runs=len(group),
                    n_proven_optimal=sum(r.proven_optimal for r in group),
                )
            )

    result = SweepResult(config=config, rows=tuple(rows), records=tuple(records))
    if detail_log_path is not None:
        write_detail_log(result, detail_log_path)
    return result


def config_to_dict(config: SweepConfig) -> dict:
    limits = config.limits
    return {
        "sweep_kind": config.sweep_kind,
        "sweep_values": list(config.sweep_values),
        "base_params": params_to_dict(config.base_params),
        "solvers": list(config.solvers),
        "runs_per_point": config.runs_per_point,
        "base_seed": config.base_seed,
        "limits": None
        if limits is None
        else {"time_limit_ms": limits.time_limit_ms, "node_budget": limits.node_budget},
    }


def config_hash(config: SweepConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _metadata(config: SweepConfig) -> dict:
    return {"version": __version__, "prng": PRNG_NAME, "config_hash": config_hash(config)}


def write_results(result: SweepResult, path) -> None:
    """CSV of the aggregated rows, preceded by a `#`-prefixed metadata line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# " + json.dumps(_metadata(result.config), sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for row in result.rows:
            writer.writerow(
                [
                    row.sweep_kind,
                    row.sweep_value,
                    row.solver,
                    repr(row.mean_utility_pct),
                    repr(row.ci95_low),
                    repr(row.ci95_high),
                    repr(row.mean_cpu_usage),
                    repr(row.mean_ram_usage),
                    repr(row.mean_runtime_ms),
                    row.n_runs,
                    row.n_proven_optimal,
                ]
            )


def write_detail_log(result: SweepResult, path) -> None:
    """One JSON line per solve, preceded by one metadata line."""
    config = result.config
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(_metadata(config), sort_keys=True) + "\n")
        for r in result.records:
            params = derive_params(config, r.sweep_value, r.run_index)
            line = {
                "sweep_kind": r.sweep_kind,
                "sweep_value": r.sweep_value,
                "run_index": r.run_index,
                "seed": r.seed,
                "params": params_to_dict(params),
                "solver": r.solver,
                "objective": r.objective,
                "utility_pct": r.utility_pct,
                "cpu_usage": r.cpu_usage,
                "ram_usage": r.ram_usage,
                "runtime_ms": r.runtime_ms,
                "proven_optimal": r.proven_optimal,
            }
            fh.write(json.dumps(line, sort_keys=True) + "\n")


# Canned sweep shapes. The desk profile is sized to finish on an ordinary
# machine; the larger profile restores the full published workload scale
# and carries no runtime guarantee.

FIG_OPTIONS = "fig3"
FIG_NODES = "fig4"

_DESK_LIMITS = SolveLimits(time_limit_ms=60_000)


def profile_config(
    figure: str,
    profile: str = "desk",
    *,
    runs_per_point: int = 20,
    base_seed: int = 0,
    solvers: tuple[str, ...] = SOLVER_NAMES,
) -> SweepConfig:
    """SweepConfig for one of the two standard figures at a given scale."""
    if figure not in (FIG_OPTIONS, FIG_NODES):
        raise ValueError(f"figure must be '{FIG_OPTIONS}' or '{FIG_NODES}', got {figure!r}")
    if profile not in ("desk", "paper"):
        raise ValueError(f"profile must be 'desk' or 'paper', got {profile!r}")

    if profile == "desk":
        base = GenParams(
            n_providers=12,
            n_nodes=3,
            options_per_provider=5,
            containers_per_option=4,
        )
        limits = _DESK_LIMITS
    else:
        base = GenParams()
        limits = None

    if figure == FIG_OPTIONS:
        return SweepConfig(
            sweep_kind=KIND_OPTIONS,
            sweep_values=tuple(range(1, 9)),
            base_params=base,
            solvers=solvers,
            runs_per_point=runs_per_point,
            base_seed=base_seed,
            limits=limits,
        )
    values = (2, 4, 8) if profile == "desk" else (2, 4, 8, 16, 32)
    return SweepConfig(
        sweep_kind=KIND_NODES,
        sweep_values=values,
        base_params=base,
        solvers=solvers,
        runs_per_point=runs_per_point,
        base_seed=base_seed,
        limits=limits,
    )
