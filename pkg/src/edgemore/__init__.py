"""Multi-tenant edge resource allocation: model, solvers, generator, experiments."""

from ._version import __version__
from .exact import (
    BRUTE_FORCE_LEAF_GUARD,
    InstanceTooLargeError,
    SolveLimits,
    brute_force,
    solve_exact,
)
from .files import (
    SCENARIO_FORMAT_VERSION,
    SchemaError,
    read_allocation,
    read_scenario,
    write_allocation,
    write_report,
    write_scenario,
)
from .generator import (
    PRNG_NAME,
    GenParams,
    ParameterError,
    generate,
    mean_demand,
    option_utility,
)
from .harness import (
    EmptySampleError,
    RunRecord,
    SweepConfig,
    SweepResult,
    SweepRow,
    aggregate,
    mix_seed,
    profile_config,
    run_sweep,
    write_results,
)
from .heuristics import solve_greedy, solve_naive, utility_density
from .model import (
    EPS,
    Allocation,
    ConfigOption,
    ContainerSpec,
    EdgemoreError,
    InvalidAllocationError,
    InvalidReferenceError,
    NodeSpec,
    ResourceVector,
    Scenario,
    ServiceProvider,
    SolveReport,
    ValidationResult,
    Violation,
    build_report,
    option_demand,
    resource_usage,
    total_utility,
    validate,
)

__all__ = [
    "__version__",
    "EPS",
    "Allocation",
    "ConfigOption",
    "ContainerSpec",
    "EdgemoreError",
    "InvalidAllocationError",
    "InvalidReferenceError",
    "NodeSpec",
    "ResourceVector",
    "Scenario",
    "ServiceProvider",
    "SolveReport",
    "ValidationResult",
    "Violation",
    "build_report",
    "option_demand",
    "resource_usage",
    "total_utility",
    "validate",
    "SCENARIO_FORMAT_VERSION",
    "SchemaError",
    "read_allocation",
    "read_scenario",
    "write_allocation",
    "write_report",
    "write_scenario",
    "BRUTE_FORCE_LEAF_GUARD",
    "InstanceTooLargeError",
    "SolveLimits",
    "brute_force",
    "solve_exact",
    "solve_greedy",
    "solve_naive",
    "utility_density",
    "PRNG_NAME",
    "GenParams",
    "ParameterError",
    "generate",
    "mean_demand",
    "option_utility",
    "EmptySampleError",
    "RunRecord",
    "SweepConfig",
    "SweepResult",
    "SweepRow",
    "aggregate",
    "mix_seed",
    "profile_config",
    "run_sweep",
    "write_results",
]
