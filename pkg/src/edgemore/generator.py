"""Seeded synthetic workload generator.

Produces scenarios with a fleet of identical nodes and N providers, each
declaring J options of Z containers. Demands are uniform around a mean
calibrated so that the fleet is oversubscribed by a fixed load factor, and
each option's utility grows concavely with the share of fleet capacity the
option asks for.

Reproducibility: every option gets its own PRNG stream, derived from the
base seed and the option's (provider index, option index) coordinates.
Because streams never depend on the counts N or J, enlarging either simply
appends new providers or options without perturbing anything already
generated. The stream construction is named by ``PRNG_NAME`` and recorded
in output metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    ConfigOption,
    ContainerSpec,
    EdgemoreError,
    NodeSpec,
    ResourceVector,
    Scenario,
    ServiceProvider,
)

PRNG_NAME = "numpy-pcg64-seedseq"

RESOURCE_TYPES = (("cpu", "core-time"), ("ram", "GB"))

_SEED_MAX = 2**64


class ParameterError(EdgemoreError):
    """Generator parameters violate their documented ranges."""


@dataclass(frozen=True)
class GenParams:
    """All knobs of the synthetic workload."""

    n_providers: int = 50
    n_nodes: int = 8
    options_per_provider: int = 5
    containers_per_option: int = 8
    load_factor: float = 1.8
    node_capacity: ResourceVector = field(
        default_factory=lambda: ResourceVector((16.0, 32.0))
    )
    alpha_range: tuple[float, float] = (0.0, 1.0)
    beta_range: tuple[float, float] = (1.0, 5.0)
    demand_spread: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_providers", "n_nodes", "options_per_provider", "containers_per_option"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ParameterError(f"{name} must be an integer >= 1, got {value!r}")
        if not self.load_factor > 0:
            raise ParameterError(f"load_factor must be positive, got {self.load_factor}")
        if len(self.node_capacity) != len(RESOURCE_TYPES):
            raise ParameterError(
                f"node_capacity must have {len(RESOURCE_TYPES)} components, "
                f"got {len(self.node_capacity)}"
            )
        if any(c <= 0 for c in self.node_capacity):
            raise ParameterError(f"node_capacity components must be positive, got {self.node_capacity}")
        lo, hi = self.alpha_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ParameterError(f"alpha_range must satisfy 0 <= lo <= hi <= 1, got {self.alpha_range}")
        blo, bhi = self.beta_range
        if not (1.0 <= blo <= bhi):
            raise ParameterError(f"beta_range must satisfy 1 <= lo <= hi, got {self.beta_range}")
        if not (0.0 <= self.demand_spread < 1.0):
            raise ParameterError(f"demand_spread must be in [0, 1), got {self.demand_spread}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not (
            0 <= self.seed < _SEED_MAX
        ):
            raise ParameterError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")


def params_to_dict(params: GenParams) -> dict:
    """JSON-ready view of the parameters, used in output metadata."""
    return {
        "n_providers": params.n_providers,
        "n_nodes": params.n_nodes,
        "options_per_provider": params.options_per_provider,
        "containers_per_option": params.containers_per_option,
        "load_factor": params.load_factor,
        "node_capacity": list(params.node_capacity),
        "alpha_range": list(params.alpha_range),
        "beta_range": list(params.beta_range),
        "demand_spread": params.demand_spread,
        "seed": params.seed,
    }


def generator_meta(params: GenParams) -> dict:
    """Provenance block embedded in generated scenario files."""
    return {"prng": PRNG_NAME, "params": params_to_dict(params)}


def total_fleet_capacity(params: GenParams) -> ResourceVector:
    return ResourceVector(tuple(params.n_nodes * c for c in params.node_capacity))


def mean_demand(params: GenParams) -> ResourceVector:
    """Per-container mean demand making expected total demand K times fleet capacity.

    With Z containers per chosen option and N providers, total demand across
    all providers' (single) workloads averages Z * N * mean, so the mean is
    set to K * fleet_capacity / (Z * N) per resource type.
    """
    totals = total_fleet_capacity(params)
    denom = params.containers_per_option * params.n_providers
    return ResourceVector(tuple(params.load_factor * c / denom for c in totals))


def option_utility(
    option_demand: ResourceVector,
    totals: ResourceVector,
    alpha: float,
    beta_cpu: float,
    beta_ram: float,
) -> float:
    """Concave utility of one option from its aggregate demand.

    Each resource contributes the demanded share of fleet capacity raised to
    1/beta; shares are clamped to [0, 1] first, so the result is always in
    [0, 1] and weakly increasing and concave in each demand component.
    """
    r_cpu = min(1.0, option_demand[0] / totals[0])
    r_ram = min(1.0, option_demand[1] / totals[1])
    u = alpha * r_cpu ** (1.0 / beta_cpu) + (1.0 - alpha) * r_ram ** (1.0 / beta_ram)
    return min(1.0, max(0.0, u))


def _option_rng(seed: int, provider_idx: int, option_idx: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(provider_idx, option_idx))
    return np.random.Generator(np.random.PCG64(ss))


def generate(params: GenParams) -> Scenario:
    """Build a scenario from the parameters; pure function of ``params``.

    Draw order within an option's stream is fixed: the Z-by-L demand matrix,
    then alpha, then beta for CPU and for RAM. Streams are keyed by
    (provider index, option index) only, so growing n_providers or
    options_per_provider extends a scenario without changing existing draws,
    while changing n_nodes rescales demands through the calibrated mean.
    """
    totals = total_fleet_capacity(params)
    mean = mean_demand(params)
    spread = params.demand_spread
    low = np.array([m * (1.0 - spread) for m in mean])
    high = np.array([m * (1.0 + spread) for m in mean])
    z = params.containers_per_option
    num_types = len(RESOURCE_TYPES)

    nodes = tuple(
        NodeSpec(node_id=m + 1, capacities=params.node_capacity)
        for m in range(params.n_nodes)
    )

    providers = []
    for i in range(params.n_providers):
        options = []
        for j in range(params.options_per_provider):
            rng = _option_rng(params.seed, i, j)
            demands = rng.uniform(low, high, size=(z, num_types))
            alpha = float(rng.uniform(params.alpha_range[0], params.alpha_range[1]))
            beta_cpu = float(rng.uniform(params.beta_range[0], params.beta_range[1]))
            beta_ram = float(rng.uniform(params.beta_range[0], params.beta_range[1]))
            containers = tuple(
                ContainerSpec(
                    container_id=k + 1,
                    demands=ResourceVector(tuple(float(v) for v in demands[k])),
                )
                for k in range(z)
            )
            agg = ResourceVector(
                tuple(float(np.sum(demands[:, l])) for l in range(num_types))
            )
            options.append(
                ConfigOption(
                    option_id=j + 1,
                    utility=option_utility(agg, totals, alpha, beta_cpu, beta_ram),
                    containers=containers,
                )
            )
        providers.append(ServiceProvider(provider_id=i + 1, options=tuple(options)))

    return Scenario(
        resource_types=RESOURCE_TYPES,
        nodes=nodes,
        providers=tuple(providers),
    )
