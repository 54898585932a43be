"""Problem instances, allocations, and the rules they must obey.

A scenario describes an edge cluster (nodes with per-resource capacities)
and the service providers competing for it. Each provider declares
configuration options; an option carries a utility for the operator and a
non-empty set of containers with multi-dimensional resource demands. An
allocation accepts at most one option per provider and pins every container
of each accepted option to exactly one node.

Everything here is immutable after construction and every operation is a
pure function of its arguments, so concurrent use needs no locking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import fsum
from typing import Iterator, Mapping

# Absolute tolerance for capacity comparisons. Demands are reals drawn from
# continuous distributions; the slack absorbs accumulated rounding.
EPS = 1e-9


class EdgemoreError(Exception):
    """Base class for errors raised by this package."""


class InvalidReferenceError(EdgemoreError):
    """An allocation refers to a provider, option, container, or node that does not exist."""


class InvalidAllocationError(EdgemoreError):
    """An operation that requires a constraint-satisfying allocation received violations."""

    def __init__(self, violations: tuple["Violation", ...]):
        self.violations = tuple(violations)
        super().__init__(
            "allocation violates constraints: "
            + "; ".join(v.message for v in self.violations)
        )


@dataclass(frozen=True)
class ResourceVector:
    """Per-resource-type quantities: capacities, demands, or usage fractions."""

    amounts: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "amounts", tuple(float(a) for a in self.amounts))
        for a in self.amounts:
            if not math.isfinite(a):
                raise ValueError(f"resource amount must be finite, got {a!r}")
            if a < 0:
                raise ValueError(f"resource amount must be non-negative, got {a!r}")

    @classmethod
    def of(cls, *amounts: float) -> "ResourceVector":
        return cls(tuple(amounts))

    def __len__(self) -> int:
        return len(self.amounts)

    def __iter__(self) -> Iterator[float]:
        return iter(self.amounts)

    def __getitem__(self, index: int) -> float:
        return self.amounts[index]


@dataclass(frozen=True)
class NodeSpec:
    """One edge node; capacities must be strictly positive in every dimension."""

    node_id: int
    capacities: ResourceVector

    def __post_init__(self) -> None:
        if any(c <= 0 for c in self.capacities):
            raise ValueError(
                f"node {self.node_id}: capacities must be strictly positive, got {self.capacities.amounts}"
            )


@dataclass(frozen=True)
class ContainerSpec:
    """The unit of placement: one container and its per-resource demands."""

    container_id: int
    demands: ResourceVector


@dataclass(frozen=True)
class ConfigOption:
    """One way a provider's service can run: a container set plus the utility it yields.

    Utility comes from running all of the option's containers together;
    either every container is placed or the option is not accepted at all.
    """

    option_id: int
    utility: float
    containers: tuple[ContainerSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "utility", float(self.utility))
        object.__setattr__(self, "containers", tuple(self.containers))
        if not 0.0 <= self.utility <= 1.0:
            raise ValueError(f"option {self.option_id}: utility must lie in [0, 1], got {self.utility}")
        if not self.containers:
            raise ValueError(f"option {self.option_id}: container list must be non-empty")


@dataclass(frozen=True)
class ServiceProvider:
    """A tenant and the configuration options it declares (possibly none)."""

    provider_id: int
    options: tuple[ConfigOption, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "options", tuple(self.options))
        seen = set()
        for opt in self.options:
            if opt.option_id in seen:
                raise ValueError(
                    f"provider {self.provider_id}: duplicate option id {opt.option_id}"
                )
            seen.add(opt.option_id)


@dataclass(frozen=True)
class Scenario:
    """A full problem instance: resource types, node fleet, and providers."""

    resource_types: tuple[tuple[str, str], ...]  # (name, unit) per type
    nodes: tuple[NodeSpec, ...]
    providers: tuple[ServiceProvider, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "resource_types", tuple((str(n), str(u)) for n, u in self.resource_types))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "providers", tuple(self.providers))
        L = len(self.resource_types)
        node_ids = set()
        for node in self.nodes:
            if node.node_id in node_ids:
                raise ValueError(f"duplicate node id {node.node_id}")
            node_ids.add(node.node_id)
            if len(node.capacities) != L:
                raise ValueError(
                    f"node {node.node_id}: expected {L} capacity amounts, got {len(node.capacities)}"
                )
        provider_ids = set()
        for provider in self.providers:
            if provider.provider_id in provider_ids:
                raise ValueError(f"duplicate provider id {provider.provider_id}")
            provider_ids.add(provider.provider_id)
            for opt in provider.options:
                for cont in opt.containers:
                    if len(cont.demands) != L:
                        raise ValueError(
                            f"provider {provider.provider_id} option {opt.option_id} "
                            f"container {cont.container_id}: expected {L} demand amounts, "
                            f"got {len(cont.demands)}"
                        )

    @property
    def num_resources(self) -> int:
        return len(self.resource_types)

    def total_capacity(self) -> ResourceVector:
        """Fleet-wide capacity per resource type."""
        return ResourceVector(
            tuple(
                fsum(node.capacities[l] for node in self.nodes)
                for l in range(self.num_resources)
            )
        )

    def provider_by_id(self) -> dict[int, ServiceProvider]:
        return {p.provider_id: p for p in self.providers}

    def node_by_id(self) -> dict[int, NodeSpec]:
        return {n.node_id: n for n in self.nodes}


@dataclass(frozen=True)
class Allocation:
    """A decision: the accepted option per provider and where its containers run.

    ``choices`` maps provider id to the accepted option id; providers absent
    from the map got no option. ``placements`` maps
    (provider id, option id, container id) to the hosting node id and must
    cover exactly the containers of the chosen options.
    """

    choices: Mapping[int, int] = field(default_factory=dict)
    placements: Mapping[tuple[int, int, int], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", dict(self.choices))
        object.__setattr__(self, "placements", dict(self.placements))

    @classmethod
    def empty(cls) -> "Allocation":
        return cls()


# Violation kinds, stable for scripting.
KIND_REFERENCE = "unknown-reference"
KIND_UNPLACED = "container-not-placed"
KIND_SPURIOUS = "placement-for-unchosen-option"
KIND_CAPACITY = "node-capacity-exceeded"


@dataclass(frozen=True)
class Violation:
    """One broken constraint, with the indices and amounts involved."""

    kind: str
    message: str
    provider_id: int | None = None
    option_id: int | None = None
    container_id: int | None = None
    node_id: int | None = None
    resource: str | None = None
    load: float | None = None
    capacity: float | None = None


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(scenario: Scenario, alloc: Allocation) -> ValidationResult:
    """Check an allocation against the three placement rules.

    ok iff (a) every container of every chosen option sits on exactly one
    node, (b) no node's per-resource load exceeds its capacity (within the
    feasibility tolerance), and (c) each provider has at most one chosen
    option. Rule (c) is structural here - ``choices`` keys providers - but
    file inputs are re-checked on load. Violations are returned, never
    raised.
    """
    violations: list[Violation] = []
    providers = scenario.provider_by_id()
    nodes = scenario.node_by_id()

    chosen_options: dict[tuple[int, int], ConfigOption] = {}
    for pid, oid in sorted(alloc.choices.items()):
        provider = providers.get(pid)
        if provider is None:
            violations.append(Violation(
                KIND_REFERENCE,
                f"choice refers to unknown provider {pid}",
                provider_id=pid, option_id=oid,
            ))
            continue
        option = next((o for o in provider.options if o.option_id == oid), None)
        if option is None:
            violations.append(Violation(
                KIND_REFERENCE,
                f"choice for provider {pid} refers to unknown option {oid}",
                provider_id=pid, option_id=oid,
            ))
            continue
        chosen_options[(pid, oid)] = option

    # Loads accumulate only over placements that refer to real, chosen containers.
    loads: dict[int, list[float]] = {n.node_id: [0.0] * scenario.num_resources for n in scenario.nodes}
    placed: set[tuple[int, int, int]] = set()
    for (pid, oid, cid), nid in sorted(alloc.placements.items()):
        option = chosen_options.get((pid, oid))
        if option is None:
            provider = providers.get(pid)
            known_pair = provider is not None and any(o.option_id == oid for o in provider.options)
            if known_pair:
                violations.append(Violation(
                    KIND_SPURIOUS,
                    f"placement for provider {pid} option {oid} container {cid}, "
                    f"but that option was not chosen",
                    provider_id=pid, option_id=oid, container_id=cid, node_id=nid,
                ))
            else:
                violations.append(Violation(
                    KIND_REFERENCE,
                    f"placement refers to unknown provider/option ({pid}, {oid})",
                    provider_id=pid, option_id=oid, container_id=cid, node_id=nid,
                ))
            continue
        container = next((c for c in option.containers if c.container_id == cid), None)
        if container is None:
            violations.append(Violation(
                KIND_REFERENCE,
                f"placement for provider {pid} option {oid} refers to unknown container {cid}",
                provider_id=pid, option_id=oid, container_id=cid, node_id=nid,
            ))
            continue
        if nid not in nodes:
            violations.append(Violation(
                KIND_REFERENCE,
                f"placement of provider {pid} option {oid} container {cid} "
                f"refers to unknown node {nid}",
                provider_id=pid, option_id=oid, container_id=cid, node_id=nid,
            ))
            continue
        placed.add((pid, oid, cid))
        for l in range(scenario.num_resources):
            loads[nid][l] += container.demands[l]

    for (pid, oid), option in chosen_options.items():
        for container in option.containers:
            if (pid, oid, container.container_id) not in placed:
                violations.append(Violation(
                    KIND_UNPLACED,
                    f"provider {pid} option {oid} container {container.container_id} "
                    f"is chosen but not placed on any node",
                    provider_id=pid, option_id=oid, container_id=container.container_id,
                ))

    for node in scenario.nodes:
        for l, (name, _unit) in enumerate(scenario.resource_types):
            load = loads[node.node_id][l]
            cap = node.capacities[l]
            if load > cap + EPS:
                violations.append(Violation(
                    KIND_CAPACITY,
                    f"node {node.node_id}: {name} load {load!r} exceeds capacity {cap!r}",
                    node_id=node.node_id, resource=name, load=load, capacity=cap,
                ))

    return ValidationResult(tuple(violations))


def total_utility(scenario: Scenario, alloc: Allocation) -> float:
    """Sum of the utilities of the chosen options; placements play no role.

    Raises InvalidReferenceError if a choice points at an unknown provider
    or option. Summation order is fixed (scenario declaration order) and
    uses exact float summation, so equal choice sets give bit-equal totals.
    """
    providers = scenario.provider_by_id()
    for pid, oid in alloc.choices.items():
        provider = providers.get(pid)
        if provider is None:
            raise InvalidReferenceError(f"unknown provider id {pid}")
        if not any(o.option_id == oid for o in provider.options):
            raise InvalidReferenceError(f"provider {pid} has no option id {oid}")
    return fsum(
        option.utility
        for provider in scenario.providers
        for option in provider.options
        if alloc.choices.get(provider.provider_id) == option.option_id
    )


def option_demand(option: ConfigOption) -> ResourceVector:
    """Componentwise sum of the option's container demands."""
    L = len(option.containers[0].demands)
    return ResourceVector(
        tuple(fsum(c.demands[l] for c in option.containers) for l in range(L))
    )


def resource_usage(scenario: Scenario, alloc: Allocation) -> ResourceVector:
    """Fraction of fleet-wide capacity consumed by the placed containers, per type.

    Requires a valid allocation (raises InvalidAllocationError otherwise);
    each component therefore lies in [0, 1].
    """
    result = validate(scenario, alloc)
    if not result.ok:
        raise InvalidAllocationError(result.violations)
    providers = scenario.provider_by_id()
    totals = scenario.total_capacity()
    L = scenario.num_resources
    demands: list[list[float]] = [[] for _ in range(L)]
    for (pid, oid, cid), _nid in alloc.placements.items():
        option = next(o for o in providers[pid].options if o.option_id == oid)
        container = next(c for c in option.containers if c.container_id == cid)
        for l in range(L):
            demands[l].append(container.demands[l])
    return ResourceVector(tuple(fsum(demands[l]) / totals[l] for l in range(L)))


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solver run on one scenario."""

    solver_name: str
    objective: float
    utility_pct: float  # objective as a percentage of the maximum (one utility unit per provider)
    usage_fraction: ResourceVector
    runtime_ms: float
    proven_optimal: bool


def build_report(
    scenario: Scenario,
    alloc: Allocation,
    solver_name: str,
    runtime_ms: float,
    proven_optimal: bool,
) -> SolveReport:
    """Assemble a report whose objective/usage are recomputed from the allocation."""
    objective = total_utility(scenario, alloc)
    n = len(scenario.providers)
    utility_pct = 0.0 if n == 0 else objective / n * 100.0
    return SolveReport(
        solver_name=solver_name,
        objective=objective,
        utility_pct=utility_pct,
        usage_fraction=resource_usage(scenario, alloc),
        runtime_ms=max(float(runtime_ms), 0.0),
        proven_optimal=proven_optimal,
    )
