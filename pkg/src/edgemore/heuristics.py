"""Fast baseline solvers: a seeded random baseline and a utility-density greedy.

Both return allocations that satisfy the placement rules by construction
(options are committed all-or-nothing and capacity is checked before every
placement), and both are deterministic given their inputs.
"""

from __future__ import annotations

import time

import numpy as np

from .model import (
    Allocation,
    ConfigOption,
    ResourceVector,
    Scenario,
    SolveReport,
    EPS,
    build_report,
    option_demand,
)


def solve_naive(scenario: Scenario, seed: int) -> tuple[Allocation, SolveReport]:
    """Random baseline: random option per provider, random feasible node per container.

    Providers are visited in a seeded random permutation. For each, one
    option is drawn uniformly (before any feasibility filtering); its
    containers are then placed one by one on a node drawn uniformly among
    the nodes with enough residual capacity. If any container cannot be
    placed the whole provider is rolled back and ends up with no option.
    """
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(seed))
    L = scenario.num_resources
    residual = [list(node.capacities) for node in scenario.nodes]

    choices: dict[int, int] = {}
    placements: dict[tuple[int, int, int], int] = {}
    order = rng.permutation(len(scenario.providers))
    for idx in order:
        provider = scenario.providers[int(idx)]
        if not provider.options:
            continue
        option = provider.options[int(rng.integers(len(provider.options)))]
        committed: list[tuple[int, ResourceVector]] = []
        ok = True
        for container in option.containers:
            feasible = [
                m
                for m in range(len(scenario.nodes))
                if all(residual[m][l] + EPS >= container.demands[l] for l in range(L))
            ]
            if not feasible:
                ok = False
                break
            m = feasible[int(rng.integers(len(feasible)))]
            for l in range(L):
                residual[m][l] -= container.demands[l]
            committed.append((m, container.demands))
            placements[(provider.provider_id, option.option_id, container.container_id)] = (
                scenario.nodes[m].node_id
            )
        if ok:
            choices[provider.provider_id] = option.option_id
        else:
            for m, demands in committed:
                for l in range(L):
                    residual[m][l] += demands[l]
            for container in option.containers:
                placements.pop(
                    (provider.provider_id, option.option_id, container.container_id), None
                )

    alloc = Allocation(choices, placements)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return alloc, build_report(scenario, alloc, "naive", runtime_ms, proven_optimal=False)


def utility_density(option: ConfigOption, totals: ResourceVector) -> float:
    """Utility per unit of mean normalized demand; infinite for free options."""
    demand = option_demand(option)
    L = len(totals)
    norm = sum(demand[l] / totals[l] for l in range(L)) / L
    if norm == 0.0:
        return float("inf")
    return option.utility / norm


def solve_greedy(scenario: Scenario) -> tuple[Allocation, SolveReport]:
    """Accept (provider, option) candidates in descending utility-density order.

    A candidate is accepted if its provider is still unassigned and all of
    its containers fit under best-fit placement: each container goes to the
    feasible node left with the least slack in its tightest dimension
    (ties to the lowest node index). Candidate ties break on ascending
    provider id then option id.
    """
    t0 = time.perf_counter()
    L = scenario.num_resources
    totals = scenario.total_capacity()
    residual = [list(node.capacities) for node in scenario.nodes]

    candidates = sorted(
        (
            (-utility_density(option, totals), provider.provider_id, option.option_id, provider, option)
            for provider in scenario.providers
            for option in provider.options
        ),
        key=lambda item: item[:3],
    )

    choices: dict[int, int] = {}
    placements: dict[tuple[int, int, int], int] = {}
    for _neg_density, pid, oid, provider, option in candidates:
        if pid in choices:
            continue
        # Largest containers first; all-or-nothing commit.
        ordered = sorted(
            option.containers,
            key=lambda c: (-max(c.demands), c.container_id),
        )
        committed: list[tuple[int, ResourceVector]] = []
        placed: dict[tuple[int, int, int], int] = {}
        ok = True
        for container in ordered:
            best_m = -1
            best_slack = float("inf")
            for m in range(len(scenario.nodes)):
                if all(residual[m][l] + EPS >= container.demands[l] for l in range(L)):
                    slack = min(residual[m][l] - container.demands[l] for l in range(L))
                    if slack < best_slack:
                        best_slack = slack
                        best_m = m
            if best_m < 0:
                ok = False
                break
            for l in range(L):
                residual[best_m][l] -= container.demands[l]
            committed.append((best_m, container.demands))
            placed[(pid, oid, container.container_id)] = scenario.nodes[best_m].node_id
        if ok:
            choices[pid] = oid
            placements.update(placed)
        else:
            for m, demands in committed:
                for l in range(L):
                    residual[m][l] += demands[l]

    alloc = Allocation(choices, placements)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return alloc, build_report(scenario, alloc, "greedy", runtime_ms, proven_optimal=False)
