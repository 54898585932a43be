"""Branch-and-bound solver and brute-force enumeration."""

import dataclasses

import pytest

from edgemore.exact import (
    InstanceTooLargeError,
    SolveLimits,
    brute_force,
    enumeration_size,
    solve_exact,
)
from edgemore.generator import GenParams, generate
from edgemore.heuristics import solve_greedy, solve_naive
from edgemore.model import validate

from conftest import T1_OPTIMUM, T1_WIDE_OPTIMUM, tiny_params


@pytest.mark.parametrize("tight", [True, False])
def test_known_optimum(t1, tight):
    alloc, report = solve_exact(t1, use_tight_bound=tight)
    assert report.objective == pytest.approx(T1_OPTIMUM, abs=1e-12)
    assert report.proven_optimal
    assert validate(t1, alloc).ok
    assert alloc.choices == {1: 2, 2: 1}


@pytest.mark.parametrize("tight", [True, False])
def test_known_optimum_wide(t1_wide, tight):
    alloc, report = solve_exact(t1_wide, use_tight_bound=tight)
    assert report.objective == pytest.approx(T1_WIDE_OPTIMUM, abs=1e-12)
    assert report.proven_optimal
    assert alloc.choices == {1: 1, 2: 1}


def test_brute_force_known_optimum(t1):
    _, report = brute_force(t1)
    assert report.objective == pytest.approx(T1_OPTIMUM, abs=1e-12)
    assert report.proven_optimal


def test_oracle_equivalence_sample():
    for i in range(60):
        sc = generate(tiny_params(i))
        _, ref = brute_force(sc)
        for tight in (True, False):
            alloc, rep = solve_exact(sc, use_tight_bound=tight)
            assert rep.objective == pytest.approx(ref.objective, abs=1e-9), (
                f"instance {i}, tight={tight}"
            )
            assert rep.proven_optimal
            assert validate(sc, alloc).ok


def test_option_monotonicity():
    # Appending options never hurts: the J+1 scenario extends the J one
    # under the generator's per-option seed streams.
    for seed in range(8):
        prev = None
        for n_options in range(1, 5):
            sc = generate(
                GenParams(
                    n_providers=4,
                    n_nodes=2,
                    options_per_provider=n_options,
                    containers_per_option=2,
                    seed=200_000 + seed,
                )
            )
            _, rep = solve_exact(sc)
            assert rep.proven_optimal
            if prev is not None:
                assert rep.objective >= prev - 1e-9
            prev = rep.objective


def test_capacity_monotonicity():
    for i in range(10):
        sc = generate(tiny_params(i))
        _, rep1 = solve_exact(sc)
        grown = dataclasses.replace(
            sc,
            nodes=tuple(
                dataclasses.replace(
                    n, capacities=tuple(1.5 * c for c in n.capacities)
                )
                for n in sc.nodes
            ),
        )
        _, rep2 = solve_exact(grown)
        assert rep2.objective >= rep1.objective - 1e-9


def test_dominates_heuristics():
    for i in range(30):
        sc = generate(tiny_params(i))
        _, exact_rep = solve_exact(sc)
        assert exact_rep.proven_optimal
        _, greedy_rep = solve_greedy(sc)
        _, naive_rep = solve_naive(sc, seed=i)
        assert exact_rep.objective >= greedy_rep.objective - 1e-9
        assert exact_rep.objective >= naive_rep.objective - 1e-9


def test_timeout_returns_incumbent():
    from edgemore.harness import mix_seed

    # A node-heavy tight instance that needs tens of seconds unlimited.
    sc = generate(
        GenParams(
            n_providers=12,
            n_nodes=8,
            options_per_provider=5,
            containers_per_option=4,
            load_factor=1.8,
            seed=mix_seed(0, 8, 2),
        )
    )
    alloc, rep = solve_exact(sc, SolveLimits(time_limit_ms=150))
    assert not rep.proven_optimal
    assert rep.objective >= 0.0
    assert validate(sc, alloc).ok
    # The warm start guarantees at least the greedy objective.
    _, greedy_rep = solve_greedy(sc)
    assert rep.objective >= greedy_rep.objective - 1e-9


def test_node_budget_returns_incumbent():
    sc = generate(
        GenParams(
            n_providers=10,
            n_nodes=3,
            options_per_provider=5,
            containers_per_option=4,
            load_factor=1.8,
            seed=32,
        )
    )
    alloc, rep = solve_exact(sc, SolveLimits(node_budget=10))
    assert validate(sc, alloc).ok
    assert rep.objective >= 0.0


def test_unlimited_solve_is_proven():
    sc = generate(tiny_params(3))
    _, rep = solve_exact(sc)
    assert rep.proven_optimal


def test_brute_force_leaf_guard():
    sc = generate(
        GenParams(
            n_providers=12,
            n_nodes=4,
            options_per_provider=5,
            containers_per_option=4,
            seed=1,
        )
    )
    assert enumeration_size(sc) > 10_000_000
    with pytest.raises(InstanceTooLargeError):
        brute_force(sc)


def test_report_metadata(t1):
    _, rep = solve_exact(t1)
    assert rep.solver_name == "exact"
    assert rep.runtime_ms >= 0.0
    assert rep.utility_pct == pytest.approx(100.0 * T1_OPTIMUM / 2)


def test_all_options_infeasible():
    from conftest import build_scenario

    sc = build_scenario(
        [(1.0, 1.0)],
        [[(0.9, [(5.0, 5.0)])], [(0.8, [(2.0, 2.0)])]],
    )
    alloc, rep = solve_exact(sc)
    assert rep.objective == 0.0
    assert rep.proven_optimal
    assert alloc.choices == {}
    _, bf = brute_force(sc)
    assert bf.objective == 0.0


def test_selection_needs_split_across_nodes():
    from conftest import build_scenario

    # Two containers of 6 CPU each cannot share one 10-CPU node, but two
    # nodes take one each; a solver that never splits options misses it.
    sc = build_scenario(
        [(10.0, 10.0), (10.0, 10.0)],
        [[(1.0, [(6.0, 1.0), (6.0, 1.0)])]],
    )
    alloc, rep = solve_exact(sc)
    assert rep.objective == pytest.approx(1.0)
    nodes_used = set(alloc.placements.values())
    assert len(nodes_used) == 2
