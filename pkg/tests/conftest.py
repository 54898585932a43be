"""Shared fixtures: small hand-checked scenarios used across the suite."""

import pytest

from edgemore.model import (
    Allocation,
    ConfigOption,
    ContainerSpec,
    NodeSpec,
    Scenario,
    ServiceProvider,
)

RESOURCE_TYPES = (("cpu", "core-time"), ("ram", "GB"))


def build_scenario(node_caps, providers):
    """Assemble a scenario from plain tuples.

    ``node_caps`` is a list of capacity vectors; ``providers`` maps each
    provider to a list of options, each option a (utility, [demand, ...])
    pair. Ids are assigned 1-based in declaration order.
    """
    nodes = tuple(
        NodeSpec(node_id=m + 1, capacities=tuple(cap))
        for m, cap in enumerate(node_caps)
    )
    provs = []
    for i, options in enumerate(providers):
        opts = []
        for j, (utility, demands) in enumerate(options):
            containers = tuple(
                ContainerSpec(container_id=z + 1, demands=tuple(dem))
                for z, dem in enumerate(demands)
            )
            opts.append(
                ConfigOption(option_id=j + 1, utility=utility, containers=containers)
            )
        provs.append(ServiceProvider(provider_id=i + 1, options=tuple(opts)))
    return Scenario(
        resource_types=RESOURCE_TYPES, nodes=nodes, providers=tuple(provs)
    )


# One node (10, 10). Provider 1 declares a big option (6, 4)/0.8 and a
# small one (3, 2)/0.5; provider 2 declares (5, 5)/0.7. Both big options
# together need 11 CPU, so the optimum is small + provider 2: 0.5 + 0.7.
T1_OPTIMUM = 1.2
# With capacity (20, 20) everything fits: 0.8 + 0.7.
T1_WIDE_OPTIMUM = 1.5


@pytest.fixture
def t1():
    return build_scenario(
        [(10.0, 10.0)],
        [
            [
                (0.8, [(4.0, 2.0), (2.0, 2.0)]),
                (0.5, [(3.0, 2.0)]),
            ],
            [
                (0.7, [(2.0, 3.0), (3.0, 2.0)]),
            ],
        ],
    )


@pytest.fixture
def t1_wide():
    return build_scenario(
        [(20.0, 20.0)],
        [
            [
                (0.8, [(4.0, 2.0), (2.0, 2.0)]),
                (0.5, [(3.0, 2.0)]),
            ],
            [
                (0.7, [(2.0, 3.0), (3.0, 2.0)]),
            ],
        ],
    )


@pytest.fixture
def t1_best(t1):
    """The unique optimal allocation of t1, written out by hand."""
    return Allocation(
        choices={1: 2, 2: 1},
        placements={
            (1, 2, 1): 1,
            (2, 1, 1): 1,
            (2, 1, 2): 1,
        },
    )


def tiny_params(i):
    """Deterministic small-instance generator parameters, varied by i."""
    from edgemore.generator import GenParams

    return GenParams(
        n_providers=(i % 4) + 1,
        n_nodes=(i % 2) + 1,
        options_per_provider=(i % 3) + 1,
        containers_per_option=(i % 2) + 1,
        load_factor=1.2 + 0.2 * (i % 4),
        seed=100_000 + i,
    )
