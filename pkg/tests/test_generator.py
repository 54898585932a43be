"""Synthetic workload generation: calibration, determinism, nesting."""

import json

import numpy as np
import pytest

from edgemore.files import scenario_to_dict
from edgemore.generator import (
    GenParams,
    ParameterError,
    PRNG_NAME,
    generate,
    generator_meta,
    mean_demand,
    option_utility,
    total_fleet_capacity,
)


def test_same_params_byte_identical():
    p = GenParams(n_providers=6, n_nodes=3, seed=21)
    s1 = json.dumps(scenario_to_dict(generate(p)), sort_keys=True)
    s2 = json.dumps(scenario_to_dict(generate(p)), sort_keys=True)
    assert s1 == s2


def test_seed_changes_values_not_shapes():
    p1 = GenParams(n_providers=5, n_nodes=2, options_per_provider=3,
                   containers_per_option=2, seed=1)
    p2 = GenParams(n_providers=5, n_nodes=2, options_per_provider=3,
                   containers_per_option=2, seed=2)
    s1, s2 = generate(p1), generate(p2)
    assert len(s1.nodes) == len(s2.nodes) == 2
    assert len(s1.providers) == len(s2.providers) == 5
    for a, b in zip(s1.providers, s2.providers):
        assert len(a.options) == len(b.options) == 3
        for oa, ob in zip(a.options, b.options):
            assert len(oa.containers) == len(ob.containers) == 2
    assert s1 != s2


def test_shapes_and_ranges():
    sc = generate(GenParams(n_providers=4, n_nodes=2, seed=3))
    assert len(sc.resource_types) == 2
    for node in sc.nodes:
        assert all(c > 0 for c in node.capacities)
    for prov in sc.providers:
        for opt in prov.options:
            assert 0.0 <= opt.utility <= 1.0
            for con in opt.containers:
                assert all(d >= 0 for d in con.demands)


def test_mean_demand_formula():
    # Load K spread over Z containers per option across N providers:
    # K * c_tot / (Z * N) per resource type.
    p = GenParams()  # N=50, M=8, Z=8, K=1.8, caps (16, 32)
    w = mean_demand(p)
    assert w[0] == pytest.approx(1.8 * 8 * 16.0 / (8 * 50))
    assert w[1] == pytest.approx(1.8 * 8 * 32.0 / (8 * 50))
    assert w[0] == pytest.approx(0.576)
    assert w[1] == pytest.approx(1.152)


def test_total_fleet_capacity():
    p = GenParams(n_nodes=3, node_capacity=(4.0, 8.0))
    assert total_fleet_capacity(p) == pytest.approx((12.0, 24.0))


def test_demand_calibration_quick():
    # Small-sample version of the calibration check; the full-scale run
    # lives in the acceptance suite.
    p = GenParams(n_providers=40, seed=77)
    w = mean_demand(p)
    demands = []
    sc = generate(p)
    for prov in sc.providers:
        for opt in prov.options:
            for con in opt.containers:
                demands.append(con.demands)
    arr = np.array(demands)
    assert arr.shape[0] == 40 * 5 * 8
    assert abs(arr[:, 0].mean() - w[0]) / w[0] < 0.03
    assert abs(arr[:, 1].mean() - w[1]) / w[1] < 0.03
    # Uniform(0.5 w, 1.5 w) support.
    assert arr[:, 0].min() >= 0.5 * w[0] - 1e-12
    assert arr[:, 0].max() <= 1.5 * w[0] + 1e-12


def test_prefix_extension_in_options():
    # Growing J appends options; existing providers, nodes, and earlier
    # options are bit-identical.
    base = dict(n_providers=4, n_nodes=2, containers_per_option=3, seed=55)
    s2 = generate(GenParams(options_per_provider=2, **base))
    s3 = generate(GenParams(options_per_provider=3, **base))
    assert s3.nodes == s2.nodes
    for p2, p3 in zip(s2.providers, s3.providers):
        assert p3.options[: len(p2.options)] == p2.options
        assert len(p3.options) == len(p2.options) + 1


def test_provider_streams_stable_under_n():
    # Growing N rescales the calibrated mean demand (it divides by N) but
    # must not perturb the first providers' underlying draws: demands in
    # mean-demand units and utilities' option ids stay aligned.
    base = dict(n_nodes=2, options_per_provider=2, seed=56)
    p3 = GenParams(n_providers=3, **base)
    p5 = GenParams(n_providers=5, **base)
    s3, s5 = generate(p3), generate(p5)
    w3, w5 = mean_demand(p3), mean_demand(p5)
    assert s5.nodes == s3.nodes
    for prov3, prov5 in zip(s3.providers, s5.providers[:3]):
        for o3, o5 in zip(prov3.options, prov5.options):
            for c3, c5 in zip(o3.containers, o5.containers):
                for l in range(2):
                    assert c3.demands[l] / w3[l] == pytest.approx(
                        c5.demands[l] / w5[l], rel=1e-12
                    )


def test_utility_monotone_and_concave():
    totals = (128.0, 256.0)
    alpha, beta_cpu, beta_ram = 0.4, 2.0, 3.0
    grid = np.linspace(0.0, totals[0], 40)
    for ram in (10.0, 100.0):
        values = [
            option_utility((cpu, ram), totals, alpha, beta_cpu, beta_ram)
            for cpu in grid
        ]
        diffs = np.diff(values)
        assert (diffs >= -1e-12).all()
        second = np.diff(diffs)
        assert (second <= 1e-9).all()
    for u in values:
        assert 0.0 <= u <= 1.0


def test_utility_clamped_at_one():
    totals = (10.0, 10.0)
    u = option_utility((50.0, 50.0), totals, 0.5, 2.0, 2.0)
    assert u == 1.0


def test_utility_beta_one_is_linear_ratio():
    totals = (10.0, 20.0)
    u = option_utility((5.0, 5.0), totals, 1.0, 1.0, 1.0)
    assert u == pytest.approx(0.5)
    u2 = option_utility((5.0, 5.0), totals, 0.0, 1.0, 1.0)
    assert u2 == pytest.approx(0.25)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        generate(GenParams(n_providers=0))
    with pytest.raises(ParameterError):
        generate(GenParams(n_nodes=0))
    with pytest.raises(ParameterError):
        generate(GenParams(options_per_provider=0))
    with pytest.raises(ParameterError):
        generate(GenParams(containers_per_option=0))
    with pytest.raises(ParameterError):
        generate(GenParams(load_factor=0.0))
    with pytest.raises(ParameterError):
        generate(GenParams(load_factor=-1.0))
    with pytest.raises(ParameterError):
        generate(GenParams(demand_spread=1.5))
    with pytest.raises(ParameterError):
        generate(GenParams(node_capacity=(0.0, 1.0)))


def test_meta_records_prng():
    meta = generator_meta(GenParams(seed=9))
    assert meta["prng"] == PRNG_NAME
    assert meta["params"]["seed"] == 9
