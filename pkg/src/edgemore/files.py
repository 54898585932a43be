"""Versioned JSON file formats for scenarios, allocations, and solve reports.

Numbers are written with full double precision (shortest round-trip repr),
so write-then-read is the identity on the data model and identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json
from typing import Any

from .model import (
    Allocation,
    ConfigOption,
    ContainerSpec,
    EdgemoreError,
    NodeSpec,
    ResourceVector,
    Scenario,
    ServiceProvider,
    SolveReport,
)

SCENARIO_FORMAT_VERSION = 1


class SchemaError(EdgemoreError):
    """A file exists and parses but does not match the documented schema."""


def _require(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _number_list(value: Any, where: str) -> list[float]:
    if not isinstance(value, list) or not all(isinstance(x, (int, float)) for x in value):
        raise SchemaError(f"{where}: expected an array of numbers")
    return [float(x) for x in value]


def _int_field(obj: Any, key: str, where: str) -> int:
    value = _require(obj, key, where)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}.{key}: expected an integer, got {value!r}")
    return value


def scenario_to_dict(scenario: Scenario, generator_meta: dict | None = None) -> dict:
    doc: dict[str, Any] = {
        "version": SCENARIO_FORMAT_VERSION,
        "resource_types": [{"name": n, "unit": u} for n, u in scenario.resource_types],
        "nodes": [
            {"id": node.node_id, "capacities": list(node.capacities)}
            for node in scenario.nodes
        ],
        "providers": [
            {
                "id": p.provider_id,
                "options": [
                    {
                        "id": o.option_id,
                        "utility": o.utility,
                        "containers": [
                            {"id": c.container_id, "demands": list(c.demands)}
                            for c in o.containers
                        ],
                    }
                    for o in p.options
                ],
            }
            for p in scenario.providers
        ],
    }
    if generator_meta is not None:
        doc["generator"] = generator_meta
    return doc


def scenario_from_dict(doc: Any) -> Scenario:
    version = _require(doc, "version", "scenario")
    if version != SCENARIO_FORMAT_VERSION:
        raise SchemaError(f"scenario.version: unsupported version {version!r}")

    raw_types = _require(doc, "resource_types", "scenario")
    if not isinstance(raw_types, list) or not raw_types:
        raise SchemaError("scenario.resource_types: expected a non-empty array")
    resource_types = []
    for i, rt in enumerate(raw_types):
        name = _require(rt, "name", f"resource_types[{i}]")
        unit = _require(rt, "unit", f"resource_types[{i}]")
        resource_types.append((str(name), str(unit)))
    L = len(resource_types)

    raw_nodes = _require(doc, "nodes", "scenario")
    if not isinstance(raw_nodes, list):
        raise SchemaError("scenario.nodes: expected an array")
    nodes = []
    for i, rn in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        nid = _int_field(rn, "id", where)
        caps = _number_list(_require(rn, "capacities", where), f"{where}.capacities")
        if len(caps) != L:
            raise SchemaError(
                f"{where}.capacities: expected {L} amounts, got {len(caps)} (node id {nid})"
            )
        try:
            nodes.append(NodeSpec(nid, ResourceVector(tuple(caps))))
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc

    raw_providers = _require(doc, "providers", "scenario")
    if not isinstance(raw_providers, list):
        raise SchemaError("scenario.providers: expected an array")
    providers = []
    for i, rp in enumerate(raw_providers):
        pwhere = f"providers[{i}]"
        pid = _int_field(rp, "id", pwhere)
        raw_options = _require(rp, "options", pwhere)
        if not isinstance(raw_options, list):
            raise SchemaError(f"{pwhere}.options: expected an array")
        options = []
        for j, ro in enumerate(raw_options):
            owhere = f"{pwhere}.options[{j}]"
            oid = _int_field(ro, "id", owhere)
            utility = _require(ro, "utility", owhere)
            if isinstance(utility, bool) or not isinstance(utility, (int, float)):
                raise SchemaError(f"{owhere}.utility: expected a number, got {utility!r}")
            raw_containers = _require(ro, "containers", owhere)
            if not isinstance(raw_containers, list):
                raise SchemaError(f"{owhere}.containers: expected an array")
            containers = []
            for k, rc in enumerate(raw_containers):
                cwhere = f"{owhere}.containers[{k}]"
                cid = _int_field(rc, "id", cwhere)
                demands = _number_list(_require(rc, "demands", cwhere), f"{cwhere}.demands")
                if len(demands) != L:
                    raise SchemaError(
                        f"{cwhere}.demands: expected {L} amounts, got {len(demands)} "
                        f"(container id {cid})"
                    )
                try:
                    containers.append(ContainerSpec(cid, ResourceVector(tuple(demands))))
                except ValueError as exc:
                    raise SchemaError(f"{cwhere}: {exc}") from exc
            try:
                options.append(ConfigOption(oid, float(utility), tuple(containers)))
            except ValueError as exc:
                raise SchemaError(f"{owhere}: {exc}") from exc
        try:
            providers.append(ServiceProvider(pid, tuple(options)))
        except ValueError as exc:
            raise SchemaError(f"{pwhere}: {exc}") from exc

    try:
        return Scenario(tuple(resource_types), tuple(nodes), tuple(providers))
    except ValueError as exc:
        raise SchemaError(f"scenario: {exc}") from exc


def write_scenario(scenario: Scenario, path: str, generator_meta: dict | None = None) -> None:
    _dump_json(scenario_to_dict(scenario, generator_meta), path)


def read_scenario(path: str) -> Scenario:
    return scenario_from_dict(_load_json(path, "scenario"))


def allocation_to_dict(alloc: Allocation) -> dict:
    return {
        "choices": [
            {"provider": pid, "option": oid}
            for pid, oid in sorted(alloc.choices.items())
        ],
        "placements": [
            {"provider": pid, "option": oid, "container": cid, "node": nid}
            for (pid, oid, cid), nid in sorted(alloc.placements.items())
        ],
    }


def allocation_from_dict(doc: Any) -> Allocation:
    raw_choices = _require(doc, "choices", "allocation")
    if not isinstance(raw_choices, list):
        raise SchemaError("allocation.choices: expected an array")
    choices: dict[int, int] = {}
    for i, rc in enumerate(raw_choices):
        where = f"choices[{i}]"
        pid = _int_field(rc, "provider", where)
        oid = _int_field(rc, "option", where)
        if pid in choices:
            raise SchemaError(f"{where}: duplicate choice for provider {pid}")
        choices[pid] = oid

    raw_placements = _require(doc, "placements", "allocation")
    if not isinstance(raw_placements, list):
        raise SchemaError("allocation.placements: expected an array")
    placements: dict[tuple[int, int, int], int] = {}
    for i, rp in enumerate(raw_placements):
        where = f"placements[{i}]"
        key = (
            _int_field(rp, "provider", where),
            _int_field(rp, "option", where),
            _int_field(rp, "container", where),
        )
        if key in placements:
            raise SchemaError(f"{where}: duplicate placement for container {key}")
        placements[key] = _int_field(rp, "node", where)

    return Allocation(choices, placements)


def write_allocation(alloc: Allocation, path: str) -> None:
    _dump_json(allocation_to_dict(alloc), path)


def read_allocation(path: str) -> Allocation:
    return allocation_from_dict(_load_json(path, "allocation"))


def report_to_dict(report: SolveReport) -> dict:
    return {
        "solver_name": report.solver_name,
        "objective": report.objective,
        "utility_pct": report.utility_pct,
        "usage_fraction": list(report.usage_fraction),
        "runtime_ms": report.runtime_ms,
        "proven_optimal": report.proven_optimal,
    }


def write_report(report: SolveReport, path: str) -> None:
    _dump_json(report_to_dict(report), path)


def _dump_json(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _load_json(path: str, what: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{what} file {path}: line {exc.lineno}: {exc.msg}") from exc
