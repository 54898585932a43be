"""Command-line interface: exit codes, outputs, determinism."""

import json

from edgemore.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from edgemore.files import read_allocation, read_scenario, write_allocation
from edgemore.model import Allocation


GEN_ARGS = [
    "generate",
    "--providers", "4",
    "--nodes", "2",
    "--options", "2",
    "--containers", "2",
    "--seed", "5",
]


def gen(tmp_path, name="s.json", extra=()):
    path = tmp_path / name
    rc = main(GEN_ARGS + list(extra) + ["--out", str(path)])
    return rc, path


def test_generate_writes_scenario(tmp_path, capsys):
    rc, path = gen(tmp_path)
    assert rc == EXIT_OK
    sc = read_scenario(str(path))
    assert len(sc.providers) == 4
    assert "4 providers" in capsys.readouterr().out


def test_generate_rejects_zero_providers(tmp_path, capsys):
    rc = main(["generate", "--providers", "0", "--out", str(tmp_path / "x.json")])
    assert rc == EXIT_USAGE
    assert not (tmp_path / "x.json").exists()
    assert capsys.readouterr().err != ""


def test_generate_unwritable_path_is_io_error(tmp_path):
    rc = main(GEN_ARGS + ["--out", str(tmp_path / "nodir" / "x.json")])
    assert rc == EXIT_IO


def test_solve_and_validate_flow(tmp_path):
    _, spath = gen(tmp_path)
    apath = tmp_path / "a.json"
    rpath = tmp_path / "r.json"
    rc = main([
        "solve", "--scenario", str(spath), "--solver", "exact",
        "--out-allocation", str(apath), "--out-report", str(rpath),
    ])
    assert rc == EXIT_OK
    report = json.loads(rpath.read_text())
    assert report["solver_name"] == "exact"
    assert report["proven_optimal"] is True

    rc = main(["validate", "--scenario", str(spath), "--allocation", str(apath)])
    assert rc == EXIT_OK


def test_solve_all_solvers(tmp_path):
    _, spath = gen(tmp_path)
    objectives = {}
    for solver in ("exact", "greedy", "naive"):
        rpath = tmp_path / f"{solver}.json"
        rc = main([
            "solve", "--scenario", str(spath), "--solver", solver,
            "--seed", "3", "--out-report", str(rpath),
        ])
        assert rc == EXIT_OK
        objectives[solver] = json.loads(rpath.read_text())["objective"]
    assert objectives["exact"] >= objectives["greedy"] - 1e-9
    assert objectives["exact"] >= objectives["naive"] - 1e-9


def test_validate_rejects_bad_allocation(tmp_path, capsys):
    _, spath = gen(tmp_path)
    apath = tmp_path / "bad.json"
    # A choice with no placements violates the placement-shape rule.
    write_allocation(Allocation(choices={1: 1}, placements={}), str(apath))
    rc = main(["validate", "--scenario", str(spath), "--allocation", str(apath)])
    assert rc == EXIT_INVALID
    out = capsys.readouterr().out
    assert "container-not-placed" in out


def test_missing_scenario_is_io_error(tmp_path):
    rc = main([
        "solve", "--scenario", str(tmp_path / "absent.json"),
        "--solver", "greedy",
    ])
    assert rc == EXIT_IO


def test_malformed_scenario_is_io_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    rc = main(["solve", "--scenario", str(bad), "--solver", "greedy"])
    assert rc == EXIT_IO


def test_unknown_solver_is_usage_error(tmp_path):
    _, spath = gen(tmp_path)
    rc = main(["solve", "--scenario", str(spath), "--solver", "magic"])
    assert rc == EXIT_USAGE


def test_env_seed_default(tmp_path, monkeypatch):
    monkeypatch.setenv("EDGEMORE_SEED", "123")
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    assert main(["generate", "--providers", "3", "--out", str(p1)]) == EXIT_OK
    assert main(["generate", "--providers", "3", "--out", str(p2)]) == EXIT_OK
    assert p1.read_text() == p2.read_text()
    meta = json.loads(p1.read_text())["generator"]
    assert meta["params"]["seed"] == 123
    # An explicit flag wins over the environment.
    p3 = tmp_path / "c.json"
    assert main([
        "generate", "--providers", "3", "--seed", "7", "--out", str(p3)
    ]) == EXIT_OK
    assert json.loads(p3.read_text())["generator"]["params"]["seed"] == 7


def test_quiet_suppresses_summary(tmp_path, capsys):
    rc, path = gen(tmp_path, extra=())
    capsys.readouterr()
    rc = main(["--quiet"] + GEN_ARGS + ["--out", str(path)])
    assert rc == EXIT_OK
    assert capsys.readouterr().out == ""
    assert path.exists()


def test_generate_determinism_bytes(tmp_path):
    _, p1 = gen(tmp_path, "one.json")
    _, p2 = gen(tmp_path, "two.json")
    assert p1.read_bytes() == p2.read_bytes()


def test_solve_determinism_bytes(tmp_path):
    _, spath = gen(tmp_path)
    outs = []
    for name in ("a1.json", "a2.json"):
        apath = tmp_path / name
        rc = main([
            "--quiet", "solve", "--scenario", str(spath),
            "--solver", "exact", "--out-allocation", str(apath),
        ])
        assert rc == EXIT_OK
        outs.append(apath.read_bytes())
    assert outs[0] == outs[1]


def test_sweep_small_and_deterministic(tmp_path):
    csvs = []
    for name in ("s1.csv", "s2.csv"):
        out = tmp_path / name
        rc = main([
            "--quiet", "sweep", "--figure", "fig3", "--runs", "2",
            "--base-seed", "4", "--solvers", "exact,naive",
            "--out", str(out),
        ])
        assert rc == EXIT_OK
        csvs.append(out.read_text())

    def strip_runtime(text):
        rows = []
        for i, line in enumerate(text.splitlines()):
            if i < 2:
                rows.append(line)
                continue
            cols = line.split(",")
            cols[8] = ""
            rows.append(",".join(cols))
        return rows

    assert strip_runtime(csvs[0]) == strip_runtime(csvs[1])
    header = csvs[0].splitlines()[1]
    assert header.split(",")[0] == "sweep_kind"


def test_sweep_rejects_unknown_solver(tmp_path):
    rc = main([
        "sweep", "--figure", "fig3", "--solvers", "exact,magic",
        "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == EXIT_USAGE


def test_version_flag(capsys):
    assert main(["--version"]) == EXIT_OK
    assert capsys.readouterr().out.strip().startswith("edgemore ")


def test_no_command_is_usage_error(capsys):
    rc = main([])
    assert rc == EXIT_USAGE
