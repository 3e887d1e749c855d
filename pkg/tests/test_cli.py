import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "fomlab.cli"]


def run_cli(*args, env_extra=None):
    import os

    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        CLI + list(args), capture_output=True, text=True, env=env
    )


@pytest.fixture(scope="module")
def instance_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("inst") / "inst.json"
    res = run_cli(
        "generate", "random", "--n", "8", "--p", "0.5", "--seed", "4",
        "--bipartite", "--out", str(path),
    )
    assert res.returncode == 0, res.stderr
    return path


def test_generate_families(tmp_path):
    for args in (
        ["random", "--n", "6", "--p", "0.7", "--seed", "1"],
        ["one-sided", "--n", "4", "--p", "0.5", "--seed", "2"],
        ["adversary-tree", "--k", "2", "--h", "2", "--seed", "3"],
        ["ranking-hard", "--k", "2", "--h", "3"],
    ):
        res = run_cli("generate", *args)
        assert res.returncode == 0, res.stderr
        data = json.loads(res.stdout)
        assert set(data) == {"n", "events", "edges", "bipartition"}


def test_generate_bad_params():
    res = run_cli("generate", "adversary-tree", "--k", "0", "--h", "2")
    assert res.returncode == 2
    assert "error" in res.stderr.lower()


def test_run_ranking_and_greedy(instance_file):
    res = run_cli("run", "--instance", str(instance_file), "--seed", "7", "--trace")
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["algorithm"] == "ranking"
    assert len(data["trace"]) == data["n"]
    res2 = run_cli("run", "--instance", str(instance_file), "--alg", "greedy")
    assert res2.returncode == 0
    assert json.loads(res2.stdout)["algorithm"] == "greedy"


def test_run_missing_instance_exits_2():
    res = run_cli("run", "--instance", "missing.json")
    assert res.returncode == 2


def test_unknown_subcommand_exits_2():
    assert run_cli("frobnicate").returncode == 2


def test_ratio_requires_exactly_one_source(instance_file):
    assert run_cli("ratio", "--trials", "5").returncode == 2
    res = run_cli(
        "ratio", "--instance", str(instance_file),
        "--family", "ranking-hard", "--trials", "5",
    )
    assert res.returncode == 2


def test_ratio_on_instance(instance_file):
    res = run_cli(
        "ratio", "--instance", str(instance_file), "--trials", "200", "--seed", "1"
    )
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert 0.5 <= data["mean"] <= 1.0
    assert data["trials"] == 200


def test_ratio_on_family():
    res = run_cli(
        "ratio", "--family", "ranking-hard", "--k", "5", "--h", "4",
        "--trials", "100", "--seed", "2",
    )
    assert res.returncode == 0
    assert 0.5 <= json.loads(res.stdout)["mean"] <= 1.0


def test_verify_duals_pass(instance_file):
    res = run_cli(
        "verify-duals", "--instance", str(instance_file), "--charging", "exp",
        "--target", "0.5541", "--trials", "5000", "--seed", "3",
    )
    assert res.returncode == 0, res.stdout
    data = json.loads(res.stdout)
    assert data["summary"]["pass"] is True
    assert data["summary"]["cond1_violations"] == 0


def test_verify_duals_failure_exit_code(instance_file):
    res = run_cli(
        "verify-duals", "--instance", str(instance_file), "--charging", "exp",
        "--target", "0.999", "--trials", "2000", "--seed", "3",
    )
    assert res.returncode == 1
    assert json.loads(res.stdout)["summary"]["pass"] is False


def test_verify_duals_csv_columns(instance_file):
    res = run_cli(
        "verify-duals", "--instance", str(instance_file), "--charging", "piecewise",
        "--target", "0.5211", "--trials", "2000", "--seed", "5",
        "--format", "csv",
    )
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "u,v,mean,stderr,trials"
    assert len(lines) > 1


def test_verify_duals_empty_edges_header_only(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(json.dumps({
        "n": 2,
        "events": [
            {"kind": "arrival", "v": 0}, {"kind": "arrival", "v": 1},
            {"kind": "deadline", "v": 0}, {"kind": "deadline", "v": 1},
        ],
        "edges": [],
        "bipartition": None,
    }))
    res = run_cli(
        "verify-duals", "--instance", str(path), "--charging", "exp",
        "--target", "0.5", "--trials", "100", "--seed", "0", "--format", "csv",
    )
    assert res.returncode == 0
    assert res.stdout.strip() == "u,v,mean,stderr,trials"


def test_check_charging_piecewise():
    res = run_cli("check-charging", "--kind", "piecewise", "--grid", "1e-3")
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["properties"]["passed"] is True
    assert data["ratio"] > 0.5211


def test_check_charging_exponential():
    res = run_cli("check-charging", "--kind", "exp", "--grid", "1e-3")
    data = json.loads(res.stdout)
    assert 0.5540 <= data["ratio"] <= 0.5545


def test_check_charging_bad_grid():
    assert run_cli("check-charging", "--grid", "0").returncode == 2


def test_hardness_omega():
    res = run_cli("hardness", "omega")
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["omega"] == pytest.approx(0.567143290409784, abs=1e-11)


def test_hardness_adversary():
    res = run_cli("hardness", "adversary", "--k", "7", "--h", "8")
    data = json.loads(res.stdout)
    assert list(data) == ["k", "h", "p_h", "t", "ratio_finite", "ratio_asymptotic"]
    assert data["ratio_asymptotic"] == pytest.approx(0.631745, abs=1e-6)


def test_hardness_layered():
    res = run_cli("hardness", "layered", "--k", "10", "--h", "80")
    data = json.loads(res.stdout)
    assert data["fluid_limit"] == pytest.approx(data["omega"], abs=1e-9)


def test_opt_subcommand(instance_file):
    res = run_cli("opt", "--instance", str(instance_file))
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["oracle"] == "hopcroft-karp"
    assert data["size"] >= 0


def test_json_floats_round_trip_at_12_digits():
    res = run_cli("hardness", "adversary", "--k", "7", "--h", "8")
    data = json.loads(res.stdout)
    # re-serializing the parsed floats must not lose precision
    assert json.loads(json.dumps(data)) == data


@pytest.mark.parametrize(
    "args",
    [
        ["generate", "random", "--n", "10", "--p", "0.5", "--seed", "9"],
        ["hardness", "adversary", "--k", "5", "--h", "4"],
        ["check-charging", "--kind", "exp", "--grid", "1e-2"],
        ["ratio", "--family", "ranking-hard", "--k", "4", "--h", "4",
         "--trials", "50", "--seed", "6"],
    ],
)
def test_byte_identical_across_runs_and_workers(args, instance_file):
    outs = set()
    for env in ({"FOMLAB_THREADS": "1"}, {"FOMLAB_THREADS": "2"}, None):
        res = run_cli(*args, env_extra=env)
        assert res.returncode == 0, res.stderr
        outs.add(res.stdout)
    assert len(outs) == 1


def test_verify_duals_byte_identical_across_workers(instance_file):
    outs = set()
    for workers in ("1", "2", "3"):
        res = run_cli(
            "verify-duals", "--instance", str(instance_file), "--charging", "exp",
            "--target", "0.5541", "--trials", "8192", "--seed", "11",
            env_extra={"FOMLAB_THREADS": workers},
        )
        assert res.returncode == 0
        outs.add(res.stdout)
    assert len(outs) == 1
