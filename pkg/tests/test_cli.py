import csv
import json
from pathlib import Path

import numpy as np
import pytest

from platoonnet.cli import main
from platoonnet.connectivity import connectivity_report
from platoonnet.graph import PlatoonSpec, build_knn_platoon, save_graph

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def read_manifest(outdir):
    with open(Path(outdir) / "manifest.json") as fh:
        return json.load(fh)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ----------------------------------------------------------------- analyze


def test_analyze_platoon_matches_library(tmp_path, capsys):
    assert main(["analyze", "--platoon", "10,3", "--out", str(tmp_path)]) == 0
    manifest = read_manifest(tmp_path)
    (name,) = manifest["outputs"]
    with open(tmp_path / name) as fh:
        got = json.load(fh)
    g = build_knn_platoon(PlatoonSpec(10, 3))
    want = connectivity_report(g, platoon=PlatoonSpec(10, 3)).to_json_dict()
    assert got == want
    assert manifest["seed"] is None
    assert "timestamp" not in json.dumps(manifest)


def test_analyze_graph_file(tmp_path):
    gpath = tmp_path / "g.json"
    save_graph(build_knn_platoon(PlatoonSpec(6, 2)), gpath)
    out = tmp_path / "out"
    assert main(["analyze", "--graph", str(gpath), "--out", str(out)]) == 0
    (name,) = read_manifest(out)["outputs"]
    with open(out / name) as fh:
        got = json.load(fh)
    assert got["vertex_connectivity"] == 2
    assert got["lambda2_bounds"] is None  # no platoon parameters known


def test_analyze_requires_exactly_one_source(tmp_path, capsys):
    assert main(["analyze", "--out", str(tmp_path)]) == 2
    assert main(["analyze", "--platoon", "5,2", "--graph", "x.json"]) == 2
    assert "exactly one" in capsys.readouterr().err


def test_analyze_bad_platoon_argument(capsys):
    assert main(["analyze", "--platoon", "10"]) == 2
    assert main(["analyze", "--platoon", "10,0"]) == 2
    assert "k must satisfy" in capsys.readouterr().err


def test_analyze_refuses_large_exhaustive_with_fallback(tmp_path, capsys):
    code = main(["analyze", "--platoon", "30,4", "--robustness", "--out", str(tmp_path)])
    assert code == 3
    err = capsys.readouterr().err
    assert "exceeds limit 14" in err
    assert "robustness=4" in err and "iso=2/3" in err
    assert "closed-form, not verified exhaustively" in err
    assert not (tmp_path / "manifest.json").exists()  # refusal writes nothing


def test_analyze_limit_override_can_refuse_small(tmp_path, capsys):
    code = main(
        ["analyze", "--platoon", "10,3", "--robustness", "--exhaustive-limit", "8",
         "--out", str(tmp_path)]
    )
    assert code == 3
    assert "exceeds limit 8" in capsys.readouterr().err


def test_analyze_refusal_without_platoon_has_no_closed_form(tmp_path, capsys):
    gpath = tmp_path / "big.json"
    save_graph(build_knn_platoon(PlatoonSpec(16, 2)), gpath)
    code = main(["analyze", "--graph", str(gpath), "--robustness", "--out", str(tmp_path)])
    assert code == 3
    err = capsys.readouterr().err
    assert "closed-form" not in err


# ---------------------------------------------------------------- estimate


def test_estimate_fixture_curve(tmp_path, capsys):
    scenario = SCENARIOS / "estimation-single-fault.json"
    assert main(["estimate", "--scenario", str(scenario), "--out", str(tmp_path)]) == 0
    manifest = read_manifest(tmp_path)
    rows = read_csv(tmp_path / manifest["outputs"][0])
    assert rows[0] == ["step", "error"]
    assert len(rows) == 11  # header + one row per measurement step
    final_error = float(rows[-1][1])
    assert final_error < 1e-6
    assert float(rows[1][1]) > 1.0  # one measurement cannot recover the state
    assert manifest["results"]["unique"] is True
    assert manifest["results"]["consistent_candidates"] == [[4]]


def test_estimate_is_bitwise_deterministic(tmp_path):
    scenario = SCENARIOS / "estimation-single-fault.json"
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["estimate", "--scenario", str(scenario), "--out", str(a)]) == 0
    assert main(["estimate", "--scenario", str(scenario), "--out", str(b)]) == 0
    (name,) = read_manifest(a)["outputs"]
    assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_estimate_seed_override_changes_run(tmp_path):
    scenario = SCENARIOS / "estimation-single-fault.json"
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["estimate", "--scenario", str(scenario), "--out", str(a)]) == 0
    assert main(["estimate", "--scenario", str(scenario), "--seed", "99", "--out", str(b)]) == 0
    ma, mb = read_manifest(a), read_manifest(b)
    assert ma["seed"] == 7 and mb["seed"] == 99
    assert ma["outputs"] != mb["outputs"]  # config hash includes the seed


def test_estimate_scenario_validation_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"graph": {"platoon": [10, 3]}, "seed": 1}')
    assert main(["estimate", "--scenario", str(bad)]) == 2
    assert "invalid at /" in capsys.readouterr().err

    bad.write_text(json.dumps({
        "graph": {"platoon": [10, 3]}, "seed": 1, "faulty": [4],
        "phi": [[5, 0, 1.0]], "observer": 0, "f": 1,
    }))
    assert main(["estimate", "--scenario", str(bad)]) == 2
    assert "/phi/0" in capsys.readouterr().err

    bad.write_text(json.dumps({
        "graph": {"platoon": [10, 3]}, "seed": 1, "faulty": [0],
        "phi": [], "observer": 0, "f": 1,
    }))
    assert main(["estimate", "--scenario", str(bad)]) == 2
    assert "observer cannot be" in capsys.readouterr().err


def test_malformed_scenario_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{\n  "graph": {"platoon": [10, 3]},\n  "seed": 1,\n}')
    assert main(["estimate", "--scenario", str(bad)]) == 2
    assert "line 4" in capsys.readouterr().err
    assert main(["estimate", "--scenario", str(tmp_path / "nope.json")]) == 2


def test_scenario_graph_variants(tmp_path):
    # inline edge list
    inline = tmp_path / "inline.json"
    inline.write_text(json.dumps({
        "graph": {"n": 6, "edges": [[i, i + 1] for i in range(5)] + [[i, i + 2] for i in range(4)]},
        "seed": 3, "faulty": [], "phi": [], "observer": 0, "f": 0,
    }))
    assert main(["estimate", "--scenario", str(inline), "--out", str(tmp_path / "o1")]) == 0
    # graph file referenced relative to the scenario location
    save_graph(build_knn_platoon(PlatoonSpec(6, 2)), tmp_path / "g.json")
    ref = tmp_path / "ref.json"
    ref.write_text(json.dumps({
        "graph": "g.json", "seed": 3, "faulty": [], "phi": [], "observer": 0, "f": 0,
    }))
    assert main(["estimate", "--scenario", str(ref), "--out", str(tmp_path / "o2")]) == 0
    m1, m2 = read_manifest(tmp_path / "o1"), read_manifest(tmp_path / "o2")
    r1 = read_csv(tmp_path / "o1" / m1["outputs"][0])
    r2 = read_csv(tmp_path / "o2" / m2["outputs"][0])
    assert r1 == r2  # identical graph and seed, identical run


# --------------------------------------------------------------- consensus


def test_consensus_fixture_converges(tmp_path):
    scenario = SCENARIOS / "consensus-ramp-tolerated.json"
    assert main(["consensus", "--scenario", str(scenario), "--out", str(tmp_path)]) == 0
    manifest = read_manifest(tmp_path)
    res = manifest["results"]
    assert res["f_local"] is True
    assert res["converged_at"] is not None
    assert res["final_spread"] < 1e-9
    assert res["safety_violations"] == 0
    rows = read_csv(tmp_path / manifest["outputs"][0])
    assert rows[0] == ["step", "vehicle", "value", "is_adversary"]
    assert len(rows) == 1 + 501 * 10
    # vehicle 4 is flagged as the adversary on every step
    flags = {r[1]: r[3] for r in rows[1:11]}
    assert flags["4"] == "1"
    assert all(flags[str(v)] == "0" for v in range(10) if v != 4)


def test_consensus_overwhelmed_fixture_fails_to_agree(tmp_path):
    scenario = SCENARIOS / "consensus-overwhelmed.json"
    with pytest.warns(UserWarning, match="not 1-local"):
        code = main(["consensus", "--scenario", str(scenario), "--out", str(tmp_path)])
    assert code == 0
    res = read_manifest(tmp_path)["results"]
    assert res["f_local"] is False
    assert res["converged_at"] is None
    assert res["final_spread"] > 0.1


def test_consensus_json_format(tmp_path):
    scenario = SCENARIOS / "consensus-ramp-tolerated.json"
    assert main(["consensus", "--scenario", str(scenario), "--format", "json",
                 "--out", str(tmp_path)]) == 0
    (name,) = read_manifest(tmp_path)["outputs"]
    assert name.endswith(".json")
    with open(tmp_path / name) as fh:
        rows = json.load(fh)
    assert rows[0] == {"step": 0, "vehicle": 0, "value": rows[0]["value"], "is_adversary": False}
    assert any(r["is_adversary"] for r in rows)


def test_consensus_strategy_param_validation(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "graph": {"platoon": [8, 2]}, "seed": 1, "f": 1,
        "adversaries": [{"vehicle": 2, "strategy": "ramp", "params": {"slope": 1.0}}],
    }))
    assert main(["consensus", "--scenario", str(bad)]) == 2
    assert "missing params ['start']" in capsys.readouterr().err
    bad.write_text(json.dumps({
        "graph": {"platoon": [8, 2]}, "seed": 1, "f": 1,
        "adversaries": [{"vehicle": 2, "strategy": "warp", "params": {}}],
    }))
    assert main(["consensus", "--scenario", str(bad)]) == 2
    assert "/adversaries/0" in capsys.readouterr().err


# --------------------------------------------------------------- formation


def test_formation_fixture_outputs(tmp_path):
    config = SCENARIOS / "formation-worst-case.json"
    assert main(["formation", "--config", str(config), "--out", str(tmp_path)]) == 0
    manifest = read_manifest(tmp_path)
    veh_name, edge_name = manifest["outputs"]
    assert veh_name.endswith("-vehicles.csv") and edge_name.endswith("-edges.csv")
    veh = read_csv(tmp_path / veh_name)
    assert veh[0] == ["t", "vehicle", "p", "u"]
    edges = read_csv(tmp_path / edge_name)
    assert edges[0] == ["t", "edge", "spacing_error"]
    assert edges[1][1] == "0-1"
    res = manifest["results"]
    # the worst-case input never drives the output past the closed-form gain
    assert res["max_abs_spacing_error"] <= res["hinf_closed_form"] * 1.02
    # peak frequency of this configuration is zero, so the sinusoid request
    # resolves to a step disturbance
    assert manifest["config"]["disturbance"]["kind"] == "step"


def test_formation_json_format(tmp_path):
    config = SCENARIOS / "formation-worst-case.json"
    assert main(["formation", "--config", str(config), "--format", "json",
                 "--out", str(tmp_path)]) == 0
    (name,) = read_manifest(tmp_path)["outputs"]
    with open(tmp_path / name) as fh:
        payload = json.load(fh)
    assert set(payload) == {"t", "positions", "velocities", "edges", "spacing_errors"}
    assert len(payload["edges"]) == build_knn_platoon(PlatoonSpec(10, 2)).m


def test_formation_validation(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"graph": {"platoon": [6, 2]}, "kp": -1.0, "ku": 2.0}))
    assert main(["formation", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({
        "graph": {"platoon": [6, 2]}, "kp": 5.0, "ku": 10.0,
        "disturbance": {"kind": "step", "vehicle": 9},
    }))
    assert main(["formation", "--config", str(bad)]) == 2
    assert "out of range" in capsys.readouterr().err
    bad.write_text(json.dumps({
        "graph": {"platoon": [6, 2]}, "kp": 5.0, "ku": 10.0, "h": 1.0,
    }))
    assert main(["formation", "--config", str(bad)]) == 2
    assert "reduce h" in capsys.readouterr().err


# ------------------------------------------------------------------- sweep


def test_sweep_csv_surface(tmp_path):
    assert main(["sweep", "--n", "5,10", "--k", "1:3", "--kp", "5", "--ku", "10",
                 "--spot-check", "corners", "--out", str(tmp_path)]) == 0
    manifest = read_manifest(tmp_path)
    rows = read_csv(tmp_path / manifest["outputs"][0])
    assert rows[0] == ["n", "k", "kp", "ku", "lambda2", "lb", "ub", "hinf", "branch"]
    assert [r[:2] for r in rows[1:]] == [
        ["5", "1"], ["5", "2"], ["5", "3"], ["10", "1"], ["10", "2"], ["10", "3"]
    ]
    checks = manifest["results"]["spot_checks"]
    assert {(c["n"], c["k"]) for c in checks} == {(5, 1), (5, 3), (10, 1), (10, 3)}
    assert all(c["rel_err"] < 1e-3 for c in checks)


def test_sweep_no_spot_checks(tmp_path):
    assert main(["sweep", "--n", "6", "--k", "2", "--kp", "5", "--ku", "10",
                 "--spot-check", "none", "--out", str(tmp_path)]) == 0
    assert read_manifest(tmp_path)["results"]["spot_checks"] == []


def test_sweep_range_validation(capsys):
    assert main(["sweep", "--n", "4:3", "--k", "1", "--kp", "5", "--ku", "10"]) == 2
    assert main(["sweep", "--n", "x", "--k", "1", "--kp", "5", "--ku", "10"]) == 2
    assert main(["sweep", "--n", "3", "--k", "9", "--kp", "5", "--ku", "10"]) == 2
    assert "no valid" in capsys.readouterr().err


# ------------------------------------------------------------------ parser


def test_help_and_unknown_flags():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--bogus"])
    assert exc.value.code == 2
