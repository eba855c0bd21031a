import json

import numpy as np
import pytest

from ifcbounds.cli import main


def spec_file(tmp_path, name, H, sigma=None):
    doc = {"schema_version": 1, "K": len(H), "H": H}
    if sigma is not None:
        doc["Sigma"] = sigma
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def diag2(tmp_path):
    return spec_file(tmp_path, "diag2.json", [[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def weak2(tmp_path):
    return spec_file(tmp_path, "weak2.json", [[1.0, 0.5], [0.5, 1.0]])


@pytest.fixture
def z2(tmp_path):
    return spec_file(tmp_path, "z2.json", [[1.0, 0.4], [0.0, 1.0]])


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_evaluate_exit_zero_and_json(capsys, diag2):
    code, out, _ = run(capsys, ["evaluate", diag2])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert abs(doc["sum_rate_upper_bits"] - 2.0) < 1e-9
    assert doc["consistent"] is True
    assert len(doc["inequalities"]) == 3


def test_evaluate_byte_identical_across_runs(capsys, weak2):
    code1, out1, _ = run(capsys, ["evaluate", weak2])
    code2, out2, _ = run(capsys, ["evaluate", weak2])
    assert (code1, code2) == (0, 0)
    assert out1 == out2


def test_evaluate_malformed_json_exits_two(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    code, out, err = run(capsys, [ "evaluate", str(p)])
    assert code == 2
    assert out == ""
    assert err != ""


def test_evaluate_invalid_spec_exits_two(capsys, tmp_path):
    path = spec_file(tmp_path, "bad.json", [[1.0, 0.0], [0.0, -1.0]])
    code, _, err = run(capsys, ["evaluate", path])
    assert code == 2
    assert "diagonal" in err.lower() or "positive" in err.lower()


def test_evaluate_missing_file_exits_two(capsys, tmp_path):
    code, _, _ = run(capsys, ["evaluate", str(tmp_path / "nope.json")])
    assert code == 2


def test_evaluate_large_k_needs_sum_rate_only(capsys, tmp_path):
    H = np.eye(7).tolist()
    path = spec_file(tmp_path, "k7.json", H)
    code, _, err = run(capsys, ["evaluate", path])
    assert code == 3
    assert "sum-rate-only" in err


def test_evaluate_sum_rate_only_single_inequality(capsys, tmp_path):
    path = spec_file(tmp_path, "k3.json", np.eye(3).tolist())
    code, out, _ = run(capsys, ["evaluate", path, "--sum-rate-only",
                                "--restarts", "2", "--max-evals", "300"])
    assert code == 0
    doc = json.loads(out)
    assert len(doc["inequalities"]) == 1
    assert doc["inequalities"][0]["subset"] == [1, 2, 3]
    assert abs(doc["sum_rate_upper_bits"] - 3.0) < 1e-6


def test_evaluate_family_selection(capsys, weak2):
    code, out, _ = run(capsys, ["evaluate", weak2, "--families", "etw"])
    assert code == 0
    doc = json.loads(out)
    assert set(doc["per_family_sum_rate_bits"]) == {"ETW"}


def test_count_bounds_exact_output(capsys):
    code, out, _ = run(capsys, ["count-bounds", "2", "3", "4", "5"])
    assert code == 0
    assert out == "N(2)=4\nN(3)=15\nN(4)=64\nN(5)=325\n"


def test_certify_z_channel_exit_zero(capsys, z2):
    code, out, _ = run(capsys, ["certify", z2])
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "CERTIFIED"
    assert doc["path"] == "Z_THEOREM2"
    assert abs(doc["gap_bits"]) <= 1e-9


def test_certify_open_gap_exit_one(capsys, weak2):
    code, out, _ = run(capsys, ["certify", weak2])
    assert code == 1
    doc = json.loads(out)
    assert doc["status"] == "BOUND_ONLY"
    assert doc["gap_bits"] > 0.01


def test_construct_z_mode_roundtrip(capsys, tmp_path):
    params = tmp_path / "zp.json"
    params.write_text(json.dumps({
        "sigma": [[1.0, 0.35], [0.35, 1.0]],
        "diag_gains": [1.0, 2.0],
    }))
    code, out, _ = run(capsys, ["construct", "z", str(params)])
    assert code == 0
    doc = json.loads(out)
    assert doc["provenance"]["mode"] == "z"
    # emitted channel certifies
    chan = tmp_path / "zc.json"
    chan.write_text(json.dumps({k: doc[k] for k in ("schema_version", "K", "H")}))
    code2, out2, _ = run(capsys, ["certify", str(chan)])
    assert code2 == 0
    assert json.loads(out2)["path"] == "Z_THEOREM2"


def test_construct_rank_one_mode(capsys, tmp_path):
    params = tmp_path / "r1.json"
    params.write_text(json.dumps({"a": [1.0, 2.0], "b": [1.0, 1.0]}))
    code, out, _ = run(capsys, ["construct", "rank-one", str(params)])
    assert code == 0
    doc = json.loads(out)
    H = np.array([[complex(*e) if isinstance(e, list) else e for e in row]
                  for row in doc["H"]])
    s = np.linalg.svd(H, compute_uv=False)
    assert s[1] <= 1e-12 * s[0]


def test_construct_many_to_one_power_violation(capsys, tmp_path):
    params = tmp_path / "m1.json"
    params.write_text(json.dumps({"v": [0.8, 0.7]}))
    code, _, err = run(capsys, ["construct", "many-to-one", str(params)])
    assert code == 2
    assert "1" in err


def test_sweep_csv_shape(capsys, tmp_path):
    tmpl = spec_file(tmp_path, "tmpl.json", [[1.0, 0.0], [0.0, 1.0]])
    code, out, _ = run(capsys, [
        "sweep", tmpl, "--param", "/H/0/1,/H/1/0",
        "--start", "0", "--stop", "2", "--steps", "21",
        "--restarts", "2", "--max-evals", "400",
    ])
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "parameter,upper_kra,upper_etw,tin_lower,gap"
    assert len(lines) == 22
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert first[4] == "0"  # interference-free point: bound meets TIN exactly


def test_sweep_zero_steps_exits_two(capsys, tmp_path):
    tmpl = spec_file(tmp_path, "tmpl2.json", [[1.0, 0.0], [0.0, 1.0]])
    code, _, _ = run(capsys, ["sweep", tmpl, "--param", "/H/0/1",
                              "--start", "0", "--stop", "1", "--steps", "0"])
    assert code == 2


def test_verify_exit_zero(capsys, z2):
    code, out, _ = run(capsys, ["verify", z2, "--mc-samples", "50000", "--seed", "2"])
    assert code == 0
    doc = json.loads(out)
    assert doc["all_ok"] is True
    assert all(q["ok"] for q in doc["queries"])


def test_seed_flag_beats_environment(capsys, weak2, monkeypatch):
    monkeypatch.setenv("IFC_SEED", "5")
    _, out_env, _ = run(capsys, ["evaluate", weak2])
    assert json.loads(out_env)["config"]["seed"] == 5
    _, out_flag, _ = run(capsys, ["evaluate", weak2, "--seed", "9"])
    assert json.loads(out_flag)["config"]["seed"] == 9


def test_bad_environment_value_exits_two(capsys, weak2, monkeypatch):
    monkeypatch.setenv("IFC_RESTARTS", "many")
    code, _, err = run(capsys, ["evaluate", weak2])
    assert code == 2
    assert "IFC_RESTARTS" in err
