import json
import subprocess
import sys

import numpy as np
import pytest

from permtensor import DenseTensor
from permtensor.checks import SuiteResult
from permtensor.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip()
    return code, json.loads(out.splitlines()[-1]) if out else None


def write_tensor(path, data) -> None:
    arr = np.asarray(data, dtype=float)
    t = DenseTensor(arr.ndim, arr.shape[0], arr)
    path.write_text(json.dumps(t.to_json_dict()))


def gen_args(out, train=4, test=2, sizes="3,4", seed=0):
    return [
        "gen", "--sizes", sizes, "--count-per-size", str(train),
        "--test-count-per-size", str(test), "--seed", str(seed), "--out", str(out),
    ]


def test_no_command_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["gen", "--count-per-size", "1", "--out", "x", "--frobnicate"]) == 1


def test_bad_choice_is_usage_error(capsys):
    assert main(["train", "--data", "x", "--mode", "sideways", "--out", "y"]) == 1


def test_missing_file_is_runtime_error(capsys):
    assert main(["train", "--data", "/nonexistent.jsonl", "--mode", "inv", "--out", "/tmp/x"]) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_sizes_is_runtime_error(capsys):
    assert main(["gen", "--sizes", "3,x", "--count-per-size", "1", "--out", "/tmp/x"]) == 2


def test_gen_writes_dataset(tmp_path, capsys):
    out = tmp_path / "data.jsonl"
    code, payload = run(capsys, *gen_args(out))
    assert code == 0
    assert payload["samples"] == 12 and payload["train"] == 8 and payload["test"] == 4
    assert payload["path"] == str(out)
    assert payload["R"] > 0
    lines = out.read_text().splitlines()
    assert len(lines) == 13
    header = json.loads(lines[0])
    assert header["format"] == "permtensor-dataset-v1"
    assert header["sizes"] == [3, 4]


def test_gen_deterministic_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(gen_args(a)) == 0
    assert main(gen_args(b)) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_train_eval_flow(tmp_path, capsys):
    data = tmp_path / "data.jsonl"
    assert main(gen_args(data, train=6, test=3)) == 0
    run_dir = tmp_path / "run"
    code, payload = run(
        capsys, "train", "--data", str(data), "--mode", "inv", "--k", "1",
        "--width", "2", "--epochs", "2", "--out", str(run_dir),
    )
    assert code == 0
    assert payload["epochs"] == 2
    assert (run_dir / "model.json").is_file()
    assert (run_dir / "metrics.csv").is_file()
    config = json.loads((run_dir / "config.json").read_text())
    assert config["task"] == "diameter" and config["mode"] == "invariant"
    assert config["init_scheme"] == "uniform_scaled"
    assert config["threads"] == 1 and config["k"] == 1

    code, stats = run(
        capsys, "eval", "--model", str(run_dir / "model.json"),
        "--data", str(data), "--split", "test",
    )
    assert code == 0
    assert stats["task"] == "diameter" and stats["split"] == "test"
    assert {"mse_n3", "mse_n4"} <= set(stats)
    assert stats["mse"] == pytest.approx(payload["final_test_mse"], rel=1e-9)


def test_eval_empty_split_is_runtime_error(tmp_path, capsys):
    data = tmp_path / "data.jsonl"
    assert main(gen_args(data, train=4, test=0)) == 0
    run_dir = tmp_path / "run"
    assert main(["train", "--data", str(data), "--mode", "eq", "--width", "1",
                 "--epochs", "1", "--out", str(run_dir)]) == 0
    capsys.readouterr()
    code = main(["eval", "--model", str(run_dir / "model.json"),
                 "--data", str(data), "--split", "test"])
    assert code == 2


def test_editdist(tmp_path, capsys):
    tri = tmp_path / "tri.json"
    path3 = tmp_path / "path3.json"
    write_tensor(tri, [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    write_tensor(path3, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    code, payload = run(capsys, "editdist", "--a", str(tri), "--b", str(path3))
    assert code == 0
    assert payload == {"distance": 2.0, "node_cost": 1.0, "n_a": 3, "n_b": 3}
    code, payload = run(capsys, "editdist", "--a", str(tri), "--b", str(tri))
    assert code == 0 and payload["distance"] == 0.0
    k2 = tmp_path / "k2.json"
    write_tensor(k2, [[0, 1], [1, 0]])
    code, payload = run(capsys, "editdist", "--a", str(k2), "--b", str(tri),
                        "--node-cost", "2.5")
    assert code == 0 and payload["distance"] == 6.5


def test_gen_small_sizes_exclude_undefined_topologies(tmp_path, capsys):
    out = tmp_path / "tiny.jsonl"
    code, _ = run(capsys, "gen", "--sizes", "2", "--count-per-size", "40",
                  "--out", str(out))
    assert code == 0
    topologies = {
        json.loads(line)["topology"] for line in out.read_text().splitlines()[1:]
    }
    assert topologies <= {"complete", "path"}
    assert "wheel" not in topologies


def test_editdist_node_only_difference(tmp_path, capsys):
    one = tmp_path / "one.json"
    two = tmp_path / "two.json"
    write_tensor(one, [[0.0]])
    write_tensor(two, [[0.0, 0.0], [0.0, 0.0]])
    code, payload = run(capsys, "editdist", "--a", str(one), "--b", str(two),
                        "--node-cost", "2.5")
    assert code == 0
    assert payload["distance"] == 2.5


def test_desk_run_budget(tmp_path, capsys):
    import time

    data = tmp_path / "desk.jsonl"
    t0 = time.perf_counter()
    assert main(["gen", "--sizes", "5,10", "--count-per-size", "800",
                 "--test-count-per-size", "200", "--out", str(data)]) == 0
    assert main(["train", "--data", str(data), "--mode", "inv", "--k", "1",
                 "--width", "4", "--epochs", "30", "--out", str(tmp_path / "desk")]) == 0
    capsys.readouterr()
    assert time.perf_counter() - t0 < 120.0


def test_check_bell(capsys):
    code, payload = run(capsys, "check", "--suite", "bell")
    assert code == 0
    assert payload["suite"] == "bell" and payload["failed"] == 0
    assert payload["failures"] == []


def test_check_failure_exits_3(capsys, monkeypatch):
    import permtensor.cli as cli

    failed = SuiteResult("bell", passed=1, failed=2, failures=["a", "b"])
    monkeypatch.setattr(cli.checks, "run_suite", lambda name, seed: (failed, []))
    code, payload = run(capsys, "check", "--suite", "bell")
    assert code == 3
    assert payload["failed"] == 2


def test_check_separation_writes_witnesses(tmp_path, capsys, monkeypatch):
    import permtensor.cli as cli
    from permtensor.oracles import SeparationResult

    ok = SuiteResult("separation", passed=3)
    ok.extra = {"separated": 2, "pairs": 2, "lemma_instances": 1, "lemma_violations": 0}
    witnesses = [
        SeparationResult(True, 1, {"tau": -1.0, "lambda": 1.0}, 4.0, 9.0, 1e-9),
        SeparationResult(False, None, {}, None, None, 1e-9, note="inconclusive"),
    ]
    monkeypatch.setattr(cli.checks, "run_suite", lambda name, seed: (ok, witnesses))
    out_dir = tmp_path / "wit"
    code, payload = run(capsys, "check", "--suite", "separation", "--out", str(out_dir))
    assert code == 0
    assert payload["witness_dir"] == str(out_dir)
    files = sorted(p.name for p in out_dir.iterdir())
    assert files == ["config.json", "pair_000.json", "pair_001.json"]
    first = json.loads((out_dir / "pair_000.json").read_text())
    assert first["separated"] is True and first["stage"] == 1


def test_report_flow(tmp_path, capsys):
    data = tmp_path / "data.jsonl"
    assert main(gen_args(data, train=6, test=3)) == 0
    for name, k in (("k1", 1), ("k2", 2)):
        assert main(["train", "--data", str(data), "--mode", "inv", "--k", str(k),
                     "--width", "1", "--epochs", "2",
                     "--out", str(tmp_path / "runs" / name)]) == 0
    capsys.readouterr()
    code, payload = run(capsys, "report", "--runs", str(tmp_path / "runs"),
                        "--out", str(tmp_path / "rep"))
    assert code == 0
    assert payload["runs"] == 2
    assert (tmp_path / "rep" / "summary.csv").is_file()
    assert any("learning_curves" in f for f in payload["figures"])
    assert any("final_mse" in f for f in payload["figures"])


def test_module_entry_point(tmp_path):
    out = tmp_path / "data.jsonl"
    proc = subprocess.run(
        [sys.executable, "-m", "permtensor.cli"] + gen_args(out, train=2, test=1),
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["samples"] == 6
    assert "wrote 6 samples" in proc.stderr


def test_module_entry_usage_error():
    proc = subprocess.run(
        [sys.executable, "-m", "permtensor.cli", "nonsense"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
