import json

import pytest

from config import config as app_config
from src.dev.cli.main import main
from src.dev.common.constant import SCORE_TOLERANCE
from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.hypothesis import normalized_score

WITNESS_FLAGS = ["--beam-size", "2", "--max-length", "4"]


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _csv_rows(text):
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


# ==================== decode ====================
def test_decode_witness(capsys, fall_off_model_path):
    code, out, _ = _run(capsys, "decode", "--model", str(fall_off_model_path), *WITNESS_FLAGS)
    assert code == 0
    [record] = _jsonl(out)
    assert record["tokens"] == ["<s>", "</s>"]
    assert record["algorithm"] == "fcfs"
    assert record["finished"] is True
    assert record["terminated_by"] == "patience"
    assert record["stats"]["steps_executed"] == 3


def test_decode_fcfs_matches_reference(capsys, data_dir):
    model = str(data_dir / "conditioned_model.json")
    args = ["--model", model, "--input", "flip", "--input", "other", "--patience", "1"]
    _, fcfs, _ = _run(capsys, "decode", "--algorithm", "fcfs", *args)
    _, reference, _ = _run(capsys, "decode", "--algorithm", "fcfs-reference", *args)
    strip = lambda records: [{k: v for k, v in r.items() if k != "algorithm"} for r in records]  # noqa: E731
    assert strip(_jsonl(fcfs)) == strip(_jsonl(reference))


def test_decode_single_beam_matches_greedy(capsys, data_dir):
    model = str(data_dir / "conditioned_model.json")
    _, fcfs, _ = _run(capsys, "decode", "--model", model, "--input", "flip", "--beam-size", "1", "--patience", "1")
    _, greedy, _ = _run(capsys, "decode", "--model", model, "--input", "flip", "--algorithm", "greedy")
    assert [r["tokens"] for r in _jsonl(fcfs)] == [r["tokens"] for r in _jsonl(greedy)] == [["<s>", "y", "</s>"]]


def test_decode_output_scores_recompute(capsys, fall_off_model_path):
    _, out, _ = _run(capsys, "decode", "--model", str(fall_off_model_path), "--algorithm", "vanilla", *WITNESS_FLAGS)
    config = DecoderConfig(beam_size=2, max_length=4)
    for record in _jsonl(out):
        recomputed = normalized_score(record["sum_logprob"], len(record["tokens"]) - 1, config)
        assert recomputed == pytest.approx(record["score"], abs=SCORE_TOLERANCE)


def test_decode_is_deterministic_and_writes_manifest(capsys, tmp_path, fall_off_model_path):
    outputs = []
    for name in ("a.jsonl", "b.jsonl"):
        path = tmp_path / name
        code, _, _ = _run(
            capsys, "decode", "--model", str(fall_off_model_path), *WITNESS_FLAGS,
            "--input", "x", "--input", "y", "--jobs", "2", "--output", str(path),
        )
        assert code == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]

    manifest = json.loads((tmp_path / "a.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "decode"
    assert manifest["config"]["beam_size"] == 2
    assert len(manifest["model_hash"]) == 64
    assert manifest["extra"]["inputs"] == ["x", "y"]


def test_decode_writes_trace(capsys, tmp_path, fall_off_model_path):
    trace = tmp_path / "trace.jsonl"
    code, _, _ = _run(
        capsys, "decode", "--model", str(fall_off_model_path), "--algorithm", "vanilla",
        *WITNESS_FLAGS, "--trace", str(trace),
    )
    assert code == 0
    steps = _jsonl(trace.read_text(encoding="utf-8"))
    assert [s["t"] for s in steps] == [1, 2, 3]
    assert any(e["fate"] == "discarded" for e in steps[1]["events"])


@pytest.mark.parametrize(
    "argv",
    [
        ["decode", "--algorithm", "nucleus"],
        ["decode", "--input", "a", "--input", "b", "--trace", "t.jsonl"],
        ["decode", "--min-length", "5", "--max-length", "4"],
        ["decode", "--beam-size", "0"],
        ["decode", "--preset", "wmt99"],
    ],
)
def test_decode_usage_errors(capsys, fall_off_model_path, argv):
    code, _, err = _run(capsys, *argv, "--model", str(fall_off_model_path))
    assert code == 2
    assert err


def test_decode_missing_model_file(capsys, tmp_path):
    code, _, err = _run(capsys, "decode", "--model", str(tmp_path / "missing.json"))
    assert code == 1
    assert "file not found" in err


def test_decode_ngram_corpus(capsys, data_dir):
    code, out, _ = _run(
        capsys, "decode", "--model", str(data_dir / "corpus.txt"), "--model-type", "ngram",
        "--order", "2", "--max-length", "8", "--beam-size", "3",
    )
    assert code == 0
    [record] = _jsonl(out)
    assert record["tokens"][0] == "<s>" and record["tokens"][-1] == "</s>"


# ==================== validate / oracle ====================
def test_validate(capsys, data_dir, fall_off_model_path):
    code, out, _ = _run(capsys, "validate", "--model", str(fall_off_model_path))
    assert code == 0 and out.startswith("OK")

    code, out, _ = _run(capsys, "validate", "--model", str(data_dir / "broken_model.json"))
    assert code == 1
    assert "context 'x'" in out

    code, _, err = _run(capsys, "validate", "--model", str(data_dir / "nope.json"))
    assert code == 1
    assert "file not found" in err


def test_oracle(capsys, fall_off_model_path):
    code, out, _ = _run(
        capsys, "oracle", "--model", str(fall_off_model_path), *WITNESS_FLAGS, "--check-beam", "vanilla",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["tokens"] == ["<s>", "</s>"]
    assert payload["num_enumerated"] == 7
    assert payload["exhausted"] is True
    assert payload["check_beam"]["tokens"] == ["<s>", "a", "a", "</s>"]
    assert payload["check_beam"]["score_gap"] > 0


def test_oracle_limit_exceeded(capsys, fall_off_model_path):
    code, _, err = _run(
        capsys, "oracle", "--model", str(fall_off_model_path), *WITNESS_FLAGS, "--max-enumerate", "3",
    )
    assert code == 1
    assert "16" in err


# ==================== sweep / compare ====================
def test_sweep_patience_axis(capsys):
    code, out, _ = _run(
        capsys, "sweep", "--axis", "patience", "--values", "0.5,1,2", "--random-models", "4",
        "--vocab-size", "5", "--beam-size", "3", "--max-length", "8",
        "--no-timing", "--no-progress", "--jobs", "1", "--seed", "3",
    )
    assert code == 0
    rows = _csv_rows(out)
    assert [float(r["patience"]) for r in rows] == [0.5, 1.0, 2.0]
    steps = [float(r["mean_steps"]) for r in rows]
    assert steps == sorted(steps)
    assert "time_rel_vanilla" not in rows[0]


def test_sweep_spec_file_single_value(capsys, tmp_path, fall_off_model_path):
    spec = {
        "model": {"path": str(fall_off_model_path)},
        "base_config": {"beam_size": 2, "max_length": 4},
        "axis": "patience",
        "values": [1.0],
    }
    spec_path = tmp_path / "sweep.json"
    spec_path.write_text(json.dumps(spec), encoding="utf-8")
    code, out, _ = _run(capsys, "sweep", "--spec-file", str(spec_path), "--no-progress", "--no-timing")
    assert code == 0
    [row] = _csv_rows(out)
    assert float(row["mean_steps"]) == 3.0
    assert float(row["fraction_finished"]) == 1.0


def test_sweep_output_is_deterministic(capsys, tmp_path):
    argv = [
        "sweep", "--axis", "beam_size", "--values", "1,2", "--random-models", "2",
        "--max-length", "6", "--no-timing", "--no-progress", "--seed", "9",
    ]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _run(capsys, *argv, "--output", str(first), "--jobs", "2")[0] == 0
    assert _run(capsys, *argv, "--output", str(second), "--jobs", "2")[0] == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize(
    "extra",
    [
        ["--axis", "patience", "--values", "0.5,x", "--random-models", "1"],
        ["--axis", "patience", "--values", "2,1", "--random-models", "1"],
        ["--axis", "patience", "--random-models", "1"],
        ["--axis", "patience", "--values", "1,2"],
    ],
)
def test_sweep_usage_errors(capsys, extra):
    code, _, err = _run(capsys, "sweep", *extra, "--no-progress")
    assert code == 2
    assert err


def test_compare(capsys, fall_off_model_path):
    code, out, _ = _run(capsys, "compare", "--model", str(fall_off_model_path), *WITNESS_FLAGS, "--patience", "2")
    assert code == 0
    rows = _csv_rows(out)
    assert [r["algorithm"] for r in rows] == ["greedy", "vanilla", "fcfs", "fcfs_p2"]
    assert [int(r["differing_outputs"]) for r in rows] == [1, 1, 0, 0]


# ==================== gen-model ====================
def test_gen_model_then_validate(capsys, tmp_path):
    path = tmp_path / "random.json"
    code, _, _ = _run(capsys, "gen-model", "--output", str(path), "--seed", "4", "--vocab-size", "5")
    assert code == 0
    assert _run(capsys, "validate", "--model", str(path))[0] == 0
    assert _run(capsys, "decode", "--model", str(path), "--max-length", "6")[0] == 0


def test_seed_falls_back_to_environment(capsys, tmp_path, monkeypatch):
    explicit, from_env = tmp_path / "explicit.json", tmp_path / "env.json"
    _run(capsys, "gen-model", "--output", str(explicit), "--seed", "5")

    monkeypatch.setenv("BEAMKIT_SEED", "5")
    app_config.reload()
    try:
        _run(capsys, "gen-model", "--output", str(from_env))
    finally:
        monkeypatch.delenv("BEAMKIT_SEED")
        app_config.reload()
    assert explicit.read_bytes() == from_env.read_bytes()


def test_compare_writes_divergence_file(capsys, tmp_path, fall_off_model_path):
    diff = tmp_path / "diff.jsonl"
    code, _, _ = _run(capsys, "compare", "--model", str(fall_off_model_path), *WITNESS_FLAGS, "--diff", str(diff))
    assert code == 0
    records = _jsonl(diff.read_text(encoding="utf-8"))
    assert {r["algorithm"] for r in records} == {"greedy", "vanilla"}
    assert all(r["t"] == 1 for r in records)


# ==================== manifest ====================
def test_trace_and_oracle_files_get_manifests(capsys, tmp_path, fall_off_model_path):
    trace, oracle = tmp_path / "trace.jsonl", tmp_path / "oracle.json"
    assert _run(capsys, "decode", "--model", str(fall_off_model_path), *WITNESS_FLAGS, "--trace", str(trace))[0] == 0
    assert _run(capsys, "oracle", "--model", str(fall_off_model_path), *WITNESS_FLAGS, "--output", str(oracle))[0] == 0

    trace_manifest = json.loads((tmp_path / "trace.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert trace_manifest["command"] == "decode"
    assert trace_manifest["extra"]["algorithm"] == "fcfs"
    oracle_manifest = json.loads((tmp_path / "oracle.json.manifest.json").read_text(encoding="utf-8"))
    assert oracle_manifest["command"] == "oracle"
    assert oracle_manifest["model_hash"] == trace_manifest["model_hash"]


def test_diff_and_csv_get_manifests(capsys, tmp_path, fall_off_model_path):
    table, diff = tmp_path / "table.csv", tmp_path / "diff.jsonl"
    code, _, _ = _run(
        capsys, "compare", "--model", str(fall_off_model_path), *WITNESS_FLAGS,
        "--output", str(table), "--diff", str(diff),
    )
    assert code == 0
    for name in ("table.csv.manifest.json", "diff.jsonl.manifest.json"):
        manifest = json.loads((tmp_path / name).read_text(encoding="utf-8"))
        assert manifest["command"] == "compare"
        assert manifest["config"]["max_length"] == 4


def test_stdout_run_puts_manifest_on_stderr(capsys, tmp_path, fall_off_model_path):
    code, out, err = _run(capsys, "decode", "--model", str(fall_off_model_path), *WITNESS_FLAGS, "--seed", "11")
    assert code == 0
    assert "manifest" not in out
    [line] = [line for line in err.splitlines() if line.startswith("# manifest ")]
    manifest = json.loads(line[len("# manifest "):])
    assert manifest["seed"] == 11
    assert manifest["config"]["beam_size"] == 2
    assert not list(tmp_path.iterdir())


def test_gen_model_writes_manifest(capsys, tmp_path):
    path = tmp_path / "random.json"
    assert _run(capsys, "gen-model", "--output", str(path), "--seed", "4")[0] == 0
    manifest = json.loads((tmp_path / "random.json.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "gen-model"
    assert manifest["seed"] == 4
    assert manifest["model_hash"] is None
