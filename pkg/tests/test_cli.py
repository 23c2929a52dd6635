"""Experiment-runner CLI: outputs, exit codes, and byte-level determinism."""
import hashlib
import json

import pytest
from click.testing import CliRunner

from spts.cli import main

SMALL_CONFIG = """\
master_seed: 7
dictionary:
  iterations: 5
scenario:
  shapes: [dot, square, cross]
sweep:
  m_values: [7, 13]
  trials: 2
adapt:
  schedule: [4, 8, 16]
vote_window: 3
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL_CONFIG)
    return str(path)


def run(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    return result


def hash_dir(out_dir):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out_dir.iterdir()) if p.is_file()}


class TestDictTrain:
    def test_writes_dictionary_and_log(self, runner, config_path, tmp_path):
        out = tmp_path / "out"
        result = run(runner, ["dict-train", "--config", config_path,
                              "--out", str(out)])
        assert result.exit_code == 0
        assert (out / "dictionary.spts").exists()
        assert (out / "dictionary_atoms.csv").exists()
        assert (out / "dictionary_training_log.csv").exists()

    def test_manifest_records_run_identity(self, runner, config_path, tmp_path):
        out = tmp_path / "out"
        run(runner, ["dict-train", "--config", config_path, "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "dict-train"
        assert manifest["master_seed"] == 7
        assert len(manifest["config_hash"]) == 64
        assert "version" in manifest

    def test_seed_override(self, runner, config_path, tmp_path):
        out = tmp_path / "out"
        run(runner, ["dict-train", "--config", config_path,
                     "--out", str(out), "--seed", "99"])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["master_seed"] == 99


class TestExitCodes:
    def test_bad_config_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("master_seed: 1\nmystery: true\n")
        result = runner.invoke(main, ["dict-train", "--config", str(bad),
                                      "--out", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_missing_dictionary_exits_2(self, runner, config_path, tmp_path):
        result = runner.invoke(main, ["classify-sweep", "--config", config_path,
                                      "--out", str(tmp_path / "empty")])
        assert result.exit_code == 2

    def test_missing_config_file_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["dict-train", "--config",
                                      str(tmp_path / "nope.yaml"),
                                      "--out", str(tmp_path / "out")])
        assert result.exit_code != 0


class TestPipeline:
    def test_all_commands_produce_their_reports(self, runner, config_path,
                                                tmp_path):
        out = tmp_path / "out"
        base = ["--config", config_path, "--out", str(out)]
        assert run(runner, ["dict-train"] + base).exit_code == 0
        assert run(runner, ["classify-sweep"] + base).exit_code == 0
        assert run(runner, ["support-sweep"] + base).exit_code == 0
        assert run(runner, ["bounce"] + base).exit_code == 0
        assert run(runner, ["localize"] + base).exit_code == 0
        assert run(runner, ["adapt"] + base).exit_code == 0
        for name in ("classify_sweep.csv", "classify_summary.json",
                     "support_sweep.csv", "bounce.csv", "bounce_traces.csv",
                     "localize.csv", "localize_summary.json", "adapt.csv",
                     "adapt_frames.jsonl", "classify_accuracy.png",
                     "support_accuracy.png", "bounce.png",
                     "localize_error.png", "adapt.png", "frame_rate.png"):
            assert (out / name).exists(), name

    def test_classify_report_shape(self, runner, config_path, tmp_path):
        out = tmp_path / "out"
        base = ["--config", config_path, "--out", str(out)]
        run(runner, ["dict-train"] + base)
        run(runner, ["classify-sweep"] + base)
        lines = (out / "classify_sweep.csv").read_text().strip().splitlines()
        header = lines[0].split(",")
        assert {"object", "trial", "m", "label", "correct", "fps"} <= set(header)
        assert len(lines) == 1 + 3 * 2 * 2  # objects x trials x m values
        summary = json.loads((out / "classify_summary.json").read_text())
        assert set(summary) == {"7", "13"}

    def test_no_figures_flag(self, runner, config_path, tmp_path):
        out = tmp_path / "out"
        base = ["--config", config_path, "--out", str(out), "--no-figures"]
        run(runner, ["dict-train"] + base)
        assert run(runner, ["classify-sweep"] + base).exit_code == 0
        assert not (out / "classify_accuracy.png").exists()


class TestDeterminism:
    def test_repeated_runs_are_byte_identical(self, runner, config_path,
                                              tmp_path):
        hashes = []
        for name in ("run_a", "run_b"):
            out = tmp_path / name
            base = ["--config", config_path, "--out", str(out)]
            run(runner, ["dict-train"] + base)
            run(runner, ["classify-sweep"] + base)
            run(runner, ["adapt"] + base)
            hashes.append(hash_dir(out))
        assert hashes[0] == hashes[1]
