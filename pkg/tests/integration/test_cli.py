"""
Integration Tests for the entailkit Command Line

Runs every subcommand on tiny configurations, chaining each stage's files
into the next one.
"""

import json

import pytest

from src.evalcli.cli import main
from src.evalcli.report import read_report


# ========== Fixtures ==========

@pytest.fixture
def config_file(tmp_path, tiny_overrides):
    """Tiny configuration as a flat key=value file"""
    lines = ["# tiny desk-scale run"]
    for key, value in sorted(tiny_overrides.items()):
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key}={value}")
    path = tmp_path / "tiny.cfg"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def corpora(tmp_path, config_file, capsys):
    assert main(["--config", config_file, "synth", "--out", str(tmp_path / "data"), "--seed", "0"]) == 0
    paths = json.loads(capsys.readouterr().out)
    return paths


# ========== Usage Tests ==========

class TestUsage:
    """Exit codes of malformed invocations"""

    def test_unknown_flag(self):
        assert main(["synth", "--bogus"]) == 1

    def test_missing_subcommand(self):
        assert main([]) == 1

    def test_eval_without_runs(self, tmp_path, corpora):
        assert main(["eval", "--corpus", corpora["test"], "--out", str(tmp_path / "r.json")]) == 1

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("learning_rate=0.1\n")
        assert main(["--config", str(path), "synth", "--out", str(tmp_path / "data")]) == 1

    def test_missing_corpus(self, tmp_path):
        assert main(["stats", "--corpus", str(tmp_path / "absent.jsonl")]) == 1


# ========== Subcommand Tests ==========

class TestSubcommands:
    """Each stage consumes the previous stage's files"""

    def test_synth_writes_three_splits(self, corpora):
        assert set(corpora) == {"train", "val", "test"}

    def test_synth_is_deterministic(self, tmp_path, config_file, corpora, capsys):
        assert main(["--config", config_file, "synth", "--out", str(tmp_path / "again"), "--seed", "0"]) == 0
        again = json.loads(capsys.readouterr().out)
        for split in corpora:
            with open(corpora[split], "rb") as a, open(again[split], "rb") as b:
                assert a.read() == b.read()

    def test_stats(self, tmp_path, corpora, capsys):
        out = tmp_path / "stats.json"
        assert main(["stats", "--corpus", corpora["train"], "--out", str(out)]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["edge_count"] == 18
        assert printed["weak_edge_count"] == 0
        assert json.loads(out.read_text()) == printed

    def test_oracle_pipeline(self, tmp_path, config_file, corpora, capsys):
        revised = tmp_path / "revised" / "manifest.jsonl"
        verdicts = tmp_path / "verdicts.jsonl"
        assert main([
            "--config", config_file, "revise", "--corpus", corpora["train"], "--classifier", "oracle",
            "--out", str(revised), "--verdicts", str(verdicts),
        ]) == 0
        counts = json.loads(capsys.readouterr().out)
        assert counts["false_edges"] == 0
        assert counts["recovered_edges"] == counts["weak_edges"]
        assert verdicts.exists()

        checkpoint = tmp_path / "retrieval.ckpt"
        assert main([
            "--config", config_file, "train-retrieval", "--corpus", str(revised), "--out", str(checkpoint),
        ]) == 0
        assert checkpoint.exists()
        assert checkpoint.with_suffix(".log.jsonl").exists()

        runs = tmp_path / "runs"
        assert main(["rank", "--model", str(checkpoint), "--corpus", corpora["test"], "--out", str(runs)]) == 0
        capsys.readouterr()

        report_path = tmp_path / "report.json"
        assert main([
            "--config", config_file, "eval", "--corpus", corpora["test"],
            "--run", str(runs / "text.jsonl"), "--run", str(runs / "image.jsonl"), "--out", str(report_path),
        ]) == 0
        report = read_report(report_path)
        assert {"TR@1", "TR@5", "IR@1", "IR@5", "E@5"} <= set(report["metrics"])
        assert report["metrics"]["E@5"] >= report["metrics"]["TR@1"] / 5
        assert report_path.with_suffix(".csv").exists()
        assert report_path.with_suffix(".svg").exists()
        assert "TR@1" in capsys.readouterr().out

    def test_train_entail_reports_branches(self, tmp_path, config_file, corpora, capsys):
        checkpoint = tmp_path / "classifier.ckpt"
        assert main([
            "--config", config_file, "train-entail", "--corpus", corpora["train"],
            "--out", str(checkpoint), "--test", corpora["test"],
        ]) == 0
        results = json.loads(capsys.readouterr().out)
        assert set(results) == {"default", "textual", "visual", "multimodal"}
        assert all(0.0 <= r["accuracy"] <= 1.0 for r in results.values())

        revised = tmp_path / "revised.jsonl"
        assert main([
            "--config", config_file, "revise", "--corpus", corpora["train"],
            "--classifier", str(checkpoint), "--out", str(revised),
        ]) == 0
        assert revised.exists()

    def test_gradcheck_one_seed(self, capsys):
        assert main(["gradcheck", "--seeds", "1"]) == 0
        assert "max relative error" in capsys.readouterr().out

    def test_gradcheck_rejects_zero_seeds(self):
        assert main(["gradcheck", "--seeds", "0"]) == 1
