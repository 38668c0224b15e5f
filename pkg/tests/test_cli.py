# tests/test_cli.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""End-to-end tests for the wave-twin command line."""

import csv
import json

import pytest

from wave_twin.cli.RunManifest import RunManifest
from wave_twin.cli.TwinCli import EXIT_CONFIG, EXIT_OK, main
from wave_twin.constants.DTwin import DTwin

from .conftest import SMALL_W


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """A small simulate -> graphs -> train run shared by the tests below."""
    root = tmp_path_factory.mktemp("pipeline")
    sim = root / "sim"
    args = ["simulate", "-t", "full", "-t", "t_intersection", "--scenarios", "6"]
    args += ["--regime", "mixed", "--w", str(SMALL_W), "--seed", "2", "--out", str(sim)]
    assert main(args) == EXIT_OK
    for kind in ("exit", "inflow"):
        records = str(sim / "records.jsonl")
        code = main(["graphs", "--in", records, "--kind", kind, "--out", str(root / kind)])
        assert code == EXIT_OK
    train = root / "train"
    code = main(
        [
            "train",
            "--graphs",
            str(root / "exit" / "graphs.jsonl"),
            "--epochs",
            "1",
            "--out",
            str(train),
        ]
    )
    assert code == EXIT_OK
    return root


class TestPipeline:
    def test_simulate_artifacts(self, pipeline):
        """simulate writes records, scenarios and a manifest."""
        sim = pipeline / "sim"
        lines = (sim / "records.jsonl").read_text().splitlines()
        assert len(lines) == 6
        assert json.loads(lines[0])["j"] in ("full", "t_intersection")
        manifest = RunManifest.read(sim)
        assert manifest.command == "simulate"
        assert manifest.seed == 2
        assert manifest.version == DTwin.VERSION
        assert set(manifest.artifacts) == {"records", "scenarios"}

    def test_train_artifacts(self, pipeline):
        """train writes the checkpoint, history, split and summary."""
        train = pipeline / "train"
        for name in ("checkpoint.bin", "history.csv", "split.json", "summary.json"):
            assert (train / name).is_file(), name
        summary = json.loads((train / "summary.json").read_text())
        assert summary["variant"] == "gatconv-ext"
        assert summary["self_attention_params"] > 0
        with open(train / "history.csv", newline="") as fh:
            assert len(list(csv.DictReader(fh))) == 1

    def test_eval(self, pipeline, capsys):
        """eval scores the test split and the two baselines."""
        out = pipeline / "eval"
        code = main(
            [
                "eval",
                "--checkpoint",
                str(pipeline / "train" / "checkpoint.bin"),
                "--graphs",
                str(pipeline / "exit" / "graphs.jsonl"),
                "--out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics["aggregations"]) == {"5", "10", "15", "20"}
        assert metrics["ci95"] == pytest.approx(1.96 * metrics["val_rmse"])
        assert set(json.loads((out / "baselines.json").read_text())) == {"zero", "mean"}
        assert '"ci95"' in capsys.readouterr().out

    def test_explain(self, pipeline):
        """explain writes latents, their projection, attributions and lane groups."""
        out = pipeline / "explain"
        code = main(
            [
                "explain",
                "--checkpoint",
                str(pipeline / "train" / "checkpoint.bin"),
                "--graphs",
                str(pipeline / "exit" / "graphs.jsonl"),
                "--out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        for name in ("latents.csv", "latents_pca.csv", "attributions.csv", "lane_groups.json"):
            assert (out / name).is_file(), name
        report = json.loads((out / "lane_groups.json").read_text())
        assert report["lane_groups"]
        assert len(report["pca_explained"]) == 2

    def test_ablated_summary(self, pipeline, capsys):
        """The ablated twin's summary has no self-attention parameter count."""
        out = pipeline / "ablated"
        code = main(
            [
                "train",
                "--graphs",
                str(pipeline / "exit" / "graphs.jsonl"),
                "--variant",
                "gatconv-ablated",
                "--max-steps",
                "1",
                "--out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert "self_attention_params" not in summary
        assert summary["steps"] == 1
        assert "self_attention_params" not in capsys.readouterr().out

    def test_variant_kind_mismatch(self, pipeline):
        """An exit variant cannot train on inflow graphs."""
        code = main(
            [
                "train",
                "--graphs",
                str(pipeline / "inflow" / "graphs.jsonl"),
                "--variant",
                "gatconv-ext",
                "--out",
                str(pipeline / "mismatch"),
            ]
        )
        assert code == EXIT_CONFIG


class TestGraphs:
    @pytest.mark.parametrize(
        "kind, expected",
        [("exit", "nodes=33 edges=22 edge_dim=29"), ("inflow", "nodes=36 edges=180 edge_dim=29")],
    )
    def test_summary_line(self, pipeline, tmp_path, capsys, kind, expected):
        """graphs prints the template size of the dataset it wrote."""
        code = main(
            [
                "graphs",
                "--in",
                str(pipeline / "sim" / "records.jsonl"),
                "--kind",
                kind,
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        assert f"{kind} graphs: {expected}" in capsys.readouterr().out

    def test_empty_input(self, tmp_path):
        """An empty record file is a configuration error."""
        empty = tmp_path / "records.jsonl"
        empty.write_text("")
        assert main(["graphs", "--in", str(empty), "--out", str(tmp_path / "g")]) == EXIT_CONFIG

    def test_missing_input(self, tmp_path):
        """A missing record file is a configuration error."""
        missing = tmp_path / "nope.jsonl"
        assert main(["graphs", "--in", str(missing), "--out", str(tmp_path / "g")]) == EXIT_CONFIG


class TestErrors:
    def test_missing_topology(self, tmp_path):
        """An unknown topology reference exits with the configuration code."""
        code = main(
            [
                "simulate",
                "-t",
                str(tmp_path / "missing.json"),
                "--scenarios",
                "1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_CONFIG

    def test_scenarios_required(self, tmp_path):
        """simulate needs a scenario count from a flag or the config file."""
        assert main(["simulate", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_bad_config_file(self, tmp_path):
        """A configuration file that is not a JSON object is rejected."""
        config = tmp_path / "config.json"
        config.write_text("[1, 2]")
        code = main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG

    def test_unknown_command(self):
        """argparse rejects unknown sub-commands with exit status 2."""
        with pytest.raises(SystemExit) as e:
            main(["fly"])
        assert e.value.code == 2

    def test_version(self, capsys):
        """--version prints the tool version."""
        with pytest.raises(SystemExit):
            main(["--version"])
        assert DTwin.VERSION in capsys.readouterr().out


class TestGradcheck:
    def test_all_cases_pass(self, capsys):
        """Every primitive and layer passes the finite-difference check."""
        assert main(["gradcheck"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert "max relative error" in out

    def test_single_case(self, capsys):
        """--case restricts the run to the named case."""
        assert main(["gradcheck", "--case", "relu"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("relu")


@pytest.mark.slow
class TestDeskScale:
    def test_full_window_pipeline(self, tmp_path):
        """A full-window run trains every variant family end to end."""
        sim = tmp_path / "sim"
        args = ["simulate", "--scenarios", "12", "--regime", "mixed", "--out", str(sim)]
        assert main(args) == EXIT_OK
        for kind, variant in (("exit", "sageconv-ext"), ("inflow", "gatconv-inf")):
            graphs = tmp_path / kind
            records = str(sim / "records.jsonl")
            assert main(["graphs", "--in", records, "-k", kind, "-o", str(graphs)]) == EXIT_OK
            out = tmp_path / f"train_{kind}"
            code = main(
                [
                    "train",
                    "-g",
                    str(graphs / "graphs.jsonl"),
                    "--variant",
                    variant,
                    "--epochs",
                    "2",
                    "-o",
                    str(out),
                ]
            )
            assert code == EXIT_OK
            summary = json.loads((out / "summary.json").read_text())
            assert summary["variant"] == variant


if __name__ == "__main__":
    pytest.main([__file__])
