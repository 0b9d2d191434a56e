"""Tests for the command line interface: config merging, exit codes,
and the files each subcommand writes."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import pytest

import irtbench.cli as cli
from irtbench.analysis import DISCRIMINATION_NOTE
from irtbench.cli import (
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_PARTIAL,
    EXIT_VALIDATION,
    RANKING_COLUMNS,
    RunConfig,
    _build_config,
    build_parser,
    main,
)
from irtbench.irt import FitReport, IrtModel, ItemParams

TOY_DIR = Path(__file__).parent / "data" / "toy"


def parse_config(argv) -> RunConfig:
    return _build_config(build_parser().parse_args(argv))


def write_matrix_csv(path: Path, rows: dict[str, list[int]]) -> Path:
    n_items = len(next(iter(rows.values())))
    header = ["classifier"] + [f"item_{i}" for i in range(n_items)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for name, cells in rows.items():
            writer.writerow([name] + cells)
    return path


def write_model_json(path: Path, dataset_id: str, abilities: dict[str, float],
                     items=None) -> Path:
    model = IrtModel(
        dataset_id=dataset_id,
        items=items or [ItemParams(1.5, 0.0, 0.1), ItemParams(1.0, -1.0, 0.2),
                        ItemParams(2.0, 1.0, 0.05)],
        abilities=abilities,
        fit_report=FitReport(3, -10.0, True, ()),
    )
    path.write_text(json.dumps(model.to_json_dict()), encoding="utf-8")
    return path


def read_csv_rows(path: Path) -> list[dict]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfigMerging:
    """Defaults, then the JSON config file, then flags; flags win."""

    def test_defaults(self):
        config = parse_config(["analyze"])
        assert config.strategy == "difficulty_asc"
        assert config.n_bins == 6
        assert config.seed == 0
        assert config.format == "csv"
        assert config.augment is False

    def test_config_file_values_apply(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"strategy": "low_std_b", "bins": 3, "tau": 0.8}))
        config = parse_config(["analyze", "--config", str(cfg)])
        assert config.strategy == "low_std_b"
        assert config.n_bins == 3
        assert config.tau == 0.8

    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"tau": 0.8, "bins": 3}))
        config = parse_config(
            ["analyze", "--config", str(cfg), "--tau", "0.2", "--bins", "5"]
        )
        assert config.tau == 0.2
        assert config.n_bins == 5

    def test_positional_inputs_route_by_command(self):
        fit_config = parse_config(["fit", "a.csv", "b.csv"])
        assert fit_config.matrices == ("a.csv", "b.csv")
        assert fit_config.models == ()
        ranking_config = parse_config(["tournament", "m1.json"])
        assert ranking_config.models == ("m1.json",)
        assert ranking_config.matrices == ()

    def test_unknown_config_key_fails_validation(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"bons": 3}))
        assert main(["analyze", "--config", str(cfg)]) == EXIT_VALIDATION
        assert "bons" in capsys.readouterr().err

    def test_malformed_config_file_fails_validation(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text("{not json")
        assert main(["analyze", "--config", str(cfg)]) == EXIT_VALIDATION

    def test_example_config_file_parses(self):
        config = parse_config(
            ["fit", "--config", str(TOY_DIR / "toy_config.json")]
        )
        assert config.augment is True
        assert config.n_bins == 3
        assert config.metadata and config.metadata.endswith("metadata.json")


class TestValidationFailures:
    def test_missing_input_path(self, tmp_path, capsys):
        assert main(["fit", str(tmp_path / "ghost.csv")]) == EXIT_VALIDATION
        assert "ghost.csv" in capsys.readouterr().err

    def test_bad_tau(self, tmp_path):
        matrix = write_matrix_csv(tmp_path / "m.csv", {"a": [1, 0], "b": [0, 1]})
        assert main(["fit", str(matrix), "--tau", "0"]) == EXIT_VALIDATION

    def test_usage_errors_exit_one(self, capsys):
        assert main(["not-a-command"]) == EXIT_VALIDATION
        assert main(["analyze", "--strategy", "alphabetical"]) == EXIT_VALIDATION
        assert main([]) == EXIT_VALIDATION
        capsys.readouterr()

    def test_fit_requires_inputs(self):
        assert main(["fit"]) == EXIT_VALIDATION

    def test_tournament_requires_models(self):
        assert main(["tournament"]) == EXIT_VALIDATION


class TestFitCommand:
    def test_fit_writes_model_and_summary(self, tmp_path, capsys):
        matrix = write_matrix_csv(
            tmp_path / "demo.csv",
            {
                "strong": [1, 1, 1, 1, 0, 1],
                "medium": [1, 1, 0, 1, 0, 0],
                "weak": [0, 0, 1, 0, 0, 0],
                "mixed": [1, 0, 0, 1, 1, 0],
            },
        )
        out = tmp_path / "out"
        assert main(["fit", str(matrix), "--out", str(out)]) == EXIT_OK

        model_path = out / "models" / "demo.model.json"
        assert model_path.exists()
        model = IrtModel.from_json_dict(json.loads(model_path.read_text()))
        assert model.dataset_id == "demo"
        assert len(model.items) == 6
        assert set(model.abilities) == {"strong", "medium", "weak", "mixed"}

        rows = read_csv_rows(out / "fit_summary.csv")
        assert len(rows) == 1
        assert rows[0]["dataset_id"] == "demo"
        assert rows[0]["respondents"] == "4"
        assert rows[0]["items"] == "6"
        assert rows[0]["error"] == ""
        assert "wrote" in capsys.readouterr().out

    def test_json_format_switches_summary_file(self, tmp_path):
        matrix = write_matrix_csv(tmp_path / "m.csv", {"a": [1, 0, 1], "b": [0, 1, 0]})
        out = tmp_path / "out"
        assert main(["fit", str(matrix), "--out", str(out), "--format", "json"]) == EXIT_OK
        assert (out / "fit_summary.json").exists()
        assert not (out / "fit_summary.csv").exists()
        payload = json.loads((out / "fit_summary.json").read_text())
        assert payload[0]["dataset_id"] == "m"

    def test_partial_failure_exits_two_and_records_error(self, tmp_path, capsys):
        good = write_matrix_csv(tmp_path / "good.csv", {"a": [1, 0, 1], "b": [0, 1, 0]})
        bad = tmp_path / "bad.csv"
        bad.write_text("classifier,item_0,item_1\nx,1\n")  # jagged row
        out = tmp_path / "out"
        assert main(["fit", str(good), str(bad), "--out", str(out)]) == EXIT_PARTIAL
        rows = read_csv_rows(out / "fit_summary.csv")
        by_id = {r["dataset_id"]: r for r in rows}
        assert by_id["good"]["error"] == ""
        assert by_id["bad"]["error"] != ""
        assert "bad.csv" in capsys.readouterr().err

    def test_all_failures_exit_one(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("classifier,item_0\nx,maybe\n")
        assert main(["fit", str(bad), "--out", str(tmp_path / "out")]) == EXIT_VALIDATION

    def test_item_hard_limit_refused(self, tmp_path):
        n = 1000
        header = "classifier," + ",".join(f"i{k}" for k in range(n))
        row_a = "a," + ",".join("1" if k % 2 else "0" for k in range(n))
        row_b = "b," + ",".join("0" if k % 2 else "1" for k in range(n))
        big = tmp_path / "big.csv"
        big.write_text("\n".join([header, row_a, row_b]) + "\n")
        assert main(["fit", str(big), "--out", str(tmp_path / "out")]) == EXIT_VALIDATION

    def test_inputs_are_not_mutated(self, tmp_path):
        matrix = write_matrix_csv(tmp_path / "m.csv", {"a": [1, 0, 1], "b": [0, 1, 0]})
        before = hashlib.sha256(matrix.read_bytes()).hexdigest()
        main(["fit", str(matrix), "--out", str(tmp_path / "out")])
        assert hashlib.sha256(matrix.read_bytes()).hexdigest() == before


class TestTournamentCommand:
    @staticmethod
    def model_files(tmp_path) -> list[str]:
        paths = []
        for k, dataset_id in enumerate(("d1", "d2")):
            path = write_model_json(
                tmp_path / f"{dataset_id}.model.json",
                dataset_id,
                {"alice": 2.0, "bob": -2.0},
            )
            paths.append(str(path))
        return paths

    def test_ranking_columns_and_winner_order(self, tmp_path):
        out = tmp_path / "out"
        code = main(["tournament", *self.model_files(tmp_path), "--out", str(out)])
        assert code == EXIT_OK

        rows = read_csv_rows(out / "final_ranking.csv")
        assert list(rows[0]) == list(RANKING_COLUMNS)
        assert [r["Classifier"] for r in rows] == ["alice", "bob"]
        assert [r["Rank"] for r in rows] == ["1", "2"]
        assert float(rows[0]["Rating"]) > float(rows[1]["Rating"])

        history = json.loads((out / "rating_history.json").read_text())
        assert len(history["periods"]) == 2
        bump = read_csv_rows(out / "bump_chart.csv")
        assert {r["classifier"] for r in bump} == {"alice", "bob"}
        assert len(bump) == 4  # two classifiers over two periods

    def test_strategy_flag_controls_period_order(self, tmp_path):
        out_a = tmp_path / "asc"
        out_b = tmp_path / "desc_equivalent"
        files = self.model_files(tmp_path)
        assert main(["tournament", *files, "--strategy", "low_std_b", "--out", str(out_a)]) == EXIT_OK
        assert main(["tournament", *files, "--strategy", "high_std_b", "--out", str(out_b)]) == EXIT_OK
        # both run; ordering metadata is recorded in the history
        ids = {
            json.loads((d / "rating_history.json").read_text())["periods"][0]["dataset_id"]
            for d in (out_a, out_b)
        }
        assert ids  # periods labeled by dataset


class TestAnalyzeCommand:
    def test_bundled_table_report(self, tmp_path):
        out = tmp_path / "out"
        assert main(["analyze", "--out", str(out)]) == EXIT_OK

        report = json.loads((out / "benchmark_report.json").read_text())
        assert report["n_datasets"] == 60
        assert report["percentages"]["pct_b_above_0"] == pytest.approx(10 / 60)
        assert report["percentages"]["pct_b_above_1"] == pytest.approx(2 / 60)
        assert report["percentages"]["pct_positive_a"] == pytest.approx(55 / 60)
        assert len(report["bins"]) == 6
        assert "warning" in report["correlations"]
        assert DISCRIMINATION_NOTE in report["notes"]

        assert (out / "percentages.csv").exists()
        assert len(read_csv_rows(out / "bins.csv")) == 6
        assert (out / "subsets.csv").exists()
        assert (out / "correlations.csv").exists()

    def test_bins_flag_changes_bin_count(self, tmp_path):
        out = tmp_path / "out"
        assert main(["analyze", "--bins", "4", "--out", str(out)]) == EXIT_OK
        assert len(read_csv_rows(out / "bins.csv")) == 4

    def test_model_run_notes_skip_bundled_table_caveat(self, tmp_path):
        files = TestTournamentCommand.model_files(tmp_path)
        out = tmp_path / "out"
        assert main(["analyze", *files, "--bins", "2", "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "benchmark_report.json").read_text())
        assert report["n_datasets"] == 2
        assert DISCRIMINATION_NOTE not in report["notes"]

    def test_metadata_reaches_correlations(self, tmp_path):
        paths = []
        for k in range(3):
            paths.append(
                str(
                    write_model_json(
                        tmp_path / f"d{k}.model.json",
                        f"d{k}",
                        {"alice": 1.0 + k, "bob": -1.0},
                        items=[ItemParams(1.0 + k, 0.5 * k, 0.1)],
                    )
                )
            )
        metadata = {
            f"d{k}": {
                "number_of_classes": 2,
                "number_of_instances": 100 * (k + 1),
                "number_of_features": 5,
                "class_entropy": 1.0,
                "dimensionality": 0.05,
                "pct_missing_instances": 0.0,
                "majority_class_pct": 60.0,
                "minority_class_pct": 40.0,
            }
            for k in range(3)
        }
        meta_path = tmp_path / "meta.json"
        meta_path.write_text(json.dumps(metadata))
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"metadata": str(meta_path), "bins": 1}))

        out = tmp_path / "out"
        code = main(["analyze", *paths, "--config", str(cfg), "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads((out / "benchmark_report.json").read_text())
        assert "entries" in report["correlations"]
        assert report["correlations"]["n_datasets"] == 3


class TestReportCommand:
    def test_bundled_table_report_renders_core_figures(self, tmp_path):
        out = tmp_path / "out"
        assert main(["report", "--out", str(out)]) == EXIT_OK
        for name in ("parameter_scatter.png", "bin_trends.png", "spread.png"):
            png = out / "figures" / name
            assert png.exists(), name
            assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        # no models: no tournament figures; no metadata: no heatmap
        assert not (out / "figures" / "bump_chart.png").exists()
        assert not (out / "figures" / "final_ratings.png").exists()
        assert not (out / "figures" / "correlations.png").exists()
        assert (out / "benchmark_report.json").exists()

    def test_model_report_adds_tournament_figures(self, tmp_path):
        files = TestTournamentCommand.model_files(tmp_path)
        out = tmp_path / "out"
        assert main(["report", *files, "--bins", "2", "--out", str(out)]) == EXIT_OK
        assert (out / "figures" / "bump_chart.png").exists()
        assert (out / "figures" / "final_ratings.png").exists()
        assert (out / "final_ranking.csv").exists()


class TestOutputDirectoryResolution:
    def test_env_var_is_honored(self, tmp_path, monkeypatch):
        env_dir = tmp_path / "from_env"
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(env_dir))
        assert main(["analyze"]) == EXIT_OK
        assert (env_dir / "benchmark_report.json").exists()

    def test_flag_beats_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "from_env"))
        flagged = tmp_path / "from_flag"
        assert main(["analyze", "--out", str(flagged)]) == EXIT_OK
        assert (flagged / "benchmark_report.json").exists()
        assert not (tmp_path / "from_env").exists()


class TestInternalErrors:
    def test_unexpected_exception_exits_three(self, monkeypatch, capsys):
        def boom(config):
            raise RuntimeError("wires crossed")

        monkeypatch.setitem(cli._COMMANDS, "analyze", boom)
        assert main(["analyze"]) == EXIT_INTERNAL
        assert "internal error" in capsys.readouterr().err


class TestToyPipeline:
    """End to end over the checked-in toy inputs."""

    def test_fit_then_tournament_then_analyze(self, tmp_path):
        out = tmp_path / "out"
        inputs = [str(TOY_DIR / "toy_alpha.csv"), str(TOY_DIR / "toy_gamma.json")]
        assert main(["fit", *inputs, "--out", str(out)]) == EXIT_OK

        models = sorted(str(p) for p in (out / "models").glob("*.model.json"))
        assert len(models) == 2
        assert main(["tournament", *models, "--out", str(out)]) == EXIT_OK
        ranking = read_csv_rows(out / "final_ranking.csv")
        assert len(ranking) == 6  # six classifiers in the toy matrices

        assert main(["analyze", *models, "--bins", "2", "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "benchmark_report.json").read_text())
        assert report["n_datasets"] == 2
