"""Command-line front end wiring ingestion, fitting, tournaments, analysis.

Subcommands:
  fit         fit one model per response-matrix file
  tournament  rank fitted models through Glicko-2 rating periods
  analyze     benchmark quality report (percentages, bins, subsets, correlations)
  report      analyze (plus tournament when models are given) with rendered figures

Every command reads a RunConfig assembled from defaults, then an optional
JSON config file (--config), then command-line flags; flags win. Outputs are
deterministic for a fixed config: JSON files carry full precision with
sorted keys, CSV tables round floats to 3 decimals for presentation.

Exit codes: 0 success, 1 validation error, 2 partial success (some inputs
failed), 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from collections import Counter
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .analysis import (
    DISCRIMINATION_NOTE,
    SUBSET_STRATEGIES,
    BenchmarkTable,
    Bin,
    CorrelationResult,
    benchmark_percentages,
    correlate_metadata,
    load_fixture,
    make_bins,
    subset_strategy,
    summarize_dataset,
)
from .errors import DomainError, IrtBenchError
from .glicko2 import DEFAULT_TAU
from .irt import IrtModel, birnbaum_fit
from .responses import (
    ResponseMatrix,
    load_metadata_json,
    parse_response_matrix,
    synthesize_artificial,
    validate_benchmark_conventions,
)
from .tournament import RatingHistory, bump_chart_data, run_tournament

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARTIAL = 2
EXIT_INTERNAL = 3

OUTPUT_DIR_ENV = "IRTBENCH_OUT"
DEFAULT_OUTPUT_DIR = "irtbench_out"

RANKING_COLUMNS = ("Rank", "Classifier", "Rating", "RD", "Volatility")

_CONFIG_KEYS = (
    "matrices",
    "models",
    "metadata",
    "fixture",
    "strategy",
    "bins",
    "tau",
    "seed",
    "exclude_negative_discrimination",
    "draw_epsilon",
    "out",
    "format",
    "augment",
)


@dataclass
class RunConfig:
    """Effective settings for one command invocation."""

    matrices: tuple[str, ...] = ()
    models: tuple[str, ...] = ()
    metadata: str | None = None
    fixture: str | None = None
    strategy: str = "difficulty_asc"
    n_bins: int = 6
    tau: float = DEFAULT_TAU
    seed: int = 0
    exclude_negative_discrimination: bool = False
    draw_epsilon: float = 0.0
    out: str | None = None
    format: str = "csv"
    augment: bool = False

    def output_dir(self) -> Path:
        if self.out is not None:
            return Path(self.out)
        env = os.environ.get(OUTPUT_DIR_ENV)
        return Path(env) if env else Path(DEFAULT_OUTPUT_DIR)

    def validate(self) -> None:
        if self.tau <= 0:
            raise DomainError(f"tau must be > 0, got {self.tau}")
        if self.n_bins < 1:
            raise DomainError(f"bins must be >= 1, got {self.n_bins}")
        if self.draw_epsilon < 0:
            raise DomainError(f"draw-epsilon must be >= 0, got {self.draw_epsilon}")
        if self.strategy not in SUBSET_STRATEGIES:
            raise DomainError(
                f"unknown strategy {self.strategy!r}; expected one of {SUBSET_STRATEGIES}"
            )
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        missing = [
            p
            for p in (*self.matrices, *self.models, self.metadata, self.fixture)
            if p is not None and not Path(p).exists()
        ]
        if missing:
            raise DomainError(f"input paths do not exist: {missing}")

    def to_json_dict(self) -> dict:
        """Semantic knobs only; input paths would tie reports to one machine."""
        return {
            "strategy": self.strategy,
            "bins": self.n_bins,
            "tau": self.tau,
            "seed": self.seed,
            "exclude_negative_discrimination": self.exclude_negative_discrimination,
            "draw_epsilon": self.draw_epsilon,
            "format": self.format,
            "augment": self.augment,
        }


def _load_config_file(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise DomainError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(obj) - set(_CONFIG_KEYS))
    if unknown:
        raise DomainError(f"unknown config keys {unknown}; expected among {_CONFIG_KEYS}")
    return obj


def _build_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config is not None:
        raw = _load_config_file(args.config)
        if "bins" in raw:
            raw["n_bins"] = raw.pop("bins")
        for name in ("matrices", "models"):
            if name in raw:
                raw[name] = tuple(str(p) for p in raw[name])
        config = replace(config, **raw)

    overrides = {}
    for flag, field_name in (
        ("strategy", "strategy"),
        ("bins", "n_bins"),
        ("tau", "tau"),
        ("seed", "seed"),
        ("exclude_negative_discrimination", "exclude_negative_discrimination"),
        ("draw_epsilon", "draw_epsilon"),
        ("out", "out"),
        ("format", "format"),
    ):
        value = getattr(args, flag)
        if value is not None:
            overrides[field_name] = value
    if overrides:
        config = replace(config, **overrides)

    if args.inputs:
        if args.command == "fit":
            config = replace(config, matrices=tuple(args.inputs))
        else:
            config = replace(config, models=tuple(args.inputs))
    return config


# ---------------------------------------------------------------------------
# Deterministic writers.


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _fmt(value) -> str:
    """Presentation formatting: floats to 3 decimals, all else as str."""
    if isinstance(value, bool) or not isinstance(value, float):
        return "" if value is None else str(value)
    return f"{value:.3f}"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")
    return path


# ---------------------------------------------------------------------------
# fit


def _matrix_from_file(path: str, seed: int, augment: bool) -> ResponseMatrix:
    p = Path(path)
    fmt = "json" if p.suffix.lower() == ".json" else "csv"
    matrix = parse_response_matrix(p, format=fmt, dataset_id=p.stem if fmt == "csv" else None)
    for warning in validate_benchmark_conventions(matrix):
        print(f"warning: {matrix.dataset_id}: {warning.items} items exceeds "
              f"the {warning.cap}-instance convention", file=sys.stderr)
    if not augment:
        return matrix
    if matrix.true_labels is None:
        raise DomainError(
            f"{matrix.dataset_id}: augment requires true labels in the matrix"
        )
    counts = matrix.class_counts or dict(Counter(matrix.true_labels))
    rows = synthesize_artificial(
        matrix.true_labels, counts, seeds=(seed + 1, seed + 2, seed + 3)
    )
    clash = sorted(set(rows) & set(matrix.respondents))
    if clash:
        raise DomainError(f"{matrix.dataset_id}: respondents {clash} already present")
    names = list(matrix.respondents) + list(rows)
    data = [list(r) for r in matrix.responses] + [rows[n] for n in rows]
    return ResponseMatrix(
        dataset_id=matrix.dataset_id,
        respondents=names,
        items=matrix.items,
        responses=data,
        true_labels=matrix.true_labels,
        class_counts=matrix.class_counts,
    )


def cmd_fit(config: RunConfig) -> int:
    if not config.matrices:
        raise DomainError("fit needs at least one response matrix path")
    out = config.output_dir()

    rows = []
    models: dict[str, IrtModel] = {}
    failures = 0
    for path in config.matrices:
        try:
            matrix = _matrix_from_file(path, config.seed, config.augment)
            if matrix.dataset_id in models:
                raise DomainError(f"duplicate dataset id {matrix.dataset_id!r}")
            model = birnbaum_fit(matrix)
            models[matrix.dataset_id] = model
            summary = summarize_dataset(model)
            _write(
                out / "models" / f"{model.dataset_id}.model.json",
                _json_text(model.to_json_dict()),
            )
            rows.append(
                {
                    "dataset_id": model.dataset_id,
                    "file": path,
                    "respondents": len(model.abilities),
                    "items": len(model.items),
                    "iterations": model.fit_report.iterations,
                    "converged": model.fit_report.converged,
                    "log_likelihood": model.fit_report.log_likelihood,
                    "mean_a": summary.mean_a,
                    "mean_b": summary.mean_b,
                    "mean_c": summary.mean_c,
                    "pct_negative_a": summary.pct_negative_a,
                    "error": None,
                }
            )
        except IrtBenchError as exc:
            failures += 1
            print(f"error: {path}: {exc}", file=sys.stderr)
            rows.append(
                {
                    "dataset_id": Path(path).stem,
                    "file": path,
                    "respondents": None,
                    "items": None,
                    "iterations": None,
                    "converged": None,
                    "log_likelihood": None,
                    "mean_a": None,
                    "mean_b": None,
                    "mean_c": None,
                    "pct_negative_a": None,
                    "error": str(exc),
                }
            )

    header = list(rows[0])
    if config.format == "json":
        _write(out / "fit_summary.json", _json_text(rows))
    else:
        _write(
            out / "fit_summary.csv",
            _csv_text(header, [[_fmt(row[k]) for k in header] for row in rows]),
        )

    if failures == len(config.matrices):
        return EXIT_VALIDATION
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# tournament


def _load_models(paths) -> dict[str, IrtModel]:
    models: dict[str, IrtModel] = {}
    for path in paths:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
            model = IrtModel.from_json_dict(obj)
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"cannot load model file {path}: {exc}") from None
        if model.dataset_id in models:
            raise DomainError(f"duplicate dataset id {model.dataset_id!r} in model files")
        models[model.dataset_id] = model
    return models


def _benchmark_table(models: dict[str, IrtModel], config: RunConfig) -> BenchmarkTable:
    summaries = [summarize_dataset(models[d]) for d in sorted(models)]
    metadata = load_metadata_json(Path(config.metadata)) if config.metadata else {}
    metadata = {k: v for k, v in metadata.items() if k in models}
    return BenchmarkTable(summaries=summaries, metadata=metadata)


def _run_tournament_outputs(
    models: dict[str, IrtModel], config: RunConfig, out: Path
) -> RatingHistory:
    table = _benchmark_table(models, config)
    order = subset_strategy(table, config.strategy)
    classifiers = sorted({name for m in models.values() for name in m.abilities})
    history = run_tournament(
        order,
        models,
        classifiers,
        tau=config.tau,
        exclude_negative_discrimination=config.exclude_negative_discrimination,
        draw_epsilon=config.draw_epsilon,
    )

    _write(out / "rating_history.json", _json_text(history.to_json_dict()))

    ranking_rows = [
        (rank, name, r.rating, r.rd, r.volatility)
        for rank, (name, r) in enumerate(history.final_ranking, start=1)
    ]
    if config.format == "json":
        _write(
            out / "final_ranking.json",
            _json_text(
                [dict(zip(RANKING_COLUMNS, row)) for row in ranking_rows]
            ),
        )
    else:
        _write(
            out / "final_ranking.csv",
            _csv_text(RANKING_COLUMNS, [[_fmt(v) for v in row] for row in ranking_rows]),
        )

    points = bump_chart_data(history)
    _write(
        out / "bump_chart.csv",
        _csv_text(
            ("period", "classifier", "rank", "rating", "rd"),
            [
                [_fmt(p.period), p.classifier, _fmt(p.rank), _fmt(p.rating), _fmt(p.rd)]
                for p in points
            ],
        ),
    )
    return history


def cmd_tournament(config: RunConfig) -> int:
    if not config.models:
        raise DomainError("tournament needs at least one fitted model path")
    out = config.output_dir()
    models = _load_models(config.models)
    _run_tournament_outputs(models, config, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def _analysis_table(config: RunConfig) -> tuple[BenchmarkTable, dict[str, IrtModel]]:
    if config.models:
        models = _load_models(config.models)
        return _benchmark_table(models, config), models
    table = load_fixture(Path(config.fixture)) if config.fixture else load_fixture()
    if config.metadata:
        metadata = load_metadata_json(Path(config.metadata))
        known = {s.dataset_id for s in table.summaries}
        metadata = {k: v for k, v in metadata.items() if k in known}
        table = BenchmarkTable(summaries=table.summaries, metadata=metadata)
    return table, {}


def _bin_json(b: Bin) -> dict:
    return {
        "bin": b.index,
        "dataset_ids": list(b.dataset_ids),
        "mean_difficulty": b.mean_difficulty,
        "mean_discrimination": b.mean_discrimination,
        "mean_guessing": b.mean_guessing,
    }


def _correlation_section(table: BenchmarkTable) -> dict:
    if not table.metadata:
        return {"warning": "no dataset metadata supplied; correlations skipped"}
    try:
        result: CorrelationResult = correlate_metadata(table)
    except IrtBenchError as exc:
        return {"warning": f"correlations skipped: {exc}"}
    return {
        "entries": result.entries,
        "constant_columns": list(result.constant_columns),
        "n_datasets": result.n_datasets,
    }


def _write_analysis_outputs(
    table: BenchmarkTable, config: RunConfig, out: Path, include_note: bool
) -> dict:
    percentages = benchmark_percentages(table)
    n_bins = min(config.n_bins, len(table.summaries))
    bins = make_bins(table, key="mean_b", n_bins=n_bins)
    subsets = {name: subset_strategy(table, name) for name in SUBSET_STRATEGIES}
    correlations = _correlation_section(table)

    report = {
        "config": config.to_json_dict(),
        "n_datasets": len(table.summaries),
        "percentages": percentages,
        "bins": [_bin_json(b) for b in bins],
        "subsets": subsets,
        "correlations": correlations,
        "notes": [DISCRIMINATION_NOTE] if include_note else [],
    }
    _write(out / "benchmark_report.json", _json_text(report))

    _write(
        out / "percentages.csv",
        _csv_text(("metric", "value"), [[k, _fmt(v)] for k, v in sorted(percentages.items())]),
    )
    _write(
        out / "bins.csv",
        _csv_text(
            ("bin", "size", "mean_difficulty", "mean_discrimination", "mean_guessing", "dataset_ids"),
            [
                [
                    _fmt(b.index),
                    _fmt(len(b.dataset_ids)),
                    _fmt(b.mean_difficulty),
                    _fmt(b.mean_discrimination),
                    _fmt(b.mean_guessing),
                    ";".join(b.dataset_ids),
                ]
                for b in bins
            ],
        ),
    )
    _write(
        out / "subsets.csv",
        _csv_text(
            ("strategy", "position", "dataset_id"),
            [
                [name, _fmt(pos), dataset_id]
                for name in SUBSET_STRATEGIES
                for pos, dataset_id in enumerate(subsets[name], start=1)
            ],
        ),
    )
    correlation_rows = []
    if "entries" in correlations:
        for field_name in sorted(correlations["entries"]):
            for aggregate in sorted(correlations["entries"][field_name]):
                correlation_rows.append(
                    [field_name, aggregate, _fmt(correlations["entries"][field_name][aggregate])]
                )
    _write(
        out / "correlations.csv",
        _csv_text(("metadata_field", "aggregate", "r"), correlation_rows),
    )
    return report


def cmd_analyze(config: RunConfig) -> int:
    out = config.output_dir()
    table, models = _analysis_table(config)
    _write_analysis_outputs(table, config, out, include_note=not models)
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def cmd_report(config: RunConfig) -> int:
    from . import figures

    out = config.output_dir()
    table, models = _analysis_table(config)
    _write_analysis_outputs(table, config, out, include_note=not models)

    n_bins = min(config.n_bins, len(table.summaries))
    bins = make_bins(table, key="mean_b", n_bins=n_bins)
    fig_dir = out / "figures"
    saved = [
        figures.save_figure(
            figures.parameter_scatter_figure(table.summaries), fig_dir / "parameter_scatter.png"
        ),
        figures.save_figure(figures.bin_trend_figure(bins), fig_dir / "bin_trends.png"),
        figures.save_figure(figures.spread_figure(table.summaries), fig_dir / "spread.png"),
    ]
    if table.metadata:
        try:
            result = correlate_metadata(table)
        except IrtBenchError:
            result = None
        if result is not None:
            saved.append(
                figures.save_figure(
                    figures.correlation_heatmap_figure(result), fig_dir / "correlations.png"
                )
            )

    if models:
        history = _run_tournament_outputs(models, config, out)
        points = bump_chart_data(history)
        if points:
            saved.append(
                figures.save_figure(figures.bump_chart_figure(points), fig_dir / "bump_chart.png")
            )
        saved.append(
            figures.save_figure(
                figures.rating_interval_figure(dict(history.final_ranking)),
                fig_dir / "final_ratings.png",
            )
        )
    for path in saved:
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="irtbench", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "fit": "fit a 3PL model per response matrix (CSV or JSON)",
        "tournament": "rank classifiers across fitted models via Glicko-2",
        "analyze": "benchmark quality report over fitted models or the bundled table",
        "report": "analyze plus rendered PNG figures (and tournament when models given)",
    }
    for name, description in descriptions.items():
        sub = subparsers.add_parser(name, help=description, description=description)
        sub.add_argument(
            "inputs",
            nargs="*",
            help="matrix files for fit; model JSON files for the other commands",
        )
        sub.add_argument("--config", help="JSON config file; flags override its values")
        sub.add_argument("--strategy", choices=SUBSET_STRATEGIES, help="dataset ordering")
        sub.add_argument("--bins", type=int, help="number of difficulty bins")
        sub.add_argument("--tau", type=float, help="Glicko-2 volatility constraint")
        sub.add_argument("--seed", type=int, help="base seed for synthesized respondents")
        sub.add_argument(
            "--exclude-negative-discrimination",
            action="store_const",
            const=True,
            help="drop negative-discrimination items from scoring",
        )
        sub.add_argument(
            "--draw-epsilon", type=float, help="score gap treated as a draw"
        )
        sub.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./{DEFAULT_OUTPUT_DIR})")
        sub.add_argument("--format", choices=("csv", "json"), help="summary table format")
    return parser


_COMMANDS = {
    "fit": cmd_fit,
    "tournament": cmd_tournament,
    "analyze": cmd_analyze,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _build_config(args)
        config.validate()
        return _COMMANDS[args.command](config)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IrtBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive internal-error path
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
