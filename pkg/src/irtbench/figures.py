"""Matplotlib figure builders for benchmark reports.

Every builder returns a ``matplotlib.figure.Figure`` so callers can test
figures without touching the filesystem; ``save_figure`` renders one to a
PNG file. The Agg backend is selected before pyplot is imported, so the
module works headless.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.figure import Figure

from .analysis import AGGREGATE_COLUMNS, Bin, CorrelationResult, DatasetSummary
from .errors import EmptyInput
from .glicko2 import Rating, confidence_interval
from .tournament import BumpPoint

FIGURE_DPI = 150


def save_figure(fig: Figure, path: str | Path, dpi: int = FIGURE_DPI) -> Path:
    """Render ``fig`` to ``path`` as a PNG file and close it.

    Parent directories are created as needed. Returns the resolved path.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, dpi=dpi, format="png", bbox_inches="tight")
    plt.close(fig)
    return target


def parameter_scatter_figure(summaries: Sequence[DatasetSummary]) -> Figure:
    """Scatter of per-dataset mean difficulty against mean discrimination.

    Marker color encodes the mean guessing parameter, so datasets whose
    items are answerable by chance stand out.
    """
    if not summaries:
        raise EmptyInput("no dataset summaries to plot")
    mean_b = [s.mean_b for s in summaries]
    mean_a = [s.mean_a for s in summaries]
    mean_c = [s.mean_c for s in summaries]

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    points = ax.scatter(mean_b, mean_a, c=mean_c, cmap="viridis", s=36, edgecolors="none")
    fig.colorbar(points, ax=ax, label="mean guessing")
    ax.set_xlabel("mean difficulty")
    ax.set_ylabel("mean discrimination")
    ax.set_title("Dataset parameter landscape")
    ax.grid(True, linewidth=0.4, alpha=0.5)
    return fig


def bin_trend_figure(bins: Sequence[Bin]) -> Figure:
    """Mean difficulty and mean discrimination across ordered bins.

    Difficulty uses the left axis, discrimination the right, with one
    marker per bin so monotone trends are visible at a glance.
    """
    if not bins:
        raise EmptyInput("no bins to plot")
    indices = [b.index for b in bins]
    difficulty = [b.mean_difficulty for b in bins]
    discrimination = [b.mean_discrimination for b in bins]

    fig, ax_b = plt.subplots(figsize=(7.0, 4.5))
    ax_a = ax_b.twinx()
    line_b, = ax_b.plot(indices, difficulty, marker="o", color="tab:blue", label="mean difficulty")
    line_a, = ax_a.plot(
        indices, discrimination, marker="s", color="tab:orange", label="mean discrimination"
    )
    ax_b.set_xlabel("bin")
    ax_b.set_ylabel("mean difficulty")
    ax_a.set_ylabel("mean discrimination")
    ax_b.set_xticks(list(indices))
    ax_b.set_title("Bin parameter trends")
    ax_b.legend(handles=[line_b, line_a], loc="best")
    ax_b.grid(True, linewidth=0.4, alpha=0.5)
    return fig


def spread_figure(summaries: Sequence[DatasetSummary]) -> Figure:
    """Horizontal bars of difficulty spread (std of b) per dataset.

    Datasets are shown from widest to narrowest spread; narrow spread
    means the dataset probes one ability level only.
    """
    if not summaries:
        raise EmptyInput("no dataset summaries to plot")
    ordered = sorted(summaries, key=lambda s: (-s.std_b, s.dataset_id))
    names = [s.dataset_id for s in ordered]
    spreads = [s.std_b for s in ordered]

    height = max(3.0, 0.28 * len(ordered) + 1.2)
    fig, ax = plt.subplots(figsize=(7.0, height))
    positions = np.arange(len(ordered))
    ax.barh(positions, spreads, color="tab:blue")
    ax.set_yticks(positions)
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("difficulty standard deviation")
    ax.set_title("Difficulty spread by dataset")
    return fig


def correlation_heatmap_figure(result: CorrelationResult) -> Figure:
    """Heatmap of Pearson correlations between aggregates and metadata.

    Rows are fit aggregates, columns metadata fields; cells display the
    coefficient and undefined pairs (constant columns) are greyed out.
    """
    if not result.entries:
        raise EmptyInput("no correlation entries to plot")
    fields = sorted(result.entries)
    aggregates = list(AGGREGATE_COLUMNS)
    grid = np.full((len(aggregates), len(fields)), np.nan)
    for j, field_name in enumerate(fields):
        for i, aggregate in enumerate(aggregates):
            r = result.entries[field_name].get(aggregate)
            if r is not None:
                grid[i, j] = r

    fig, ax = plt.subplots(figsize=(1.1 * len(fields) + 2.5, 0.6 * len(aggregates) + 1.8))
    masked = np.ma.masked_invalid(grid)
    cmap = plt.get_cmap("coolwarm").copy()
    cmap.set_bad("0.85")
    image = ax.imshow(masked, cmap=cmap, vmin=-1.0, vmax=1.0, aspect="auto")
    fig.colorbar(image, ax=ax, label="Pearson r")
    ax.set_xticks(range(len(fields)))
    ax.set_xticklabels(fields, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(len(aggregates)))
    ax.set_yticklabels(aggregates, fontsize=8)
    for i in range(len(aggregates)):
        for j in range(len(fields)):
            if not np.isnan(grid[i, j]):
                ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center", fontsize=6)
    ax.set_title("Metadata correlations")
    return fig


def bump_chart_figure(points: Sequence[BumpPoint]) -> Figure:
    """Rank trajectories across rating periods, one line per classifier.

    Rank 1 is drawn at the top. Equal ratings within a period share a
    rank, so lines may overlap when classifiers are tied.
    """
    if not points:
        raise EmptyInput("no bump chart points to plot")
    periods = sorted({p.period for p in points})
    classifiers = sorted({p.classifier for p in points})
    by_classifier: dict[str, dict[int, int]] = {name: {} for name in classifiers}
    for p in points:
        by_classifier[p.classifier][p.period] = p.rank

    fig, ax = plt.subplots(figsize=(7.5, 4.5))
    for name in classifiers:
        ranks = [by_classifier[name].get(period) for period in periods]
        ax.plot(periods, ranks, marker="o", label=name)
    ax.invert_yaxis()
    ax.set_xlabel("rating period")
    ax.set_ylabel("rank")
    ax.set_xticks(list(periods))
    max_rank = max(p.rank for p in points)
    ax.set_yticks(range(1, max_rank + 1))
    ax.set_title("Ranking trajectories")
    ax.legend(loc="center left", bbox_to_anchor=(1.02, 0.5), fontsize=8)
    ax.grid(True, linewidth=0.4, alpha=0.5)
    return fig


def rating_interval_figure(ratings: Mapping[str, Rating]) -> Figure:
    """Final ratings with 95 percent confidence whiskers.

    Classifiers are ordered from strongest to weakest; the whisker spans
    rating plus or minus 1.96 rating deviations.
    """
    if not ratings:
        raise EmptyInput("no ratings to plot")
    ordered = sorted(ratings.items(), key=lambda kv: (-kv[1].rating, kv[1].rd, kv[0]))
    names = [name for name, _ in ordered]
    values = [r.rating for _, r in ordered]
    spans = [confidence_interval(r) for _, r in ordered]
    errors = np.array(
        [[r.rating - low for (low, _), (_, r) in zip(spans, ordered)],
         [high - r.rating for (_, high), (_, r) in zip(spans, ordered)]]
    )

    fig, ax = plt.subplots(figsize=(7.0, 0.5 * len(ordered) + 2.0))
    positions = np.arange(len(ordered))
    ax.errorbar(values, positions, xerr=errors, fmt="o", color="tab:blue", capsize=3)
    ax.set_yticks(positions)
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xlabel("rating")
    ax.set_title("Final ratings with 95% intervals")
    ax.grid(True, axis="x", linewidth=0.4, alpha=0.5)
    return fig
