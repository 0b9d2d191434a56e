"""Response-matrix ingestion: parsing, validation, artificial respondents, metadata.

A response matrix records dichotomous correctness outcomes, one row per
respondent (classifier) and one column per item (test instance). Classifier
training and test-set construction happen upstream; this module only accepts
the resulting 0/1 matrices, synthesizes baseline respondents, and loads the
per-dataset metadata used by the analysis layer.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    DuplicateRespondent,
    EmptyInput,
    MalformedCell,
    NotFound,
    ShapeError,
    TieError,
    TooManyItems,
)

# Benchmark conventions: test sets are capped at 500 instances operationally,
# and joint estimation is not supported at or beyond 1000 items.
ITEM_CAP_WARNING = 500
ITEM_HARD_LIMIT = 1000

RANDOM_CLASSIFIER_SEEDS = (1, 2, 3)

# First cell of an optional trailing CSV row carrying per-item true labels.
# (A label *column* would be one value per respondent, which cannot represent
# per-item labels; the trailing row keeps label length equal to items.)
LABEL_ROW_MARKER = "label"

ARTIFICIAL_NAMES = ("optimal", "pessimal", "majority", "minority", "rand1", "rand2", "rand3")


@dataclass(frozen=True)
class DatasetMeta:
    """Dataset-level descriptors, stored as supplied and never derived."""

    dataset_id: str
    number_of_classes: int
    number_of_instances: int
    number_of_features: int
    class_entropy: float
    dimensionality: float
    pct_missing_instances: float
    majority_class_pct: float
    minority_class_pct: float

    def __post_init__(self):
        for name in ("pct_missing_instances", "majority_class_pct", "minority_class_pct"):
            value = getattr(self, name)
            if not (np.isfinite(value) and 0.0 <= value <= 100.0):
                raise DomainError(f"{name} must lie in [0, 100], got {value!r}")
        if self.minority_class_pct > self.majority_class_pct:
            raise DomainError("minority_class_pct cannot exceed majority_class_pct")

    FIELD_NAMES = (
        "number_of_classes",
        "number_of_instances",
        "number_of_features",
        "class_entropy",
        "dimensionality",
        "pct_missing_instances",
        "majority_class_pct",
        "minority_class_pct",
    )


@dataclass(eq=False)
class ResponseMatrix:
    """Validated respondents x items matrix of {0,1} cells.

    true_labels, when present, holds one class label per item; class_counts
    maps class label to its training-set frequency (used to pick majority and
    minority classes, which a small test split may not reflect).
    """

    dataset_id: str
    respondents: list[str]
    items: int
    responses: np.ndarray
    true_labels: list[str] | None = None
    class_counts: dict[str, int] | None = None

    def __post_init__(self):
        try:
            arr = np.asarray(self.responses)
        except ValueError as exc:
            raise ShapeError(f"ragged response rows: {exc}") from None
        if arr.ndim != 2 or arr.dtype == object:
            raise ShapeError(f"responses must be a 2-D array, got shape {arr.shape}")
        if self.items < 1:
            raise ShapeError("a response matrix needs at least one item")
        if arr.shape != (len(self.respondents), self.items):
            raise ShapeError(
                f"responses shape {arr.shape} does not match "
                f"{len(self.respondents)} respondents x {self.items} items"
            )
        bad = np.argwhere((arr != 0) & (arr != 1))
        if bad.size:
            row, col = (int(x) for x in bad[0])
            raise MalformedCell(row, col, arr[row, col])
        seen = set()
        for name in self.respondents:
            if name in seen:
                raise DuplicateRespondent(f"duplicate respondent {name!r}")
            seen.add(name)
        if self.true_labels is not None and len(self.true_labels) != self.items:
            raise ShapeError(
                f"true_labels length {len(self.true_labels)} != items {self.items}"
            )
        self.responses = arr.astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, ResponseMatrix):
            return NotImplemented
        return (
            self.dataset_id == other.dataset_id
            and self.respondents == other.respondents
            and self.items == other.items
            and np.array_equal(self.responses, other.responses)
            and self.true_labels == other.true_labels
            and self.class_counts == other.class_counts
        )

    def row(self, respondent: str) -> np.ndarray:
        try:
            idx = self.respondents.index(respondent)
        except ValueError:
            raise NotFound(f"respondent {respondent!r} not in matrix") from None
        return self.responses[idx]


def _read_text(source) -> str:
    """Accept document text, a filesystem path, or an open file."""
    if isinstance(source, str):
        return source
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    return source.read()


def parse_response_matrix(source, format: str = "csv", dataset_id: str | None = None) -> ResponseMatrix:
    """Parse a response matrix from a character stream or string.

    CSV layout: header row with `respondent` followed by item ids, one data
    row per respondent, cells 0/1, and an optional final row whose first cell
    is `label` carrying per-item true labels. JSON layout: an object with
    dataset_id, respondents, responses, and optional true_labels and
    class_counts. Row and column order are preserved as given.

    In CSV error positions, row is the zero-based respondent index and col
    the zero-based item index.
    """
    text = _read_text(source)
    if format == "csv":
        return _parse_csv(text, dataset_id)
    if format == "json":
        return _parse_json(text, dataset_id)
    raise DomainError(f"unknown format {format!r}; expected 'csv' or 'json'")


def _parse_csv(text: str, dataset_id: str | None) -> ResponseMatrix:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if len(rows) < 2:
        raise EmptyInput("CSV response matrix needs a header and at least one row")
    header = rows[0]
    items = len(header) - 1
    if items < 1:
        raise ShapeError("CSV header names no item columns")

    true_labels = None
    body = rows[1:]
    if body and body[-1][0].strip() == LABEL_ROW_MARKER:
        label_row = body.pop()
        if len(label_row) != items + 1:
            raise ShapeError(
                f"label row has {len(label_row) - 1} entries, expected {items}"
            )
        true_labels = [cell.strip() for cell in label_row[1:]]
    if not body:
        raise EmptyInput("CSV response matrix has no respondent rows")

    respondents = []
    parsed = []
    for r_idx, row in enumerate(body):
        if len(row) != items + 1:
            raise ShapeError(
                f"row {r_idx} has {len(row) - 1} cells, expected {items}"
            )
        respondents.append(row[0].strip())
        cells = []
        for c_idx, cell in enumerate(row[1:]):
            value = cell.strip()
            if value == "0":
                cells.append(0)
            elif value == "1":
                cells.append(1)
            else:
                raise MalformedCell(r_idx, c_idx, cell)
        parsed.append(cells)

    return ResponseMatrix(
        dataset_id=dataset_id if dataset_id is not None else "unnamed",
        respondents=respondents,
        items=items,
        responses=np.asarray(parsed),
        true_labels=true_labels,
    )


def _parse_json(text: str, dataset_id: str | None) -> ResponseMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ShapeError(f"invalid JSON response matrix: {exc}") from None
    if not isinstance(obj, dict) or "respondents" not in obj or "responses" not in obj:
        raise ShapeError("JSON response matrix needs 'respondents' and 'responses'")
    respondents = [str(n) for n in obj["respondents"]]
    responses = obj["responses"]
    if not responses:
        raise EmptyInput("JSON response matrix has no rows")
    lengths = {len(r) for r in responses}
    if len(lengths) != 1:
        raise ShapeError(f"ragged response rows with lengths {sorted(lengths)}")
    items = int(obj.get("items", lengths.pop()))
    counts = obj.get("class_counts")
    return ResponseMatrix(
        dataset_id=dataset_id or str(obj.get("dataset_id", "unnamed")),
        respondents=respondents,
        items=items,
        responses=np.asarray(responses),
        true_labels=[str(x) for x in obj["true_labels"]] if obj.get("true_labels") else None,
        class_counts={str(k): int(v) for k, v in counts.items()} if counts else None,
    )


def serialize_response_matrix(matrix: ResponseMatrix, format: str = "csv") -> str:
    """Serialize to the canonical form of the chosen format.

    JSON is full-fidelity. CSV carries the matrix and the optional label row
    but not dataset_id or class_counts, which travel out-of-band (pass
    dataset_id back into parse_response_matrix to round-trip it).
    """
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["respondent"] + [f"item_{i + 1}" for i in range(matrix.items)])
        for name, row in zip(matrix.respondents, matrix.responses):
            writer.writerow([name] + [int(x) for x in row])
        if matrix.true_labels is not None:
            writer.writerow([LABEL_ROW_MARKER] + list(matrix.true_labels))
        return out.getvalue()
    if format == "json":
        payload = {
            "dataset_id": matrix.dataset_id,
            "respondents": list(matrix.respondents),
            "items": matrix.items,
            "responses": [[int(x) for x in row] for row in matrix.responses],
            "true_labels": matrix.true_labels,
            "class_counts": matrix.class_counts,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    raise DomainError(f"unknown format {format!r}; expected 'csv' or 'json'")


def accuracy(matrix: ResponseMatrix, respondent: str) -> float:
    """Fraction of items the respondent answered correctly."""
    return float(matrix.row(respondent).mean())


def synthesize_artificial(
    true_labels: list[str],
    class_counts: dict[str, int],
    seeds=RANDOM_CLASSIFIER_SEEDS,
    lexicographic_ties: bool = False,
) -> dict[str, list[int]]:
    """Build the seven baseline respondent rows for a test set.

    optimal answers every item correctly, pessimal none. majority (minority)
    answers correctly exactly where the true label equals the most (least)
    frequent class of class_counts. rand1..rand3 answer each item correctly
    with probability 1/k independently, k the number of classes, seeded
    deterministically from the three supplied seeds.

    A tie in class_counts raises TieError unless lexicographic_ties is set,
    in which case the lexicographically smallest tied class is chosen.
    """
    if not true_labels:
        raise EmptyInput("true_labels is empty")
    if len(seeds) != 3:
        raise DomainError(f"exactly 3 seeds required, got {len(seeds)}")
    if not class_counts:
        raise EmptyInput("class_counts is empty")
    missing = sorted(set(true_labels) - set(class_counts))
    if missing:
        raise DomainError(f"class_counts missing labels {missing}")

    def pick(extreme) -> str:
        target = extreme(class_counts.values())
        tied = sorted(label for label, n in class_counts.items() if n == target)
        if len(tied) > 1 and not lexicographic_ties:
            raise TieError(f"class count tie between {tied}; set lexicographic_ties")
        return tied[0]

    majority_class = pick(max)
    minority_class = pick(min)
    n = len(true_labels)
    k = len(class_counts)

    rows: dict[str, list[int]] = {
        "optimal": [1] * n,
        "pessimal": [0] * n,
        "majority": [1 if lab == majority_class else 0 for lab in true_labels],
        "minority": [1 if lab == minority_class else 0 for lab in true_labels],
    }
    for i, seed in enumerate(seeds, start=1):
        rng = np.random.default_rng(seed)
        rows[f"rand{i}"] = (rng.random(n) < 1.0 / k).astype(int).tolist()
    return rows


@dataclass(frozen=True)
class CapExceeded:
    """Warning record: test set exceeds the operational 500-instance cap."""

    items: int
    cap: int = ITEM_CAP_WARNING

    def __str__(self):
        return f"test set has {self.items} items, above the operational cap of {self.cap}"


def validate_benchmark_conventions(matrix: ResponseMatrix) -> list[CapExceeded]:
    """Check the matrix against the benchmark's sizing conventions.

    Returns warnings for items above the 500-instance operational cap and
    raises TooManyItems at or beyond 1000 items, where joint estimation is
    not supported.
    """
    if matrix.items >= ITEM_HARD_LIMIT:
        raise TooManyItems(
            f"{matrix.items} items; joint estimation requires fewer than {ITEM_HARD_LIMIT}"
        )
    warnings: list[CapExceeded] = []
    if matrix.items > ITEM_CAP_WARNING:
        warnings.append(CapExceeded(matrix.items))
    return warnings


def load_metadata_json(source) -> dict[str, DatasetMeta]:
    """Load dataset metadata from JSON.

    Accepts either a list of objects or a mapping dataset_id -> object; each
    object carries the DatasetMeta fields (dataset_id may be implied by the
    mapping key).
    """
    text = _read_text(source)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ShapeError(f"invalid metadata JSON: {exc}") from None

    if isinstance(obj, dict):
        entries = [dict(v, dataset_id=v.get("dataset_id", k)) for k, v in obj.items()]
    elif isinstance(obj, list):
        entries = obj
    else:
        raise ShapeError("metadata JSON must be an object or a list of objects")

    result: dict[str, DatasetMeta] = {}
    for entry in entries:
        try:
            meta = DatasetMeta(
                dataset_id=str(entry["dataset_id"]),
                number_of_classes=int(entry["number_of_classes"]),
                number_of_instances=int(entry["number_of_instances"]),
                number_of_features=int(entry["number_of_features"]),
                class_entropy=float(entry["class_entropy"]),
                dimensionality=float(entry["dimensionality"]),
                pct_missing_instances=float(entry["pct_missing_instances"]),
                majority_class_pct=float(entry["majority_class_pct"]),
                minority_class_pct=float(entry["minority_class_pct"]),
            )
        except KeyError as exc:
            raise DomainError(f"metadata entry missing field {exc.args[0]!r}") from None
        if meta.dataset_id in result:
            raise DomainError(f"duplicate metadata for dataset {meta.dataset_id!r}")
        result[meta.dataset_id] = meta
    return result
