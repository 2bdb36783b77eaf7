"""Confusion-matrix metrics and the similarity-threshold grid search."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import EmptyDataset
from .registry import RegistryId

LABELS = ("active", "stealthy", "benign")
POSITIVE_LABELS = frozenset({"active", "stealthy"})


@dataclass(frozen=True)
class EvalRecord:
    suspect: str
    target: str
    registry: RegistryId
    label: str  # active | stealthy | benign

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}: {self.label!r}")


@dataclass(frozen=True)
class MetricsRow:
    label: str
    tp: int
    fp: int
    tn: int
    fn: int
    total: int
    recall: float
    precision: float
    f1: float
    accuracy: float

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "total": self.total,
            "recall": self.recall,
            "precision": self.precision,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


def metrics_row(
    label: str, tp: int, fp: int, tn: int, fn: int, total: Optional[int] = None
) -> MetricsRow:
    """Standard formulas with 0/0 -> 0.

    ``total`` is the number of records behind the row; it defaults to the
    count sum but may be larger when some records could not be fully
    evaluated (they still count toward accuracy's denominator).
    """
    if total is None:
        total = tp + fp + tn + fn
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    f1 = (
        2 * precision * recall / (precision + recall) if precision + recall else 0.0
    )
    accuracy = (tp + tn) / total if total else 0.0
    return MetricsRow(label, tp, fp, tn, fn, total, recall, precision, f1, accuracy)


@dataclass
class MetricsTable:
    rows: dict[str, MetricsRow] = field(default_factory=dict)
    overall: Optional[MetricsRow] = None

    def as_dict(self) -> dict:
        return {
            "rows": {label: row.as_dict() for label, row in self.rows.items()},
            "overall": self.overall.as_dict() if self.overall else None,
        }


def build_metrics_table(results: Sequence[tuple[str, bool]]) -> MetricsTable:
    """Aggregate (label, predicted_positive) pairs into per-label rows.

    Records labeled active or stealthy are ground-truth positives; benign
    records are negatives.
    """
    if not results:
        raise EmptyDataset("no evaluation results")
    table = MetricsTable()
    sums = {"tp": 0, "fp": 0, "tn": 0, "fn": 0, "total": 0}
    for label in LABELS:
        tp = fp = tn = fn = 0
        count = 0
        for row_label, predicted in results:
            if row_label != label:
                continue
            count += 1
            positive = label in POSITIVE_LABELS
            if positive and predicted:
                tp += 1
            elif positive:
                fn += 1
            elif predicted:
                fp += 1
            else:
                tn += 1
        if count == 0:
            continue
        table.rows[label] = metrics_row(label, tp, fp, tn, fn, count)
        sums["tp"] += tp
        sums["fp"] += fp
        sums["tn"] += tn
        sums["fn"] += fn
        sums["total"] += count
    table.overall = metrics_row(
        "overall", sums["tp"], sums["fp"], sums["tn"], sums["fn"], sums["total"]
    )
    return table


@dataclass(frozen=True)
class GridSearchResult:
    best_threshold: float
    best_f1: float
    curve: tuple[tuple[float, float], ...]  # (threshold, f1), 101 points


def grid_search_threshold(
    scored: Sequence[tuple[float, bool]]
) -> GridSearchResult:
    """Sweep thresholds 0.00..1.00 in 0.01 steps; argmax F1, ties lowest.

    Scores must lie in [0, 1]; a pair is predicted positive when its
    score is at or above the threshold.
    """
    if not scored:
        raise EmptyDataset("no scored pairs")
    for score, _ in scored:
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"score out of [0, 1]: {score}")

    curve = []
    best_threshold, best_f1 = 0.0, -1.0
    for step in range(101):
        threshold = round(step * 0.01, 2)
        tp = fp = fn = 0
        for score, positive in scored:
            predicted = score >= threshold
            if predicted and positive:
                tp += 1
            elif predicted:
                fp += 1
            elif positive:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        curve.append((threshold, f1))
        if f1 > best_f1:
            best_f1, best_threshold = f1, threshold
    return GridSearchResult(best_threshold, best_f1, tuple(curve))


def load_eval_records(path: str | Path) -> list[EvalRecord]:
    """Read an evaluation dataset: one JSON object per line."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        data = json.loads(line)
        records.append(
            EvalRecord(
                suspect=data["suspect"],
                target=data["target"],
                registry=RegistryId.parse(data["registry"]),
                label=data["label"],
            )
        )
    if not records:
        raise EmptyDataset(f"{path} contains no records")
    return records


def load_scored_pairs(path: str | Path) -> list[tuple[float, bool]]:
    """Read labeled similarity scores: {"score": x, "label": bool-ish}."""
    pairs: list[tuple[float, bool]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        data = json.loads(line)
        label = data["label"]
        if isinstance(label, str):
            label = label.lower() in ("positive", "true", "threat", "1")
        pairs.append((float(data["score"]), bool(label)))
    if not pairs:
        raise EmptyDataset(f"{path} contains no scored pairs")
    return pairs
