"""Validation metrics, model selection, and the final search report."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import Dataset, ModelConfig
from .errors import MetricError
from .executor import TaskFailure, TrainedModel, predict
from .trainers import TrainerRegistry


def auc(scores, labels) -> float:
    """Area under the ROC curve, ties credited 0.5.

    Computed by average ranks in O(n log n); equal to the mean over
    all (positive, negative) pairs of 1 / 0.5 / 0 for the positive
    scoring higher / equal / lower.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError(f"scores and labels must be equal-length vectors, got {scores.shape} / {labels.shape}")
    positive = labels == 1.0
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC is undefined without at least one positive and one negative label")
    # average rank per tie group
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    group_start = np.concatenate(([0], np.cumsum(counts)[:-1]))
    rank = (group_start + (counts + 1) / 2.0)[inverse]
    return float((rank[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def accuracy(scores, labels, threshold: float = 0.5) -> float:
    """Fraction of rows where (score >= threshold) matches the label."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError(f"scores and labels must be equal-length vectors, got {scores.shape} / {labels.shape}")
    return float(((scores >= threshold) == (labels == 1.0)).mean())


METRICS = {"auc": auc, "accuracy": accuracy}


@dataclass(frozen=True)
class EvaluationResult:
    config_id: int
    metric: str
    value: float
    train_seconds: float


def validate_all(
    models: Sequence[TrainedModel],
    ds_validate: Dataset,
    registry: TrainerRegistry,
    metric: str = "auc",
    workers: int = 1,
) -> list[EvaluationResult]:
    """Score every model on the validation set, ordered by config id."""
    if metric not in METRICS:
        raise MetricError(f"unknown metric {metric!r} (known: {sorted(METRICS)})")
    if not models:
        raise MetricError("no models to validate")
    metric_fn = METRICS[metric]

    def evaluate(model: TrainedModel) -> EvaluationResult:
        value = metric_fn(predict(model, ds_validate, registry), ds_validate.labels)
        return EvaluationResult(model.config_id, metric, value, model.train_seconds)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(evaluate, models))
    return sorted(results, key=lambda r: r.config_id)


def select_best(results: Sequence[EvaluationResult], metric: str, direction: str = "maximize") -> int:
    """Config id with the extremal metric value; ties go to the lowest id."""
    if not results:
        raise MetricError("no evaluation results to select from")
    if direction not in ("maximize", "minimize"):
        raise MetricError(f"direction must be 'maximize' or 'minimize', got {direction!r}")
    mismatched = [r.config_id for r in results if r.metric != metric]
    if mismatched:
        raise MetricError(f"results for configs {mismatched} carry a different metric than {metric!r}")
    sign = -1.0 if direction == "maximize" else 1.0
    return min(results, key=lambda r: (sign * r.value, r.config_id)).config_id


@dataclass(frozen=True)
class SearchReport:
    """Everything one search run produced, serializable as JSON.

    Wall-clock numbers live under the ``timing`` key of the JSON form
    (plus each result's ``train_seconds``), so two reports from
    identical seeded runs are comparable after dropping those fields.
    """

    metric: str
    direction: str
    results: tuple[EvaluationResult, ...]
    failures: tuple[TaskFailure, ...]
    best_config_id: int
    best_value: float
    configs: tuple[ModelConfig, ...]
    scheduler_name: str
    workers: int
    assignments: tuple[tuple[int, ...], ...]
    worker_seconds: tuple[float, ...]
    makespan_seconds: float
    profiling_wall_seconds: float
    total_wall_seconds: float
    overhead_ratio: float | None = None
    estimated_durations: Mapping[int, float] | None = None
    test_value: float | None = None

    def to_dict(self) -> dict:
        by_id = {c.config_id: c for c in self.configs}
        best = by_id[self.best_config_id]
        schedule: dict = {
            "scheduler": self.scheduler_name,
            "workers": self.workers,
            "assignments": [list(w) for w in self.assignments],
        }
        if self.estimated_durations is not None:
            loads = [sum(self.estimated_durations[cid] for cid in w) for w in self.assignments]
            schedule["estimated_loads"] = loads
            schedule["estimated_makespan"] = max(loads)
        report = {
            "metric": self.metric,
            "direction": self.direction,
            "best": {
                "config_id": self.best_config_id,
                "algorithm": best.algorithm,
                "params": dict(best.params),
                "value": self.best_value,
                "test_value": self.test_value,
            },
            "results": [
                {
                    "config_id": r.config_id,
                    "algorithm": by_id[r.config_id].algorithm,
                    "params": dict(by_id[r.config_id].params),
                    "value": r.value,
                    "train_seconds": r.train_seconds,
                }
                for r in self.results
            ],
            "failures": [{"config_id": f.config_id, "message": f.message} for f in self.failures],
            "schedule": schedule,
            "timing": {
                "per_worker_seconds": list(self.worker_seconds),
                "makespan_seconds": self.makespan_seconds,
                "profiling_wall_seconds": self.profiling_wall_seconds,
                "overhead_ratio": self.overhead_ratio,
                "total_wall_seconds": self.total_wall_seconds,
            },
        }
        return report

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def strip_timing(report_dict: dict) -> dict:
    """Remove wall-clock-derived fields so seeded runs compare equal."""
    out = json.loads(json.dumps(report_dict))  # deep copy
    out.pop("timing", None)
    for result in out.get("results", []):
        result.pop("train_seconds", None)
    schedule = out.get("schedule", {})
    schedule.pop("estimated_loads", None)
    schedule.pop("estimated_makespan", None)
    return out
