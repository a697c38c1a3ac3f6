"""Parallel execution of scheduled training tasks.

Workers are in-process threads: each one walks its assigned task list
sequentially while the pool runs up to m lists concurrently. The
dataset is shared read-only, task failures are captured per task
instead of aborting the run, and results are re-ordered by config id
so output never depends on completion order.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .core import Dataset, ModelConfig
from .errors import SchedulingError
from .scheduler import Schedule
from .trainers import TrainerRegistry

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainedModel:
    config_id: int
    algorithm: str
    payload: Any
    train_seconds: float
    worker_index: int


@dataclass(frozen=True)
class TaskFailure:
    config_id: int
    message: str


@dataclass(frozen=True)
class RunResult:
    """Outcome of one schedule execution: one entry per scheduled config."""

    models: tuple[TrainedModel, ...]
    failures: tuple[TaskFailure, ...]
    worker_seconds: tuple[float, ...]  # measured busy time per worker

    @property
    def makespan_seconds(self) -> float:
        return max(self.worker_seconds)


class TrainingRunner:
    """Thin train facade handed to the profiler; safe for concurrent use."""

    def __init__(self, registry: TrainerRegistry):
        self.registry = registry

    def train(self, config: ModelConfig, ds: Dataset) -> Any:
        return self.registry.get(config.algorithm).train(config, ds)


def run_schedule(
    s: Schedule,
    configs: Sequence[ModelConfig],
    ds: Dataset,
    registry: TrainerRegistry,
) -> RunResult:
    """Execute every scheduled task on its assigned worker.

    The schedule must partition exactly the given configs, and every
    referenced algorithm must be registered. A task that raises is
    recorded as a failure; the remaining tasks still run.
    """
    by_id = {}
    for config in configs:
        if config.config_id in by_id:
            raise SchedulingError(f"duplicate config_id {config.config_id} in configs")
        by_id[config.config_id] = config
    if s.config_ids() != set(by_id):
        raise SchedulingError("schedule does not partition exactly the given configs")
    missing = sorted({c.algorithm for c in configs if c.algorithm not in registry})
    if missing:
        raise SchedulingError(f"algorithms not registered: {missing}")

    models: list[TrainedModel] = []
    failures: list[TaskFailure] = []
    worker_seconds = [0.0] * s.n_workers

    def run_worker(w: int) -> tuple[list[TrainedModel], list[TaskFailure], float]:
        worker_models: list[TrainedModel] = []
        worker_failures: list[TaskFailure] = []
        busy = 0.0
        for cid in s.assignments[w]:
            config = by_id[cid]
            trainer = registry.get(config.algorithm)
            start = time.monotonic()
            try:
                payload = trainer.train(config, ds)
            except Exception as exc:
                busy += time.monotonic() - start
                log.warning("task %d (%s) failed: %s", cid, config.algorithm, exc)
                worker_failures.append(TaskFailure(cid, str(exc) or repr(exc)))
                continue
            elapsed = time.monotonic() - start
            busy += elapsed
            worker_models.append(TrainedModel(cid, config.algorithm, payload, elapsed, w))
        return worker_models, worker_failures, busy

    with ThreadPoolExecutor(max_workers=s.n_workers) as pool:
        for w, outcome in enumerate(pool.map(run_worker, range(s.n_workers))):
            worker_models, worker_failures, busy = outcome
            models.extend(worker_models)
            failures.extend(worker_failures)
            worker_seconds[w] = busy

    models.sort(key=lambda tm: tm.config_id)
    failures.sort(key=lambda f: f.config_id)
    return RunResult(tuple(models), tuple(failures), tuple(worker_seconds))


def predict(model: TrainedModel, ds: Dataset, registry: TrainerRegistry) -> np.ndarray:
    """Score every row of ds with a trained model, values in [0, 1]."""
    scores = np.asarray(registry.get(model.algorithm).predict(model.payload, ds), dtype=np.float64)
    if scores.shape != (ds.n_rows,):
        raise SchedulingError(
            f"trainer for {model.algorithm!r} returned {scores.shape} scores for {ds.n_rows} rows"
        )
    return scores
