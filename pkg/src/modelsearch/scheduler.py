"""Task-to-worker assignment minimizing makespan.

Durations are estimates of full-data training time. The production
path is LPT list scheduling (sort descending, place each task on the
least-loaded worker), which guarantees a makespan within
(4/3 - 1/(3m)) of optimal. A seeded equal-count random assignment is
kept as the baseline, and a small exact solver serves as test oracle.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import SchedulingError

# schedule_optimal explores up to m^N assignments; keep instances small.
OPTIMAL_MAX_TASKS = 14
OPTIMAL_MAX_WORKERS = 4


@dataclass(frozen=True)
class Schedule:
    """Partition of config ids into per-worker ordered task lists."""

    assignments: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        assignments = tuple(tuple(w) for w in self.assignments)
        if len(assignments) < 1:
            raise SchedulingError("schedule needs at least one worker")
        flat = [cid for worker in assignments for cid in worker]
        if len(flat) != len(set(flat)):
            raise SchedulingError("schedule assigns some config id more than once")
        object.__setattr__(self, "assignments", assignments)

    @property
    def n_workers(self) -> int:
        return len(self.assignments)

    def config_ids(self) -> set[int]:
        return {cid for worker in self.assignments for cid in worker}


def _check_durations(durations: Mapping[int, float]) -> None:
    if not durations:
        raise SchedulingError("no task durations given")
    for cid, d in durations.items():
        if not d > 0:
            raise SchedulingError(f"task {cid} has nonpositive duration {d}")


def schedule_greedy(durations: Mapping[int, float], m: int) -> Schedule:
    """LPT list scheduling over m identical workers.

    Ties break deterministically: equal durations go by lower config
    id first, equal loads go to the lower worker index.
    """
    if m < 1:
        raise SchedulingError(f"worker count must be >= 1, got {m}")
    _check_durations(durations)
    order = sorted(durations, key=lambda cid: (-durations[cid], cid))
    heap = [(0.0, w) for w in range(m)]
    assignments: list[list[int]] = [[] for _ in range(m)]
    for cid in order:
        load, w = heapq.heappop(heap)
        assignments[w].append(cid)
        heapq.heappush(heap, (load + durations[cid], w))
    return Schedule(tuple(tuple(w) for w in assignments))


def schedule_random(config_ids: Sequence[int], m: int, seed: int) -> Schedule:
    """Baseline: shuffle ids with a seeded RNG and deal them round-robin.

    Per-worker counts differ by at most one, mirroring an
    equal-count split of the search space.
    """
    if m < 1:
        raise SchedulingError(f"worker count must be >= 1, got {m}")
    ids = list(config_ids)
    random.Random(seed).shuffle(ids)
    return Schedule(tuple(tuple(ids[w::m]) for w in range(m)))


def worker_loads(s: Schedule, durations: Mapping[int, float]) -> list[float]:
    loads = []
    for worker in s.assignments:
        total = 0.0
        for cid in worker:
            if cid not in durations:
                raise SchedulingError(f"scheduled config {cid} has no duration")
            total += durations[cid]
        loads.append(total)
    return loads


def makespan(s: Schedule, durations: Mapping[int, float]) -> float:
    """Maximum total processing time over all workers."""
    return max(worker_loads(s, durations))


def makespan_lower_bound(durations: Mapping[int, float], m: int) -> float:
    """max(longest task, sum/m) - no schedule can beat this."""
    _check_durations(durations)
    values = list(durations.values())
    return max(max(values), sum(values) / m)


def schedule_optimal(durations: Mapping[int, float], m: int) -> Schedule:
    """Exhaustive minimum-makespan schedule for small instances.

    Branch and bound over worker choices per task, seeded with the LPT
    schedule as the incumbent and pruning symmetric equal-load
    branches. Guarded to OPTIMAL_MAX_TASKS tasks / OPTIMAL_MAX_WORKERS
    workers; the underlying problem is NP-hard.
    """
    if m < 1:
        raise SchedulingError(f"worker count must be >= 1, got {m}")
    _check_durations(durations)
    if len(durations) > OPTIMAL_MAX_TASKS or m > OPTIMAL_MAX_WORKERS:
        raise SchedulingError(
            f"exact solver limited to {OPTIMAL_MAX_TASKS} tasks and "
            f"{OPTIMAL_MAX_WORKERS} workers, got {len(durations)} tasks / {m} workers"
        )

    incumbent = schedule_greedy(durations, m)
    best_makespan = makespan(incumbent, durations)
    best_assignment: list[int] | None = None

    # longest-first ordering tightens the bound early
    order = sorted(durations, key=lambda cid: (-durations[cid], cid))
    values = [durations[cid] for cid in order]
    n = len(order)
    loads = [0.0] * m
    chosen = [0] * n

    def descend(i: int) -> None:
        nonlocal best_makespan, best_assignment
        if i == n:
            best_makespan = max(loads)
            best_assignment = chosen.copy()
            return
        d = values[i]
        tried_loads: set[float] = set()
        for w in range(m):
            load = loads[w]
            if load in tried_loads:  # same load, symmetric branch
                continue
            tried_loads.add(load)
            if load + d >= best_makespan:
                continue
            loads[w] = load + d
            chosen[i] = w
            descend(i + 1)
            loads[w] = load

    descend(0)
    if best_assignment is None:
        return incumbent  # LPT already optimal
    assignments: list[list[int]] = [[] for _ in range(m)]
    for cid, w in zip(order, best_assignment):
        assignments[w].append(cid)
    return Schedule(tuple(tuple(w) for w in assignments))
