"""Task-duration estimation from sampled profiling runs.

Each configuration is trained once on a small sample of the data; the
measured wall time divided by the sampling rate is the estimated
full-data duration, assuming training cost scales linearly with row
count. The scheduler consumes these estimates.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from .core import Dataset, ModelConfig, dataset_sample
from .errors import ProfilingError

log = logging.getLogger(__name__)


class TrainRunner(Protocol):
    def train(self, config: ModelConfig, ds: Dataset) -> object: ...


@dataclass(frozen=True)
class TaskProfile:
    """Estimated full-scale duration per config, in seconds."""

    entries: dict[int, float]
    sampling_rate: float
    profiling_wall_seconds: float


def profile_all(
    configs: Sequence[ModelConfig],
    ds: Dataset,
    rate: float,
    seed: int,
    runner: TrainRunner,
    workers: int = 1,
    clock: Callable[[], float] = time.monotonic,
) -> TaskProfile:
    """Train every config once on a seeded sample and scale the wall times.

    Profiling tasks run across up to ``workers`` threads. A config whose
    profiling run raises gets the largest estimate among the successful
    ones (pessimistic placeholder) and is logged; if every run fails the
    whole profiling pass fails.
    """
    if not configs:
        raise ProfilingError("no configs to profile")
    if not 0.0 < rate <= 1.0:
        raise ProfilingError(f"sampling rate must be in (0, 1], got {rate}")
    start = clock()
    sample = dataset_sample(ds, rate, seed)

    def measure(config: ModelConfig) -> float:
        t0 = clock()
        runner.train(config, sample)
        # floor at 1 ns: a zero measurement would break the scheduler's
        # positive-duration contract
        return max(clock() - t0, 1e-9)

    measured: dict[int, float] = {}
    failed: dict[int, str] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for config, outcome in zip(configs, pool.map(_guard(measure), configs)):
            if isinstance(outcome, Exception):
                failed[config.config_id] = str(outcome) or repr(outcome)
            else:
                measured[config.config_id] = outcome

    if not measured:
        raise ProfilingError(
            f"all {len(configs)} profiling runs failed; first error: {next(iter(failed.values()))}"
        )
    entries = {cid: seconds / rate for cid, seconds in measured.items()}
    if failed:
        placeholder = max(entries.values())
        for cid, message in failed.items():
            log.warning("profiling run for config %d failed (%s); assuming %.3fs", cid, message, placeholder)
            entries[cid] = placeholder
    entries = {cid: entries[cid] for cid in sorted(entries)}
    return TaskProfile(entries, rate, clock() - start)


def _guard(fn):
    def wrapped(config):
        try:
            return fn(config)
        except Exception as exc:  # reported per config, not raised
            return exc

    return wrapped


def overhead_ratio(p: TaskProfile, total_wall_seconds: float) -> float:
    """Fraction of the overall run spent profiling, in (0, 1]."""
    if not p.profiling_wall_seconds > 0:
        raise ProfilingError(f"profiling wall time must be > 0, got {p.profiling_wall_seconds}")
    if total_wall_seconds < p.profiling_wall_seconds:
        raise ProfilingError(
            f"total wall time {total_wall_seconds} is smaller than profiling time {p.profiling_wall_seconds}"
        )
    return p.profiling_wall_seconds / total_wall_seconds


def save_duration_table(durations: Mapping[int, float], path) -> None:
    """Write 'config_id estimated_seconds' lines; the scheduler CLI reads these."""
    lines = [f"{cid} {durations[cid]!r}" for cid in sorted(durations)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_duration_table(path) -> dict[int, float]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProfilingError(f"cannot read duration table {path}: {exc}") from None
    durations: dict[int, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ProfilingError(f"{path}: line {lineno}: expected 'config_id seconds', got {line!r}")
        try:
            cid, seconds = int(parts[0]), float(parts[1])
        except ValueError:
            raise ProfilingError(f"{path}: line {lineno}: cannot parse {line!r}") from None
        if cid in durations:
            raise ProfilingError(f"{path}: line {lineno}: duplicate config id {cid}")
        durations[cid] = seconds
    if not durations:
        raise ProfilingError(f"{path}: no duration entries")
    return durations
