"""Command-line driver: load data, profile, schedule, train, validate, select.

Subcommands:
  run       full model search from a JSON search config
  schedule  standalone scheduling of a saved duration table
  bench     scheduler benchmark over synthetic sleep workloads

The search config is a JSON file:

    {
      "train_csv": "train.csv",
      "validate_csv": "validate.csv",
      "test_csv": "test.csv",            // optional
      "label_column": "label",
      "grids": [
        {"algorithm": "logistic", "params": {"learning_rate": [0.1, 0.5], "iterations": [200]}},
        {"algorithm": "tree", "params": {"max_depth": [2, 4, 6]}}
      ],
      "plugins": [                        // optional
        {"command": ["python3", "my_plugin.py"], "algorithms": ["tfjs_logistic"]}
      ]
    }

CSV paths are resolved relative to the config file. Set MODELSEARCH_LOG
to DEBUG/INFO/WARNING to control log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Dataset, GridSpec, ModelConfig, SearchSpace, dataset_from_csv
from .errors import ConfigError, ModelSearchError
from .evaluator import METRICS, SearchReport, select_best, validate_all
from .executor import TrainingRunner, predict, run_schedule
from .plugin_host import PluginTrainer
from .profiler import TaskProfile, load_duration_table, overhead_ratio, profile_all
from .scheduler import (
    makespan,
    makespan_lower_bound,
    schedule_greedy,
    schedule_random,
    worker_loads,
)
from .trainers import default_registry
from .tuner import GridTuner

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PluginSpec:
    command: tuple[str, ...]
    algorithms: tuple[str, ...]


@dataclass(frozen=True)
class SearchConfig:
    train_csv: str
    validate_csv: str
    label_column: str
    space: SearchSpace
    test_csv: str | None = None
    plugins: tuple[PluginSpec, ...] = ()


def _reject_duplicate_keys(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise ConfigError(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def _expect(obj: dict, field: str, kind, where: str, optional: bool = False):
    if field not in obj:
        if optional:
            return None
        raise ConfigError(f"{where}: missing required field {field!r}")
    value = obj[field]
    if not isinstance(value, kind):
        raise ConfigError(f"{where}: field {field!r} must be {kind.__name__}, got {type(value).__name__}")
    return value


def parse_search_config(text: str, base_dir: Path | None = None) -> SearchConfig:
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {"train_csv", "validate_csv", "test_csv", "label_column", "grids", "plugins"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")

    def resolve(p: str) -> str:
        path = Path(p)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return str(path)

    train_csv = resolve(_expect(raw, "train_csv", str, "config"))
    validate_csv = resolve(_expect(raw, "validate_csv", str, "config"))
    test_csv = _expect(raw, "test_csv", str, "config", optional=True)
    label_column = _expect(raw, "label_column", str, "config")

    grids_raw = _expect(raw, "grids", list, "config")
    if not grids_raw:
        raise ConfigError("config: grids must not be empty")
    grids = []
    for i, grid_obj in enumerate(grids_raw):
        where = f"grids[{i}]"
        if not isinstance(grid_obj, dict):
            raise ConfigError(f"{where}: must be an object")
        algorithm = _expect(grid_obj, "algorithm", str, where)
        params_obj = _expect(grid_obj, "params", dict, where)
        extra = set(grid_obj) - {"algorithm", "params"}
        if extra:
            raise ConfigError(f"{where}: unknown field(s) {sorted(extra)}")
        params = {}
        for name, values in params_obj.items():
            if not isinstance(values, list):
                raise ConfigError(f"{where}.params.{name}: must be a list of values")
            params[name] = values
        try:
            grids.append(GridSpec(algorithm, params))
        except ModelSearchError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    plugins = []
    for i, plugin_obj in enumerate(raw.get("plugins") or []):
        where = f"plugins[{i}]"
        if not isinstance(plugin_obj, dict):
            raise ConfigError(f"{where}: must be an object")
        command = _expect(plugin_obj, "command", list, where)
        algorithms = _expect(plugin_obj, "algorithms", list, where)
        if not command or not all(isinstance(c, str) for c in command):
            raise ConfigError(f"{where}: command must be a nonempty list of strings")
        if not algorithms or not all(isinstance(a, str) for a in algorithms):
            raise ConfigError(f"{where}: algorithms must be a nonempty list of strings")
        plugins.append(PluginSpec(tuple(command), tuple(algorithms)))

    return SearchConfig(
        train_csv=train_csv,
        validate_csv=validate_csv,
        label_column=label_column,
        space=SearchSpace(tuple(grids)),
        test_csv=resolve(test_csv) if test_csv else None,
        plugins=tuple(plugins),
    )


def load_search_config(path) -> SearchConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_search_config(text, base_dir=path.parent)


def search_config_to_json(config: SearchConfig) -> str:
    obj: dict = {
        "train_csv": config.train_csv,
        "validate_csv": config.validate_csv,
    }
    if config.test_csv:
        obj["test_csv"] = config.test_csv
    obj["label_column"] = config.label_column
    obj["grids"] = [
        {"algorithm": g.algorithm, "params": {k: list(v) for k, v in g.params.items()}}
        for g in config.space.grids
    ]
    if config.plugins:
        obj["plugins"] = [
            {"command": list(p.command), "algorithms": list(p.algorithms)} for p in config.plugins
        ]
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# run

def _build_registry(config: SearchConfig, workdir=None):
    registry = default_registry()
    trainers = []
    for spec in config.plugins:
        trainer = PluginTrainer(spec.command, algorithms=spec.algorithms, workdir=workdir)
        trainers.append(trainer)
        for algorithm in spec.algorithms:
            registry.register(algorithm, trainer)
    return registry, trainers


def cmd_run(args) -> int:
    config = load_search_config(args.config)
    if args.metric not in METRICS:
        raise ConfigError(f"unknown metric {args.metric!r} (known: {sorted(METRICS)})")
    train = dataset_from_csv(config.train_csv, config.label_column)
    ds_validate = dataset_from_csv(config.validate_csv, config.label_column)
    ds_test = dataset_from_csv(config.test_csv, config.label_column) if config.test_csv else None

    registry, plugin_trainers = _build_registry(config)
    start = time.monotonic()
    try:
        configs = GridTuner(config.space).propose()
        log.info("enumerated %d configs over %d grids", len(configs), len(config.space.grids))

        profile: TaskProfile | None = None
        if args.scheduler == "profile":
            profile = profile_all(
                configs, train, args.sample_rate, args.seed,
                TrainingRunner(registry), workers=args.workers,
            )
            schedule = schedule_greedy(profile.entries, args.workers)
        else:
            schedule = schedule_random([c.config_id for c in configs], args.workers, args.seed)

        run = run_schedule(schedule, configs, train, registry)
        if not run.models:
            print(f"error: all {len(configs)} training tasks failed", file=sys.stderr)
            for failure in run.failures[:10]:
                print(f"  config {failure.config_id}: {failure.message}", file=sys.stderr)
            return 1

        results = validate_all(run.models, ds_validate, registry, metric=args.metric, workers=args.workers)
        best_id = select_best(results, args.metric)
        best_value = next(r.value for r in results if r.config_id == best_id)
        test_value = None
        if ds_test is not None:
            best_model = next(m for m in run.models if m.config_id == best_id)
            test_value = METRICS[args.metric](predict(best_model, ds_test, registry), ds_test.labels)

        total_wall = time.monotonic() - start
        report = SearchReport(
            metric=args.metric,
            direction="maximize",
            results=tuple(results),
            failures=run.failures,
            best_config_id=best_id,
            best_value=best_value,
            configs=tuple(configs),
            scheduler_name=args.scheduler,
            workers=args.workers,
            assignments=schedule.assignments,
            worker_seconds=run.worker_seconds,
            makespan_seconds=run.makespan_seconds,
            profiling_wall_seconds=profile.profiling_wall_seconds if profile else 0.0,
            total_wall_seconds=total_wall,
            overhead_ratio=overhead_ratio(profile, total_wall) if profile else None,
            estimated_durations=profile.entries if profile else None,
            test_value=test_value,
        )
    finally:
        for trainer in plugin_trainers:
            trainer.close()

    Path(args.output).write_text(report.to_json(), encoding="utf-8")
    best_config = next(c for c in configs if c.config_id == best_id)
    print(f"configs evaluated: {len(results)} ({len(run.failures)} failed)")
    print(f"best config: id={best_id} algorithm={best_config.algorithm} params={best_config.params}")
    line = f"validation {args.metric}: {best_value:.4f}"
    if test_value is not None:
        line += f"   test {args.metric}: {test_value:.4f}"
    print(line)
    print(f"makespan: {report.makespan_seconds:.3f}s   total: {total_wall:.3f}s"
          + (f"   overhead ratio: {report.overhead_ratio:.3f}" if report.overhead_ratio is not None else ""))
    print(f"report written to {args.output}")
    return 0


# ---------------------------------------------------------------------------
# schedule

def _print_schedule(name: str, schedule, durations) -> None:
    loads = worker_loads(schedule, durations)
    print(f"{name} makespan: {makespan(schedule, durations):.6g}")
    for w, (ids, load) in enumerate(zip(schedule.assignments, loads)):
        print(f"  worker {w}: load {load:.6g}  ids {list(ids)}")


def cmd_schedule(args) -> int:
    durations = load_duration_table(args.durations)
    print(f"tasks: {len(durations)}   workers: {args.workers}")
    print(f"lower bound: {makespan_lower_bound(durations, args.workers):.6g}")
    _print_schedule("greedy", schedule_greedy(durations, args.workers), durations)
    _print_schedule(
        f"random (seed {args.seed})",
        schedule_random(sorted(durations), args.workers, args.seed),
        durations,
    )
    return 0


# ---------------------------------------------------------------------------
# bench

BENCH_DEFAULTS = {"tasks": 32, "sigma": 1.5, "scale_seconds": 4.0, "seed": 0, "sample_rate": 0.1}


def _bench_workload(params: dict) -> tuple[Dataset, list[ModelConfig], dict[int, float]]:
    rng = np.random.default_rng(params["seed"])
    raw = rng.lognormal(mean=0.0, sigma=params["sigma"], size=params["tasks"])
    durations = raw / raw.sum() * params["scale_seconds"]
    n_rows = 1000
    features = rng.normal(size=(n_rows, 2))
    labels = (rng.random(n_rows) < 0.5).astype(float)
    ds = Dataset(features, labels, ("a", "b"))
    configs = [
        ModelConfig(i, "synthetic", {"seconds_per_row": float(d) / n_rows})
        for i, d in enumerate(durations)
    ]
    return ds, configs, {i: float(d) for i, d in enumerate(durations)}


def cmd_bench(args) -> int:
    params = dict(BENCH_DEFAULTS)
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read bench config {args.config}: {exc}") from None
        unknown = set(overrides) - set(BENCH_DEFAULTS)
        if unknown:
            raise ConfigError(f"bench config: unknown field(s) {sorted(unknown)}")
        params.update(overrides)

    ds, configs, _ = _bench_workload(params)
    registry = default_registry()
    runner = TrainingRunner(registry)
    worker_counts = [int(w) for w in args.workers_list.split(",")]
    rows = []
    baseline: dict[str, float] = {}
    for scheduler_name in ("profile", "random"):
        for m in worker_counts:
            start = time.monotonic()
            if scheduler_name == "profile":
                profile = profile_all(configs, ds, params["sample_rate"], params["seed"],
                                      runner, workers=m)
                schedule = schedule_greedy(profile.entries, m)
            else:
                schedule = schedule_random([c.config_id for c in configs], m, params["seed"])
            run = run_schedule(schedule, configs, ds, registry)
            wall = time.monotonic() - start
            if len(run.failures):
                raise ModelSearchError(f"bench tasks failed: {run.failures}")
            baseline.setdefault(scheduler_name, wall)
            pct_ideal = 100.0 * baseline[scheduler_name] / (m * wall)
            rows.append((m, scheduler_name, wall, pct_ideal))
            log.info("bench %s m=%d wall=%.3fs", scheduler_name, m, wall)

    header = f"{'workers':>7}  {'scheduler':<9} {'wall_seconds':>12}  {'pct_of_ideal':>12}"
    print(header)
    lines = ["workers\tscheduler\twall_seconds\tpct_of_ideal"]
    for m, scheduler_name, wall, pct in rows:
        print(f"{m:>7}  {scheduler_name:<9} {wall:>12.3f}  {pct:>12.1f}")
        lines.append(f"{m}\t{scheduler_name}\t{wall:.6f}\t{pct:.3f}")
    if args.output:
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"table written to {args.output}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelsearch", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a full model search")
    p_run.add_argument("--config", required=True, help="search config JSON")
    p_run.add_argument("--workers", type=int, default=1, help="parallel workers (default 1)")
    p_run.add_argument("--scheduler", choices=("profile", "random"), default="profile")
    p_run.add_argument("--sample-rate", type=float, default=0.01,
                       help="profiling sample rate in (0,1] (default 0.01)")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--metric", choices=sorted(METRICS), default="auc")
    p_run.add_argument("--output", default="search_report.json", help="report JSON path")
    p_run.set_defaults(func=cmd_run)

    p_sched = sub.add_parser("schedule", help="schedule a duration table")
    p_sched.add_argument("--durations", required=True, help="two-column duration table")
    p_sched.add_argument("--workers", type=int, required=True)
    p_sched.add_argument("--seed", type=int, default=0)
    p_sched.set_defaults(func=cmd_schedule)

    p_bench = sub.add_parser("bench", help="benchmark schedulers on synthetic workloads")
    p_bench.add_argument("--config", default=None,
                         help="optional JSON overriding " + ", ".join(sorted(BENCH_DEFAULTS)))
    p_bench.add_argument("--output", default=None, help="TSV output path")
    p_bench.add_argument("--workers-list", default="1,2,4,8")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MODELSEARCH_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
