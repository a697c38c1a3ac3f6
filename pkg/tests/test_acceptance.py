"""Acceptance suite: one test per criterion, tolerances pinned inline.

Each test prints through the conftest hook as a PASS/FAIL line. The
timed criteria assert their own runtime budget.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from modelsearch.cli import main
from modelsearch.core import (
    Dataset,
    GridSpec,
    ModelConfig,
    SearchSpace,
    dataset_to_csv,
    grid_enumerate,
)
from modelsearch.evaluator import auc, strip_timing
from modelsearch.executor import TrainingRunner, run_schedule
from modelsearch.profiler import overhead_ratio, profile_all
from modelsearch.scheduler import (
    makespan,
    makespan_lower_bound,
    schedule_greedy,
    schedule_optimal,
    schedule_random,
)
from modelsearch.trainers import default_registry

REPO_ROOT = Path(__file__).parent.parent
REFERENCE_PLUGIN = REPO_ROOT / "trainer-plugin" / "dist" / "main.js"


def three_grid_space():
    return SearchSpace(grids=(
        GridSpec("boosted_tree", {
            "eta": [0.1, 0.3, 0.9],
            "round": [30, 60, 90],
            "max_bin": [32, 64, 128],
        }),
        GridSpec("mlp", {
            "network": ["128_128", "64_64", "128_64", "64_64_64"],
            "learning_rate": [0.003, 0.03, 0.3],
        }),
        GridSpec("sklearn_lr", {
            "algorithm": ["logistic_regression"],
            "c": [0.011, 0.033, 0.1, 0.3, 0.9],
        }),
    ))


def test_grid_enumeration_counts_and_speed():
    configs = grid_enumerate(three_grid_space())
    assert len(configs) == 27 + 12 + 5 == 44
    assert [c.config_id for c in configs] == list(range(44))

    # 6-hyperparameter grid sized 3*3*3*4*4*2 = 864
    big = SearchSpace(grids=(GridSpec("boosted_tree", {
        "eta": [0.1, 0.3, 0.9],
        "round": [30, 60, 90],
        "max_bin": [32, 64, 128],
        "max_depth": [4, 6, 8, 10],
        "subsample": [0.5, 0.7, 0.9, 1.0],
        "l2": [0.0, 1.0],
    }),))
    start = time.monotonic()
    big_configs = grid_enumerate(big)
    elapsed = time.monotonic() - start
    assert len(big_configs) == 864
    assert elapsed < 1.0


def test_scheduler_optimality_bound_1000_instances():
    import random as pyrandom

    rng = pyrandom.Random(77)
    start = time.monotonic()
    for _ in range(1000):
        n = rng.randint(2, 12)
        m = rng.randint(1, 4)
        durations = {i: 10 ** rng.uniform(-2, 2) for i in range(n)}
        greedy = makespan(schedule_greedy(durations, m), durations)
        optimal = makespan(schedule_optimal(durations, m), durations)
        bound = (4.0 / 3.0 - 1.0 / (3.0 * m)) * optimal
        assert greedy <= bound * (1 + 1e-9), (durations, m)
        assert greedy >= makespan_lower_bound(durations, m) * (1 - 1e-9), (durations, m)
    assert time.monotonic() - start < 120.0


def test_fixed_instance_greedy_10_optimal_9():
    durations = {0: 5.0, 1: 4.0, 2: 3.0, 3: 3.0, 4: 3.0}
    assert makespan(schedule_greedy(durations, 2), durations) == 10.0
    assert makespan(schedule_optimal(durations, 2), durations) == 9.0


def test_profile_vs_random_dominance():
    start = time.monotonic()
    rng = np.random.default_rng(2024)
    trials, wins, improvements = 200, 0, []
    for t in range(trials):
        durations = {i: float(d) for i, d in enumerate(rng.lognormal(0.0, 1.5, size=64))}
        greedy = makespan(schedule_greedy(durations, 8), durations)
        baseline = makespan(schedule_random(list(durations), 8, seed=t), durations)
        if greedy <= baseline:
            wins += 1
        improvements.append((baseline - greedy) / baseline)
    assert wins / trials >= 0.95
    assert float(np.median(improvements)) >= 0.15
    assert time.monotonic() - start < 60.0


def _synthetic_workload(durations_seconds, n_rows, seed=0):
    rng = np.random.default_rng(seed)
    ds = Dataset(
        rng.normal(size=(n_rows, 2)),
        (rng.random(n_rows) < 0.5).astype(float),
        ("a", "b"),
    )
    configs = [
        ModelConfig(i, "synthetic", {"seconds_per_row": float(d) / n_rows})
        for i, d in enumerate(durations_seconds)
    ]
    return ds, configs


def test_profiling_overhead_under_10_percent():
    start = time.monotonic()
    rng = np.random.default_rng(5)
    raw = rng.lognormal(0.0, 1.0, size=64)
    durations = raw / raw.sum() * 8.0  # 8 s of serial training cost
    ds, configs = _synthetic_workload(durations, n_rows=1000)
    registry = default_registry()

    t0 = time.monotonic()
    profile = profile_all(configs, ds, rate=0.01, seed=0, runner=TrainingRunner(registry), workers=4)
    schedule = schedule_greedy(profile.entries, 4)
    result = run_schedule(schedule, configs, ds, registry)
    total_wall = time.monotonic() - t0

    assert len(result.models) == 64
    ratio = overhead_ratio(profile, total_wall)
    assert 0.0 < ratio < 0.10
    assert time.monotonic() - start < 120.0


def test_estimate_fidelity_within_25_percent():
    # trainer cost is exactly seconds_per_row * n_rows; full-scale runs are the oracle
    per_config_full = [0.20, 0.25, 0.30, 0.35, 0.40, 0.45]
    ds, configs = _synthetic_workload(per_config_full, n_rows=800)
    runner = TrainingRunner(default_registry())
    profile = profile_all(configs, ds, rate=0.10, seed=0, runner=runner)
    for config in configs:
        t0 = time.monotonic()
        runner.train(config, ds)
        measured_full = time.monotonic() - t0
        estimate = profile.entries[config.config_id]
        assert abs(estimate - measured_full) / measured_full < 0.25, config.config_id


def brute_force_auc(scores, labels):
    pos = scores[labels == 1.0]
    neg = scores[labels == 0.0]
    credit = (pos[:, None] > neg[None, :]) + 0.5 * (pos[:, None] == neg[None, :])
    return float(credit.mean())


def test_auc_matches_brute_force_oracle():
    assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    rng = np.random.default_rng(11)
    for i in range(500):
        n = int(rng.integers(2, 201))
        labels = rng.integers(0, 2, size=n).astype(float)
        labels[0], labels[-1] = 0.0, 1.0  # both classes present
        scores = rng.random(n)
        if i % 2 == 0:
            scores = np.round(scores, 1)  # inject ties
        assert abs(auc(scores, labels) - brute_force_auc(scores, labels)) <= 1e-9


def _xor_like_csvs(tmp_path):
    rng = np.random.default_rng(99)
    features = rng.uniform(-1.0, 1.0, size=(2000, 2))
    labels = (features[:, 0] * features[:, 1] > 0).astype(float)
    splits = {"train": slice(0, 1200), "validate": slice(1200, 1600), "test": slice(1600, 2000)}
    for name, piece in splits.items():
        ds = Dataset(features[piece], labels[piece], ("x0", "x1"))
        dataset_to_csv(ds, tmp_path / f"{name}.csv")


def _run_search(tmp_path, grids, output):
    config_path = tmp_path / f"{output}.config.json"
    config_path.write_text(json.dumps({
        "train_csv": "train.csv",
        "validate_csv": "validate.csv",
        "test_csv": "test.csv",
        "label_column": "label",
        "grids": grids,
    }))
    report_path = tmp_path / output
    code = main(["run", "--config", str(config_path), "--workers", "2",
                 "--scheduler", "random", "--seed", "1", "--output", str(report_path)])
    assert code == 0
    return json.loads(report_path.read_text())


LOGISTIC_GRID = {
    "algorithm": "logistic",
    "params": {"learning_rate": [0.1, 0.5, 1.0], "iterations": [100]},
}
TREE_GRID = {"algorithm": "tree", "params": {"max_depth": [2, 4]}}
FOREST_GRID = {
    "algorithm": "forest",
    "params": {"n_trees": [5], "max_depth": [3], "feature_fraction": [1.0], "seed": [0]},
}


def test_multi_algorithm_search_beats_logistic_alone(tmp_path):
    start = time.monotonic()
    _xor_like_csvs(tmp_path)
    full = _run_search(tmp_path, [LOGISTIC_GRID, TREE_GRID, FOREST_GRID], "full.json")
    logistic_only = _run_search(tmp_path, [LOGISTIC_GRID], "logistic.json")

    assert full["best"]["value"] >= logistic_only["best"]["value"]
    assert full["best"]["test_value"] >= 0.95
    assert logistic_only["best"]["test_value"] <= 0.6
    assert time.monotonic() - start < 60.0


def test_parallel_speedup_four_workers():
    durations = [0.5] * 16
    ds, configs = _synthetic_workload(durations, n_rows=100)
    registry = default_registry()
    table = {c.config_id: 0.5 for c in configs}

    walls = {}
    for m in (1, 4):
        schedule = schedule_greedy(table, m)
        t0 = time.monotonic()
        result = run_schedule(schedule, configs, ds, registry)
        walls[m] = time.monotonic() - t0
        assert len(result.models) == 16
    assert walls[4] <= 0.45 * walls[1]


def test_deterministic_reports_modulo_timing(tmp_path):
    _xor_like_csvs(tmp_path)
    grids = [LOGISTIC_GRID, TREE_GRID, FOREST_GRID]
    first = _run_search(tmp_path, grids, "run1.json")
    second = _run_search(tmp_path, grids, "run2.json")
    assert json.dumps(first["schedule"]["assignments"]) == json.dumps(second["schedule"]["assignments"])
    assert strip_timing(first) == strip_timing(second)


@pytest.mark.skipif(
    not REFERENCE_PLUGIN.exists(),
    reason="reference plugin not built (run `npm install && npm run build` in trainer-plugin/)",
)
def test_reference_plugin_conformance():
    from modelsearch.conformance import check_plugin, conformance_dataset
    from modelsearch.errors import PluginTaskError
    from modelsearch.evaluator import auc as auc_metric
    from modelsearch.plugin_host import plugin_predict, plugin_spawn, plugin_train
    from modelsearch.trainers import predict_logistic, train_logistic

    command = ["node", str(REFERENCE_PLUGIN)]
    findings = check_plugin(command, algorithm="tfjs_logistic",
                            params={"iterations": 20}, n_tasks=10)
    assert findings == []

    with plugin_spawn(command) as handle:
        separable = conformance_dataset(40)
        trained = plugin_train(handle, ModelConfig(0, "tfjs_logistic", {"iterations": 150}), separable)
        scores = plugin_predict(handle, trained.payload, separable)
        assert auc_metric(scores, separable.labels) == 1.0

        # shared random dataset: plugin logistic vs built-in logistic
        rng = np.random.default_rng(7)
        features = rng.normal(size=(300, 3))
        logits = features @ np.array([1.5, -2.0, 0.5]) + 0.3
        labels = (rng.random(300) < 1.0 / (1.0 + np.exp(-logits))).astype(float)
        shared = Dataset(features, labels, ("a", "b", "c"))
        plugin_model = plugin_train(
            handle,
            ModelConfig(1, "tfjs_logistic", {"learning_rate": 0.5, "iterations": 300}),
            shared,
        )
        plugin_auc = auc_metric(plugin_predict(handle, plugin_model.payload, shared), shared.labels)
        builtin = train_logistic({"learning_rate": 0.5, "iterations": 300}, shared)
        builtin_auc = auc_metric(predict_logistic(builtin, shared), shared.labels)
        assert abs(plugin_auc - builtin_auc) <= 0.02

        # error path stays on the same handle
        with pytest.raises(PluginTaskError):
            plugin_predict(handle, "no-such-model", separable)
        assert handle.state == "ready"
