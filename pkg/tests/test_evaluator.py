import json

import numpy as np
import pytest

from modelsearch.core import Dataset, ModelConfig
from modelsearch.errors import MetricError
from modelsearch.evaluator import (
    EvaluationResult,
    SearchReport,
    accuracy,
    auc,
    select_best,
    strip_timing,
    validate_all,
)
from modelsearch.executor import TaskFailure, run_schedule
from modelsearch.scheduler import Schedule
from modelsearch.trainers import default_registry


def brute_force_auc(scores, labels):
    """Oracle: explicit mean pairwise credit over (positive, negative) pairs."""
    scores = np.asarray(scores, float)
    pos = scores[np.asarray(labels) == 1]
    neg = scores[np.asarray(labels) == 0]
    credit = (pos[:, None] > neg[None, :]) + 0.5 * (pos[:, None] == neg[None, :])
    return credit.mean()


class TestAuc:
    def test_perfect_separation(self):
        assert auc([0.9, 0.8, 0.3, 0.2], [1, 1, 0, 0]) == 1.0

    def test_all_scores_equal_gives_half(self):
        assert auc([0.4, 0.4, 0.4, 0.4], [1, 0, 1, 0]) == 0.5

    def test_three_of_four_pairs_correct(self):
        assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_matches_brute_force_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(150):
            n = rng.integers(2, 120)
            labels = rng.integers(0, 2, size=n).astype(float)
            if labels.min() == labels.max():
                labels[0] = 1.0 - labels[0]
            scores = np.round(rng.random(n), 1)  # coarse grid injects ties
            assert auc(scores, labels) == pytest.approx(brute_force_auc(scores, labels), abs=1e-9)

    def test_negation_antisymmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            n = int(rng.integers(4, 60))
            labels = np.array([0, 1] * (n // 2), dtype=float)
            scores = rng.random(n // 2 * 2)
            assert auc(scores, labels) == pytest.approx(1.0 - auc(-scores, labels), abs=1e-12)

    def test_invariant_under_strictly_increasing_transform(self):
        rng = np.random.default_rng(2)
        labels = rng.integers(0, 2, size=80).astype(float)
        labels[0], labels[1] = 0.0, 1.0
        scores = np.round(rng.random(80), 1)
        base = auc(scores, labels)
        assert auc(np.exp(scores), labels) == pytest.approx(base, abs=1e-12)
        assert auc(3.0 * scores + 7.0, labels) == pytest.approx(base, abs=1e-12)

    def test_single_class_undefined(self):
        with pytest.raises(MetricError):
            auc([0.1, 0.2], [1, 1])
        with pytest.raises(MetricError):
            auc([0.1, 0.2], [0, 0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(MetricError):
            auc([0.1, 0.2], [1, 0, 1])


class TestAccuracy:
    def test_perfect(self):
        assert accuracy([0.9, 0.1], [1, 0]) == 1.0

    def test_inverted(self):
        assert accuracy([0.1, 0.9], [1, 0]) == 0.0

    def test_half_right_on_four_rows(self):
        assert accuracy([0.9, 0.9, 0.1, 0.1], [1, 0, 0, 1]) == 0.5

    def test_threshold_is_inclusive(self):
        assert accuracy([0.5], [1]) == 1.0
        assert accuracy([0.5], [0], threshold=0.6) == 1.0


def result(cid, value, metric="auc"):
    return EvaluationResult(cid, metric, value, train_seconds=0.0)


class TestSelectBest:
    def test_argmax(self):
        assert select_best([result(0, 0.7), result(1, 0.9)], "auc") == 1

    def test_tie_goes_to_lower_config_id(self):
        assert select_best([result(5, 0.8), result(2, 0.8), result(7, 0.8)], "auc") == 2

    def test_minimize_direction(self):
        assert select_best([result(0, 0.7), result(1, 0.9)], "auc", direction="minimize") == 0

    def test_superset_never_worse(self):
        rng = np.random.default_rng(3)
        values = rng.random(20)
        results = [result(i, float(v)) for i, v in enumerate(values)]
        subset_best = select_best(results[:10], "auc")
        superset_best = select_best(results, "auc")
        by_id = {r.config_id: r.value for r in results}
        assert by_id[superset_best] >= by_id[subset_best]

    def test_metric_mismatch_rejected(self):
        with pytest.raises(MetricError):
            select_best([result(0, 0.7), result(1, 0.9, metric="accuracy")], "auc")

    def test_empty_results_rejected(self):
        with pytest.raises(MetricError):
            select_best([], "auc")


class TestValidateAll:
    def make_models(self):
        rng = np.random.default_rng(4)
        features = rng.normal(size=(60, 2))
        labels = (features[:, 0] > 0).astype(float)
        ds = Dataset(features, labels, ("a", "b"))
        configs = [
            ModelConfig(0, "logistic", {"learning_rate": 0.5, "iterations": 200}),
            ModelConfig(1, "tree", {"max_depth": 3}),
        ]
        registry = default_registry()
        run = run_schedule(Schedule(((0, 1),)), configs, ds, registry)
        return run.models, ds, registry

    def test_results_ordered_and_in_range(self):
        models, ds, registry = self.make_models()
        results = validate_all(models, ds, registry, metric="auc")
        assert [r.config_id for r in results] == [0, 1]
        assert all(0.0 <= r.value <= 1.0 for r in results)
        assert all(r.metric == "auc" for r in results)

    def test_separable_models_score_high(self):
        models, ds, registry = self.make_models()
        results = validate_all(models, ds, registry, metric="auc")
        assert max(r.value for r in results) > 0.95

    def test_parallel_matches_serial(self):
        models, ds, registry = self.make_models()
        serial = validate_all(models, ds, registry, metric="accuracy", workers=1)
        parallel = validate_all(models, ds, registry, metric="accuracy", workers=4)
        assert serial == parallel

    def test_unknown_metric_rejected(self):
        models, ds, registry = self.make_models()
        with pytest.raises(MetricError):
            validate_all(models, ds, registry, metric="f1")

    def test_no_models_rejected(self):
        _, ds, registry = self.make_models()
        with pytest.raises(MetricError):
            validate_all([], ds, registry)


class TestSearchReport:
    def make_report(self):
        configs = (
            ModelConfig(0, "logistic", {"iterations": 10}),
            ModelConfig(1, "tree", {"max_depth": 2}),
        )
        return SearchReport(
            metric="auc",
            direction="maximize",
            results=(result(0, 0.7), result(1, 0.9)),
            failures=(TaskFailure(7, "boom"),),
            best_config_id=1,
            best_value=0.9,
            configs=configs + (ModelConfig(7, "tree", {"max_depth": 1}),),
            scheduler_name="profile",
            workers=2,
            assignments=((0,), (1, 7)),
            worker_seconds=(0.5, 0.8),
            makespan_seconds=0.8,
            profiling_wall_seconds=0.1,
            total_wall_seconds=1.2,
            overhead_ratio=0.1 / 1.2,
            estimated_durations={0: 1.0, 1: 2.0, 7: 0.5},
        )

    def test_json_round_trips(self):
        report = self.make_report()
        data = json.loads(report.to_json())
        assert data["best"]["config_id"] == 1
        assert data["schedule"]["assignments"] == [[0], [1, 7]]
        assert data["schedule"]["estimated_loads"] == [1.0, 2.5]
        assert data["failures"] == [{"config_id": 7, "message": "boom"}]
        assert data["timing"]["total_wall_seconds"] == 1.2

    def test_strip_timing_removes_wall_clock_fields(self):
        data = self.make_report().to_dict()
        stripped = strip_timing(data)
        assert "timing" not in stripped
        assert all("train_seconds" not in r for r in stripped["results"])
        assert "estimated_loads" not in stripped["schedule"]
        # original untouched
        assert "timing" in data
