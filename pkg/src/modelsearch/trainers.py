"""Built-in trainers and the algorithm registry.

Every trainer exposes the same two calls: ``train(config, dataset)``
returning an opaque model payload, and ``predict(payload, dataset)``
returning one score in [0, 1] per row. The built-ins are deliberately
small; their role is to give the scheduler genuinely heterogeneous
task costs without external dependencies. External implementations
join through the plugin host instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Mapping, Protocol

import numpy as np

from .core import Dataset, ModelConfig
from .errors import TrainingError, UnknownAlgorithmError


class Trainer(Protocol):
    def train(self, config: ModelConfig, ds: Dataset) -> Any: ...

    def predict(self, payload: Any, ds: Dataset) -> np.ndarray: ...


class TrainerRegistry:
    """Maps algorithm keys to trainer implementations."""

    def __init__(self) -> None:
        self._trainers: dict[str, Trainer] = {}

    def register(self, algorithm: str, trainer: Trainer) -> None:
        if algorithm in self._trainers:
            raise UnknownAlgorithmError(f"algorithm {algorithm!r} is already registered")
        self._trainers[algorithm] = trainer

    def get(self, algorithm: str) -> Trainer:
        try:
            return self._trainers[algorithm]
        except KeyError:
            raise UnknownAlgorithmError(
                f"algorithm {algorithm!r} is not registered (known: {sorted(self._trainers)})"
            ) from None

    def algorithms(self) -> list[str]:
        return list(self._trainers)

    def __contains__(self, algorithm: str) -> bool:
        return algorithm in self._trainers


# ---------------------------------------------------------------------------
# hyperparameter extraction

def _take_params(algorithm: str, params: Mapping[str, Any], spec: dict[str, tuple]) -> dict[str, Any]:
    """Validate params against {name: (kind, default, minimum)}; None default means required."""
    unknown = set(params) - set(spec)
    if unknown:
        raise TrainingError(f"{algorithm}: unknown parameter(s) {sorted(unknown)}")
    out = {}
    for name, (kind, default, minimum) in spec.items():
        if name in params:
            value = params[name]
        elif default is not None:
            value = default
        else:
            raise TrainingError(f"{algorithm}: missing required parameter {name!r}")
        if kind is bool:
            if not isinstance(value, bool):
                raise TrainingError(f"{algorithm}: parameter {name!r} must be a bool, got {value!r}")
        elif isinstance(value, bool):
            raise TrainingError(f"{algorithm}: parameter {name!r} must be {kind.__name__}, got bool")
        if kind is int:
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            if not isinstance(value, int):
                raise TrainingError(f"{algorithm}: parameter {name!r} must be an integer, got {value!r}")
        elif kind is float:
            if not isinstance(value, (int, float)):
                raise TrainingError(f"{algorithm}: parameter {name!r} must be a number, got {value!r}")
            value = float(value)
        if minimum is not None and value < minimum:
            raise TrainingError(f"{algorithm}: parameter {name!r} must be >= {minimum}, got {value}")
        out[name] = value
    return out


# ---------------------------------------------------------------------------
# logistic regression

@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    intercept: float

    @property
    def n_features(self) -> int:
        return len(self.weights)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_gradient(
    weights: np.ndarray, intercept: float, ds: Dataset, l2: float
) -> tuple[np.ndarray, float]:
    """Gradient of mean log-loss + (l2/2)*||weights||^2 (intercept unpenalized)."""
    error = _sigmoid(ds.features @ weights + intercept) - ds.labels
    grad_w = ds.features.T @ error / ds.n_rows + l2 * weights
    grad_b = float(error.mean())
    return grad_w, grad_b


def train_logistic(params: Mapping[str, Any], ds: Dataset) -> LogisticModel:
    """Full-batch gradient descent on L2-penalized log-loss, zero init."""
    p = _take_params("logistic", params, {
        "learning_rate": (float, 0.1, None),
        "iterations": (int, 100, 0),
        "l2": (float, 0.0, 0.0),
    })
    if not p["learning_rate"] > 0:
        raise TrainingError(f"logistic: learning_rate must be > 0, got {p['learning_rate']}")
    weights = np.zeros(ds.n_cols)
    intercept = 0.0
    for _ in range(p["iterations"]):
        grad_w, grad_b = logistic_gradient(weights, intercept, ds, p["l2"])
        weights = weights - p["learning_rate"] * grad_w
        intercept -= p["learning_rate"] * grad_b
    return LogisticModel(weights, intercept)


def predict_logistic(model: LogisticModel, ds: Dataset) -> np.ndarray:
    return _sigmoid(ds.features @ model.weights + model.intercept)


# ---------------------------------------------------------------------------
# decision tree (greedy CART on Gini impurity)

@dataclass(frozen=True)
class TreeNode:
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    probability: float | None = None  # class-1 fraction at a leaf

    @property
    def is_leaf(self) -> bool:
        return self.probability is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    n_features: int


def _gini(labels: np.ndarray) -> float:
    p = labels.mean()
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(features: np.ndarray, labels: np.ndarray) -> tuple[int, float, float] | None:
    """Lowest weighted-Gini split as (feature, threshold, weighted_gini).

    Thresholds are midpoints between adjacent distinct sorted values.
    Ties keep the first feature and the lowest threshold, so the
    grown tree is deterministic.
    """
    n = len(labels)
    best: tuple[int, float, float] | None = None
    for f in range(features.shape[1]):
        order = np.argsort(features[:, f], kind="stable")
        sorted_vals = features[order, f]
        cum_pos = np.cumsum(labels[order])
        cut = np.nonzero(sorted_vals[:-1] != sorted_vals[1:])[0]
        if cut.size == 0:
            continue
        n_left = cut + 1.0
        n_right = n - n_left
        pos_left = cum_pos[cut]
        pos_right = cum_pos[-1] - pos_left
        gini_left = 1.0 - (pos_left**2 + (n_left - pos_left) ** 2) / n_left**2
        gini_right = 1.0 - (pos_right**2 + (n_right - pos_right) ** 2) / n_right**2
        weighted = (n_left * gini_left + n_right * gini_right) / n
        j = int(np.argmin(weighted))
        if best is None or weighted[j] < best[2]:
            threshold = (sorted_vals[cut[j]] + sorted_vals[cut[j] + 1]) / 2.0
            best = (f, float(threshold), float(weighted[j]))
    return best


def _grow_tree(features: np.ndarray, labels: np.ndarray, depth_left: int, min_samples_split: int) -> TreeNode:
    if (
        depth_left == 0
        or len(labels) < min_samples_split
        or labels.min() == labels.max()
    ):
        return TreeNode(probability=float(labels.mean()))
    split = _best_split(features, labels)
    if split is None or not split[2] < _gini(labels):
        return TreeNode(probability=float(labels.mean()))
    f, threshold, _ = split
    goes_left = features[:, f] <= threshold
    return TreeNode(
        feature=f,
        threshold=threshold,
        left=_grow_tree(features[goes_left], labels[goes_left], depth_left - 1, min_samples_split),
        right=_grow_tree(features[~goes_left], labels[~goes_left], depth_left - 1, min_samples_split),
    )


def train_tree(params: Mapping[str, Any], ds: Dataset) -> TreeModel:
    p = _take_params("tree", params, {
        "max_depth": (int, None, 1),
        "min_samples_split": (int, 2, 2),
    })
    root = _grow_tree(ds.features, ds.labels, p["max_depth"], p["min_samples_split"])
    return TreeModel(root, ds.n_cols)


def _tree_scores(root: TreeNode, features: np.ndarray) -> np.ndarray:
    out = np.empty(len(features))

    def fill(node: TreeNode, idx: np.ndarray) -> None:
        if idx.size == 0:
            return
        if node.is_leaf:
            out[idx] = node.probability
            return
        goes_left = features[idx, node.feature] <= node.threshold
        fill(node.left, idx[goes_left])
        fill(node.right, idx[~goes_left])

    fill(root, np.arange(len(features)))
    return out


def predict_tree(model: TreeModel, ds: Dataset) -> np.ndarray:
    return _tree_scores(model.root, ds.features)


# ---------------------------------------------------------------------------
# random forest (bagging over CART trees)

@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNode, ...]
    feature_indices: tuple[tuple[int, ...], ...]
    n_features: int


def train_forest(params: Mapping[str, Any], ds: Dataset) -> ForestModel:
    """Bagged trees with per-tree seeded bootstrap and feature subsampling."""
    p = _take_params("forest", params, {
        "n_trees": (int, None, 1),
        "max_depth": (int, None, 1),
        "feature_fraction": (float, 1.0, None),
        "seed": (int, 0, None),
        "min_samples_split": (int, 2, 2),
        "bootstrap": (bool, True, None),
    })
    if not 0.0 < p["feature_fraction"] <= 1.0:
        raise TrainingError(f"forest: feature_fraction must be in (0, 1], got {p['feature_fraction']}")
    n_sub = max(1, round(p["feature_fraction"] * ds.n_cols))
    trees = []
    subsets = []
    for child_seed in np.random.SeedSequence(p["seed"]).spawn(p["n_trees"]):
        rng = np.random.default_rng(child_seed)
        rows = rng.integers(0, ds.n_rows, size=ds.n_rows) if p["bootstrap"] else np.arange(ds.n_rows)
        cols = np.sort(rng.choice(ds.n_cols, size=n_sub, replace=False))
        root = _grow_tree(ds.features[rows][:, cols], ds.labels[rows], p["max_depth"], p["min_samples_split"])
        trees.append(root)
        subsets.append(tuple(int(c) for c in cols))
    return ForestModel(tuple(trees), tuple(subsets), ds.n_cols)


def predict_forest(model: ForestModel, ds: Dataset) -> np.ndarray:
    scores = np.zeros(ds.n_rows)
    for root, cols in zip(model.trees, model.feature_indices):
        scores += _tree_scores(root, ds.features[:, cols])
    return scores / len(model.trees)


# ---------------------------------------------------------------------------
# synthetic sleeper (benchmark workload with a known linear cost model)

@dataclass(frozen=True)
class SyntheticModel:
    n_features: int


def train_synthetic(params: Mapping[str, Any], ds: Dataset) -> SyntheticModel:
    """Sleeps base_seconds + seconds_per_row * n_rows; trains nothing."""
    p = _take_params("synthetic", params, {
        "seconds_per_row": (float, None, 0.0),
        "base_seconds": (float, 0.0, 0.0),
    })
    time.sleep(p["base_seconds"] + p["seconds_per_row"] * ds.n_rows)
    return SyntheticModel(ds.n_cols)


def predict_synthetic(model: SyntheticModel, ds: Dataset) -> np.ndarray:
    return np.full(ds.n_rows, 0.5)


# ---------------------------------------------------------------------------

class _FunctionTrainer:
    def __init__(self, train_fn, predict_fn, payload_type):
        self._train = train_fn
        self._predict = predict_fn
        self._payload_type = payload_type

    def train(self, config: ModelConfig, ds: Dataset) -> Any:
        return self._train(config.params, ds)

    def predict(self, payload: Any, ds: Dataset) -> np.ndarray:
        if not isinstance(payload, self._payload_type):
            raise TrainingError(f"payload type {type(payload).__name__} does not belong to this trainer")
        if payload.n_features != ds.n_cols:
            raise TrainingError(
                f"model was trained on {payload.n_features} columns, dataset has {ds.n_cols}"
            )
        return self._predict(payload, ds)


def default_registry() -> TrainerRegistry:
    """Registry with all built-in trainers registered."""
    registry = TrainerRegistry()
    registry.register("logistic", _FunctionTrainer(train_logistic, predict_logistic, LogisticModel))
    registry.register("tree", _FunctionTrainer(train_tree, predict_tree, TreeModel))
    registry.register("forest", _FunctionTrainer(train_forest, predict_forest, ForestModel))
    registry.register("synthetic", _FunctionTrainer(train_synthetic, predict_synthetic, SyntheticModel))
    return registry
