"""Uniform data format and search-space enumeration.

Every trainer in the system consumes the same row-major dense matrix
(:class:`Dataset`), and every search is declared as value grids per
algorithm (:class:`SearchSpace`) that enumerate into a flat list of
:class:`ModelConfig` tasks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import DatasetError, InvalidSearchSpaceError

# A hyperparameter value is a plain scalar; the Python type is the tag.
# bool is excluded (it would silently alias int).
ParamValue = Union[int, float, str]


def check_param_value(name: str, value: object) -> ParamValue:
    """Validate a single hyperparameter value, returning it unchanged."""
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise InvalidSearchSpaceError(
            f"parameter {name!r}: values must be int, float or str, got {type(value).__name__}"
        )
    if isinstance(value, float) and not math.isfinite(value):
        raise InvalidSearchSpaceError(f"parameter {name!r}: value must be finite, got {value!r}")
    return value


def config_key(algorithm: str, params: Mapping[str, ParamValue]) -> tuple:
    """Order-insensitive identity of an (algorithm, params) point.

    The value's type name is part of the key so that 1 and 1.0 stay
    distinct points.
    """
    return (algorithm, tuple(sorted((k, type(v).__name__, v) for k, v in params.items())))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Row-major dense feature matrix with a binary label vector.

    Immutable after construction; the backing arrays are marked
    read-only so a dataset can be shared across worker threads.
    """

    features: np.ndarray
    labels: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self) -> None:
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.float64)
        if features.ndim != 2:
            raise DatasetError(f"features must be a 2-D matrix, got ndim={features.ndim}")
        n_rows, n_cols = features.shape
        if n_rows < 1 or n_cols < 1:
            raise DatasetError(f"dataset must have at least one row and one column, got {features.shape}")
        if not np.isfinite(features).all():
            bad = np.argwhere(~np.isfinite(features))[0]
            raise DatasetError(f"non-finite feature value at row {bad[0] + 1}, column index {bad[1]}")
        if labels.shape != (n_rows,):
            raise DatasetError(f"labels must have length {n_rows}, got shape {labels.shape}")
        bad_labels = ~((labels == 0.0) | (labels == 1.0))
        if bad_labels.any():
            i = int(np.argmax(bad_labels))
            raise DatasetError(f"label at row {i + 1} is {labels[i]!r}; labels must be 0 or 1")
        names = tuple(self.column_names)
        if len(names) != n_cols:
            raise DatasetError(f"expected {n_cols} column names, got {len(names)}")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "column_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_cols(self) -> int:
        return self.features.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.column_names == other.column_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )

    def __repr__(self) -> str:
        return f"Dataset(n_rows={self.n_rows}, n_cols={self.n_cols})"


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter value grid for one algorithm."""

    algorithm: str
    params: dict[str, list[ParamValue]]

    def __post_init__(self) -> None:
        if not self.algorithm or not isinstance(self.algorithm, str):
            raise InvalidSearchSpaceError("grid needs a nonempty algorithm key")
        for name, values in self.params.items():
            if not values:
                raise InvalidSearchSpaceError(
                    f"grid for {self.algorithm!r}: parameter {name!r} has an empty value list"
                )
            for v in values:
                check_param_value(name, v)

    def n_points(self) -> int:
        return math.prod(len(v) for v in self.params.values())


@dataclass(frozen=True)
class SearchSpace:
    """Ordered list of grids; the search covers their concatenation."""

    grids: tuple[GridSpec, ...]

    def __post_init__(self) -> None:
        grids = tuple(self.grids)
        if not grids:
            raise InvalidSearchSpaceError("search space needs at least one grid")
        object.__setattr__(self, "grids", grids)

    def n_points(self) -> int:
        return sum(g.n_points() for g in self.grids)


@dataclass(frozen=True)
class ModelConfig:
    """One training task: an algorithm plus concrete hyperparameter values."""

    config_id: int
    algorithm: str
    params: dict[str, ParamValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.config_id < 0:
            raise InvalidSearchSpaceError(f"config_id must be >= 0, got {self.config_id}")


def grid_enumerate(space: SearchSpace) -> list[ModelConfig]:
    """Expand a search space into the full list of grid points.

    Grids are expanded in declaration order; within a grid, the
    last-declared parameter varies fastest. config_ids are assigned
    sequentially from 0, so a given space always enumerates to the
    same ids.
    """
    configs: list[ModelConfig] = []
    seen: set[tuple] = set()
    for grid in space.grids:
        names = list(grid.params)
        value_lists = [grid.params[name] for name in names]
        for combo in itertools.product(*value_lists):
            params = dict(zip(names, combo))
            key = config_key(grid.algorithm, params)
            if key in seen:
                raise InvalidSearchSpaceError(
                    f"duplicate configuration for algorithm {grid.algorithm!r}: {params!r}"
                )
            seen.add(key)
            configs.append(ModelConfig(len(configs), grid.algorithm, params))
    return configs


def dataset_from_csv(path, label_column: str) -> Dataset:
    """Read a dense dataset from a headered CSV file.

    UTF-8, comma separated, no quoting; every cell a decimal real.
    The label column may appear anywhere; features keep header order.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise DatasetError(f"{path}: file is empty")
        names = [c.strip() for c in header.rstrip("\r\n").split(",")]
        if label_column not in names:
            raise DatasetError(f"{path}: label column {label_column!r} not in header {names}")
        label_idx = names.index(label_column)
        feature_names = [n for i, n in enumerate(names) if i != label_idx]

        feature_rows: list[list[float]] = []
        labels: list[float] = []
        for row_num, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(names):
                raise DatasetError(
                    f"{path}: row {row_num} has {len(cells)} cells, expected {len(names)}"
                )
            values = []
            for col_name, cell in zip(names, cells):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {row_num}, column {col_name!r}: cannot parse {cell.strip()!r} as a number"
                    ) from None
            label = values[label_idx]
            if label not in (0.0, 1.0):
                raise DatasetError(
                    f"{path}: row {row_num}: label is {label!r}; labels must be 0 or 1"
                )
            labels.append(label)
            feature_rows.append([v for i, v in enumerate(values) if i != label_idx])

    if not feature_rows:
        raise DatasetError(f"{path}: no data rows")
    return Dataset(np.array(feature_rows, dtype=np.float64), np.array(labels), tuple(feature_names))


def dataset_to_csv(ds: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset as CSV, labels as the last column.

    Floats are written with shortest round-trip repr, so reading the
    file back yields a bit-identical dataset.
    """
    if label_column in ds.column_names:
        raise DatasetError(f"label column name {label_column!r} collides with a feature column")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join((*ds.column_names, label_column)) + "\n")
        for row, label in zip(ds.features, ds.labels):
            cells = [repr(float(v)) for v in row]
            cells.append(repr(float(label)))
            fh.write(",".join(cells) + "\n")


def dataset_sample(ds: Dataset, rate: float, seed: int) -> Dataset:
    """Uniform row sample without replacement of max(1, floor(rate * n_rows)) rows.

    Deterministic for a given seed; selected rows keep their original
    order, and rate=1 returns the dataset unchanged.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"sampling rate must be in (0, 1], got {rate}")
    if rate == 1.0:
        return ds
    k = max(1, math.floor(rate * ds.n_rows))
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(ds.n_rows, size=k, replace=False))
    return Dataset(ds.features[idx], ds.labels[idx], ds.column_names)


def dataset_standardize(ds: Dataset) -> Dataset:
    """Shift/scale each feature column to mean 0, population std 1.

    Constant columns become all-zero.
    """
    mean = ds.features.mean(axis=0)
    std = ds.features.std(axis=0)  # population convention (ddof=0)
    divisor = np.where(std == 0.0, 1.0, std)
    out = (ds.features - mean) / divisor
    out[:, std == 0.0] = 0.0
    return Dataset(out, ds.labels, ds.column_names)
