"""Model search across pluggable trainers with profile-based scheduling.

Typical flow: declare a :class:`SearchSpace`, enumerate it into
configs, estimate per-config durations on a data sample, schedule the
tasks over parallel workers, train, then validate and pick the best
model. The ``modelsearch`` CLI drives the same pipeline from a JSON
config file.
"""

from .core import (
    Dataset,
    GridSpec,
    ModelConfig,
    ParamValue,
    SearchSpace,
    dataset_from_csv,
    dataset_sample,
    dataset_standardize,
    dataset_to_csv,
    grid_enumerate,
)
from .errors import ModelSearchError
from .evaluator import EvaluationResult, SearchReport, accuracy, auc, select_best, validate_all
from .executor import RunResult, TrainedModel, TrainingRunner, predict, run_schedule
from .plugin_host import PluginHandle, PluginTrainer, plugin_predict, plugin_shutdown, plugin_spawn, plugin_train
from .profiler import TaskProfile, overhead_ratio, profile_all
from .scheduler import Schedule, makespan, schedule_greedy, schedule_optimal, schedule_random
from .trainers import TrainerRegistry, default_registry
from .tuner import GridTuner, RandomRange, RandomTuner, tune_grid, tune_random

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "EvaluationResult",
    "GridSpec",
    "GridTuner",
    "ModelConfig",
    "ModelSearchError",
    "ParamValue",
    "PluginHandle",
    "PluginTrainer",
    "RandomRange",
    "RandomTuner",
    "RunResult",
    "Schedule",
    "SearchReport",
    "SearchSpace",
    "TaskProfile",
    "TrainedModel",
    "TrainerRegistry",
    "TrainingRunner",
    "accuracy",
    "auc",
    "dataset_from_csv",
    "dataset_sample",
    "dataset_standardize",
    "dataset_to_csv",
    "default_registry",
    "grid_enumerate",
    "makespan",
    "overhead_ratio",
    "plugin_predict",
    "plugin_shutdown",
    "plugin_spawn",
    "plugin_train",
    "predict",
    "profile_all",
    "run_schedule",
    "schedule_greedy",
    "schedule_optimal",
    "schedule_random",
    "select_best",
    "tune_grid",
    "tune_random",
    "validate_all",
]
