"""robolog: deterministic robot telemetry generation and anomaly-detection
benchmarking.

Pipeline: plan paths on occupancy grids, execute them kinematically for a
quadcopter or a Pioneer pair, inject labeled anomaly bursts, persist logs
as text files, train three detectors (logistic regression, linear SVM,
autoencoder), and evaluate them with a seeded, averaged metrics harness.
"""

from .anomaly import AnomalyConfig, inject
from .config import ExperimentConfig, load_config, preset_config
from .dataset import LabeledDataset, build_dataset, read_log, write_log
from .evaluate import (
    ConfusionCounts, EvalReport, auc, confusion, metrics, roc_curve, run_experiment,
)
from .grid import GridMap, builtin_grid, inflate
from .models import (
    AutoencoderModel, LogisticModel, SvmModel, TrainConfig, decision_value,
    linear_kernel, load_model, predict_proba, reconstruction_error, save_model,
    score, sigmoid, train_autoencoder, train_logistic, train_svm,
)
from .planner import DStarPlanner, Path, plan
from .simulate import (
    LogRecord, SimParams, Trajectory, derive_kinematics, simulate_pioneer_exchange,
    simulate_quadcopter,
)

__version__ = "0.1.0"

__all__ = [
    "AnomalyConfig", "AutoencoderModel", "ConfusionCounts", "DStarPlanner",
    "EvalReport", "ExperimentConfig", "GridMap", "LabeledDataset", "LogRecord",
    "LogisticModel", "Path", "SimParams", "SvmModel", "TrainConfig", "Trajectory",
    "auc", "build_dataset", "builtin_grid", "confusion", "decision_value",
    "derive_kinematics", "inflate", "inject", "linear_kernel", "load_config",
    "load_model", "metrics", "plan", "predict_proba", "preset_config",
    "read_log", "reconstruction_error", "roc_curve", "run_experiment",
    "save_model", "score", "sigmoid", "simulate_pioneer_exchange",
    "simulate_quadcopter", "train_autoencoder", "train_logistic", "train_svm",
    "write_log",
]
