"""Metrics, ROC/AUC, and the multi-iteration experiment protocol.

Per-class precision/recall/F1 are combined by support weighting (class
frequency), under which weighted recall reduces algebraically to accuracy;
the reduction is computed in its exact form so the identity holds to the
bit. Binary anomalous-positive variants are reported alongside for
transparency. ROC curves group tied scores into one sweep step and AUC is
the trapezoidal area, which matches Mann-Whitney pair counting with half
credit for ties.
"""

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .anomaly import inject
from .config import ExperimentConfig
from .dataset import build_dataset, trajectory_features, write_log
from .errors import (
    DeadlockDetected, EmptyInput, LengthMismatch, MalformedCurve, NoPath,
    SingleClassInput, StepCapExceeded,
)
from .grid import inflate, resolve_grid
from .models import scores as model_scores
from .models import train_autoencoder, train_logistic, train_svm
from .simulate import simulate_pioneer_exchange, simulate_quadcopter
from .util import fmt_float

METRIC_ORDER = (
    "roc_auc", "precision", "recall", "accuracy", "f1",
    "precision_anom", "recall_anom", "f1_anom",
)


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def confusion(labels, preds) -> ConfusionCounts:
    labels = np.asarray(labels)
    preds = np.asarray(preds)
    if labels.shape != preds.shape:
        raise LengthMismatch(f"labels {labels.shape} vs preds {preds.shape}")
    if labels.size == 0:
        raise EmptyInput("no records to evaluate")
    return ConfusionCounts(
        tp=int(np.sum((labels == 1) & (preds == 1))),
        fp=int(np.sum((labels == 0) & (preds == 1))),
        tn=int(np.sum((labels == 0) & (preds == 0))),
        fn=int(np.sum((labels == 1) & (preds == 0))),
    )


def _prf(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def metrics(counts: ConfusionCounts) -> dict:
    """Support-weighted precision/recall/F1 plus accuracy, and the binary
    anomalous-positive variants (keys with the _anom suffix)."""
    if counts.total == 0:
        raise EmptyInput("no records to evaluate")
    n1 = counts.tp + counts.fn
    n0 = counts.tn + counts.fp
    total = counts.total
    p1, r1, f1_1 = _prf(counts.tp, counts.fp, counts.fn)
    p0, r0, f1_0 = _prf(counts.tn, counts.fn, counts.fp)
    accuracy = (counts.tp + counts.tn) / total
    return {
        "precision": (n1 * p1 + n0 * p0) / total,
        # support-weighted recall sum(n_c * (diag_c / n_c)) / N collapses to
        # (tp + tn) / N; computing it that way keeps recall == accuracy exact
        "recall": (counts.tp + counts.tn) / total,
        "accuracy": accuracy,
        "f1": (n1 * f1_1 + n0 * f1_0) / total,
        "precision_anom": p1,
        "recall_anom": r1,
        "f1_anom": f1_1,
    }


def roc_curve(score_values, labels):
    """(fpr, tpr) points from sweeping a threshold over distinct scores,
    tied scores grouped into one step; anchored at (0,0) and (1,1)."""
    score_values = np.asarray(score_values, dtype=float)
    labels = np.asarray(labels)
    if score_values.shape != labels.shape:
        raise LengthMismatch(f"scores {score_values.shape} vs labels {labels.shape}")
    pos = int(np.sum(labels == 1))
    neg = int(np.sum(labels == 0))
    if pos == 0 or neg == 0:
        raise SingleClassInput("ROC needs both classes present")
    order = np.argsort(-score_values, kind="stable")
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = len(order)
    while i < n:
        j = i
        while j < n and score_values[order[j]] == score_values[order[i]]:
            if labels[order[j]] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / neg, tp / pos))
        i = j
    return points


def auc(points) -> float:
    """Trapezoidal area under an ROC point list."""
    if len(points) < 2 or points[0] != (0.0, 0.0) or points[-1] != (1.0, 1.0):
        raise MalformedCurve("curve must run from (0,0) to (1,1)")
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        if x1 < x0 or y1 < y0:
            raise MalformedCurve("curve coordinates must be non-decreasing")
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


# --- experiment protocol ---

@dataclass
class EvalReport:
    context: str
    iterations: int
    models: tuple
    stats: dict = field(default_factory=dict)       # model -> metric -> (mean, std)
    roc_points: dict = field(default_factory=dict)  # model -> last-iteration points


def _sample_free_cell(grid, rng):
    while True:
        x = int(rng.integers(0, grid.width))
        y = int(rng.integers(0, grid.height))
        if not grid.is_occupied((x, y)):
            return (x, y)


def _sample_run(cfg, grid, rng, min_sep):
    """Draw a feasible (start, goal) pair and simulate one run; endpoint
    draws that plan into a dead end or deadlock are retried."""
    inflated = inflate(grid, cfg.sim.safety_margin)
    for _ in range(200):
        a = _sample_free_cell(inflated, rng)
        b = _sample_free_cell(inflated, rng)
        wa, wb = grid.world_of(a), grid.world_of(b)
        if math.hypot(wb[0] - wa[0], wb[1] - wa[1]) < min_sep:
            continue
        try:
            if cfg.context == "quadcopter":
                return [simulate_quadcopter(grid, a, b, cfg.sim)]
            pair = simulate_pioneer_exchange(grid, a, b, cfg.sim)
            return [pair[0], pair[1]]
        except (NoPath, DeadlockDetected, StepCapExceeded):
            continue
    raise NoPath("could not sample a feasible start/goal pair in 200 tries")


MIN_ENDPOINT_SEPARATION = 2.0  # meters


def generate_logs(cfg: ExperimentConfig, seed, count_normal, count_anomalous):
    """Simulate `count_normal` normal and `count_anomalous` disturbed logs.

    A Pioneer exchange yields two logs (one per robot), so exchanges run
    until the requested counts are filled. Offset anomalies share one
    direction drawn per call so the anomaly class shifts coherently.
    """
    rng = np.random.default_rng(seed)
    grid = resolve_grid(cfg.grid)
    trajs = []
    while len(trajs) < count_normal + count_anomalous:
        trajs.extend(_sample_run(cfg, grid, rng, MIN_ENDPOINT_SEPARATION))
    normals = trajs[:count_normal]
    anomalous_src = trajs[count_normal:count_normal + count_anomalous]
    theta = rng.uniform(0.0, 2.0 * math.pi)
    direction = (math.cos(theta), math.sin(theta))
    anomalous = []
    for k, traj in enumerate(anomalous_src):
        acfg = replace(cfg.anomaly, seed=int(seed) * 1000 + k, direction=direction)
        anomalous.append(inject(traj, acfg))
    return normals, anomalous


def _train_model(kind, train, cfg, seed):
    tc = replace(cfg.train_config(kind), seed=seed)
    if kind == "lr":
        return train_logistic(train, tc)
    if kind == "svm":
        return train_svm(train, tc)
    if kind == "ae":
        return train_autoencoder(train.normal_features, tc)
    raise ValueError(f"unknown model kind {kind!r}")


def evaluate_model(model, test) -> tuple:
    """(metric dict incl. roc_auc, roc points) on a test split."""
    s, preds = model_scores(model, test.features)
    counts = confusion(test.labels, preds)
    result = metrics(counts)
    points = roc_curve(s, test.labels)
    result["roc_auc"] = auc(points)
    return result, points


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """The averaged protocol: per iteration, regenerate data with a derived
    seed, split, train every configured model, and score the test split;
    report per-metric mean and standard deviation across iterations."""
    per_model = {kind: {m: [] for m in METRIC_ORDER} for kind in cfg.models}
    last_points = {}
    for it in range(cfg.iterations):
        it_seed = cfg.base_seed + it
        try:
            normals, anomalous = generate_logs(
                cfg, it_seed, cfg.normal_runs, cfg.anomalous_runs)
            train, test = build_dataset(normals, anomalous, cfg.test_fraction, it_seed)
            for kind in cfg.models:
                model = _train_model(kind, train, cfg, it_seed)
                result, points = evaluate_model(model, test)
                for m in METRIC_ORDER:
                    per_model[kind][m].append(result[m])
                last_points[kind] = points
        except Exception as exc:
            exc.args = (f"iteration {it}: {exc}",)
            raise
    stats = {
        kind: {
            m: (float(np.mean(vals)), float(np.std(vals)))
            for m, vals in per_model[kind].items()
        }
        for kind in cfg.models
    }
    return EvalReport(
        context=cfg.context, iterations=cfg.iterations, models=tuple(cfg.models),
        stats=stats, roc_points=last_points,
    )


# --- report files ---

def write_report_csv(report: EvalReport, path):
    lines = ["context,model,metric,mean,std"]
    for kind in report.models:
        for m in METRIC_ORDER:
            mean, std = report.stats[kind][m]
            lines.append(
                f"{report.context},{kind},{m},{fmt_float(mean)},{fmt_float(std)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_roc_csv(report: EvalReport, kind, path):
    lines = ["model,fpr,tpr"]
    for fpr, tpr in report.roc_points[kind]:
        lines.append(f"{kind},{fmt_float(fpr)},{fmt_float(tpr)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_accel_trace(traj, path):
    """t, acceleration magnitude, label per record (plot-ready CSV)."""
    lines = ["t,accel_magnitude,label"]
    for rec in traj.records:
        mag = math.sqrt(sum(a * a for a in rec.acceleration))
        lines.append(f"{rec.t:.9f},{fmt_float(mag)},{rec.label}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def format_report_table(report: EvalReport) -> str:
    header = f"{'model':<6}" + "".join(f"{m:>16}" for m in METRIC_ORDER[:5])
    rows = [f"context={report.context} iterations={report.iterations}", header]
    for kind in report.models:
        cells = []
        for m in METRIC_ORDER[:5]:
            mean, std = report.stats[kind][m]
            cells.append(f"{mean:.4f}+-{std:.4f}")
        rows.append(f"{kind:<6}" + "".join(f"{c:>16}" for c in cells))
    return "\n".join(rows)


def write_logs_with_manifest(cfg, out_dir, count_normal, count_anomalous, seed):
    """Materialize one generation batch as normal_<i>.csv / anomalous_<i>.csv
    plus manifest.csv (file, context, seed, anomaly settings)."""
    normals, anomalous = generate_logs(cfg, seed, count_normal, count_anomalous)
    rows = ["file,context,seed,kind,rate,burst_len,magnitude"]
    for i, traj in enumerate(normals):
        name = f"normal_{i}.csv"
        write_log(traj, os.path.join(out_dir, name))
        rows.append(f"{name},{cfg.context},{seed},none,0,0,0")
        if cfg.emit_accel_traces:
            write_accel_trace(traj, os.path.join(out_dir, f"accel_trace_normal_{i}.csv"))
    a = cfg.anomaly
    for i, traj in enumerate(anomalous):
        name = f"anomalous_{i}.csv"
        write_log(traj, os.path.join(out_dir, name))
        rows.append(f"{name},{cfg.context},{seed},{a.kind},{fmt_float(a.rate)},"
                    f"{a.burst_len},{fmt_float(a.magnitude)}")
        if cfg.emit_accel_traces:
            write_accel_trace(traj, os.path.join(out_dir, f"accel_trace_anomalous_{i}.csv"))
    with open(os.path.join(out_dir, "manifest.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    return normals, anomalous
