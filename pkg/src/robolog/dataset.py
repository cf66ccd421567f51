"""Telemetry log persistence and labeled dataset assembly.

Log file format (bit-exact): UTF-8, '\n' endings, header line
`t,x,y,z,roll,pitch,yaw,vx,vy,vz,ax,ay,az,wx,wy,wz,label`, then one line
per record with the timestamp printed to 9 decimal places, every other
float in shortest round-trip form, and label 0 or 1.

Feature vectors are the 15 kinematic fields in the header order above
(timestamp excluded); datasets standardize per feature with statistics
computed from the training split only.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInput, MalformedHeader, MalformedLine, NonFinite,
    NonUniformTimestamps, SingleClassInput,
)
from .simulate import LogRecord, Trajectory
from .util import fmt_float

FEATURE_COLUMNS = (
    "x", "y", "z", "roll", "pitch", "yaw",
    "vx", "vy", "vz", "ax", "ay", "az", "wx", "wy", "wz",
)
LOG_HEADER = "t," + ",".join(FEATURE_COLUMNS) + ",label"
TIME_GRID_TOL = 1e-9
DEGENERATE_STD = 1e-12


def record_features(rec: LogRecord) -> np.ndarray:
    return np.array(
        rec.position + rec.orientation + rec.velocity
        + rec.acceleration + rec.angular_velocity,
        dtype=float,
    )


def trajectory_features(traj: Trajectory) -> np.ndarray:
    if len(traj) == 0:
        return np.empty((0, len(FEATURE_COLUMNS)))
    return np.stack([record_features(r) for r in traj.records])


def write_log(traj: Trajectory, destination):
    """Write a trajectory in the log file format; see module docstring."""
    lines = [LOG_HEADER]
    for rec in traj.records:
        fields = [f"{rec.t:.9f}"]
        fields += [fmt_float(v) for v in record_features(rec)]
        fields.append(str(int(rec.label)))
        lines.append(",".join(fields))
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_line(line, lineno):
    parts = line.split(",")
    if len(parts) != 17:
        raise MalformedLine(f"expected 17 fields, got {len(parts)}", lineno)
    values = []
    for col, part in enumerate(parts[:16], start=1):
        try:
            values.append(float(part))
        except ValueError:
            raise MalformedLine(f"not a number: {part!r}", lineno, col) from None
    if parts[16] not in ("0", "1"):
        raise MalformedLine(f"label must be 0 or 1, got {parts[16]!r}", lineno, 17)
    if not all(math.isfinite(v) for v in values):
        raise NonFinite(f"line {lineno}: non-finite value")
    return values[0], values[1:], int(parts[16])


def read_log(source) -> Trajectory:
    """Parse a log file back into a Trajectory.

    dt is reconstructed from the first two timestamps (0 for files with
    fewer than two records) and every timestamp is validated against, then
    snapped onto, the uniform i*dt grid.
    """
    with open(source, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != LOG_HEADER:
        got = lines[0] if lines else ""
        raise MalformedHeader(f"expected header {LOG_HEADER!r}, got {got!r}")
    ts, rows, labels = [], [], []
    for i, line in enumerate(lines[1:], start=2):
        t, values, label = _parse_line(line, i)
        ts.append(t)
        rows.append(values)
        labels.append(label)
    dt = 0.0
    if len(ts) >= 2:
        dt = ts[1] - ts[0]
        if dt <= 0:
            raise NonUniformTimestamps(f"non-increasing timestamps: {ts[0]}, {ts[1]}")
    if ts and abs(ts[0]) > TIME_GRID_TOL:
        raise NonUniformTimestamps(f"first timestamp must be 0, got {ts[0]}")
    # timestamps are printed to 9 decimals, so each step may be off by two
    # rounding quanta; anything larger is a real grid violation
    for i in range(2, len(ts)):
        if abs((ts[i] - ts[i - 1]) - dt) > 2.0 * TIME_GRID_TOL:
            raise NonUniformTimestamps(
                f"step {ts[i] - ts[i - 1]} at record {i} differs from dt={dt}")
    records = []
    for t, v, label in zip(ts, rows, labels):
        records.append(LogRecord(
            t=t,
            position=tuple(v[0:3]),
            orientation=tuple(v[3:6]),
            velocity=tuple(v[6:9]),
            acceleration=tuple(v[9:12]),
            angular_velocity=tuple(v[12:15]),
            label=label,
        ))
    return Trajectory(records=records, dt=dt, context="")


@dataclass
class LabeledDataset:
    features: np.ndarray    # standardized, rows = records
    labels: np.ndarray      # 0 normal, 1 anomalous
    mean: np.ndarray        # training-split statistics
    std: np.ndarray
    split_tag: str

    def __len__(self):
        return len(self.labels)

    @property
    def normal_features(self) -> np.ndarray:
        """Label-0 rows only (autoencoder training input)."""
        return self.features[self.labels == 0]


def build_dataset(normals, anomalous, test_fraction, seed):
    """Pool all records, split stratified by label, standardize on train.

    Returns (train, test) LabeledDatasets. Per-class test counts are
    round(test_fraction * class size), so each split preserves the pooled
    label ratio to within one record per class. Columns whose training std
    falls below 1e-12 are centered and left with std recorded as 1.
    """
    mats, labs = [], []
    for traj in list(normals) + list(anomalous):
        if len(traj):
            mats.append(trajectory_features(traj))
            labs.append(traj.labels())
    if not mats:
        raise EmptyInput("no records in any trajectory")
    features = np.concatenate(mats)
    labels = np.concatenate(labs)
    if len(np.unique(labels)) < 2:
        raise SingleClassInput("need both normal and anomalous records")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        idx = np.nonzero(labels == cls)[0]
        perm = rng.permutation(len(idx))
        n_test = int(math.floor(test_fraction * len(idx) + 0.5))
        test_idx.append(idx[perm[:n_test]])
        train_idx.append(idx[perm[n_test:]])
    train_idx = np.concatenate(train_idx)
    test_idx = np.concatenate(test_idx)
    train_idx = train_idx[rng.permutation(len(train_idx))]
    test_idx = test_idx[rng.permutation(len(test_idx))]

    mean = features[train_idx].mean(axis=0)
    std = features[train_idx].std(axis=0)
    std = np.where(std < DEGENERATE_STD, 1.0, std)

    def make(idx, tag):
        return LabeledDataset(
            features=(features[idx] - mean) / std,
            labels=labels[idx].copy(),
            mean=mean.copy(),
            std=std.copy(),
            split_tag=tag,
        )

    return make(train_idx, "train"), make(test_idx, "test")
