"""Labeled anomaly injection for telemetry trajectories.

Two disturbance mechanisms, both applied in non-overlapping bursts whose
record count totals ceil(rate * N) (the final burst is truncated when the
target is not a multiple of burst_len):

- position_offset: every record in a burst is displaced in the motion
  plane by magnitude * u_b, where u_b is a fresh per-burst unit vector
  drawn within +-direction_jitter radians of a base direction (from
  `direction`, else drawn once from the seed). Keeping the bursts around
  a common base direction gives the anomaly class a consistent
  feature-space shift; directions drawn uniformly over the whole circle
  average out to a zero mean shift that no linear detector can rank.
- velocity_fluctuation: each burst record's planar position gets i.i.d.
  zero-mean Gaussian noise with per-axis std magnitude / sqrt(2), so the
  per-step position-increment noise has std ~= magnitude per axis while
  burst-mean positions stay unbiased.

Kinematic channels are re-derived from the disturbed positions, so the
finite-difference consistency invariant still holds after injection.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrajectory, RateInfeasible
from .simulate import Trajectory, assemble_trajectory

KINDS = ("position_offset", "velocity_fluctuation")


@dataclass
class AnomalyConfig:
    kind: str = "position_offset"
    rate: float = 0.3
    burst_len: int = 10
    magnitude: float = 0.5
    seed: int = 0
    direction: tuple | None = None   # offset base direction; unit-normalized
    direction_jitter: float = 0.0    # radians; per-burst rotation about the base

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must lie in [0, 1]")
        if self.burst_len < 1:
            raise ValueError("burst_len must be >= 1")
        if self.magnitude < 0:
            raise ValueError("magnitude must be >= 0")
        if self.direction_jitter < 0:
            raise ValueError("direction_jitter must be >= 0")


def sample_bursts(n_records, target, burst_len, rng):
    """Non-overlapping (start, length) bursts covering exactly `target`
    records, placed uniformly at random via a stars-and-bars draw."""
    if target == 0:
        return []
    if target > n_records:
        raise RateInfeasible(f"cannot cover {target} of {n_records} records")
    lengths = [burst_len] * (target // burst_len)
    if target % burst_len:
        lengths.append(target % burst_len)
    slots = (n_records - target) + len(lengths)
    marks = np.sort(rng.choice(slots, size=len(lengths), replace=False))
    bursts = []
    consumed = 0
    for j, m in enumerate(marks):
        start = int(m) - j + consumed
        bursts.append((start, lengths[j]))
        consumed += lengths[j]
    return bursts


def inject(traj: Trajectory, cfg: AnomalyConfig) -> Trajectory:
    """Return a copy of `traj` with disturbed positions, re-derived
    kinematics, and label 1 on exactly the burst records."""
    n = len(traj)
    if n == 0:
        raise EmptyTrajectory("cannot inject into an empty trajectory")
    rng = np.random.default_rng(cfg.seed)
    base_theta = 0.0
    if cfg.kind == "position_offset":
        if cfg.direction is not None:
            dx, dy = cfg.direction
            if dx == 0 and dy == 0:
                raise ValueError("direction must be a nonzero vector")
            base_theta = math.atan2(dy, dx)
        else:
            base_theta = rng.uniform(0.0, 2.0 * math.pi)
    target = math.ceil(cfg.rate * n)
    bursts = sample_bursts(n, target, cfg.burst_len, rng)

    positions = traj.positions()
    labels = traj.labels().copy()
    for start, length in bursts:
        end = start + length
        if cfg.kind == "position_offset":
            theta = base_theta
            if cfg.direction_jitter > 0:
                theta += rng.uniform(-cfg.direction_jitter, cfg.direction_jitter)
            u = np.array([math.cos(theta), math.sin(theta)])
            positions[start:end, :2] += cfg.magnitude * u
        else:
            noise = rng.normal(0.0, cfg.magnitude / math.sqrt(2.0), size=(length, 2))
            positions[start:end, :2] += noise
        labels[start:end] = 1
    return assemble_trajectory(positions, traj.orientations(), traj.dt, traj.context, labels)
