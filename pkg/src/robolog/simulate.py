"""Kinematic execution of planned paths for the two scenario contexts.

A quadcopter run tracks the planned waypoints at fixed altitude with a
proportional velocity controller; a Pioneer-pair run swaps two
differential-drive robots between their start cells with priority-based
collision yielding. Both produce uniformly sampled telemetry where the
velocity, acceleration, and angular-velocity channels are exact finite
differences of the logged positions and orientations.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import planner
from .errors import DeadlockDetected, NoPath, NonFinite, OccupiedEndpoint, StepCapExceeded
from .grid import GridMap, inflate

STEP_CAP = 10_000
DEADLOCK_STEPS = 200
TURN_RATE = 3.0          # rad/s, Pioneer in-place turn bound
HEADING_GATE = 0.3       # rad, drive only when pointed this close to the waypoint
# extra lateral clearance (in cells) added around robot A's route when
# planning robot B's route, and the endpoint radius exempt from it
ROUTE_CLEARANCE_CELLS = 2
ENDPOINT_EXEMPT_CELLS = 2


@dataclass
class SimParams:
    dt: float = 0.05
    speed: float = 1.0
    gain: float = 2.0
    safety_margin: float = 0.15
    altitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0 or self.speed <= 0 or self.gain <= 0:
            raise ValueError("dt, speed and gain must be positive")
        if self.safety_margin < 0:
            raise ValueError("safety_margin must be >= 0")


@dataclass
class LogRecord:
    t: float
    position: tuple
    orientation: tuple      # roll, pitch, yaw in (-pi, pi]
    velocity: tuple
    acceleration: tuple
    angular_velocity: tuple
    label: int = 0


@dataclass
class Trajectory:
    records: list
    dt: float
    context: str = ""

    def __len__(self):
        return len(self.records)

    def positions(self):
        return np.array([r.position for r in self.records], dtype=float).reshape(-1, 3)

    def orientations(self):
        return np.array([r.orientation for r in self.records], dtype=float).reshape(-1, 3)

    def labels(self):
        return np.array([r.label for r in self.records], dtype=np.int64)


def wrap_angles(a):
    """Map angles (array ok) to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def derive_kinematics(positions, orientations, dt):
    """Backward-difference kinematics on a uniformly sampled pose sequence.

    velocity[i] = (p[i] - p[i-1]) / dt with velocity[0] = 0, acceleration
    likewise from velocity; angular velocity uses orientation differences
    wrapped to (-pi, pi] before dividing so seam crossings stay finite.
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    orientations = np.asarray(orientations, dtype=float).reshape(-1, 3)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if positions.shape[0] < 1 or positions.shape != orientations.shape:
        raise ValueError("need >= 1 pose sample with matching shapes")
    if not (np.isfinite(positions).all() and np.isfinite(orientations).all()):
        raise NonFinite("pose sequence contains NaN or inf")
    vel = np.zeros_like(positions)
    acc = np.zeros_like(positions)
    ang = np.zeros_like(positions)
    if positions.shape[0] > 1:
        vel[1:] = (positions[1:] - positions[:-1]) / dt
        acc[1:] = (vel[1:] - vel[:-1]) / dt
        ang[1:] = wrap_angles(orientations[1:] - orientations[:-1]) / dt
    return vel, acc, ang


def assemble_trajectory(positions, orientations, dt, context, labels=None) -> Trajectory:
    """Build a Trajectory with t = i*dt and finite-difference kinematics."""
    vel, acc, ang = derive_kinematics(positions, orientations, dt)
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    orientations = np.asarray(orientations, dtype=float).reshape(-1, 3)
    n = positions.shape[0]
    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    def _t3(row):
        return (float(row[0]), float(row[1]), float(row[2]))

    records = [
        LogRecord(
            t=i * dt,
            position=_t3(positions[i]),
            orientation=_t3(orientations[i]),
            velocity=_t3(vel[i]),
            acceleration=_t3(acc[i]),
            angular_velocity=_t3(ang[i]),
            label=int(labels[i]),
        )
        for i in range(n)
    ]
    return Trajectory(records=records, dt=dt, context=context)


def _inflated_or_nopath(grid, start, goal, margin):
    inflated = inflate(grid, margin)
    for cell in (start, goal):
        inflated.check_bounds(cell)
        if inflated.is_occupied(cell):
            raise NoPath(f"cell {tuple(cell)} blocked after safety inflation")
    return inflated


def simulate_quadcopter(grid: GridMap, start, goal, params: SimParams) -> Trajectory:
    """Fly a point-mass quadcopter along the planned path at fixed altitude.

    Commanded velocity is gain * (waypoint - position) clamped to `speed`;
    a waypoint counts as reached within cell_size / 2. Yaw follows the
    commanded velocity; roll = pitch = 0; every record is labeled normal.
    """
    inflated = _inflated_or_nopath(grid, start, goal, params.safety_margin)
    path = planner.plan(inflated, start, goal)
    waypoints = [np.array(p, dtype=float) for p in path.world_points]
    reach = grid.cell_size / 2.0

    pos = waypoints[0].copy()
    if len(waypoints) > 1:
        d0 = waypoints[1] - pos
        yaw = math.atan2(d0[1], d0[0])
    else:
        yaw = 0.0
    xs = [(pos[0], pos[1], params.altitude)]
    yaws = [yaw]
    wp = 1
    steps = 0
    while wp < len(waypoints):
        target = waypoints[wp]
        delta = target - pos
        cmd = params.gain * delta
        norm = math.hypot(cmd[0], cmd[1])
        if norm > params.speed:
            cmd = cmd * (params.speed / norm)
        if norm > 0.0:
            yaw = math.atan2(cmd[1], cmd[0])
        pos = pos + cmd * params.dt
        steps += 1
        if steps > STEP_CAP:
            raise StepCapExceeded(f"quadcopter run exceeded {STEP_CAP} steps")
        xs.append((pos[0], pos[1], params.altitude))
        yaws.append(yaw)
        while wp < len(waypoints) and math.hypot(*(waypoints[wp] - pos)) < reach:
            wp += 1
    orientations = np.zeros((len(xs), 3))
    orientations[:, 2] = yaws
    return assemble_trajectory(np.array(xs), orientations, params.dt, "quadcopter")


class _Unicycle:
    """Differential-drive waypoint follower: turn toward the next waypoint
    at a bounded rate, drive at cruise speed once roughly aligned."""

    def __init__(self, waypoints, reach, params):
        self.waypoints = waypoints
        self.reach = reach
        self.params = params
        self.pos = waypoints[0].copy()
        self.wp = 1
        self._advance()
        if self.wp < len(waypoints):
            d = waypoints[self.wp] - self.pos
            self.heading = math.atan2(d[1], d[0])
        else:
            self.heading = 0.0

    def _advance(self):
        while self.wp < len(self.waypoints) and \
                math.hypot(*(self.waypoints[self.wp] - self.pos)) < self.reach:
            self.wp += 1

    @property
    def done(self):
        return self.wp >= len(self.waypoints)

    def propose(self):
        """Next (position, heading) if allowed to move."""
        if self.done:
            return self.pos, self.heading
        p = self.params
        target = self.waypoints[self.wp]
        desired = math.atan2(target[1] - self.pos[1], target[0] - self.pos[0])
        err = math.remainder(desired - self.heading, math.tau)
        turn = max(-TURN_RATE * p.dt, min(TURN_RATE * p.dt, err))
        heading = math.remainder(self.heading + turn, math.tau)
        if heading <= -math.pi:
            heading += math.tau
        pos = self.pos
        if abs(math.remainder(desired - heading, math.tau)) < HEADING_GATE:
            pos = self.pos + p.speed * p.dt * np.array([math.cos(heading), math.sin(heading)])
        return pos, heading

    def commit(self, pos, heading):
        self.pos = pos
        self.heading = heading
        self._advance()


def _route_grid_for_b(inflated, path_a, start_b, goal_b, margin):
    """Plan robot B away from robot A's route: block cells within the
    route-clearance radius of A's path, except near the shared endpoints
    where the routes must touch. Falls back to the plain inflated grid when
    no offset route exists."""
    cs = inflated.cell_size
    clear = 2.0 * margin + ROUTE_CLEARANCE_CELLS * cs
    exempt = clear + ENDPOINT_EXEMPT_CELLS * cs
    blocked = inflated.copy()
    r = int(math.ceil(clear / cs))
    ends = (np.array(inflated.world_of(start_b)), np.array(inflated.world_of(goal_b)))
    for (cx, cy) in path_a.cells:
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if (dx * dx + dy * dy) * cs * cs >= clear * clear:
                    continue
                n = (cx + dx, cy + dy)
                if not blocked.in_bounds(n):
                    continue
                w = np.array(blocked.world_of(n))
                if min(np.hypot(*(w - ends[0])), np.hypot(*(w - ends[1]))) < exempt:
                    continue
                blocked.set_occupied(n, True)
    if not (blocked.is_occupied(start_b) or blocked.is_occupied(goal_b)):
        try:
            return planner.plan(blocked, start_b, goal_b)
        except NoPath:
            pass
    return planner.plan(inflated, start_b, goal_b)


def simulate_pioneer_exchange(grid: GridMap, start_a, start_b, params: SimParams):
    """Swap two Pioneer robots between their start cells.

    Robot A follows the planned route start_a -> start_b; robot B follows
    its own route back, planned with lateral clearance from A's route so
    the pair can pass. B yields: whenever B's next position would come
    within 2 * safety_margin of A, B freezes for that step. Returns the
    pair of trajectories (A, B), both labeled normal, z = 0.
    """
    if tuple(start_a) == tuple(start_b):
        raise ValueError("start_a and start_b must differ for an exchange")
    inflated = _inflated_or_nopath(grid, start_a, start_b, params.safety_margin)
    path_a = planner.plan(inflated, start_a, start_b)
    path_b = _route_grid_for_b(inflated, path_a, start_b, start_a, params.safety_margin)
    reach = grid.cell_size / 2.0

    bots = (
        _Unicycle([np.array(p) for p in path_a.world_points], reach, params),
        _Unicycle([np.array(p) for p in path_b.world_points], reach, params),
    )
    min_sep = 2.0 * params.safety_margin
    poses = ([(bots[0].pos[0], bots[0].pos[1], 0.0)], [(bots[1].pos[0], bots[1].pos[1], 0.0)])
    heads = ([bots[0].heading], [bots[1].heading])
    stationary = 0
    steps = 0
    while not (bots[0].done and bots[1].done):
        steps += 1
        if steps > STEP_CAP:
            raise StepCapExceeded(f"pioneer exchange exceeded {STEP_CAP} steps")
        a_pos, a_head = bots[0].propose()
        moved_a = not np.array_equal(a_pos, bots[0].pos)
        bots[0].commit(a_pos, a_head)
        b_pos, b_head = bots[1].propose()
        if math.hypot(*(b_pos - a_pos)) < min_sep:
            b_pos, b_head = bots[1].pos, bots[1].heading  # yield to A
        moved_b = not np.array_equal(b_pos, bots[1].pos)
        bots[1].commit(b_pos, b_head)
        for i in range(2):
            poses[i].append((bots[i].pos[0], bots[i].pos[1], 0.0))
            heads[i].append(bots[i].heading)
        if moved_a or moved_b:
            stationary = 0
        else:
            stationary += 1
            if stationary > DEADLOCK_STEPS:
                raise DeadlockDetected(
                    f"both robots stationary for {stationary} consecutive steps")
    out = []
    for i in range(2):
        orientations = np.zeros((len(poses[i]), 3))
        orientations[:, 2] = heads[i]
        out.append(assemble_trajectory(np.array(poses[i]), orientations, params.dt, "pioneer"))
    return out[0], out[1]
