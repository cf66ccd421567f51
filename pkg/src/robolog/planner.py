"""Grid path planning with dynamic replanning.

Cost-to-goal estimates are propagated backward from the goal over the
8-connected grid (axis step = cell_size, diagonal = cell_size * sqrt(2),
no corner cutting past touching obstacles). When obstacles change, only
the affected estimates are repaired, so a replan reuses everything that
is still valid instead of starting over.

Determinism: open-list ties pop the smaller row-major cell index, and path
extraction prefers the earliest neighbor in the fixed order E, NE, N, NW,
W, SW, S, SE.
"""

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoPath, OccupiedEndpoint
from .grid import GridMap

SQRT2 = math.sqrt(2.0)

# E, NE, N, NW, W, SW, S, SE (y up); diagonal flag per entry
NEIGHBOR_ORDER = (
    (1, 0, False), (1, 1, True), (0, 1, False), (-1, 1, True),
    (-1, 0, False), (-1, -1, True), (0, -1, False), (1, -1, True),
)

INF = float("inf")


@dataclass
class Path:
    cells: list
    world_points: list = field(default_factory=list)
    cost: float = 0.0


class DStarPlanner:
    """Planner state for one (grid, start, goal) problem.

    Holds per-cell cost-to-goal estimates (g) with one-step lookahead
    values (rhs), an open list of locally inconsistent cells keyed by
    min(g, rhs), and a map snapshot version bumped on every change batch.
    """

    def __init__(self, grid: GridMap, start, goal):
        grid.check_bounds(start)
        grid.check_bounds(goal)
        if grid.is_occupied(start):
            raise OccupiedEndpoint(f"start cell {tuple(start)} is occupied")
        if grid.is_occupied(goal):
            raise OccupiedEndpoint(f"goal cell {tuple(goal)} is occupied")
        self.grid = grid.copy()
        self.start = (int(start[0]), int(start[1]))
        self.goal = (int(goal[0]), int(goal[1]))
        self.version = 0
        self._reset()

    # --- bookkeeping ---

    def _reset(self):
        h, w = self.grid.height, self.grid.width
        self.g = np.full((h, w), INF)
        self.rhs = np.full((h, w), INF)
        self._heap = []
        self._queued_key = {}
        gx, gy = self.goal
        self.rhs[gy, gx] = 0.0
        self._push(self.goal, 0.0)

    def _index(self, cell) -> int:
        return cell[1] * self.grid.width + cell[0]

    def _key(self, cell):
        x, y = cell
        return (min(self.g[y, x], self.rhs[y, x]), self._index(cell))

    def _push(self, cell, value):
        key = (value, self._index(cell))
        if self._queued_key.get(cell) == key:
            return
        self._queued_key[cell] = key
        heapq.heappush(self._heap, (key, cell))

    def _neighbors(self, cell):
        """In-bounds neighbors of a free cell with step costs; diagonal
        moves are blocked when either adjacent axis cell is occupied."""
        x, y = cell
        occ = self.grid.occupied
        w, h = self.grid.width, self.grid.height
        cs = self.grid.cell_size
        out = []
        for dx, dy, diag in NEIGHBOR_ORDER:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h) or occ[ny, nx]:
                continue
            if diag and (occ[y, nx] or occ[ny, x]):
                continue
            out.append(((nx, ny), cs * SQRT2 if diag else cs))
        return out

    def _recompute_rhs(self, cell):
        if cell == self.goal:
            return
        x, y = cell
        if self.grid.occupied[y, x]:
            self.rhs[y, x] = INF
            return
        best = INF
        for (nx, ny), step in self._neighbors(cell):
            v = step + self.g[ny, nx]
            if v < best:
                best = v
        self.rhs[y, x] = best

    def _update_vertex(self, cell):
        x, y = cell
        if self.g[y, x] != self.rhs[y, x]:
            self._push(cell, min(self.g[y, x], self.rhs[y, x]))
        else:
            self._queued_key.pop(cell, None)

    # --- core search ---

    def _compute(self):
        sx, sy = self.start
        while self._heap:
            top_key, cell = self._heap[0]
            if self._queued_key.get(cell) != top_key:
                heapq.heappop(self._heap)  # stale entry
                continue
            start_key = (min(self.g[sy, sx], self.rhs[sy, sx]), self._index(self.start))
            if top_key >= start_key and self.g[sy, sx] == self.rhs[sy, sx]:
                break
            heapq.heappop(self._heap)
            del self._queued_key[cell]
            x, y = cell
            if self.g[y, x] > self.rhs[y, x]:
                self.g[y, x] = self.rhs[y, x]
                for (n, _step) in self._neighbors(cell):
                    self._recompute_rhs(n)
                    self._update_vertex(n)
            else:
                self.g[y, x] = INF
                self._recompute_rhs(cell)
                self._update_vertex(cell)
                for (n, _step) in self._neighbors(cell):
                    self._recompute_rhs(n)
                    self._update_vertex(n)

    def _extract(self) -> Path:
        sx, sy = self.start
        if not math.isfinite(self.g[sy, sx]):
            raise NoPath(f"goal {self.goal} unreachable from {self.start}")
        cells = [self.start]
        cost = 0.0
        cur = self.start
        limit = self.grid.width * self.grid.height + 1
        while cur != self.goal:
            best, best_v, best_step = None, INF, 0.0
            for (n, step) in self._neighbors(cur):
                v = step + self.g[n[1], n[0]]
                if v < best_v:
                    best, best_v, best_step = n, v, step
            if best is None or not math.isfinite(best_v):
                raise NoPath("cost surface inconsistent during extraction")
            cur = best
            cost += best_step
            cells.append(cur)
            if len(cells) > limit:
                raise NoPath("path extraction exceeded cell count")
        return Path(cells=cells, world_points=[self.grid.world_of(c) for c in cells], cost=cost)

    # --- public API ---

    def plan(self) -> Path:
        """Plan from scratch on the current map."""
        self._reset()
        self._compute()
        return self._extract()

    def apply_map_change(self, changed):
        """Apply (cell, occupied) updates and repair the affected estimates.

        The rhs of each changed cell and of its 8 neighbors is recomputed
        (diagonal legality through a changed corner depends on it), and any
        now-inconsistent cell is queued for the next replan.
        """
        affected = set()
        for cell, occ in changed:
            self.grid.check_bounds(cell)
            cell = (int(cell[0]), int(cell[1]))
            if self.grid.is_occupied(cell) == bool(occ):
                continue
            self.grid.set_occupied(cell, occ)
            affected.add(cell)
            x, y = cell
            for dx, dy, _diag in NEIGHBOR_ORDER:
                n = (x + dx, y + dy)
                if self.grid.in_bounds(n):
                    affected.add(n)
        for cell in sorted(affected, key=self._index):
            self._recompute_rhs(cell)
            self._update_vertex(cell)
        self.version += 1
        return self

    def replan(self) -> Path:
        """Repair estimates invalidated by map changes and extract the path.

        Same contract as plan() on the current map; prior cost estimates
        are reused wherever they are still consistent.
        """
        self._compute()
        return self._extract()


def plan(grid: GridMap, start, goal) -> Path:
    """One-shot optimal path from start to goal on a static grid."""
    return DStarPlanner(grid, start, goal).plan()
