"""Occupancy grid maps with world-coordinate anchoring.

Cells are (x, y) integer pairs, x in [0, width), y in [0, height), with y
increasing upward. `origin` is the world position of the center of cell
(0, 0), so world/cell conversion is a bijection on cell centers.

Text format: header line `width height cell_size origin_x origin_y`, then
`height` rows of `width` characters ('.' free, '#' occupied), row 0 printed
last.
"""

import math

import numpy as np

from .errors import GridFormatError, OutOfBounds
from .util import fmt_float


class GridMap:
    def __init__(self, width, height, cell_size=1.0, origin=(0.0, 0.0), occupied=None):
        if width < 1 or height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        self.width = int(width)
        self.height = int(height)
        self.cell_size = float(cell_size)
        self.origin = (float(origin[0]), float(origin[1]))
        if occupied is None:
            self.occupied = np.zeros((self.height, self.width), dtype=bool)
        else:
            self.occupied = np.asarray(occupied, dtype=bool).reshape(self.height, self.width)

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.cell_size == other.cell_size
            and self.origin == other.origin
            and bool(np.array_equal(self.occupied, other.occupied))
        )

    def copy(self):
        return GridMap(self.width, self.height, self.cell_size, self.origin, self.occupied.copy())

    def in_bounds(self, cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def check_bounds(self, cell):
        if not self.in_bounds(cell):
            raise OutOfBounds(f"cell {tuple(cell)} outside {self.width}x{self.height} grid")

    def is_occupied(self, cell) -> bool:
        x, y = cell
        return bool(self.occupied[y, x])

    def set_occupied(self, cell, flag=True):
        self.check_bounds(cell)
        x, y = cell
        self.occupied[y, x] = bool(flag)

    def world_of(self, cell):
        """World coordinates of a cell center."""
        x, y = cell
        return (self.origin[0] + x * self.cell_size, self.origin[1] + y * self.cell_size)

    def cell_of(self, point):
        """Cell whose center is nearest to a world point."""
        cx = int(round((point[0] - self.origin[0]) / self.cell_size))
        cy = int(round((point[1] - self.origin[1]) / self.cell_size))
        return (cx, cy)

    def free_cells(self):
        """All free cells in row-major (y, then x) order."""
        ys, xs = np.nonzero(~self.occupied)
        return [(int(x), int(y)) for y, x in zip(ys, xs)]

    # --- text serialization ---

    def to_text(self) -> str:
        header = " ".join([
            str(self.width), str(self.height),
            fmt_float(self.cell_size), fmt_float(self.origin[0]), fmt_float(self.origin[1]),
        ])
        rows = []
        for y in range(self.height - 1, -1, -1):
            rows.append("".join("#" if self.occupied[y, x] else "." for x in range(self.width)))
        return header + "\n" + "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GridMap":
        lines = text.split("\n")
        if not lines or not lines[0].strip():
            raise GridFormatError("line 1: missing header")
        parts = lines[0].split()
        if len(parts) != 5:
            raise GridFormatError(f"line 1: expected 5 header fields, got {len(parts)}")
        try:
            width, height = int(parts[0]), int(parts[1])
            cell_size, ox, oy = float(parts[2]), float(parts[3]), float(parts[4])
        except ValueError as exc:
            raise GridFormatError(f"line 1: {exc}") from None
        if width < 1 or height < 1 or cell_size <= 0:
            raise GridFormatError("line 1: dimensions must be >= 1 and cell_size > 0")
        rows = [ln for ln in lines[1:]]
        while rows and rows[-1] == "":
            rows.pop()
        if len(rows) != height:
            raise GridFormatError(f"expected {height} grid rows, got {len(rows)}")
        occ = np.zeros((height, width), dtype=bool)
        for i, row in enumerate(rows):
            lineno = i + 2
            if len(row) != width:
                raise GridFormatError(f"line {lineno}: expected {width} cells, got {len(row)}")
            y = height - 1 - i
            for x, ch in enumerate(row):
                if ch == "#":
                    occ[y, x] = True
                elif ch != ".":
                    raise GridFormatError(f"line {lineno}: invalid cell character {ch!r}")
        return cls(width, height, cell_size, (ox, oy), occ)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "GridMap":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def inflate(grid: GridMap, margin: float) -> GridMap:
    """Treat every cell within `margin` of an obstacle or the workspace
    boundary as occupied (center-to-center / center-to-edge distances,
    strict comparison). margin 0 returns an unchanged copy.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    out = grid.occupied.copy()
    cs = grid.cell_size
    if margin > 0:
        r = int(math.ceil(margin / cs))
        src = grid.occupied
        h, w = src.shape
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if (dx * dx + dy * dy) * cs * cs >= margin * margin:
                    continue
                if dx == 0 and dy == 0:
                    continue
                ys0, ys1 = max(0, dy), min(h, h + dy)
                xs0, xs1 = max(0, dx), min(w, w + dx)
                out[ys0:ys1, xs0:xs1] |= src[ys0 - dy:ys1 - dy, xs0 - dx:xs1 - dx]
        # boundary strip: cell centers sit (i + 0.5) * cs from the nearest edge
        for i in range(grid.width):
            if (min(i, grid.width - 1 - i) + 0.5) * cs < margin:
                out[:, i] = True
        for j in range(grid.height):
            if (min(j, grid.height - 1 - j) + 0.5) * cs < margin:
                out[j, :] = True
    return GridMap(grid.width, grid.height, grid.cell_size, grid.origin, out)


def _workspace50() -> GridMap:
    # 50x50 cells of 0.1 m spanning the [-2.5, 2.5]^2 workspace, with three
    # rectangular obstacle blocks.
    g = GridMap(50, 50, 0.1, (-2.45, -2.45))
    for x0, x1, y0, y1 in ((10, 14, 10, 18), (30, 38, 28, 32), (20, 24, 38, 42)):
        g.occupied[y0:y1 + 1, x0:x1 + 1] = True
    return g


_BUILTINS = {
    "empty5": lambda: GridMap(5, 5, 1.0, (0.0, 0.0)),
    "empty50": lambda: GridMap(50, 50, 0.1, (-2.45, -2.45)),
    "workspace50": _workspace50,
}


def builtin_grid(name: str) -> GridMap:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin grid {name!r}; options: {sorted(_BUILTINS)}") from None


def resolve_grid(source: str) -> GridMap:
    """Builtin name or path to a grid text file."""
    if source in _BUILTINS:
        return builtin_grid(source)
    return GridMap.load(source)
