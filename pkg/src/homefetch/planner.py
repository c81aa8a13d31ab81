"""Grid-based path planning over the static geometry.

The occupancy grid rasterizes rooms, walls, and furniture at 0.05 m and
inflates obstacles by the robot radius plus a safety margin, so any path
whose samples stay in free cells keeps real clearance well above the robot
radius.  Dynamic objects never appear in the grid: they always rest on
furniture, whose inflated footprint already covers them.

A* is 8-connected with the corner rule (a diagonal move needs both adjacent
orthogonal cells free), which makes 4-connected flood fill an exact
reachability oracle.  Ties break on (f, h, cell index) so plans are stable
across runs and platforms.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .geometry import dist, segment_rect_distance
from .world import Environment

GRID_RES_M = 0.05
INFLATE_MARGIN_M = 0.15  # beyond the robot radius
_SQRT2 = math.sqrt(2.0)


class NoPath(Exception):
    """Goal not reachable from start on the inflated grid."""


@dataclass
class Path:
    waypoints: list[tuple[float, float]]
    total_length: float


@dataclass
class Grid:
    x0: float
    y0: float
    res: float
    free: np.ndarray  # bool [ny, nx]
    comp: np.ndarray  # int32 [ny, nx], -1 on blocked cells

    @property
    def nx(self) -> int:
        return self.free.shape[1]

    @property
    def ny(self) -> int:
        return self.free.shape[0]

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor((x - self.x0) / self.res)),
                int(math.floor((y - self.y0) / self.res)))

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.nx and 0 <= iy < self.ny

    def center(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.x0 + (ix + 0.5) * self.res, self.y0 + (iy + 0.5) * self.res)

    def cell_free(self, x: float, y: float) -> bool:
        ix, iy = self.cell_of(x, y)
        return self.in_bounds(ix, iy) and bool(self.free[iy, ix])

    def component_at(self, x: float, y: float) -> int:
        ix, iy = self.cell_of(x, y)
        if not self.in_bounds(ix, iy):
            return -1
        return int(self.comp[iy, ix])


def _rect_distance_field(xs: np.ndarray, ys: np.ndarray, rect) -> np.ndarray:
    dx = np.maximum(np.maximum(rect.x0 - xs, xs - rect.x1), 0.0)
    dy = np.maximum(np.maximum(rect.y0 - ys, ys - rect.y1), 0.0)
    return np.hypot(dx, dy)


def build_grid(env: Environment, inflate: float) -> Grid:
    pad = 2 * GRID_RES_M
    x0 = min(r.bounds.x0 for r in env.rooms) - pad
    y0 = min(r.bounds.y0 for r in env.rooms) - pad
    x1 = max(r.bounds.x1 for r in env.rooms) + pad
    y1 = max(r.bounds.y1 for r in env.rooms) + pad
    nx = int(math.ceil((x1 - x0) / GRID_RES_M))
    ny = int(math.ceil((y1 - y0) / GRID_RES_M))
    ix = np.arange(nx)
    iy = np.arange(ny)
    xs = x0 + (ix + 0.5) * GRID_RES_M
    ys = y0 + (iy + 0.5) * GRID_RES_M
    gx, gy = np.meshgrid(xs, ys)

    inside = np.zeros((ny, nx), dtype=bool)
    for r in env.rooms:
        b = r.bounds
        inside |= (gx >= b.x0) & (gx < b.x1) & (gy >= b.y0) & (gy < b.y1)
    free = inside.copy()
    for rect in env.walls:
        free &= _rect_distance_field(gx, gy, rect) >= inflate
    for f in env.furniture:
        free &= _rect_distance_field(gx, gy, f.footprint) >= inflate

    comp = np.full((ny, nx), -1, dtype=np.int32)
    label = 0
    for sy in range(ny):
        for sx in range(nx):
            if not free[sy, sx] or comp[sy, sx] >= 0:
                continue
            stack = [(sx, sy)]
            comp[sy, sx] = label
            while stack:
                cx, cy = stack.pop()
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    tx, ty = cx + dx, cy + dy
                    if 0 <= tx < nx and 0 <= ty < ny and free[ty, tx] and comp[ty, tx] < 0:
                        comp[ty, tx] = label
                        stack.append((tx, ty))
            label += 1
    return Grid(x0, y0, GRID_RES_M, free, comp)


_GRID_CACHE: dict[tuple[str, float], Grid] = {}


def grid_for(env: Environment, inflate: float | None = None) -> Grid:
    """Cached grid per layout id; hand-built test layouts need unique ids."""
    if inflate is None:
        inflate = env.robot.radius + INFLATE_MARGIN_M
    key = (env.layout_id, round(inflate, 6))
    if key not in _GRID_CACHE:
        _GRID_CACHE[key] = build_grid(env, inflate)
    return _GRID_CACHE[key]


def segment_clear_exact(env: Environment, a: tuple[float, float],
                        b: tuple[float, float], clearance: float) -> bool:
    """True iff the segment keeps `clearance` from all walls and furniture."""
    for w in env.walls:
        if segment_rect_distance(a[0], a[1], b[0], b[1], w) < clearance:
            return False
    for f in env.furniture:
        if segment_rect_distance(a[0], a[1], b[0], b[1], f.footprint) < clearance:
            return False
    return True


def segment_on_free_cells(grid: Grid, a: tuple[float, float],
                          b: tuple[float, float]) -> bool:
    """Dense sample of the segment; every sample must land on a free cell."""
    length = dist(a, b)
    n = max(2, int(math.ceil(length / (grid.res * 0.5))) + 1)
    ts = np.linspace(0.0, 1.0, n)
    xs = a[0] + (b[0] - a[0]) * ts
    ys = a[1] + (b[1] - a[1]) * ts
    ixs = np.floor((xs - grid.x0) / grid.res).astype(np.int64)
    iys = np.floor((ys - grid.y0) / grid.res).astype(np.int64)
    if (ixs < 0).any() or (ixs >= grid.nx).any() or (iys < 0).any() or (iys >= grid.ny).any():
        return False
    return bool(grid.free[iys, ixs].all())


_SNAP_OFFSETS: list[tuple[int, int]] | None = None


def _snap_offsets() -> list[tuple[int, int]]:
    global _SNAP_OFFSETS
    if _SNAP_OFFSETS is None:
        offs = [(dx, dy) for dx in range(-8, 9) for dy in range(-8, 9)]
        offs.sort(key=lambda o: (o[0] * o[0] + o[1] * o[1], o[1], o[0]))
        _SNAP_OFFSETS = offs
    return _SNAP_OFFSETS


def _snap_start(env: Environment, grid: Grid,
                p: tuple[float, float]) -> tuple[int, int] | None:
    """Free cell near p whose straight connection from p is provably safe."""
    ix0, iy0 = grid.cell_of(p[0], p[1])
    need = env.robot.radius + 0.01
    for dx, dy in _snap_offsets():
        ix, iy = ix0 + dx, iy0 + dy
        if not grid.in_bounds(ix, iy) or not grid.free[iy, ix]:
            continue
        c = grid.center(ix, iy)
        if dist(p, c) > 0.5:
            break
        if segment_clear_exact(env, p, c, need):
            return (ix, iy)
    return None


def _astar(grid: Grid, start: tuple[int, int], goal: tuple[int, int]) -> list[tuple[int, int]]:
    nx, ny = grid.nx, grid.ny
    free = grid.free

    def h(ix: int, iy: int) -> float:
        ax = abs(ix - goal[0])
        ay = abs(iy - goal[1])
        return grid.res * (max(ax, ay) + (_SQRT2 - 1.0) * min(ax, ay))

    g = {start: 0.0}
    came: dict[tuple[int, int], tuple[int, int]] = {}
    h0 = h(*start)
    open_heap: list[tuple[float, float, int]] = [(h0, h0, start[1] * nx + start[0])]
    closed: set[tuple[int, int]] = set()
    moves = ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
             (1, 1, _SQRT2), (1, -1, _SQRT2), (-1, 1, _SQRT2), (-1, -1, _SQRT2))
    while open_heap:
        _, _, idx = heapq.heappop(open_heap)
        cur = (idx % nx, idx // nx)
        if cur in closed:
            continue
        closed.add(cur)
        if cur == goal:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            path.reverse()
            return path
        cx, cy = cur
        base = g[cur]
        for dx, dy, cost in moves:
            tx, ty = cx + dx, cy + dy
            if not (0 <= tx < nx and 0 <= ty < ny) or not free[ty, tx]:
                continue
            if dx != 0 and dy != 0 and not (free[cy, tx] and free[ty, cx]):
                continue  # corner rule
            cand = base + cost * grid.res
            node = (tx, ty)
            if cand < g.get(node, math.inf) - 1e-12:
                g[node] = cand
                came[node] = cur
                hn = h(tx, ty)
                heapq.heappush(open_heap, (cand + hn, hn, ty * nx + tx))
    raise NoPath(f"no route to cell {goal}")


def _string_pull(grid: Grid, pts: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Greedy forward smoothing: extend each shortcut while it stays free."""
    out = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = i + 1
        while j + 1 < len(pts) and segment_on_free_cells(grid, pts[i], pts[j + 1]):
            j += 1
        out.append(pts[j])
        i = j
    return out


def plan_path(env: Environment, start: tuple[float, float],
              goal: tuple[float, float]) -> Path:
    """Shortest grid path from start to goal, smoothed; raises NoPath."""
    if dist(start, goal) <= 1e-9:
        return Path([start], 0.0)
    grid = grid_for(env)
    gix, giy = grid.cell_of(goal[0], goal[1])
    if not grid.in_bounds(gix, giy) or not grid.free[giy, gix]:
        raise NoPath(f"goal cell blocked at {goal}")
    s = _snap_start(env, grid, start)
    if s is None:
        raise NoPath(f"no safe grid entry near {start}")
    if grid.comp[s[1], s[0]] != grid.comp[giy, gix]:
        raise NoPath("start and goal in different grid components")
    cells = _astar(grid, s, (gix, giy))
    pts = [start] + [grid.center(ix, iy) for ix, iy in cells] + [goal]
    pulled = _string_pull(grid, pts)
    length = sum(dist(pulled[k], pulled[k + 1]) for k in range(len(pulled) - 1))
    return Path(pulled, length)
