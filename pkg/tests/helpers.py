"""Shared fixtures and independent oracles used across the test modules."""

from __future__ import annotations

import itertools
import math
import random

import numpy as np

from homefetch.geometry import Rect, norm_angle
from homefetch.language import (
    KIND_ORDER,
    ONTO,
    TO,
    AttributeSet,
    GotoClause,
    InstructionAst,
    ManipClause,
    SpatialRelation,
)
from homefetch.vocab import DEFAULT
from homefetch.world import (
    DYNAMIC,
    SURFACE,
    CameraPose,
    DynamicObject,
    Environment,
    Pose,
    RobotState,
    RoomSpec,
    Snapshot,
    StaticObject,
    SupportSurface,
)

_ids = itertools.count()


def unique_layout_id(prefix: str = "test") -> str:
    # the planner grid cache is keyed by layout id, so every hand-built
    # environment must claim a fresh one
    return f"{prefix}-{next(_ids)}"


def box_walls(b: Rect, half: float = 0.05) -> list[Rect]:
    return [
        Rect(b.x0 - half, b.y0 - half, b.x1 + half, b.y0 + half),
        Rect(b.x0 - half, b.y1 - half, b.x1 + half, b.y1 + half),
        Rect(b.x0 - half, b.y0 - half, b.x0 + half, b.y1 + half),
        Rect(b.x1 - half, b.y0 - half, b.x1 + half, b.y1 + half),
    ]


def table(fid: str = "t0", footprint: Rect = Rect(2.0, 2.0, 3.2, 2.8),
          category: str = "table", color: str | None = "brown",
          material: str | None = "wooden",
          height: str = "table-level") -> StaticObject:
    region = footprint.inset(0.05)
    surf = SupportSurface(id=f"{fid}/top", owner=fid, region=region,
                          height_class=height)
    return StaticObject(id=fid, category=category, footprint=footprint,
                        surfaces=[surf], color=color, material=material)


def ball(oid: str = "o0", xy: tuple[float, float] = (2.5, 2.4),
         support: str | None = "t0/top", category: str = "ball",
         radius: float | None = None, color: str | None = "red",
         material: str | None = None) -> DynamicObject:
    r = DEFAULT.radius_of(category) if radius is None else radius
    return DynamicObject(id=oid, category=category, pose=Pose(xy[0], xy[1]),
                         radius=r, support=support, color=color,
                         material=material)


def make_env(room: Rect = Rect(0.0, 0.0, 6.0, 5.0),
             furniture: tuple[StaticObject, ...] = (),
             objects: tuple[DynamicObject, ...] = (),
             robot_xy: tuple[float, float] = (1.0, 1.0),
             theta: float = 0.0,
             name: str = "living room",
             layout_id: str | None = None) -> Environment:
    """One sealed rectangular room; fixtures may bypass the validator."""
    spec = RoomSpec(id="r0", name=name, bounds=room, doors=[])
    return Environment(
        layout_id=layout_id or unique_layout_id(),
        rooms=[spec],
        doors=[],
        walls=box_walls(room),
        furniture=list(furniture),
        objects={o.id: o for o in objects},
        robot=RobotState(pose=Pose(robot_xy[0], robot_xy[1], theta)),
    )


def sighting(oid: str, kind: str = DYNAMIC, category: str = "bottle",
             color: str | None = None, material: str | None = None,
             bearing: float = 0.0, rng: float = 1.0) -> Snapshot:
    return Snapshot(object_id=oid, kind=kind, category=category, color=color,
                    material=material, bearing=bearing, range=rng)


# --- brute-force visibility oracle ---------------------------------------

def _ray_clear(env: Environment, a: tuple[float, float],
               b: tuple[float, float], ignore: set[str]) -> bool:
    """Dense 1 mm march over the open segment; strict-interior hit tests."""
    ax, ay = a
    bx, by = b
    length = math.hypot(bx - ax, by - ay)
    if length == 0.0:
        return True
    n = max(2, int(length / 0.001))
    t = np.arange(1, n) / n
    xs = ax + (bx - ax) * t
    ys = ay + (by - ay) * t
    hit = np.zeros(t.shape, dtype=bool)
    for w in env.walls:
        hit |= (xs > w.x0) & (xs < w.x1) & (ys > w.y0) & (ys < w.y1)
    for f in env.furniture:
        if f.id in ignore:
            continue
        fp = f.footprint
        hit |= (xs > fp.x0) & (xs < fp.x1) & (ys > fp.y0) & (ys < fp.y1)
    for oid, o in env.objects.items():
        if oid in ignore:
            continue
        hit |= ((xs - o.pose.x) ** 2 + (ys - o.pose.y) ** 2) < o.radius ** 2
    return not bool(hit.any())


def brute_force_visible(env: Environment, cam: CameraPose) -> list[Snapshot]:
    """Independent cone + ray reimplementation of the capture contract."""
    cx, cy, ct = cam.pose.x, cam.pose.y, cam.pose.theta
    subjects: list[tuple] = []
    for oid in sorted(env.objects):
        o = env.objects[oid]
        ignore = {oid}
        if o.support is not None:
            ignore.add(env.surface(o.support).owner)
        subjects.append((oid, DYNAMIC, o.category, o.color, o.material,
                         o.pose.x, o.pose.y, ignore))
    for f in env.furniture:
        for s in f.surfaces:
            rx, ry = s.region.center
            subjects.append((s.id, SURFACE, f.category, f.color, f.material,
                             rx, ry, {f.id}))
    rows: list[Snapshot] = []
    for sid, kind, cat, col, mat, sx, sy, ignore in subjects:
        rng_m = math.hypot(sx - cx, sy - cy)
        if rng_m > cam.range:
            continue
        bearing = 0.0 if rng_m == 0.0 else norm_angle(
            math.atan2(sy - cy, sx - cx) - ct)
        if abs(bearing) > cam.fov / 2.0:
            continue
        if not _ray_clear(env, (cx, cy), (sx, sy), ignore):
            continue
        rows.append(Snapshot(object_id=sid, kind=kind, category=cat,
                             color=col, material=mat, bearing=bearing,
                             range=rng_m))
    rows.sort(key=lambda s: (s.range, s.object_id))
    return rows


# --- grammar-complete instruction sampler ---------------------------------

def sample_ast(rng: random.Random) -> InstructionAst:
    """Uniformish draw over the whole instruction grammar, not just the
    shapes the generator happens to emit (relation and source may co-occur).
    """
    cats = sorted(DEFAULT.categories)

    def attrs(pool: list[str]) -> AttributeSet:
        return AttributeSet(
            category=rng.choice(pool),
            color=rng.choice(sorted(DEFAULT.colors)) if rng.random() < 0.5 else None,
            material=rng.choice(sorted(DEFAULT.materials)) if rng.random() < 0.5 else None,
        )

    relation = None
    if rng.random() < 0.5:
        relation = SpatialRelation(kind=rng.choice(KIND_ORDER),
                                   landmark=attrs(cats))
    source = attrs(cats) if rng.random() < 0.5 else None
    manip = ManipClause(
        target=attrs(sorted(DEFAULT.objects)),
        destination=attrs(sorted(DEFAULT.furniture)),
        prep=rng.choice((ONTO, TO)),
        relation=relation,
        source=source,
    )
    return InstructionAst(goto=GotoClause(room=rng.choice(sorted(DEFAULT.rooms))),
                          manip=manip)
