"""Task-execution system: navigation, the three-step OLR pipeline, fetch, carry.

Motion is layered so that every executed trajectory is provably safe:

* long legs run A* on the inflated grid and a pure-pursuit follower, then
  land exactly on the goal point with a short settle move;
* close approaches to furniture ("docking") leave the grid: a dock point is
  chosen on a ring around the estimated subject with verified point and
  segment clearance, and the robot drives the staging-to-dock segment as an
  exact straight line, then retreats along it.

Perception is geometric visibility plus parametric noise.  Detection noise
is drawn from a keyed stream: a miss is keyed by object (one fate per object
per session), attribute corruption by (capture, object).  Keyed draws give
common random numbers across noise sweeps, which is what makes accuracy
degrade monotonically in the miss rate instead of jittering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .geometry import dist, norm_angle
from .language import InstructionAst, AttributeSet, SpatialRelation
from .planner import (
    NoPath, Path, grid_for, plan_path, segment_clear_exact,
)
from .relations import (
    RelationThresholds, attrs_match, n_specified, relation_holds,
)
from .seeds import KeyedStream
from .vocab import Vocabulary, DEFAULT
from .world import (
    DT_S, DYNAMIC, SURFACE, ActionFailure, CameraPose, Environment, Pose,
    Snapshot, capture_supports, grasp as world_grasp, line_of_sight,
    place as world_place, point_in_room, step as world_step, visible_objects,
)

if TYPE_CHECKING:
    from .taskgen import TaskSpec

ANCHOR_INSET_M = 0.7
LOOKAHEAD_M = 0.3
ARRIVE_TOL_M = 0.07
STALL_LIMIT_S = 3.0
PROGRESS_EPS_M = 0.02
ROTATE_GATE_RAD = 1.0

CRAWL_SPACING_M = 1.0
HEADINGS = (0.0, math.pi / 2.0, math.pi, -math.pi / 2.0)

STANDOFF_RADII_M = (0.55, 0.61, 0.67, 0.73)
RING_POSES = 16
DOCK_CLEARANCE_M = 0.30
DOCK_SEGMENT_CLEARANCE_M = 0.29
GRASP_MARGIN_M = 0.05
PLACE_MARGIN_M = 0.10
NOMINAL_OBJECT_R_M = 0.09

RELATIONAL = "relational"
KEYWORD_BASELINE = "keyword-baseline"
ORACLE = "oracle"
GROUNDERS = (RELATIONAL, KEYWORD_BASELINE, ORACLE)


@dataclass
class SubtaskOutcome:
    attempted: bool
    succeeded: bool
    sim_time_s: float


@dataclass(frozen=True)
class NoiseConfig:
    p_miss: float = 0.0
    p_attr: float = 0.0
    p_hallucinate: float = 0.0

    def __post_init__(self) -> None:
        for name in ("p_miss", "p_attr", "p_hallucinate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class ScoreWeights:
    attribute: int = 1
    relation: int = 2


@dataclass(frozen=True)
class Detection:
    object_id: str
    kind: str
    category: str
    color: str | None
    material: str | None
    bearing: float
    range: float
    capture_index: int


@dataclass
class Capture:
    camera: CameraPose
    snapshots: list[Snapshot]
    supports: dict[str, str]
    subject: str | None = None


class GroundingFailed(Exception):
    """Comprehension abstained; the partial result rides along."""

    def __init__(self, result: "GroundingResult"):
        self.result = result
        super().__init__(f"no grounding for target={result.target} "
                         f"destination={result.destination}")


@dataclass
class GroundingResult:
    kind: str
    target: str | None
    destination: str | None
    target_capture: int | None
    destination_capture: int | None
    target_view: tuple[float, float] | None  # (bearing, range) of chosen detection
    destination_view: tuple[float, float] | None
    target_scores: dict[str, float] = field(default_factory=dict)
    destination_scores: dict[str, float] = field(default_factory=dict)
    strict_target: bool = False
    strict_destination: bool = False


# --- perception ------------------------------------------------------------

def captured(env: Environment, cam: CameraPose) -> list[Snapshot]:
    """visible_objects memoized per (scene version, camera pose)."""
    memo = getattr(env, "_vis_memo", None)
    if memo is None:
        memo = {}
        env._vis_memo = memo
    key = (env.scene_version, cam.pose.x, cam.pose.y, cam.pose.theta)
    hit = memo.get(key)
    if hit is None:
        hit = visible_objects(env, cam)
        memo[key] = hit
    return hit


def crawl_points(env: Environment, room_id: str) -> list[tuple[float, float]]:
    """Reachable lattice viewpoints of a room, in serpentine visit order.

    Points sit strictly inside the room at 1 m spacing and must be free on
    the inflated grid in the robot's own grid component; the robot only ever
    occupies free cells of the one navigable component, so the runtime crawl
    and any static replay enumerate the same poses.
    """
    room = env.room(room_id)
    grid = grid_for(env)
    comp = grid.component_at(env.robot.pose.x, env.robot.pose.y)

    b = room.bounds
    xs, ys = [], []
    k = 1
    while b.x0 + k * CRAWL_SPACING_M < b.x1:
        xs.append(b.x0 + k * CRAWL_SPACING_M)
        k += 1
    k = 1
    while b.y0 + k * CRAWL_SPACING_M < b.y1:
        ys.append(b.y0 + k * CRAWL_SPACING_M)
        k += 1

    pts: list[tuple[float, float]] = []
    for row, y in enumerate(ys):
        row_xs = xs if row % 2 == 0 else list(reversed(xs))
        for x in row_xs:
            if comp >= 0 and grid.cell_free(x, y) and grid.component_at(x, y) == comp:
                pts.append((x, y))
    return pts


def lattice_captures(env: Environment, room_id: str) -> list[Capture]:
    """The captures a full undisturbed crawl of the room would produce."""
    supports = capture_supports(env)
    caps: list[Capture] = []
    for (x, y) in crawl_points(env, room_id):
        for h in HEADINGS:
            cam = CameraPose(Pose(x, y, h))
            caps.append(Capture(cam, captured(env, cam), supports))
    return caps


# --- low-level motion -------------------------------------------------------

def rotate_exact(env: Environment, heading: float, deadline: float) -> bool:
    """Turn in place to an exact heading; False only on deadline."""
    rb = env.robot
    while env.clock < deadline - 1e-9:
        delta = norm_angle(heading - rb.pose.theta)
        if abs(delta) < 1e-12:
            return True
        w = max(-rb.max_angular, min(rb.max_angular, delta / DT_S))
        world_step(env, 0.0, w, DT_S)
    return abs(norm_angle(heading - rb.pose.theta)) < 1e-12


def drive_straight(env: Environment, target: tuple[float, float],
                   deadline: float, reverse: bool = False) -> bool:
    """Exact straight-line translation to `target` along the current ray.

    Heading is fixed first, so every intermediate pose lies on the segment
    robot-to-target; the final tick scales velocity to land exactly.
    """
    rb = env.robot
    d = dist(rb.pose.xy, target)
    if d > 1e-12:
        heading = math.atan2(target[1] - rb.pose.y, target[0] - rb.pose.x)
        if reverse:
            heading = norm_angle(heading + math.pi)
        if not rotate_exact(env, heading, deadline):
            return False
    while env.clock < deadline - 1e-9:
        d = dist(rb.pose.xy, target)
        if d < 1e-12:
            return True
        v = min(rb.max_linear, d / DT_S)
        if world_step(env, -v if reverse else v, 0.0, DT_S):
            return False  # unexpected collision; abort the move
    return dist(rb.pose.xy, target) < 1e-12


def _arc_table(pts: list[tuple[float, float]]) -> list[float]:
    cum = [0.0]
    for i in range(len(pts) - 1):
        cum.append(cum[-1] + dist(pts[i], pts[i + 1]))
    return cum


def _point_at(pts: list[tuple[float, float]], cum: list[float], s: float) -> tuple[float, float]:
    if s <= 0.0:
        return pts[0]
    if s >= cum[-1]:
        return pts[-1]
    for i in range(len(cum) - 1):
        if cum[i + 1] >= s:
            seg = cum[i + 1] - cum[i]
            t = (s - cum[i]) / seg if seg > 0 else 0.0
            return (pts[i][0] + t * (pts[i + 1][0] - pts[i][0]),
                    pts[i][1] + t * (pts[i + 1][1] - pts[i][1]))
    return pts[-1]


def _advance(pts, cum, p: tuple[float, float], progress: float) -> float:
    """Arc position of the nearest path point, searched forward of progress."""
    best_s = progress
    best_d = math.inf
    for i in range(len(pts) - 1):
        if cum[i + 1] < progress - 1e-9:
            continue
        ax, ay = pts[i]
        bx, by = pts[i + 1]
        vx, vy = bx - ax, by - ay
        seg2 = vx * vx + vy * vy
        t = 0.0 if seg2 == 0 else max(0.0, min(1.0, ((p[0] - ax) * vx + (p[1] - ay) * vy) / seg2))
        s = cum[i] + t * math.sqrt(seg2)
        if s < progress:
            continue
        if s > progress + 0.8:
            break
        d = math.hypot(p[0] - (ax + t * vx), p[1] - (ay + t * vy))
        if d < best_d - 1e-12:
            best_d = d
            best_s = s
    return best_s


def follow_path(env: Environment, path: Path, deadline: float) -> bool:
    """Pure pursuit along the waypoint polyline, then an exact landing."""
    pts = path.waypoints
    goal = pts[-1]
    rb = env.robot
    if len(pts) == 1 or path.total_length <= 1e-12:
        return _settle(env, goal, deadline)
    cum = _arc_table(pts)
    progress = 0.0
    best_remaining = math.inf
    last_gain = env.clock
    while env.clock < deadline - 1e-9:
        p = rb.pose
        remaining = dist(p.xy, goal)
        if remaining <= ARRIVE_TOL_M:
            return _settle(env, goal, deadline)
        progress = _advance(pts, cum, p.xy, progress)
        carrot = _point_at(pts, cum, progress + LOOKAHEAD_M)
        alpha = norm_angle(math.atan2(carrot[1] - p.y, carrot[0] - p.x) - p.theta)
        if abs(alpha) > ROTATE_GATE_RAD:
            v = 0.0
            w = max(-rb.max_angular, min(rb.max_angular, 3.0 * alpha))
        else:
            v = rb.max_linear * max(0.2, math.cos(alpha))
            v = min(v, max(0.15, remaining))
            w = max(-rb.max_angular, min(rb.max_angular, 2.5 * alpha))
        world_step(env, v, w, DT_S)
        remaining = dist(rb.pose.xy, goal)
        if remaining < best_remaining - PROGRESS_EPS_M:
            best_remaining = remaining
            last_gain = env.clock
        elif env.clock - last_gain > STALL_LIMIT_S:
            return False
    return False


def _settle(env: Environment, goal: tuple[float, float], deadline: float) -> bool:
    """Close the final few centimetres exactly."""
    if dist(env.robot.pose.xy, goal) < 1e-12:
        return True
    return drive_straight(env, goal, deadline)


# --- navigation subtask -----------------------------------------------------

def navigate_to_room(env: Environment, room_id: str, deadline: float,
                     events: list | None = None) -> SubtaskOutcome:
    """Drive to a door-side anchor of the room; success is room membership."""
    t0 = env.clock
    if point_in_room(env, env.robot.pose.x, env.robot.pose.y) == room_id:
        return SubtaskOutcome(True, True, 0.0)
    room = env.room(room_id)
    reached = False
    for door in sorted(room.doors, key=lambda d: d.id):
        anchor = door.anchor_in(room, ANCHOR_INSET_M)
        try:
            path = plan_path(env, env.robot.pose.xy, anchor)
        except NoPath:
            continue
        _emit(events, env, "path", purpose=f"navigate:{room_id}",
              waypoints=[list(p) for p in path.waypoints],
              length_m=path.total_length)
        reached = follow_path(env, path, deadline)
        break
    ok = reached and point_in_room(env, env.robot.pose.x, env.robot.pose.y) == room_id
    return SubtaskOutcome(True, ok, env.clock - t0)


def crawl(env: Environment, room_id: str, deadline: float,
          events: list | None = None) -> list[Capture]:
    """Visit the room's viewpoint lattice, capturing 4 headings per point.

    The camera snaps to the exact lattice pose at each stop, so a crawl that
    completes produces byte-identical captures to `lattice_captures`.
    """
    supports = capture_supports(env)
    caps: list[Capture] = []
    pts = crawl_points(env, room_id)
    for (x, y) in pts:
        if env.clock >= deadline:
            break
        try:
            path = plan_path(env, env.robot.pose.xy, (x, y))
        except NoPath:
            continue
        _emit(events, env, "path", purpose="crawl",
              waypoints=[list(p) for p in path.waypoints],
              length_m=path.total_length)
        if not follow_path(env, path, deadline):
            continue
        for h in HEADINGS:
            if not rotate_exact(env, h, deadline):
                break
            cam = CameraPose(Pose(x, y, h))
            caps.append(Capture(cam, captured(env, cam), supports))
    if not caps and not pts:
        # Room too small for the lattice: capture from where the robot is.
        for h in HEADINGS:
            if not rotate_exact(env, h, deadline):
                break
            cam = CameraPose(Pose(env.robot.pose.x, env.robot.pose.y, h))
            caps.append(Capture(cam, captured(env, cam), supports))
    return caps


# --- detection --------------------------------------------------------------

def detect(capture: Capture, capture_index: int, noise: NoiseConfig,
           stream: KeyedStream, vocab: Vocabulary = DEFAULT) -> list[Detection]:
    """Apply the parametric detector model to one capture.

    A missed object stays missed for the whole session (the draw is keyed by
    object id alone); attribute corruption varies per capture.
    """
    out: list[Detection] = []
    for s in capture.snapshots:
        if noise.p_miss > 0.0 and stream.u01("miss", s.object_id) < noise.p_miss:
            continue
        color, material = s.color, s.material
        if noise.p_attr > 0.0:
            if color is not None and stream.u01("color", capture_index, s.object_id) < noise.p_attr:
                rest = [c for c in vocab.colors if c != color]
                color = rest[stream.pick(len(rest), "color-sub", capture_index, s.object_id)]
            if material is not None and stream.u01("material", capture_index, s.object_id) < noise.p_attr:
                rest = [m for m in vocab.materials if m != material]
                material = rest[stream.pick(len(rest), "material-sub", capture_index, s.object_id)]
        out.append(Detection(s.object_id, s.kind, s.category, color, material,
                             s.bearing, s.range, capture_index))
    if noise.p_hallucinate > 0.0 and stream.u01("hallucinate", capture_index) < noise.p_hallucinate:
        cam = capture.camera
        cat = vocab.objects[stream.pick(len(vocab.objects), "hal-cat", capture_index)]
        col = vocab.colors[stream.pick(len(vocab.colors), "hal-col", capture_index)]
        mat = vocab.materials[stream.pick(len(vocab.materials), "hal-mat", capture_index)]
        bearing = (stream.u01("hal-bearing", capture_index) - 0.5) * cam.fov
        rng = stream.u01("hal-range", capture_index) * cam.range
        out.append(Detection(f"phantom_{capture_index}", DYNAMIC, cat, col, mat,
                             bearing, rng, capture_index))
    return out


def identity_detections(captures: list[Capture]) -> list[list[Detection]]:
    """Noise-free detector output: detections mirror the snapshots."""
    return [
        [Detection(s.object_id, s.kind, s.category, s.color, s.material,
                   s.bearing, s.range, ci) for s in cap.snapshots]
        for ci, cap in enumerate(captures)
    ]


# --- grounding --------------------------------------------------------------

def _relation_bonus(det: Detection, rel: SpatialRelation, dets: list[Detection],
                    supports: dict[str, str], th: RelationThresholds) -> bool:
    """True iff some landmark-matching detection in the capture satisfies rel."""
    for lm in dets:
        if lm.object_id == det.object_id:
            continue
        if not attrs_match(rel.landmark, lm):
            continue
        if relation_holds(rel.kind, det, lm, supports, th):
            return True
    return False


def _ground_descriptor(attrs: AttributeSet, rel: SpatialRelation | None,
                       captures: list[Capture],
                       detections: list[list[Detection]], want_kind: str,
                       weights: ScoreWeights, th: RelationThresholds):
    """Best-scoring detection id for one descriptor.

    Returns (id | None, capture | None, view | None, scores, strict).
    """
    threshold = n_specified(attrs) * weights.attribute + (1 if rel is not None else 0)
    best: dict[str, tuple[float, int, float, float]] = {}
    for ci, dets in enumerate(detections):
        supports = captures[ci].supports
        for d in dets:
            if d.kind != want_kind:
                continue
            s = 0.0
            if d.category == attrs.category:
                s += weights.attribute
            if attrs.color is not None and d.color == attrs.color:
                s += weights.attribute
            if attrs.material is not None and d.material == attrs.material:
                s += weights.attribute
            if rel is not None and _relation_bonus(d, rel, dets, supports, th):
                s += weights.relation
            cur = best.get(d.object_id)
            if cur is None or s > cur[0]:
                best[d.object_id] = (s, ci, d.bearing, d.range)
    scores = {oid: rec[0] for oid, rec in sorted(best.items())}
    viable = [(rec[0], oid) for oid, rec in best.items() if rec[0] >= threshold]
    if not viable:
        return None, None, None, scores, False
    top = max(v[0] for v in viable)
    winners = sorted(oid for v, oid in viable if v == top)
    oid = winners[0]
    rec = best[oid]
    return oid, rec[1], (rec[2], rec[3]), scores, len(winners) == 1


def _ground_keyword(category: str, detections: list[list[Detection]],
                    want_kind: str):
    """Exactly one category-token occurrence across all captures, else abstain.

    Occurrences are counted per detection, not per distinct object, which is
    what makes the baseline blind to scenes it has seen from several poses.
    """
    hits = [(ci, d) for ci, dets in enumerate(detections)
            for d in dets if d.kind == want_kind and d.category == category]
    if len(hits) != 1:
        return None, None, None, {}, False
    ci, d = hits[0]
    return d.object_id, ci, (d.bearing, d.range), {d.object_id: 1.0}, True


def _first_sighting(oid: str, captures: list[Capture]):
    for ci, cap in enumerate(captures):
        for s in cap.snapshots:
            if s.object_id == oid:
                return ci, (s.bearing, s.range)
    return None, None


def ground(instr: InstructionAst, captures: list[Capture],
           detections: list[list[Detection]], kind: str,
           weights: ScoreWeights = ScoreWeights(),
           th: RelationThresholds = RelationThresholds(),
           truth: tuple[str, str] | None = None) -> GroundingResult:
    """Multimodal comprehension: map the instruction to detected ids.

    Raises GroundingFailed (carrying the partial result) when either the
    target or the destination cannot be resolved.
    """
    m = instr.manip
    if kind == RELATIONAL:
        t_id, t_cap, t_view, t_scores, t_strict = _ground_descriptor(
            m.target, m.relation, captures, detections, DYNAMIC, weights, th)
        d_id, d_cap, d_view, d_scores, d_strict = _ground_descriptor(
            m.destination, None, captures, detections, SURFACE, weights, th)
    elif kind == KEYWORD_BASELINE:
        t_id, t_cap, t_view, t_scores, t_strict = _ground_keyword(
            m.target.category, detections, DYNAMIC)
        d_id, d_cap, d_view, d_scores, d_strict = _ground_keyword(
            m.destination.category, detections, SURFACE)
    elif kind == ORACLE:
        if truth is None:
            raise ValueError("oracle grounding needs ground-truth ids")
        t_id, d_id = truth
        t_cap, t_view = _first_sighting(t_id, captures)
        d_cap, d_view = _first_sighting(d_id, captures)
        t_scores, d_scores = {}, {}
        t_strict = d_strict = True
        if t_cap is None:
            t_id = None
        if d_cap is None:
            d_id = None
    else:
        raise ValueError(f"unknown grounder kind {kind!r}")

    res = GroundingResult(kind, t_id, d_id, t_cap, d_cap, t_view, d_view,
                          t_scores, d_scores, t_strict, d_strict)
    if t_id is None or d_id is None:
        raise GroundingFailed(res)
    return res


# --- approach / docking -----------------------------------------------------

def _point_clearance(env: Environment, x: float, y: float) -> float:
    if point_in_room(env, x, y) is None:
        return -1.0
    c = math.inf
    for w in env.walls:
        c = min(c, w.distance_to(x, y))
    for f in env.furniture:
        c = min(c, f.footprint.distance_to(x, y))
    return c


@dataclass(frozen=True)
class Approach:
    staging: tuple[float, float]
    dock: tuple[float, float]


def _robot_component(env: Environment) -> int | None:
    grid = grid_for(env)
    comp = grid.component_at(env.robot.pose.x, env.robot.pose.y)
    return comp if comp >= 0 else None


def find_approach(env: Environment, est: tuple[float, float], max_dist: float,
                  los_ignore: frozenset[str] | None,
                  component: int | None = None) -> Approach | None:
    """Deterministic standoff next to `est`: first valid ring candidate.

    A dock point needs verified clearance, reach, optional sight of `est`,
    and a grid-free staging point whose straight connection to the dock is
    itself clearance-checked.  `component` restricts staging points to one
    connected region of the grid, so a planning-time check from anywhere in
    the room agrees with what the robot can actually drive to.  The ring
    order (radius, then angle) is fixed for the same reason.
    """
    grid = grid_for(env)

    def _usable(x: float, y: float) -> bool:
        if not grid.cell_free(x, y):
            return False
        return component is None or grid.component_at(x, y) == component

    for r in STANDOFF_RADII_M:
        if r > max_dist:
            break
        for k in range(RING_POSES):
            ang = 2.0 * math.pi * k / RING_POSES
            dx = est[0] + r * math.cos(ang)
            dy = est[1] + r * math.sin(ang)
            if _point_clearance(env, dx, dy) < DOCK_CLEARANCE_M:
                continue
            if los_ignore is not None and not line_of_sight(env, (dx, dy), est, los_ignore):
                continue
            if _usable(dx, dy):
                return Approach((dx, dy), (dx, dy))
            ux = (dx - est[0]) / r
            uy = (dy - est[1]) / r
            t = 0.05
            while t <= 0.8:
                sx, sy = dx + t * ux, dy + t * uy
                if _usable(sx, sy):
                    if segment_clear_exact(env, (sx, sy), (dx, dy),
                                           DOCK_SEGMENT_CLEARANCE_M):
                        return Approach((sx, sy), (dx, dy))
                    break
                t += 0.05
    return None


def _goto_and_dock(env: Environment, app: Approach, deadline: float,
                   events: list | None, purpose: str) -> bool:
    try:
        path = plan_path(env, env.robot.pose.xy, app.staging)
    except NoPath:
        return False
    _emit(events, env, "path", purpose=purpose,
          waypoints=[list(p) for p in path.waypoints], length_m=path.total_length)
    if not follow_path(env, path, deadline):
        return False
    if app.dock == app.staging:
        return True
    _emit(events, env, "dock", frm=list(app.staging), to=list(app.dock))
    return drive_straight(env, app.dock, deadline)


def _undock(env: Environment, app: Approach, deadline: float) -> None:
    if app.dock != app.staging:
        drive_straight(env, app.staging, deadline, reverse=True)


def estimated_position(cam: CameraPose, view: tuple[float, float]) -> tuple[float, float]:
    bearing, rng = view
    a = cam.pose.theta + bearing
    return (cam.pose.x + rng * math.cos(a), cam.pose.y + rng * math.sin(a))


# --- fetch / carry ----------------------------------------------------------

def fetch(env: Environment, grounding: GroundingResult, captures: list[Capture],
          task: "TaskSpec", deadline: float,
          events: list | None = None) -> SubtaskOutcome:
    """Return to the grounded view, approach, and grasp; graded against truth."""
    t0 = env.clock
    outcome = SubtaskOutcome(True, False, 0.0)
    cap = captures[grounding.target_capture]
    try:
        path = plan_path(env, env.robot.pose.xy, cap.camera.pose.xy)
    except NoPath:
        outcome.sim_time_s = env.clock - t0
        return outcome
    _emit(events, env, "path", purpose="fetch:viewpoint",
          waypoints=[list(p) for p in path.waypoints], length_m=path.total_length)
    if not follow_path(env, path, deadline):
        outcome.sim_time_s = env.clock - t0
        return outcome

    est = estimated_position(cap.camera, grounding.target_view)
    ignore = {grounding.target}
    obj = env.objects.get(grounding.target)
    if obj is not None and obj.support is not None:
        ignore.add(env.surface(obj.support).owner)
    app = find_approach(env, est, env.robot.reach - GRASP_MARGIN_M,
                        frozenset(ignore), _robot_component(env))
    if app is None or not _goto_and_dock(env, app, deadline, events, "fetch:approach"):
        outcome.sim_time_s = env.clock - t0
        return outcome
    grabbed = False
    try:
        world_grasp(env, grounding.target)
        grabbed = True
    except ActionFailure as e:
        _emit(events, env, "grasp", object=grounding.target, ok=False,
              reason=type(e).__name__)
    if grabbed:
        _emit(events, env, "grasp", object=grounding.target, ok=True)
    _undock(env, app, deadline)
    outcome.succeeded = grabbed and grounding.target == task.target
    outcome.sim_time_s = env.clock - t0
    return outcome


def carry(env: Environment, grounding: GroundingResult, captures: list[Capture],
          task: "TaskSpec", deadline: float,
          events: list | None = None) -> SubtaskOutcome:
    """Return to the destination view, approach the surface, and set down."""
    t0 = env.clock
    outcome = SubtaskOutcome(True, False, 0.0)
    cap = captures[grounding.destination_capture]
    try:
        path = plan_path(env, env.robot.pose.xy, cap.camera.pose.xy)
    except NoPath:
        outcome.sim_time_s = env.clock - t0
        return outcome
    _emit(events, env, "path", purpose="carry:viewpoint",
          waypoints=[list(p) for p in path.waypoints], length_m=path.total_length)
    if not follow_path(env, path, deadline):
        outcome.sim_time_s = env.clock - t0
        return outcome

    surf = env._surfaces.get(grounding.destination)
    if surf is None:
        outcome.sim_time_s = env.clock - t0
        return outcome
    est = surf.region.inset(NOMINAL_OBJECT_R_M).clamp(cap.camera.pose.x,
                                                      cap.camera.pose.y)
    app = find_approach(env, est, env.robot.reach - PLACE_MARGIN_M, None,
                        _robot_component(env))
    if app is None or not _goto_and_dock(env, app, deadline, events, "carry:approach"):
        outcome.sim_time_s = env.clock - t0
        return outcome
    placed = False
    try:
        world_place(env, grounding.destination)
        placed = True
    except ActionFailure as e:
        _emit(events, env, "place", surface=grounding.destination, ok=False,
              reason=type(e).__name__)
    if placed:
        obj = env.objects[task.target]
        _emit(events, env, "place", surface=grounding.destination, ok=True,
              xy=[obj.pose.x, obj.pose.y])
    obj = env.objects.get(task.target)
    dest_surf = env._surfaces.get(task.destination)
    outcome.succeeded = bool(
        placed and obj is not None and dest_surf is not None
        and obj.support == task.destination
        and dest_surf.region.inset(obj.radius).contains_closed(obj.pose.x, obj.pose.y)
    )
    outcome.sim_time_s = env.clock - t0
    return outcome


def _emit(events: list | None, env: Environment, name: str, **fields) -> None:
    if events is not None:
        rec = {"event": name, "clock_s": round(env.clock, 6)}
        rec.update(fields)
        events.append(rec)
