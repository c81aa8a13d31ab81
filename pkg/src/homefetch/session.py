"""Session orchestration: the gated pipeline, termination, tallies, replay.

One session = generate, then Navigation -> OLR -> Fetching -> Carrying with
strict gating (each stage runs only after the previous one succeeded), then
a single termination verdict.  Everything observable is appended to a
structured event list whose canonical JSON serialization is the unit of
determinism: replay re-runs the session from the logged seed and compares
line by line.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .agent import (
    GroundingFailed, ORACLE, SubtaskOutcome, carry, crawl, detect, fetch,
    ground, navigate_to_room,
)
from .config import RunConfig, config_echo, config_from_echo, ConfigError
from .eventlog import SchemaError, canonical_json, digest16, read_events, validate_events
from .language import parse
from .seeds import KeyedStream, h64
from .taskgen import capture_record, generate_task
from .world import env_record

NAVIGATION = "Navigation"
OLR = "OLR"
FETCHING = "Fetching"
CARRYING = "Carrying"
SUBTASKS = (NAVIGATION, OLR, FETCHING, CARRYING)

TIME_ELAPSED = "TimeElapsed"
TASK_COMPLETED = "TaskCompleted"
SUBTASK_FAILED = "SubtaskFailed"


@dataclass(frozen=True)
class TerminationReason:
    kind: str
    subtask: str | None = None


class MismatchDetected(Exception):
    """Replay diverged from the log; carries the first differing event."""

    def __init__(self, index: int, expected, actual):
        self.index = index
        self.expected = expected
        self.actual = actual
        super().__init__(f"event {index} diverged:\n  logged: {expected}\n"
                         f"  replayed: {actual}")


@dataclass
class SessionRecord:
    seed: int
    session: int
    session_seed: int
    config: dict
    task_summary: dict
    outcomes: dict[str, SubtaskOutcome | None]
    termination: TerminationReason
    duration_s: float
    events: list[dict]
    olr_abstained: bool = False
    trace: list | None = None


def check_termination(clock_s: float, budget_s: float,
                      outcomes: dict[str, SubtaskOutcome | None],
                      ) -> TerminationReason | None:
    """The three session-ending conditions, highest priority first."""
    done = outcomes.get(CARRYING)
    if done is not None and done.succeeded:
        return TerminationReason(TASK_COMPLETED)
    for name in SUBTASKS:
        o = outcomes.get(name)
        if o is not None and o.attempted and not o.succeeded:
            return TerminationReason(SUBTASK_FAILED, name)
    if clock_s >= budget_s:
        return TerminationReason(TIME_ELAPSED)
    return None


def _detection_record(d) -> dict:
    return {"id": d.object_id, "kind": d.kind, "category": d.category,
            "color": d.color, "material": d.material,
            "bearing_rad": d.bearing, "range_m": d.range,
            "capture": d.capture_index}


def run_session(seed: int, cfg: RunConfig, session_index: int = 0) -> SessionRecord:
    """One full generate-execute-evaluate cycle on a fresh environment."""
    session_seed = h64("session", seed, session_index)
    gen_cfg = replace(cfg.gen, seed=session_seed, noise=cfg.noise)
    env, task = generate_task(gen_cfg)
    env.trace = []
    events: list[dict] = []

    def emit(name: str, **extra) -> None:
        rec = {"event": name, "session": session_index,
               "clock_s": round(env.clock, 6)}
        rec.update(extra)
        events.append(rec)

    def merge(sink: list[dict]) -> None:
        for e in sink:
            e["session"] = session_index
            events.append(e)

    emit("session_start", seed=seed, session_seed=session_seed,
         config=config_echo(cfg))
    emit("scene", layout=env.layout_id, objects=len(env.objects),
         digest=digest16(env_record(env)))
    emit("task", target=task.target, destination=task.destination,
         room=task.room, text=task.text)

    budget = cfg.time_budget_s
    outcomes: dict[str, SubtaskOutcome | None] = {s: None for s in SUBTASKS}
    abstained = False
    grounding = None
    captures: list = []
    reason = check_termination(env.clock, budget, outcomes)

    if reason is None:
        emit("subtask_start", subtask=NAVIGATION)
        sink: list[dict] = []
        out = navigate_to_room(env, task.room, budget, sink)
        merge(sink)
        outcomes[NAVIGATION] = out
        emit("subtask_end", subtask=NAVIGATION, attempted=out.attempted,
             succeeded=out.succeeded, sim_time_s=round(out.sim_time_s, 6))
        reason = check_termination(env.clock, budget, outcomes)

    if reason is None and outcomes[NAVIGATION].succeeded:
        emit("subtask_start", subtask=OLR)
        t0 = env.clock
        sink = []
        captures = crawl(env, task.room, budget, sink)
        merge(sink)
        stream = KeyedStream("noise", session_seed)
        detections = [detect(c, i, cfg.noise, stream)
                      for i, c in enumerate(captures)]
        ast = parse(task.text)
        truth = (task.target, task.destination) if cfg.grounder == ORACLE else None
        try:
            grounding = ground(ast, captures, detections, cfg.grounder,
                               cfg.gen.weights, cfg.gen.thresholds, truth)
            partial = grounding
        except GroundingFailed as err:
            partial = err.result
            grounding = None
            abstained = True
        correct = (grounding is not None
                   and grounding.target == task.target
                   and grounding.destination == task.destination)
        out = SubtaskOutcome(True, correct, env.clock - t0)
        outcomes[OLR] = out
        emit("olr", captures=len(captures),
             digest=digest16({
                 "captures": [capture_record(c) for c in captures],
                 "detections": [[_detection_record(d) for d in ds]
                                for ds in detections]}),
             target=partial.target, destination=partial.destination,
             target_capture=partial.target_capture,
             destination_capture=partial.destination_capture,
             abstained=abstained, correct=correct)
        emit("subtask_end", subtask=OLR, attempted=out.attempted,
             succeeded=out.succeeded, sim_time_s=round(out.sim_time_s, 6))
        reason = check_termination(env.clock, budget, outcomes)

    if reason is None and outcomes[OLR] is not None and outcomes[OLR].succeeded:
        emit("subtask_start", subtask=FETCHING)
        sink = []
        out = fetch(env, grounding, captures, task, budget, sink)
        merge(sink)
        outcomes[FETCHING] = out
        emit("subtask_end", subtask=FETCHING, attempted=out.attempted,
             succeeded=out.succeeded, sim_time_s=round(out.sim_time_s, 6))
        reason = check_termination(env.clock, budget, outcomes)

    if (reason is None and outcomes[FETCHING] is not None
            and outcomes[FETCHING].succeeded):
        emit("subtask_start", subtask=CARRYING)
        sink = []
        out = carry(env, grounding, captures, task, budget, sink)
        merge(sink)
        outcomes[CARRYING] = out
        emit("subtask_end", subtask=CARRYING, attempted=out.attempted,
             succeeded=out.succeeded, sim_time_s=round(out.sim_time_s, 6))
        reason = check_termination(env.clock, budget, outcomes)

    assert reason is not None, "pipeline ended without a termination verdict"
    emit("termination", kind=reason.kind, subtask=reason.subtask)
    emit("session_end", duration_s=round(env.clock, 6),
         collisions=env.collisions)

    return SessionRecord(
        seed=seed, session=session_index, session_seed=session_seed,
        config=config_echo(cfg),
        task_summary={"target": task.target, "destination": task.destination,
                      "room": task.room, "text": task.text},
        outcomes=outcomes, termination=reason, duration_s=env.clock,
        events=events, olr_abstained=abstained, trace=env.trace)


def run_batch(cfg: RunConfig) -> list[SessionRecord]:
    """All sessions of a config, merged back into seed order."""
    if cfg.workers <= 1:
        return [run_session(cfg.seed, cfg, i) for i in range(cfg.sessions)]
    results: list[SessionRecord | None] = [None] * cfg.sessions
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        futures = {pool.submit(run_session, cfg.seed, cfg, i): i
                   for i in range(cfg.sessions)}
        for fut, i in futures.items():
            results[i] = fut.result()
    return results  # type: ignore[return-value]


# --- aggregation and reporting ------------------------------------------------

@dataclass(frozen=True)
class Tally:
    attempts: tuple[int, int, int, int]  # order: SUBTASKS
    successes: tuple[int, int, int, int]


def aggregate(records: list[SessionRecord],
              abstain_as_unattempted: bool = False) -> Tally:
    """Attempt/success counts per subtask.

    With `abstain_as_unattempted`, an OLR round that abstained is dropped
    from the attempt count, so a grounder that always abstains reports
    0 attempts instead of 0% of the batch.
    """
    attempts = [0, 0, 0, 0]
    successes = [0, 0, 0, 0]
    for r in records:
        for i, name in enumerate(SUBTASKS):
            o = r.outcomes.get(name)
            if o is None or not o.attempted:
                continue
            if abstain_as_unattempted and name == OLR and r.olr_abstained:
                continue
            attempts[i] += 1
            if o.succeeded:
                successes[i] += 1
    return Tally(tuple(attempts), tuple(successes))


def _cell(successes: int, attempts: int) -> str:
    if attempts == 0:
        return "0 (0/0)"
    rate = 100.0 * successes / attempts
    text = f"{rate:.1f}"
    if text.endswith(".0"):
        text = text[:-2]
    return f"{text} ({successes}/{attempts})"


def format_cells(tally: Tally) -> tuple[str, str, str, str]:
    return tuple(_cell(s, a) for s, a in zip(tally.successes, tally.attempts))


def format_report(label: str, tally: Tally) -> str:
    """One table row; with an empty label, exactly the four joined cells."""
    row = " | ".join(format_cells(tally))
    return f"{label} | {row}" if label else row


def tallies_from_events(events: list[dict],
                        abstain_as_unattempted: bool = False,
                        ) -> dict[str, Tally]:
    """Aggregate a loaded event log into one Tally per method label."""
    raw: dict[str, tuple[list[int], list[int]]] = {}
    label = None
    abstained = False
    for e in events:
        name = e.get("event")
        if name == "session_start":
            cfg = e.get("config")
            if not isinstance(cfg, dict) or "grounder" not in cfg:
                raise SchemaError("session_start without config.grounder")
            label = cfg["grounder"]
            abstained = False
            raw.setdefault(label, ([0, 0, 0, 0], [0, 0, 0, 0]))
        elif name == "olr":
            abstained = bool(e.get("abstained"))
        elif name == "subtask_end":
            if label is None:
                raise SchemaError("subtask_end before session_start")
            sub = e.get("subtask")
            if sub not in SUBTASKS:
                raise SchemaError(f"unknown subtask {sub!r}")
            if not e.get("attempted"):
                continue
            if abstain_as_unattempted and sub == OLR and abstained:
                continue
            i = SUBTASKS.index(sub)
            attempts, successes = raw[label]
            attempts[i] += 1
            if e.get("succeeded"):
                successes[i] += 1
    return {lab: Tally(tuple(a), tuple(s)) for lab, (a, s) in raw.items()}


# --- replay -------------------------------------------------------------------

def replay(events: list[dict]) -> SessionRecord:
    """Re-run one session from its logged head and demand identical events."""
    issues = validate_events(events)
    if issues:
        raise SchemaError("; ".join(issues[:5]))
    if not events or events[0].get("event") != "session_start":
        raise SchemaError("log must begin with session_start")
    if events[-1].get("event") != "session_end":
        raise SchemaError("log truncated: no session_end")
    head = events[0]
    seed = head.get("seed")
    if not isinstance(seed, int):
        raise SchemaError("session_start.seed missing")
    try:
        cfg = config_from_echo(head.get("config"))
    except ConfigError as e:
        raise SchemaError(f"bad config echo: {e}") from e
    fresh = run_session(seed, cfg, head.get("session", 0))
    n = max(len(events), len(fresh.events))
    for i in range(n):
        a = events[i] if i < len(events) else None
        b = fresh.events[i] if i < len(fresh.events) else None
        if a is None or b is None or canonical_json(a) != canonical_json(b):
            raise MismatchDetected(i, a, b)
    return fresh


def replay_log(path) -> int:
    """Replay every session in a log file; returns how many were verified."""
    events = read_events(path)
    if not events:
        raise SchemaError(f"{path}: empty log")
    groups: list[list[dict]] = []
    current: list[dict] | None = None
    for e in events:
        if isinstance(e, dict) and e.get("event") == "session_start":
            current = [e]
            groups.append(current)
        elif current is None:
            raise SchemaError(f"{path}: event before any session_start")
        else:
            current.append(e)
    for group in groups:
        replay(group)
    return len(groups)
