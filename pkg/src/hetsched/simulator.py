"""Exact event-driven scheduling simulator.

Runs a task system on a heterogeneous platform under one of three policies:

* ``gedf-h-preemptive``   -- EDF job priorities plus the speed-aware processor
  selection rule: a job only ever runs on a processor at least as fast as its
  task's utilization, displacing lower-utilization jobs from fast processors
  when necessary.
* ``gedf-h-nonpreemptive`` -- same dispatch rule, but a job that has started
  keeps its processor until completion and is never preempted or migrated.
* ``gedf-plain``          -- EDF with a pluggable, speed-oblivious processor
  selector (used to demonstrate why the selection rule matters).

All arithmetic is exact: decision points are job releases and completions,
the next completion time is remaining workload divided by speed, and every
trace quantity is a Fraction.  Identical inputs produce bit-identical traces.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .model import Platform, SporadicTask, TaskSystem, validate_task_system
from .rational import format_rational, parse_rational
from .rng import SplitMix64, derive_stream_seed

__all__ = [
    "EngineFault",
    "InfeasibleSystemError",
    "ArrivalError",
    "Job",
    "Span",
    "Segment",
    "TraceEvent",
    "ScheduleTrace",
    "ArrivalSource",
    "PolicyConfig",
    "simulate",
    "gedfh_assign",
    "np_dispatch",
    "response_times",
    "migration_count",
    "TaskResponse",
    "trace_to_jsonl",
    "write_trace",
    "read_trace",
]

ZERO = Fraction(0)
ONE = Fraction(1)

GEDFH_POLICIES = ("gedf-h-preemptive", "gedf-h-nonpreemptive")
PLAIN_SELECTORS = ("arbitrary-lowest-id", "fastest-first", "adversarial-slow-for-heavy")

EVENT_KINDS = (
    "completion",
    "release",
    "deadline",
    "block-end",
    "block-start",
    "preemption",
    "migration",
)
_EVENT_RANK = {k: i for i, k in enumerate(EVENT_KINDS)}


class EngineFault(RuntimeError):
    """Internal invariant violated; indicates an engine bug or misuse."""


class InfeasibleSystemError(ValueError):
    """A gedf-h policy was asked to run a system that fails the feasibility gate."""


class ArrivalError(ValueError):
    """Arrival trace violates the sporadic separation constraint."""


JobKey = tuple[int, int]  # (task id, 1-based job index)


def job_name(key: JobKey) -> str:
    return f"T{key[0]}.{key[1]}"


def parse_job_name(name: str) -> JobKey:
    if not name.startswith("T") or "." not in name:
        raise ValueError(f"bad job name {name!r}")
    tid, idx = name[1:].split(".", 1)
    return int(tid), int(idx)


@dataclass(slots=True)
class Span:
    """Maximal run of consecutive segments where a job executes on one processor."""

    start: Fraction
    end: Fraction
    proc: int


@dataclass(slots=True)
class Job:
    """One job instance plus its execution record."""

    task_id: int
    index: int
    release: Fraction
    deadline: Fraction
    workload: Fraction
    completed_work: Fraction = ZERO
    completion: Fraction | None = None
    spans: list[Span] = field(default_factory=list)

    @property
    def key(self) -> JobKey:
        return (self.task_id, self.index)

    @property
    def completed(self) -> bool:
        return self.completion is not None


@dataclass(slots=True)
class Segment:
    """Constant assignment over [start, end); assignment[p] is a job key or None."""

    start: Fraction
    end: Fraction
    assignment: tuple[JobKey | None, ...]


@dataclass(slots=True)
class TraceEvent:
    time: Fraction
    kind: str
    job: JobKey | None = None
    procs: tuple[int, ...] | None = None


@dataclass
class ScheduleTrace:
    """Complete execution record of one simulation run."""

    policy: str
    horizon: Fraction
    speeds: tuple[Fraction, ...]
    segments: list[Segment]
    events: list[TraceEvent]
    jobs: dict[JobKey, Job]

    @property
    def m(self) -> int:
        return len(self.speeds)

    def jobs_of_task(self, task_id: int) -> list[Job]:
        out = [j for j in self.jobs.values() if j.task_id == task_id]
        out.sort(key=lambda j: j.index)
        return out

    def work_in_span(self, span: Span) -> Fraction:
        return (span.end - span.start) * self.speeds[span.proc]

    def allocation_before(self, job: Job, t: Fraction) -> Fraction:
        """Workload executed for `job` in [0, t)."""
        total = ZERO
        for s in job.spans:
            if s.start >= t:
                break
            total += (min(s.end, t) - s.start) * self.speeds[s.proc]
        return total


# --------------------------------------------------------------------------
# arrivals


@dataclass(frozen=True)
class ArrivalSource:
    """Generates per-task release sequences honoring sporadic separation.

    periodic        -- job j released at (j-1) * period.
    trace           -- caller-supplied release times, validated.
    sporadic-random -- seeded random gaps: period * (1 + extra) with extra a
                       quantized uniform draw from [0, jitter].
    """

    mode: str
    release_lists: dict[int, tuple[Fraction, ...]] | None = None
    seed: int = 0
    jitter: Fraction = Fraction(1, 2)
    quantization: int = 10**6

    @classmethod
    def periodic(cls) -> "ArrivalSource":
        return cls("periodic")

    @classmethod
    def from_lists(cls, lists: dict[int, list]) -> "ArrivalSource":
        frozen = {
            tid: tuple(parse_rational(v) for v in times) for tid, times in lists.items()
        }
        return cls("trace", release_lists=frozen)

    @classmethod
    def sporadic(cls, seed: int, jitter=Fraction(1, 2), quantization: int = 10**6) -> "ArrivalSource":
        return cls("sporadic-random", seed=seed, jitter=parse_rational(jitter), quantization=quantization)

    def release_times(self, task: SporadicTask, horizon: Fraction) -> list[Fraction]:
        """Release instants in [0, horizon), in order."""
        p = task.period
        if self.mode == "periodic":
            out = []
            t = ZERO
            while t < horizon:
                out.append(t)
                t += p
            return out
        if self.mode == "trace":
            times = list(self.release_lists.get(task.id, ()))
            for a, b in zip(times, times[1:]):
                if b - a < p:
                    raise ArrivalError(
                        f"task {task.id}: releases {a} and {b} are closer than the period {p}"
                    )
            if times and times[0] < 0:
                raise ArrivalError(f"task {task.id}: negative release time {times[0]}")
            return [t for t in times if t < horizon]
        if self.mode == "sporadic-random":
            rng = SplitMix64(derive_stream_seed(self.seed, task.id))
            span = int(self.jitter * self.quantization)
            out = []
            t = ZERO
            while t < horizon:
                out.append(t)
                extra = Fraction(rng.randint(0, span), self.quantization) if span > 0 else ZERO
                t += p * (ONE + extra)
            return out
        raise ValueError(f"unknown arrival mode {self.mode!r}")


@dataclass(frozen=True)
class PolicyConfig:
    policy: str
    selector: str | None = None

    def __post_init__(self):
        known = GEDFH_POLICIES + ("gedf-plain",)
        if self.policy not in known:
            raise ValueError(f"unknown policy {self.policy!r}; expected one of {known}")
        if self.policy == "gedf-plain":
            if self.selector not in PLAIN_SELECTORS:
                raise ValueError(
                    f"gedf-plain needs a selector from {PLAIN_SELECTORS}, got {self.selector!r}"
                )
        elif self.selector is not None:
            raise ValueError(f"policy {self.policy} does not take a selector")


# --------------------------------------------------------------------------
# processor selection


def _priority(job: Job) -> tuple[Fraction, int]:
    return (job.deadline, job.task_id)


def gedfh_assign(
    enabled_jobs: list[Job],
    system: TaskSystem,
    platform: Platform,
    previous: dict[int, Job],
) -> dict[int, Job]:
    """Speed-aware assignment of the highest-priority enabled jobs.

    enabled_jobs must be sorted by (deadline, task id).  The min(m, len)
    highest-priority jobs all get a processor with speed >= their task's
    utilization.  A job keeps its previous processor when it stays among the
    top jobs; otherwise it is placed on the slowest adequate free processor
    (lowest id on ties).  If none is free, the lowest-utilization job sitting
    on an adequate processor whose utilization fits a strictly slower class
    is displaced and re-placed by the same rule, cascading down the classes.

    Raises EngineFault when no legal assignment exists, which cannot happen
    for systems passing the feasibility gate.
    """
    util = {t.id: t.utilization for t in system}
    return _gedfh_assign_util(enabled_jobs, util, platform, previous)


def _gedfh_assign_util(
    enabled_jobs: list[Job],
    util: dict[int, Fraction],
    platform: Platform,
    previous: dict[int, Job],
) -> dict[int, Job]:
    take = enabled_jobs[: min(platform.m, len(enabled_jobs))]
    return _gedfh_assign_take(take, util, platform, previous)


def _gedfh_assign_take(
    take: list[Job],
    util: dict[int, Fraction],
    platform: Platform,
    previous: dict[int, Job],
) -> dict[int, Job]:
    speeds = platform.speeds
    m = len(speeds)
    take_keys = {j.key for j in take}

    assign: dict[int, Job] = {}
    placed = set()
    for p, job in previous.items():
        if job.key in take_keys:
            if util[job.task_id] > speeds[p]:
                raise EngineFault(
                    f"sticky job {job_name(job.key)} was on an inadequate processor {p}"
                )
            assign[p] = job
            placed.add(job.key)

    available = [p for p in range(m) if p not in assign]  # id order == speed order
    class_speeds = [c.speed for c in platform.classes]

    def place(job: Job) -> None:
        u = util[job.task_id]
        for i, p in enumerate(available):
            if speeds[p] >= u:
                del available[i]
                assign[p] = job
                return
        # No adequate free processor: displace a light job from an adequate one.
        slower = [s for s in class_speeds if s < u]
        if not slower:
            raise EngineFault(
                f"no processor available for {job_name(job.key)} (u={u}); "
                f"engine ran more jobs than processors"
            )
        threshold = slower[-1]
        victims = [
            (util[v.task_id], v.task_id, p, v)
            for p, v in assign.items()
            if speeds[p] >= u and util[v.task_id] <= threshold
        ]
        if not victims:
            raise EngineFault(
                f"no displaceable job for {job_name(job.key)} (u={u}); "
                f"the system violates the per-class counting requirement"
            )
        victims.sort(key=lambda t: (t[0], t[1]))
        _, _, p, victim = victims[0]
        assign[p] = job
        place(victim)

    for job in take:
        if job.key not in placed:
            place(job)
    return assign


def _plain_assign(
    enabled_jobs: list[Job],
    util: dict[int, Fraction],
    platform: Platform,
    selector: str,
) -> dict[int, Job]:
    """Speed-oblivious selectors; no stickiness, no adequacy guarantee."""
    speeds = platform.speeds
    m = len(speeds)
    take = enabled_jobs[: min(m, len(enabled_jobs))]
    free = list(range(m))  # ascending id == ascending speed
    assign: dict[int, Job] = {}
    if selector == "adversarial-slow-for-heavy":
        for job in sorted(take, key=lambda j: (-util[j.task_id], j.task_id)):
            assign[free.pop(0)] = job
    elif selector == "fastest-first":
        for job in take:
            top_speed = speeds[free[-1]]
            i = next(i for i, p in enumerate(free) if speeds[p] == top_speed)
            assign[free.pop(i)] = job
    elif selector == "arbitrary-lowest-id":
        for job in take:
            assign[free.pop(0)] = job
    else:
        raise ValueError(f"unknown selector {selector!r}")
    return assign


def np_dispatch(
    enabled_jobs: list[Job],
    system: TaskSystem,
    platform: Platform,
    running: dict[int, Job],
) -> dict[int, Job]:
    """Non-preemptive start decisions (work-conserving scan).

    Jobs in `running` are immovable.  Unstarted enabled jobs are scanned in
    priority order and each is started on the slowest adequate idle processor
    (lowest id on ties) if one exists, else skipped; the scan continues so
    lower-priority jobs can use the remaining idle processors.  Returns only
    the new starts.
    """
    util = {t.id: t.utilization for t in system}
    return _np_dispatch_util(enabled_jobs, util, platform, running)


def _np_dispatch_util(
    enabled_jobs: list[Job],
    util: dict[int, Fraction],
    platform: Platform,
    running: dict[int, Job],
) -> dict[int, Job]:
    speeds = platform.speeds
    running_keys = {j.key for j in running.values()}
    idle = [p for p in range(len(speeds)) if p not in running]
    starts: dict[int, Job] = {}
    for job in enabled_jobs:
        if not idle:
            break
        if job.key in running_keys:
            continue
        u = util[job.task_id]
        for i, p in enumerate(idle):
            if speeds[p] >= u:
                del idle[i]
                starts[p] = job
                break
    return starts


# --------------------------------------------------------------------------
# engine


class _TaskState:
    __slots__ = ("task", "jobs", "released", "head")

    def __init__(self, task: SporadicTask, jobs: list[Job]):
        self.task = task
        self.jobs = jobs
        self.released = 0  # jobs with release <= now
        self.head = 0  # earliest incomplete job index

    def enabled_job(self) -> Job | None:
        if self.head < self.released:
            return self.jobs[self.head]
        return None


def simulate(
    system: TaskSystem,
    platform: Platform,
    arrivals: ArrivalSource,
    policy: PolicyConfig,
    horizon,
) -> ScheduleTrace:
    """Run the system over [0, horizon) and return the complete trace.

    gedf-h policies require the system to pass the feasibility gate
    (gedf-plain may run anything, to reproduce counterexamples).  Jobs still
    incomplete at the horizon stay uncompleted in the trace and are reported
    as censored by response_times().

    All jobs are materialized up front, so EDF priorities are precomputed as
    integer ranks and the runtime never compares rationals to order jobs.
    Work accounting is settled lazily: one exact update per maximal run of a
    job on one processor.
    """
    horizon = parse_rational(horizon)
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if policy.policy in GEDFH_POLICIES:
        report = validate_task_system(system, platform)
        if not report.accepted:
            raise InfeasibleSystemError("; ".join(report.failures()))

    speeds = platform.speeds
    m = len(speeds)
    util = {t.id: t.utilization for t in system}
    nonpreemptive = policy.policy == "gedf-h-nonpreemptive"
    preemptive_gedfh = policy.policy == "gedf-h-preemptive"

    states: list[_TaskState] = []
    all_jobs: dict[JobKey, Job] = {}
    release_feed: list[tuple[Fraction, int, Job]] = []
    for task in system:
        jobs = []
        for i, r in enumerate(arrivals.release_times(task, horizon), start=1):
            job = Job(task.id, i, r, r + task.period, task.cost)
            jobs.append(job)
            all_jobs[job.key] = job
            release_feed.append((r, task.id, job))
        states.append(_TaskState(task, jobs))
    release_feed.sort(key=lambda e: (e[0], e[1]))
    state_of = {st.task.id: st for st in states}

    # integer EDF ranks: one rational sort up front, int comparisons after
    by_priority = sorted(all_jobs.values(), key=_priority)
    rank_of: dict[JobKey, int] = {j.key: r for r, j in enumerate(by_priority)}
    job_at: list[Job] = by_priority

    from bisect import insort

    enabled_ranks: list[int] = []

    segments: list[Segment] = []
    events: list[TraceEvent] = []
    running: dict[int, Job] = {}  # current segment assignment
    proj: dict[int, Fraction] = {}  # projected completion per busy processor
    open_start: dict[JobKey, Fraction] = {}
    open_proc: dict[JobKey, int] = {}
    np_started: dict[int, Job] = {}  # NP: started & incomplete, pinned
    blocked: set[JobKey] = set()
    feed_pos = 0
    n_feed = len(release_feed)
    t = ZERO

    def settle(job: Job, now: Fraction) -> None:
        """Close the job's open run and account its work exactly."""
        key = job.key
        start = open_start.pop(key)
        p = open_proc.pop(key)
        job.completed_work += (now - start) * speeds[p]
        if job.completed_work > job.workload:
            raise EngineFault(f"{job_name(key)} executed past its workload")
        job.spans.append(Span(start, now, p))

    last_top: list[int] | None = None
    completed_last = True

    while t < horizon:
        # releases at exactly t
        enabled_changed = False
        while feed_pos < n_feed and release_feed[feed_pos][0] == t:
            _, tid, job = release_feed[feed_pos]
            st = state_of[tid]
            st.released += 1
            if st.head == st.released - 1:  # predecessor done: enabled now
                insort(enabled_ranks, rank_of[job.key])
                enabled_changed = True
            events.append(TraceEvent(t, "release", job.key))
            feed_pos += 1

        # a decision point that cannot alter the running set extends the
        # current segment instead of recomputing the assignment
        if nonpreemptive:
            skip = not completed_last and not enabled_changed and segments
        else:
            skip = (
                not completed_last
                and last_top is not None
                and enabled_ranks[:m] == last_top
            )

        if not skip:
            prev = running
            if nonpreemptive:
                enabled = [job_at[r] for r in enabled_ranks]
                starts = _np_dispatch_util(enabled, util, platform, np_started)
                np_started.update(starts)
                running = dict(np_started)
                # blocking bookkeeping (waiting behind a lower-priority job)
                if running:
                    running_ranks = {rank_of[r.key] for r in running.values()}
                    worst = max(running_ranks)
                    now_blocked = {
                        job_at[r].key
                        for r in enabled_ranks
                        if r not in running_ranks and r < worst
                    }
                else:
                    now_blocked = set()
                for key in sorted(now_blocked - blocked):
                    events.append(TraceEvent(t, "block-start", key))
                for key in sorted(blocked - now_blocked):
                    events.append(TraceEvent(t, "block-end", key))
                blocked = now_blocked
            else:
                take = [job_at[r] for r in enabled_ranks[:m]]
                last_top = enabled_ranks[:m]
                if preemptive_gedfh:
                    running = _gedfh_assign_take(take, util, platform, prev)
                else:
                    running = _plain_assign(take, util, platform, policy.selector)

            # settle jobs that left their processor; record transition events
            if prev:
                new_proc_of = {j.key: p for p, j in running.items()}
                moved = []
                for p_old, job in sorted(prev.items()):
                    p_new = new_proc_of.get(job.key)
                    if p_new == p_old:
                        continue
                    settle(job, t)
                    if p_new is None:
                        if job.completion is None:
                            moved.append(TraceEvent(t, "preemption", job.key, (p_old,)))
                    else:
                        moved.append(TraceEvent(t, "migration", job.key, (p_old, p_new)))
                moved.sort(key=lambda e: e.job)
                events.extend(moved)

            # open runs and completion projections for (re)placed jobs
            new_proj: dict[int, Fraction] = {}
            for p, job in running.items():
                if prev.get(p) is job:
                    new_proj[p] = proj[p]
                else:
                    open_start[job.key] = t
                    open_proc[job.key] = p
                    new_proj[p] = t + (job.workload - job.completed_work) / speeds[p]
            proj = new_proj

        # next decision point
        t_next = horizon
        if feed_pos < n_feed:
            nr = release_feed[feed_pos][0]
            if nr < t_next:
                t_next = nr
        for tc in proj.values():
            if tc < t_next:
                t_next = tc
        if t_next <= t:
            raise EngineFault(f"time did not advance at {t}")

        if skip:
            segments[-1].end = t_next
        else:
            assignment = tuple(running[p].key if p in running else None for p in range(m))
            segments.append(Segment(t, t_next, assignment))
        completed_last = False

        # completions at t_next (projected completion matches exactly)
        done_now = sorted(
            (job for p, job in running.items() if proj[p] == t_next),
            key=lambda j: j.key,
        )
        for job in done_now:
            settle(job, t_next)
            if job.completed_work != job.workload:
                raise EngineFault(f"{job_name(job.key)} completion accounting mismatch")
            job.completion = t_next
            events.append(TraceEvent(t_next, "completion", job.key))
            st = state_of[job.task_id]
            enabled_ranks.remove(rank_of[job.key])
            st.head += 1
            nxt = st.enabled_job()
            if nxt is not None:
                insort(enabled_ranks, rank_of[nxt.key])
        if done_now:
            done_keys = {j.key for j in done_now}
            running = {p: j for p, j in running.items() if j.key not in done_keys}
            proj = {p: tc for p, tc in proj.items() if p in running}
            if nonpreemptive:
                np_started = {p: j for p, j in np_started.items() if j.key not in done_keys}
            completed_last = True

        t = t_next

    # settle runs cut off by the horizon
    for key in sorted(open_start):
        settle(all_jobs[key], horizon)

    # deadline annotations for every released job
    for job in all_jobs.values():
        if job.deadline <= horizon:
            events.append(TraceEvent(job.deadline, "deadline", job.key))
    events.sort(key=lambda e: (e.time, _EVENT_RANK[e.kind], e.job or (0, 0)))

    return ScheduleTrace(policy.policy, horizon, speeds, segments, events, all_jobs)


# --------------------------------------------------------------------------
# trace statistics


@dataclass(frozen=True)
class TaskResponse:
    """Per-task response-time statistics; censored jobs are counted, not folded in."""

    responses: tuple[Fraction, ...]
    censored: int

    @property
    def max(self) -> Fraction | None:
        return max(self.responses) if self.responses else None

    @property
    def mean(self) -> Fraction | None:
        if not self.responses:
            return None
        return sum(self.responses, ZERO) / len(self.responses)


def response_times(trace: ScheduleTrace) -> dict[int, TaskResponse]:
    """completion - release per completed job, grouped by task, in job order."""
    pairs: dict[int, list[tuple[int, Fraction]]] = {}
    censored: dict[int, int] = {}
    for job in trace.jobs.values():
        pairs.setdefault(job.task_id, [])
        censored.setdefault(job.task_id, 0)
        if job.completed:
            pairs[job.task_id].append((job.index, job.completion - job.release))
        else:
            censored[job.task_id] += 1
    out = {}
    for tid, lst in pairs.items():
        lst.sort()
        out[tid] = TaskResponse(tuple(r for _, r in lst), censored[tid])
    return out


def migration_count(trace: ScheduleTrace) -> dict[int, int]:
    """Boundaries where a job keeps executing but changes processor, per task."""
    out: dict[int, int] = {}
    for job in trace.jobs.values():
        n = 0
        for a, b in zip(job.spans, job.spans[1:]):
            if a.end == b.start and a.proc != b.proc:
                n += 1
        out[job.task_id] = out.get(job.task_id, 0) + n
    return out


# --------------------------------------------------------------------------
# trace serialization (JSON lines)


def trace_to_jsonl(trace: ScheduleTrace) -> str:
    """One meta line, then one line per segment and per event, time-ordered."""
    lines = [
        json.dumps(
            {
                "meta": {
                    "format": "hetsched-trace",
                    "version": 1,
                    "policy": trace.policy,
                    "horizon": format_rational(trace.horizon),
                    "speeds": [format_rational(s) for s in trace.speeds],
                }
            },
            separators=(",", ":"),
        )
    ]
    for seg in trace.segments:
        lines.append(
            json.dumps(
                {
                    "t0": format_rational(seg.start),
                    "t1": format_rational(seg.end),
                    "proc": [
                        {"id": p, "job": job_name(k) if k is not None else None}
                        for p, k in enumerate(seg.assignment)
                    ],
                },
                separators=(",", ":"),
            )
        )
    for ev in trace.events:
        rec = {"t": format_rational(ev.time), "kind": ev.kind}
        if ev.job is not None:
            rec["job"] = job_name(ev.job)
        if ev.procs is not None:
            rec["procs"] = list(ev.procs)
        lines.append(json.dumps(rec, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def write_trace(path, trace: ScheduleTrace) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(trace_to_jsonl(trace))


def read_trace(path, system: TaskSystem, platform: Platform) -> ScheduleTrace:
    """Rebuild a trace from a JSONL file plus the task system it was run on.

    Job records are reconstructed from release events and task parameters;
    completed work and spans are re-accumulated from the segments, so a trace
    edited by hand (say, to study a corrupted assignment) stays loadable.
    """
    meta = None
    segments: list[Segment] = []
    events: list[TraceEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "meta" in rec:
                meta = rec["meta"]
            elif "t0" in rec:
                assignment = [None] * len(rec["proc"])
                for ent in rec["proc"]:
                    assignment[ent["id"]] = (
                        parse_job_name(ent["job"]) if ent["job"] else None
                    )
                segments.append(
                    Segment(
                        parse_rational(rec["t0"]),
                        parse_rational(rec["t1"]),
                        tuple(assignment),
                    )
                )
            elif "t" in rec:
                events.append(
                    TraceEvent(
                        parse_rational(rec["t"]),
                        rec["kind"],
                        parse_job_name(rec["job"]) if rec.get("job") else None,
                        tuple(rec["procs"]) if rec.get("procs") else None,
                    )
                )
            else:
                raise ValueError(f"{path}:{line_no}: unrecognized trace record")
    if meta is None:
        raise ValueError(f"{path}: missing meta line")

    speeds = tuple(parse_rational(s) for s in meta["speeds"])
    horizon = parse_rational(meta["horizon"])
    tasks = {t.id: t for t in system}
    jobs: dict[JobKey, Job] = {}
    for ev in events:
        if ev.kind == "release":
            tid, idx = ev.job
            task = tasks[tid]
            jobs[ev.job] = Job(tid, idx, ev.time, ev.time + task.period, task.cost)
    for seg in segments:
        for p, key in enumerate(seg.assignment):
            if key is None:
                continue
            job = jobs[key]
            job.completed_work += (seg.end - seg.start) * speeds[p]
            if job.spans and job.spans[-1].end == seg.start and job.spans[-1].proc == p:
                job.spans[-1].end = seg.end
            else:
                job.spans.append(Span(seg.start, seg.end, p))
    for ev in events:
        if ev.kind == "completion":
            jobs[ev.job].completion = ev.time
    return ScheduleTrace(meta["policy"], horizon, speeds, segments, events, jobs)
