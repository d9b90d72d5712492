"""Ideal processor-share schedule, lag accounting, and trace property checks.

The ideal (PS) schedule runs every task at a rate equal to its utilization
whenever it has a job between release and deadline, so each job finishes
exactly at its deadline.  Comparing a simulated trace against it gives the
per-task lag and the aggregate LAG over a priority-closed job set, whose
behavior over busy intervals is what the response-time bounds rest on.

Everything here is a pure function over an immutable trace; all checks are
exact.  Lag and LAG are evaluated at event boundaries (releases, completions,
deadlines): both allocation curves are piecewise linear between consecutive
boundaries, so extrema can only occur there.
"""

from dataclasses import dataclass
from fractions import Fraction

from .model import SporadicTask
from .rational import format_rational
from .simulator import JobKey, ScheduleTrace, job_name

__all__ = [
    "JobSetD",
    "PsSchedule",
    "ps_allocation",
    "lag",
    "big_lag",
    "busy_intervals",
    "PropertyReport",
    "check_properties",
    "sweep_properties",
    "PropertySweep",
    "blocking_intervals",
    "blocking_workload",
]

ZERO = Fraction(0)


def _job_util(trace: ScheduleTrace, key: JobKey) -> Fraction:
    j = trace.jobs[key]
    return j.workload / (j.deadline - j.release)


@dataclass(frozen=True)
class JobSetD:
    """All jobs with priority at least that of a pivot job (the pivot included).

    Membership: deadline strictly earlier than the pivot's, or equal deadline
    with a task id no larger than the pivot's task.
    """

    pivot: JobKey
    t_d: Fraction
    members: frozenset[JobKey]

    @classmethod
    def from_pivot(cls, trace: ScheduleTrace, pivot: JobKey) -> "JobSetD":
        pj = trace.jobs[pivot]
        t_d = pj.deadline
        members = frozenset(
            key
            for key, j in trace.jobs.items()
            if j.deadline < t_d or (j.deadline == t_d and j.task_id <= pivot[0])
        )
        return cls(pivot, t_d, members)

    def __contains__(self, key: JobKey) -> bool:
        return key in self.members


class PsSchedule:
    """Closed-form ideal-schedule allocations for the jobs of one trace."""

    def __init__(self, trace: ScheduleTrace):
        self._jobs = {
            key: (j.release, j.deadline, _job_util(trace, key))
            for key, j in trace.jobs.items()
        }

    def job_allocation(self, key: JobKey, t1: Fraction, t2: Fraction) -> Fraction:
        """Ideal allocation to one job over [t1, t2): utilization times window overlap."""
        r, d, u = self._jobs[key]
        lo, hi = max(t1, r), min(t2, d)
        return u * (hi - lo) if hi > lo else ZERO

    def allocation_before(self, key: JobKey, t: Fraction) -> Fraction:
        return self.job_allocation(key, ZERO, t)


def ps_allocation(task: SporadicTask, t1: Fraction, t2: Fraction, arrivals) -> Fraction:
    """Ideal allocation to a task over [t1, t2) given its release instants.

    The task runs at a rate equal to its utilization whenever some job is
    between release and deadline; with implicit deadlines the job windows
    [r, r + period) never overlap, so this is the utilization times the
    active measure of the interval.
    """
    if t1 > t2:
        raise ValueError(f"interval [{t1}, {t2}) is empty the wrong way")
    u = task.utilization
    total = ZERO
    for r in arrivals:
        if r >= t2:
            break
        d = r + task.period
        lo, hi = max(t1, r), min(t2, d)
        if hi > lo:
            total += u * (hi - lo)
    return total


def lag(task: SporadicTask, t: Fraction, trace: ScheduleTrace, d: JobSetD) -> Fraction:
    """Ideal-minus-actual allocation up to t, over the task's jobs in d."""
    if t > trace.horizon:
        raise ValueError(f"t={t} is beyond the trace horizon {trace.horizon}")
    u = task.utilization
    total = ZERO
    for j in trace.jobs_of_task(task.id):
        if j.key not in d:
            continue
        lo, hi = ZERO, min(t, j.deadline)
        if hi > j.release:
            total += u * (hi - j.release)
        total -= trace.allocation_before(j, t)
    return total


def big_lag(d: JobSetD, t: Fraction, trace: ScheduleTrace) -> Fraction:
    """Sum of per-job lags over every job in d (equivalently per-task lags)."""
    total = ZERO
    for key in d.members:
        j = trace.jobs[key]
        u = _job_util(trace, key)
        hi = min(t, j.deadline)
        if hi > j.release:
            total += u * (hi - j.release)
        total -= trace.allocation_before(j, t)
    return total


def busy_intervals(trace: ScheduleTrace, d: JobSetD) -> list[tuple[Fraction, Fraction]]:
    """Maximal intervals in [0, min(t_d, horizon)) where every processor runs a job of d."""
    T = min(d.t_d, trace.horizon)
    out: list[tuple[Fraction, Fraction]] = []
    for seg in trace.segments:
        if seg.start >= T:
            break
        busy = all(k is not None and k in d for k in seg.assignment)
        if not busy:
            continue
        end = min(seg.end, T)
        if out and out[-1][1] == seg.start:
            out[-1] = (out[-1][0], end)
        else:
            out.append((seg.start, end))
    return out


@dataclass(frozen=True)
class PropertyReport:
    """Verdicts for one job set, with the violating instants if any.

    p0: every executing job sits on a processor at least as fast as its
        utilization (whole trace, independent of the job set).
    p1: aggregate LAG for d only ever increases across intervals where some
        processor is not serving d.
    p2: at boundaries where not all processors serve d, at most m-1 tasks
        have pending jobs in d.
    """

    pivot: JobKey | None
    t_d: Fraction | None
    p0_violations: tuple
    p1_violations: tuple
    p2_violations: tuple

    @property
    def p0_ok(self) -> bool:
        return not self.p0_violations

    @property
    def p1_ok(self) -> bool:
        return not self.p1_violations

    @property
    def p2_ok(self) -> bool:
        return not self.p2_violations

    @property
    def ok(self) -> bool:
        return self.p0_ok and self.p1_ok and self.p2_ok

    def to_dict(self) -> dict:
        return {
            "pivot": job_name(self.pivot) if self.pivot else None,
            "t_d": format_rational(self.t_d) if self.t_d is not None else None,
            "p0": {
                "ok": self.p0_ok,
                "violations": [
                    {"t": format_rational(t), "proc": p, "job": job_name(k)}
                    for t, p, k in self.p0_violations
                ],
            },
            "p1": {
                "ok": self.p1_ok,
                "violations": [
                    {"t1": format_rational(a), "t2": format_rational(b)}
                    for a, b in self.p1_violations
                ],
            },
            "p2": {
                "ok": self.p2_ok,
                "violations": [
                    {"t": format_rational(t), "pending_tasks": n}
                    for t, n in self.p2_violations
                ],
            },
        }


def p0_violations(trace: ScheduleTrace) -> tuple:
    """Segments where an assigned job's utilization exceeds its processor speed."""
    out = []
    utils: dict[int, Fraction] = {}
    for key, j in trace.jobs.items():
        utils.setdefault(j.task_id, j.workload / (j.deadline - j.release))
    for seg in trace.segments:
        for p, key in enumerate(seg.assignment):
            if key is not None and utils[key[0]] > trace.speeds[p]:
                out.append((seg.start, p, key))
    return tuple(out)


def check_properties(trace: ScheduleTrace, d: JobSetD) -> PropertyReport:
    """Exact property check for one job set; see PropertyReport for the meanings."""
    p0 = p0_violations(trace)
    p1, p2 = _sweep_one(trace, d, _boundaries(trace))
    return PropertyReport(d.pivot, d.t_d, p0, tuple(p1), tuple(p2))


def _boundaries(trace: ScheduleTrace) -> list[Fraction]:
    """Unique event instants (releases, completions, deadlines) plus 0 and horizon.

    Trace events are already time-ordered, so this is a deduplicating walk,
    not a re-sort.
    """
    out = [ZERO]
    for ev in trace.events:
        if ev.kind in ("release", "completion", "deadline") and ev.time <= trace.horizon:
            if ev.time != out[-1]:
                if ev.time > out[-1]:
                    out.append(ev.time)
                else:  # replayed or hand-edited traces may be unordered
                    return sorted({ZERO, trace.horizon, *(
                        e.time for e in trace.events
                        if e.kind in ("release", "completion", "deadline")
                        and e.time <= trace.horizon
                    )})
    if out[-1] != trace.horizon:
        out.append(trace.horizon)
    return out


def _sweep_one(trace: ScheduleTrace, d: JobSetD, boundaries: list[Fraction]):
    """One pass over [0, min(t_d, horizon)] checking the LAG and pending-count rules."""
    T = min(d.t_d, trace.horizon)
    m = trace.m

    rate_up: dict[Fraction, Fraction] = {}
    rate_down: dict[Fraction, Fraction] = {}
    pend_up: dict[Fraction, list[int]] = {}
    pend_down: dict[Fraction, list[int]] = {}
    for key in d.members:
        j = trace.jobs[key]
        u = _job_util(trace, key)
        rate_up[j.release] = rate_up.get(j.release, ZERO) + u
        if j.deadline <= T:
            rate_down[j.deadline] = rate_down.get(j.deadline, ZERO) + u
        pend_up.setdefault(j.release, []).append(j.task_id)
        if j.completed and j.completion <= T:
            pend_down.setdefault(j.completion, []).append(j.task_id)

    segs = trace.segments
    seg_i = 0

    def seg_metrics(i):
        seg = segs[i]
        work = ZERO
        busy = True
        for p, key in enumerate(seg.assignment):
            if key is not None and key in d:
                work += trace.speeds[p]
            else:
                busy = False
        return work, busy

    cur_metrics = seg_metrics(0) if segs else (ZERO, False)
    ps_rate = ZERO
    pending: dict[int, int] = {}
    p1_violations: list[tuple[Fraction, Fraction]] = []
    p2_violations: list[tuple[Fraction, int]] = []

    idx = 0
    n_bounds = len(boundaries)
    while idx < n_bounds and boundaries[idx] <= T:
        b = boundaries[idx]
        # completions at b end pending status (pending means strictly before completion)
        for tid in pend_down.get(b, ()):
            left = pending[tid] - 1
            if left:
                pending[tid] = left
            else:
                del pending[tid]

        if b < T:
            while segs[seg_i].end <= b:
                seg_i += 1
                cur_metrics = seg_metrics(seg_i)
            work_rate, busy = cur_metrics
            if not busy and len(pending) > m - 1:
                p2_violations.append((b, len(pending)))

        # activity window is [release, deadline): apply rate changes at b
        if b in rate_down:
            ps_rate -= rate_down[b]
        if b in rate_up:
            ps_rate += rate_up[b]

        if b < T and idx + 1 < n_bounds:
            nxt = min(boundaries[idx + 1], T)
            if nxt > b and ps_rate > cur_metrics[0] and cur_metrics[1]:
                p1_violations.append((b, nxt))

        # releases at b make jobs pending only strictly after b
        for tid in pend_up.get(b, ()):
            pending[tid] = pending.get(tid, 0) + 1

        idx += 1

    return p1_violations, p2_violations


@dataclass(frozen=True)
class PropertySweep:
    """check_properties over many pivots; the assignment-legality check is shared."""

    p0_violations: tuple
    reports: tuple[PropertyReport, ...]

    @property
    def ok(self) -> bool:
        return not self.p0_violations and all(r.p1_ok and r.p2_ok for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "p0": {
                "ok": not self.p0_violations,
                "violations": [
                    {"t": format_rational(t), "proc": p, "job": job_name(k)}
                    for t, p, k in self.p0_violations
                ],
            },
            "pivots": [r.to_dict() for r in self.reports],
        }


def select_pivots(trace: ScheduleTrace, budget: int) -> list[JobKey]:
    """Up to `budget` pivot jobs spread evenly across the priority order."""
    keys = sorted(trace.jobs, key=lambda k: (trace.jobs[k].deadline, k[0]))
    if not keys or budget <= 0:
        return []
    if len(keys) <= budget:
        return keys
    picked = []
    for i in range(budget):
        picked.append(keys[i * (len(keys) - 1) // (budget - 1)] if budget > 1 else keys[-1])
    seen = set()
    out = []
    for k in picked:
        if k not in seen:
            seen.add(k)
            out.append(k)
    return out


def sweep_properties(trace: ScheduleTrace, budget: int = 20) -> PropertySweep:
    """Property checks across up to `budget` pivots spread over the job set.

    All pivots are checked in one pass.  Pivot job sets are nested when the
    pivots are ordered by (deadline, task id), so each job gets an integer
    rank (the first pivot set containing it) and every per-pivot quantity
    becomes a prefix over ranks:

    * a segment is busy for the pivots at or above the worst rank among the
      jobs on its processors;
    * the ideal-schedule rate for pivot p sums the utilizations of active
      jobs with rank <= p, and on a segment busy for p the trace serves d_p
      at the full platform capacity, so the LAG rule can only fail if the
      total ideal rate exceeds that capacity (checked once per interval);
    * the pending-task count for pivot p counts tasks whose oldest pending
      job has rank <= p, nondecreasing in p, so only the largest non-busy
      rank needs comparing against m-1.
    """
    from bisect import bisect_left, insort

    p0 = p0_violations(trace)
    pivots = select_pivots(trace, budget)
    P = len(pivots)
    if P == 0:
        return PropertySweep(p0, ())

    jobs = trace.jobs
    pivot_keys = [(jobs[k].deadline, k[0]) for k in pivots]
    t_ds = [jobs[k].deadline for k in pivots]
    windows = [min(td, trace.horizon) for td in t_ds]
    r_total = sum(trace.speeds, ZERO)

    rank: dict[JobKey, int] = {}
    for key, j in jobs.items():
        rank[key] = bisect_left(pivot_keys, (j.deadline, j.task_id))

    # per-boundary updates
    rate_up: dict[Fraction, list[tuple[int, Fraction]]] = {}
    rate_down: dict[Fraction, list[tuple[int, Fraction]]] = {}
    pend_up: dict[Fraction, list[tuple[int, int]]] = {}
    pend_down: dict[Fraction, list[tuple[int, int]]] = {}
    for key, j in jobs.items():
        r = rank[key]
        if r == P:
            continue  # job outside every pivot set
        u = _job_util(trace, key)
        rate_up.setdefault(j.release, []).append((r, u))
        rate_down.setdefault(j.deadline, []).append((r, u))
        pend_up.setdefault(j.release, []).append((j.task_id, r))
        if j.completed:
            pend_down.setdefault(j.completion, []).append((j.task_id, r))

    boundaries = _boundaries(trace)
    T_max = windows[-1]

    rate_by_rank = [ZERO] * P
    total_rate = ZERO
    task_pending: dict[int, list[int]] = {}  # task id -> sorted pending ranks
    min_rank_count = [0] * P  # tasks whose oldest pending job has this rank

    def task_min_changed(tid, before, after):
        if before is not None:
            min_rank_count[before] -= 1
        if after is not None:
            min_rank_count[after] += 1

    segs = trace.segments
    seg_i = 0

    def busy_from(i: int) -> int:
        worst = 0
        for key in segs[i].assignment:
            if key is None:
                return P  # idle processor: busy for no pivot
            r = rank[key]
            if r > worst:
                worst = r
        return worst

    p1_acc: list[list] = [[] for _ in range(P)]
    p2_acc: list[list] = [[] for _ in range(P)]
    lo = 0  # pivots with window < current boundary are finished

    seg_busy_from = busy_from(0) if segs else P

    idx = 0
    n_bounds = len(boundaries)
    while idx < n_bounds and boundaries[idx] <= T_max:
        b = boundaries[idx]
        while lo < P and windows[lo] < b:
            lo += 1
        if lo >= P:
            break

        for tid, r in pend_down.get(b, ()):
            ranks = task_pending[tid]
            before = ranks[0]
            ranks.remove(r)
            after = ranks[0] if ranks else None
            if before != after:
                task_min_changed(tid, before, after)

        if b < T_max:
            while segs[seg_i].end <= b:
                seg_i += 1
                seg_busy_from = busy_from(seg_i)

            # pending-count rule at the boundary, for active non-busy pivots
            hi = min(seg_busy_from, P)
            if hi > lo:
                pending_tasks = 0
                for r in range(hi):
                    pending_tasks += min_rank_count[r]
                    # counts are nondecreasing in rank: check each active pivot
                    if r >= lo and pending_tasks > trace.m - 1:
                        for p in range(max(r, lo), hi):
                            if windows[p] > b:
                                p2_acc[p].append((b, _prefix_pending(min_rank_count, p)))
                        break

        for r, u in rate_down.get(b, ()):
            rate_by_rank[r] -= u
            total_rate -= u
        for r, u in rate_up.get(b, ()):
            rate_by_rank[r] += u
            total_rate += u

        if b < T_max and idx + 1 < n_bounds:
            nxt = boundaries[idx + 1]
            # LAG increase on a busy interval needs the total ideal rate to
            # beat the full capacity; one comparison guards the common case
            if seg_busy_from < P and total_rate > r_total:
                prefix = ZERO
                for p in range(P):
                    prefix += rate_by_rank[p]
                    if p >= max(seg_busy_from, lo) and windows[p] > b and prefix > r_total:
                        p1_acc[p].append((b, min(nxt, windows[p])))

        for tid, r in pend_up.get(b, ()):
            ranks = task_pending.setdefault(tid, [])
            before = ranks[0] if ranks else None
            insort(ranks, r)
            after = ranks[0]
            if before != after:
                task_min_changed(tid, before, after)

        idx += 1

    reports = tuple(
        PropertyReport(pivots[p], t_ds[p], (), tuple(p1_acc[p]), tuple(p2_acc[p]))
        for p in range(P)
    )
    return PropertySweep(p0, reports)


def _prefix_pending(min_rank_count: list[int], p: int) -> int:
    return sum(min_rank_count[: p + 1])


# --------------------------------------------------------------------------
# blocking analysis for non-preemptive traces


def _enabled_member_waits(trace: ScheduleTrace, d: JobSetD):
    """Per segment: does some enabled job of d not execute, and does some
    non-member job execute?  Returns a list aligned with trace.segments."""
    by_task: dict[int, list] = {}
    for j in trace.jobs.values():
        by_task.setdefault(j.task_id, []).append(j)
    for jobs in by_task.values():
        jobs.sort(key=lambda j: j.index)
    heads = {tid: 0 for tid in by_task}

    flags = []
    for seg in trace.segments:
        s = seg.start
        executing = {k for k in seg.assignment if k is not None}
        outsider_running = any(k not in d for k in executing)
        member_waits = False
        for tid, jobs in by_task.items():
            h = heads[tid]
            while h < len(jobs) and jobs[h].completed and jobs[h].completion <= s:
                h += 1
            heads[tid] = h
            if h >= len(jobs):
                continue
            j = jobs[h]
            if j.release <= s and j.key in d and j.key not in executing:
                member_waits = True
                break
        flags.append(member_waits and outsider_running)
    return flags


def blocking_intervals(trace: ScheduleTrace, d: JobSetD) -> list[tuple[Fraction, Fraction]]:
    """Maximal intervals before t_d where an enabled job of d waits while a
    lower-priority (non-member) job executes."""
    T = min(d.t_d, trace.horizon)
    flags = _enabled_member_waits(trace, d)
    out: list[tuple[Fraction, Fraction]] = []
    for seg, blocking in zip(trace.segments, flags):
        if seg.start >= T:
            break
        if not blocking:
            continue
        end = min(seg.end, T)
        if out and out[-1][1] == seg.start:
            out[-1] = (out[-1][0], end)
        else:
            out.append((seg.start, end))
    return out


def blocking_workload(trace: ScheduleTrace, d: JobSetD) -> tuple[list[JobKey], Fraction]:
    """Jobs outside d that block some job of d before t_d and are still
    executing at t_d, with their total pending workload at t_d."""
    T = min(d.t_d, trace.horizon)
    flags = _enabled_member_waits(trace, d)
    blockers: set[JobKey] = set()
    at_td: set[JobKey] = set()
    for seg, blocking in zip(trace.segments, flags):
        if blocking and seg.start < T:
            blockers.update(k for k in seg.assignment if k is not None and k not in d)
        if seg.start <= d.t_d < seg.end:
            at_td.update(k for k in seg.assignment if k is not None)
    chosen = sorted(blockers & at_td)
    total = ZERO
    for key in chosen:
        j = trace.jobs[key]
        total += j.workload - trace.allocation_before(j, d.t_d)
    return chosen, total
