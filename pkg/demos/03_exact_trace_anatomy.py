#!/usr/bin/env python3
"""Anatomy of an exact schedule trace.

Runs the fully loaded four-task system for two time units and prints every
segment and event.  Everything is rational arithmetic: segment boundaries
land on values like 4/5, and the work accounting balances exactly.  Watch
the displacement at t=1: a heavy job needs a fast processor, so the unit-
utilization job holding one is moved down to the slow processor mid-flight.
"""

from fractions import Fraction as F

from hetsched import (
    ArrivalSource,
    Platform,
    PolicyConfig,
    SpeedClass,
    SporadicTask,
    TaskSystem,
    response_times,
    simulate,
)

system = TaskSystem(
    (
        SporadicTask(1, F(2), F(1)),
        SporadicTask(2, F(2), F(1)),
        SporadicTask(3, F(1), F(1)),
        SporadicTask(4, F(1), F(1)),
    )
)
platform = Platform((SpeedClass(F(1), 1), SpeedClass(F(5, 2), 2)))

trace = simulate(system, platform, ArrivalSource.periodic(),
                 PolicyConfig("gedf-h-preemptive"), 2)

print("segments (processor 0 has speed 1; processors 1 and 2 have speed 5/2):")
for seg in trace.segments:
    jobs = ["idle" if k is None else f"T{k[0]}.{k[1]}" for k in seg.assignment]
    print(f"  [{str(seg.start):>4}, {str(seg.end):>4})  " + "  ".join(f"{j:>6}" for j in jobs))

print("\nevents:")
for ev in trace.events:
    if ev.kind in ("migration", "preemption"):
        print(f"  t={ev.time}: {ev.kind} of T{ev.job[0]}.{ev.job[1]}, processors {ev.procs}")

print("\nwork accounting, exact to the last unit:")
for key, job in sorted(trace.jobs.items()):
    executed = sum((s.end - s.start) * trace.speeds[s.proc] for s in job.spans)
    state = f"done at {job.completion}" if job.completion is not None else "censored"
    print(f"  T{key[0]}.{key[1]}: workload {job.workload}, executed {executed}, {state}")

print("\nresponse times:")
for tid, stats in sorted(response_times(trace).items()):
    print(f"  task {tid}: {[str(r) for r in stats.responses]} (censored: {stats.censored})")
