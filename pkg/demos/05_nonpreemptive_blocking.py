#!/usr/bin/env python3
"""Blocking under the non-preemptive scheduler.

Once a job starts it keeps its processor, so a heavy job can arrive to find
its only adequate processor held by a lower-priority job that started
earlier.  The trace records the wait as block-start/block-end events, and
the oracle reports the blocking intervals and the blocker workload still
pending at the waiting job's deadline; that pending work is exactly what the
non-preemptive bound charges for.
"""

from fractions import Fraction as F

from hetsched import (
    ArrivalSource,
    JobSetD,
    Platform,
    PolicyConfig,
    SpeedClass,
    SporadicTask,
    TaskSystem,
    blocking_intervals,
    blocking_workload,
    compute_bounds,
    response_times,
    simulate,
)

system = TaskSystem(
    (
        SporadicTask(1, F(2), F(1)),       # heavy: needs the 2x processor
        SporadicTask(2, F(5, 2), F(4)),    # long-running filler
        SporadicTask(3, F(1, 2), F(2)),    # short filler
    )
)
platform = Platform((SpeedClass(F(1), 1), SpeedClass(F(2), 1)))
arrivals = ArrivalSource.from_lists({1: [F(1, 5)], 2: [F(0)], 3: [F(0)]})

trace = simulate(system, platform, arrivals,
                 PolicyConfig("gedf-h-nonpreemptive"), 4)

print("block events:")
for ev in trace.events:
    if ev.kind.startswith("block"):
        print(f"  t={ev.time}: {ev.kind} T{ev.job[0]}.{ev.job[1]}")

d = JobSetD.from_pivot(trace, (1, 1))
print("\nblocking intervals before the heavy job's deadline:",
      blocking_intervals(trace, d))
jobs, pending = blocking_workload(trace, d)
print("blockers still running at that deadline:",
      [f"T{k[0]}.{k[1]}" for k in jobs], "with pending workload", pending)

bound = compute_bounds(system, platform, "nonpreemptive")
resp = response_times(trace)[1].max
print(f"\nheavy task: observed response {resp}, analytical bound {bound.per_task_bound[1]}")
