#!/usr/bin/env python3
"""The ideal-schedule oracle: lag, busy intervals, and property checks.

The ideal schedule runs each task at a rate equal to its utilization while
it has a job between release and deadline, finishing every job exactly at
its deadline.  The lag of a task is how far the real schedule has fallen
behind that ideal.  The aggregate LAG over a priority-closed job set can
only grow while some processor is not serving the set; that, plus a cap on
how many tasks can be pending at such moments, is what the response-time
bounds rest on, and both statements are checkable on any simulated trace.
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
    big_lag,
    busy_intervals,
    check_properties,
    lag,
    simulate,
    sweep_properties,
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
                 PolicyConfig("gedf-h-preemptive"), 4)

d = JobSetD.from_pivot(trace, (4, 1))  # all four first jobs
print("job set pivoting on T4.1 (deadline 1):", sorted(d.members))
print("busy intervals before the pivot deadline:", busy_intervals(trace, d))

print("\nper-task lag while the heavy jobs hog the fast processors:")
for t in (F(0), F(2, 5), F(4, 5), F(1)):
    row = {tsk.id: lag(tsk, t, trace, d) for tsk in system}
    print(f"  t={str(t):>4}: " + "  ".join(f"task{k}={str(v):>5}" for k, v in row.items())
          + f"  | LAG={big_lag(d, t, trace)}")

print("\nT4.1 never runs before 4/5, so its lag climbs to 4/5 and then drains.")

rep = check_properties(trace, d)
print(f"\nproperty check for this job set: legal={rep.p0_ok}, "
      f"lag-rule={rep.p1_ok}, pending-rule={rep.p2_ok}")

sweep = sweep_properties(trace, budget=12)
print(f"sweep over {len(sweep.reports)} pivots: all pass = {sweep.ok}")
