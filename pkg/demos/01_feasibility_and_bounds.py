#!/usr/bin/env python3
"""Feasibility gate and analytical response-time bounds.

Two platforms, two verdicts: a four-task system that fits a 1x/2.5x platform
exactly, and a two-task system that no amount of extra slow processors can
save, because two tasks need a fast processor and only one exists.
"""

from fractions import Fraction as F

from hetsched import (
    Platform,
    SpeedClass,
    SporadicTask,
    TaskSystem,
    compute_bounds,
    total_capacity,
    total_utilization,
    validate_task_system,
)

system = TaskSystem(
    (
        SporadicTask(1, F(2), F(1)),  # utilization 2
        SporadicTask(2, F(2), F(1)),  # utilization 2
        SporadicTask(3, F(1), F(1)),  # utilization 1
        SporadicTask(4, F(1), F(1)),  # utilization 1
    )
)
platform = Platform((SpeedClass(F(1), 1), SpeedClass(F(5, 2), 2)))

print("A fully loaded system: utilization", total_utilization(system),
      "on capacity", total_capacity(platform))
report = validate_task_system(system, platform)
for check in report.eq1_checks:
    print(f"  speed class {check.class_index}: {check.heavy_tasks} heavy tasks, "
          f"{check.fast_processors} faster processors -> {'ok' if check.ok else 'violated'}")
print("accepted:", report.accepted)

for mode in ("preemptive", "nonpreemptive"):
    b = compute_bounds(system, platform, mode)
    print(f"\n{mode}: x = {b.x} = ({b.e_term} - {b.p_min}) / ({report.r_sum} - {b.u_bar})")
    for t in system:
        print(f"  task {t.id}: response bound {b.per_task_bound[t.id]}"
              f" ({float(b.per_task_bound[t.id] / t.period):.2f} periods)")

print("\nNow the counterexample: two tasks of utilization 2, one fast processor.")
bad_system = TaskSystem((SporadicTask(1, F(2), F(1)), SporadicTask(2, F(2), F(1))))
for m in (3, 6, 12):
    bad_platform = Platform((SpeedClass(F(1), m - 1), SpeedClass(F(2), 1)))
    rep = validate_task_system(bad_system, bad_platform)
    print(f"  m={m:2d}: U_sum={rep.u_sum} <= R_sum={rep.r_sum}, "
          f"yet accepted={rep.accepted} (adding slow processors cannot help)")
