#!/usr/bin/env python3
"""Why the processor-selection rule matters on processors of unequal speed.

Two tasks on a 1x + 2x platform.  Under EDF with a selection rule that keeps
handing the heavy task the slow processor, its response time grows without
bound even though the platform has exactly enough capacity.  The speed-aware
rule pins every response at one period.
"""

from fractions import Fraction as F

from hetsched import (
    ArrivalSource,
    Platform,
    PolicyConfig,
    SpeedClass,
    SporadicTask,
    TaskSystem,
    migration_count,
    response_times,
    simulate,
    validate_task_system,
)

system = TaskSystem((SporadicTask(1, F(2), F(2)), SporadicTask(2, F(4), F(2))))
platform = Platform((SpeedClass(F(1), 1), SpeedClass(F(2), 1)))
print("utilizations:", [str(t.utilization) for t in system],
      "| accepted:", validate_task_system(system, platform).accepted)

adversarial = simulate(
    system, platform, ArrivalSource.periodic(),
    PolicyConfig("gedf-plain", "adversarial-slow-for-heavy"), 41,
)
rs = response_times(adversarial)[2].responses
print("\nheavy task under the speed-oblivious selector:")
print("  responses:", ", ".join(str(r) for r in rs[:8]), "... (unbounded growth)")

good = simulate(
    system, platform, ArrivalSource.periodic(), PolicyConfig("gedf-h-preemptive"), 41
)
print("\nsame system under the speed-aware rule:")
for tid in (1, 2):
    stats = response_times(good)[tid]
    print(f"  task {tid}: every response = {stats.max} (period {system.by_id(tid).period}),"
          f" migrations {migration_count(good)[tid]}")
