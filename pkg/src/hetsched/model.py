"""Task and platform model.

Sporadic tasks with implicit deadlines, platforms made of speed classes, the
derived quantities (utilizations, total capacity, heavy-task and fast-processor
sets) and the feasibility gate that decides whether a task system can be
scheduled with bounded response times on a given platform.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

from .rational import format_rational, parse_positive

__all__ = [
    "ModelError",
    "SporadicTask",
    "TaskSystem",
    "SpeedClass",
    "Platform",
    "Eq1Check",
    "FeasibilityReport",
    "total_utilization",
    "total_capacity",
    "phi_set",
    "psi_set",
    "min_speed_class",
    "validate_task_system",
    "system_to_dict",
    "system_from_dict",
    "load_system",
    "save_system",
]


class ModelError(ValueError):
    """Invalid task or platform description."""


@dataclass(frozen=True)
class SporadicTask:
    """A sporadic task: at most one job per `period`, each needing `cost` workload.

    `cost` is in workload units (work done at unit speed in `cost` time);
    the relative deadline equals the period (implicit deadlines).  The id is
    caller-assigned, unique, and breaks EDF priority ties (lower id wins).
    """

    id: int
    cost: Fraction
    period: Fraction

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id <= 0:
            raise ModelError(f"task id must be a positive integer, got {self.id!r}")
        if not isinstance(self.cost, Fraction) or self.cost <= 0:
            raise ModelError(f"task {self.id}: cost must be a positive Fraction")
        if not isinstance(self.period, Fraction) or self.period <= 0:
            raise ModelError(f"task {self.id}: period must be a positive Fraction")

    @property
    def utilization(self) -> Fraction:
        """cost / period, exactly; dimensionally a speed."""
        return self.cost / self.period


@dataclass(frozen=True)
class TaskSystem:
    """An ordered set of sporadic tasks with unique ids."""

    tasks: tuple[SporadicTask, ...]

    def __post_init__(self):
        seen = set()
        for t in self.tasks:
            if t.id in seen:
                raise ModelError(f"duplicate task id {t.id}")
            seen.add(t.id)

    def __iter__(self):
        return iter(self.tasks)

    def __len__(self):
        return len(self.tasks)

    def by_id(self, task_id: int) -> SporadicTask:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)


@dataclass(frozen=True)
class SpeedClass:
    """A group of identical processors: `count` processors of speed `speed`."""

    speed: Fraction
    count: int

    def __post_init__(self):
        if not isinstance(self.speed, Fraction) or self.speed <= 0:
            raise ModelError("class speed must be a positive Fraction")
        if not isinstance(self.count, int) or isinstance(self.count, bool) or self.count < 1:
            raise ModelError(f"class count must be >= 1, got {self.count!r}")


@dataclass(frozen=True)
class Platform:
    """A multiset of processor speed classes, strictly increasing by speed.

    The slowest class is not required to have speed 1; all formulas use the
    actual speeds.  Processors are numbered 0..m-1 in class order, so lower
    processor ids are never faster than higher ones.
    """

    classes: tuple[SpeedClass, ...]

    def __post_init__(self):
        if not self.classes:
            raise ModelError("platform needs at least one speed class")
        speeds = [c.speed for c in self.classes]
        if any(b <= a for a, b in zip(speeds, speeds[1:])):
            raise ModelError(f"class speeds must be strictly increasing, got {speeds}")

    @property
    def m(self) -> int:
        """Total processor count."""
        return sum(c.count for c in self.classes)

    @property
    def r_sum(self) -> Fraction:
        """Total capacity: sum of all processor speeds."""
        return sum((c.speed * c.count for c in self.classes), Fraction(0))

    @property
    def alpha_max(self) -> Fraction:
        return self.classes[-1].speed

    @property
    def speeds(self) -> tuple[Fraction, ...]:
        """Per-processor speeds, indexed by processor id (slowest class first)."""
        out = []
        for c in self.classes:
            out.extend([c.speed] * c.count)
        return tuple(out)


def total_utilization(system: TaskSystem) -> Fraction:
    """Exact sum of task utilizations (0 for an empty system)."""
    return sum((t.utilization for t in system), Fraction(0))


def total_capacity(platform: Platform) -> Fraction:
    return platform.r_sum


def phi_set(system: TaskSystem, speed_threshold: Fraction) -> frozenset[int]:
    """Ids of tasks whose utilization strictly exceeds the threshold."""
    return frozenset(t.id for t in system if t.utilization > speed_threshold)


def psi_set(platform: Platform, class_index: int) -> tuple[tuple[SpeedClass, ...], int]:
    """Classes strictly faster than class `class_index` and their processor count.

    The index is 1-based (class 1 is the slowest); index 0 returns every
    processor of the platform.
    """
    z = len(platform.classes)
    if not 0 <= class_index < z:
        raise IndexError(f"class index {class_index} out of range [0, {z})")
    above = platform.classes[class_index:]
    return above, sum(c.count for c in above)


def min_speed_class(task: SporadicTask, platform: Platform) -> Fraction:
    """Slowest class speed that can host the task, i.e. the least speed >= utilization."""
    u = task.utilization
    for c in platform.classes:
        if u <= c.speed:
            return c.speed
    raise ModelError(
        f"task {task.id} utilization {u} exceeds fastest speed {platform.alpha_max}"
    )


@dataclass(frozen=True)
class Eq1Check:
    """One heavy-task/fast-processor counting check at a class boundary.

    class_index is 1-based: index i compares tasks with utilization above the
    i-th slowest class speed against processors in faster classes.
    """

    class_index: int
    threshold: Fraction
    heavy_tasks: int
    fast_processors: int

    @property
    def ok(self) -> bool:
        return self.heavy_tasks <= self.fast_processors


@dataclass(frozen=True)
class FeasibilityReport:
    accepted: bool
    u_sum: Fraction
    r_sum: Fraction
    per_task_speed_ok: dict[int, bool]
    eq1_checks: tuple[Eq1Check, ...]

    @property
    def capacity_ok(self) -> bool:
        return self.u_sum <= self.r_sum

    def failures(self) -> list[str]:
        out = []
        if not self.capacity_ok:
            out.append(f"total utilization {self.u_sum} exceeds total capacity {self.r_sum}")
        for tid, ok in self.per_task_speed_ok.items():
            if not ok:
                out.append(f"task {tid} utilization exceeds the fastest processor speed")
        for c in self.eq1_checks:
            if not c.ok:
                out.append(
                    f"class {c.class_index} (speed {format_rational(c.threshold)}): "
                    f"{c.heavy_tasks} tasks need a faster processor but only "
                    f"{c.fast_processors} exist"
                )
        return out

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "u_sum": format_rational(self.u_sum),
            "r_sum": format_rational(self.r_sum),
            "per_task_speed_ok": {str(k): v for k, v in self.per_task_speed_ok.items()},
            "eq1_checks": [
                {
                    "class_index": c.class_index,
                    "threshold": format_rational(c.threshold),
                    "heavy_tasks": c.heavy_tasks,
                    "fast_processors": c.fast_processors,
                    "ok": c.ok,
                }
                for c in self.eq1_checks
            ],
        }


def validate_task_system(system: TaskSystem, platform: Platform) -> FeasibilityReport:
    """Feasibility gate: capacity, per-task speed fit, and the per-class counts.

    A system is accepted iff total utilization fits total capacity, every task
    fits the fastest class, and for every class boundary the number of tasks
    needing a faster processor does not exceed the number of faster processors.
    Failures are itemized in the report, never raised.
    """
    u_sum = total_utilization(system)
    r_sum = platform.r_sum
    amax = platform.alpha_max
    per_task = {t.id: t.utilization <= amax for t in system}

    checks = []
    classes = platform.classes
    for i in range(len(classes) - 1):
        threshold = classes[i].speed
        heavy = sum(1 for t in system if t.utilization > threshold)
        fast = sum(c.count for c in classes[i + 1 :])
        checks.append(Eq1Check(i + 1, threshold, heavy, fast))

    accepted = (
        u_sum <= r_sum and all(per_task.values()) and all(c.ok for c in checks)
    )
    return FeasibilityReport(accepted, u_sum, r_sum, per_task, tuple(checks))


# --- file format ------------------------------------------------------------
#
# {"tasks": [{"id": 1, "exec": "2", "period": "1"}, ...],
#  "platform": {"classes": [{"speed": "1", "count": 1},
#                           {"speed": "5/2", "count": 2}]}}
#
# Rationals are written as lowest-terms "p/q" strings; parsers also accept
# decimal strings ("2.5") and bare integers.


def system_to_dict(system: TaskSystem, platform: Platform) -> dict:
    return {
        "tasks": [
            {
                "id": t.id,
                "exec": format_rational(t.cost),
                "period": format_rational(t.period),
            }
            for t in system
        ],
        "platform": {
            "classes": [
                {"speed": format_rational(c.speed), "count": c.count}
                for c in platform.classes
            ]
        },
    }


def system_from_dict(data: dict) -> tuple[TaskSystem, Platform]:
    try:
        raw_tasks = data["tasks"]
        raw_platform = data["platform"]["classes"]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"missing field in task-system document: {exc}") from exc

    tasks = []
    for i, rt in enumerate(raw_tasks):
        try:
            tid = rt["id"]
            cost = parse_positive(rt["exec"], f"task {rt.get('id', i)} exec")
            period = parse_positive(rt["period"], f"task {rt.get('id', i)} period")
        except KeyError as exc:
            raise ModelError(f"task entry {i} missing field {exc}") from exc
        tasks.append(SporadicTask(tid, cost, period))

    classes = []
    for i, rc in enumerate(raw_platform):
        try:
            speed = parse_positive(rc["speed"], f"class {i} speed")
            count = rc["count"]
        except KeyError as exc:
            raise ModelError(f"platform class {i} missing field {exc}") from exc
        classes.append(SpeedClass(speed, count))

    return TaskSystem(tuple(tasks)), Platform(tuple(classes))


def load_system(path) -> tuple[TaskSystem, Platform]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return system_from_dict(data)


def save_system(path, system: TaskSystem, platform: Platform) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(system, platform), fh, indent=2)
        fh.write("\n")
