"""Shared test fixtures and independent brute-force oracles.

The brute-force routines here deliberately re-derive results by exhaustive
enumeration or stepped integration so the fast implementations are checked
against an independent path.
"""

import itertools
from fractions import Fraction

from hetsched.model import Platform, SpeedClass, SporadicTask, TaskSystem
from hetsched.rng import SplitMix64

F = Fraction


def task(tid, cost, period) -> SporadicTask:
    return SporadicTask(tid, F(cost), F(period))


def system(*specs) -> TaskSystem:
    """specs: (id, cost, period) triples."""
    return TaskSystem(tuple(task(*s) for s in specs))


def platform(*classes) -> Platform:
    """classes: (speed, count) pairs, slowest first."""
    return Platform(tuple(SpeedClass(F(s), c) for s, c in classes))


def example1_system() -> TaskSystem:
    """Four tasks: two with utilization 2, two with utilization 1."""
    return system((1, 2, 1), (2, 2, 1), (3, 1, 1), (4, 1, 1))


def example1_platform() -> Platform:
    """One unit-speed processor and two of speed 5/2."""
    return platform((1, 1), ("5/2", 2))


def fig1_system() -> TaskSystem:
    """Two tasks (2,2) and (4,2): utilizations 1 and 2."""
    return system((1, 2, 2), (2, 4, 2))


def fig1_platform() -> Platform:
    return platform((1, 1), (2, 1))


def quickia_platform() -> Platform:
    """Two unit-speed and two double-speed processors."""
    return platform((1, 2), (2, 2))


# --------------------------------------------------------------------------
# brute-force bound terms


def brute_e_bar(ts: TaskSystem, pf: Platform) -> Fraction:
    """Exhaustive max over task subsets and bijective speed pairings."""
    tasks = list(ts)
    k = min(pf.m - 1, len(tasks))
    speeds = sorted(pf.speeds, reverse=True)[:k]
    if k == 0:
        return F(0)
    best = None
    for subset in itertools.combinations(tasks, k):
        for perm in itertools.permutations(speeds):
            total = sum(
                (t.cost + t.utilization * (t.period - t.cost / a) for t, a in zip(subset, perm)),
                F(0),
            )
            if best is None or total > best:
                best = total
    return best


def brute_e_star(ts: TaskSystem, pf: Platform) -> Fraction:
    """Exhaustive max including the reserved blocking-cost task."""
    tasks = list(ts)
    n = len(tasks)
    if n == 0:
        return F(0)
    k = min(pf.m - 1, n)
    all_speeds = sorted(pf.speeds, reverse=True)
    best = None
    sizes = {k, min(k, n - 1)}
    for size in sizes:
        speeds = all_speeds[:size]
        for subset in itertools.combinations(tasks, size):
            outside = [t for t in tasks if t not in subset]
            ek = max((t.cost for t in outside), default=F(0))
            if size == k and outside:
                # a task always remains outside; the blocking term is not optional
                pass
            for perm in itertools.permutations(speeds):
                paired = sum(
                    (
                        t.cost + t.utilization * t.cost * (1 - 1 / a)
                        for t, a in zip(subset, perm)
                    ),
                    F(0),
                )
                total = paired + (ek if outside else F(0))
                if best is None or total > best:
                    best = total
    return best


# --------------------------------------------------------------------------
# random small instances


def random_small_instance(seed: int, max_tasks=6, max_procs=4, max_param=10):
    """Small random accepted-or-not system + platform with integer parameters."""
    rng = SplitMix64(seed)
    z = rng.randint(1, 2)
    speeds = sorted({rng.randint(1, 4) for _ in range(z)})
    classes = []
    remaining = rng.randint(1, max_procs)
    for i, s in enumerate(speeds):
        cnt = rng.randint(1, max(1, remaining - (len(speeds) - 1 - i)))
        classes.append((s, cnt))
        remaining -= cnt
        if remaining <= 0 and i < len(speeds) - 1:
            classes.extend((sp, 1) for sp in speeds[i + 1 :])
            break
    pf = platform(*classes)
    n = rng.randint(1, max_tasks)
    tasks = []
    for tid in range(1, n + 1):
        period = rng.randint(1, max_param)
        cost = rng.randint(1, max_param)
        tasks.append((tid, cost, period))
    return system(*tasks), pf
