"""Analytical response-time bounds.

For an accepted system the response time of every job of a task with period p
is bounded by x + 2p, where x is derived from the worst pending-work terms:

    x = max(0, (E - p_min) / (r_sum - u_bar))

with u_bar the sum of the m-1 largest utilizations and E a maximized sum of
per-task carry-in terms paired against the m-1 fastest processor speeds
(different term shapes for the preemptive and the non-preemptive scheduler;
the non-preemptive one adds the largest execution cost of a task left out of
the pairing, accounting for a lower-priority job that cannot be preempted).
"""

from dataclasses import dataclass
from fractions import Fraction

from .model import Platform, TaskSystem, validate_task_system
from .rational import format_rational

__all__ = ["BoundReport", "u_bar", "e_bar", "e_star", "compute_bounds"]

ZERO = Fraction(0)


def u_bar(system: TaskSystem, m: int) -> Fraction:
    """Sum of the min(m-1, n) largest task utilizations."""
    if m < 1:
        raise ValueError(f"processor count must be >= 1, got {m}")
    utils = sorted((t.utilization for t in system), reverse=True)
    return sum(utils[: m - 1], ZERO)


def _fastest_speeds(platform: Platform, k: int) -> list[Fraction]:
    """The k fastest per-processor speeds, fastest first."""
    speeds = sorted(platform.speeds, reverse=True)
    return speeds[:k]


def _max_assignment(terms: list[tuple[Fraction, Fraction]], slots: list[Fraction]) -> Fraction:
    """Maximize sum(base_i - pair_i / slot) over one-to-one task/slot pairings.

    terms holds (base, pair) per candidate task; slots are speeds, fastest
    first, and every slot must be filled (requires len(terms) >= len(slots)).
    Within any fixed task subset the best pairing matches larger `pair`
    values with faster slots (a swap can only lower the sum otherwise), so an
    optimal solution is a subsequence of the tasks sorted by `pair`
    descending, assigned to slots in order.  A small DP over (task, slot
    prefix) is therefore exact.
    """
    k = len(slots)
    if k == 0:
        return ZERO
    if len(terms) < k:
        raise ValueError("not enough tasks to fill the pairing slots")
    ordered = sorted(terms, key=lambda t: t[1], reverse=True)
    dp: list[Fraction | None] = [ZERO] + [None] * k
    for base, pair in ordered:
        for j in range(k - 1, -1, -1):
            prev = dp[j]
            if prev is None:
                continue
            value = prev + base - pair / slots[j]
            nxt = dp[j + 1]
            if nxt is None or value > nxt:
                dp[j + 1] = value
    assert dp[k] is not None
    return dp[k]


def e_bar(system: TaskSystem, platform: Platform) -> Fraction:
    """Preemptive carry-in bound term.

    Maximum over every choice of min(m-1, n) tasks, paired one-to-one with the
    m-1 fastest processor speeds (fastest first), of the sum of
    cost + utilization * (period - cost / paired_speed).
    """
    k = min(platform.m - 1, len(system))
    slots = _fastest_speeds(platform, k)
    terms = [
        (t.cost + t.utilization * t.period, t.utilization * t.cost) for t in system
    ]
    return _max_assignment(terms, slots)


def e_star(system: TaskSystem, platform: Platform) -> Fraction:
    """Non-preemptive carry-in bound term.

    Like e_bar but the paired term is cost + utilization * cost * (1 - 1/speed),
    plus the execution cost of one task left out of the pairing (zero when
    every task is paired), accounting for a non-preemptible lower-priority job.
    """
    n = len(system)
    if n == 0:
        return ZERO
    k = min(platform.m - 1, n)
    slots = _fastest_speeds(platform, k)
    tasks = list(system)
    terms = [(t.cost + t.utilization * t.cost, t.utilization * t.cost) for t in tasks]

    best = ZERO
    if k == n:
        # option: every task paired, no blocking term
        best = _max_assignment(terms, slots)
    # Reserving task r for the blocking term: an optimal reserved task is the
    # largest-cost task outside the pairing, and at most m-1 tasks are paired,
    # so it suffices to try the m largest costs.
    by_cost = sorted(range(n), key=lambda i: (-tasks[i].cost, tasks[i].id))
    for r in by_cost[: platform.m]:
        rest = [terms[i] for i in range(n) if i != r]
        value = _max_assignment(rest, slots[: min(k, n - 1)]) + tasks[r].cost
        if value > best:
            best = value
    return best


@dataclass(frozen=True)
class BoundReport:
    """Response-time bounds for one (system, platform, scheduler mode) triple."""

    mode: str  # "preemptive" | "nonpreemptive"
    u_bar: Fraction
    e_term: Fraction
    x: Fraction
    p_min: Fraction
    per_task_bound: dict[int, Fraction]

    def bound_for(self, task_id: int) -> Fraction:
        return self.per_task_bound[task_id]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "u_bar": format_rational(self.u_bar),
            "e_term": format_rational(self.e_term),
            "x": format_rational(self.x),
            "p_min": format_rational(self.p_min),
            "per_task_bound": {
                str(tid): format_rational(b) for tid, b in self.per_task_bound.items()
            },
        }


def compute_bounds(system: TaskSystem, platform: Platform, mode: str) -> BoundReport:
    """Bound report for an accepted system; raises on a rejected one.

    mode "preemptive" uses e_bar, "nonpreemptive" uses e_star; in both cases
    x = max(0, (E - p_min) / (r_sum - u_bar)) and each task's response-time
    bound is x + 2 * period.
    """
    if mode not in ("preemptive", "nonpreemptive"):
        raise ValueError(f"unknown mode {mode!r}")
    report = validate_task_system(system, platform)
    if not report.accepted:
        raise ValueError(
            "bounds are undefined for a rejected system: " + "; ".join(report.failures())
        )

    ub = u_bar(system, platform.m)
    e_term = e_bar(system, platform) if mode == "preemptive" else e_star(system, platform)
    if len(system) == 0:
        return BoundReport(mode, ub, e_term, ZERO, ZERO, {})

    p_min = min(t.period for t in system)
    denom = platform.r_sum - ub
    assert denom > 0, "accepted system must leave spare capacity below the top m-1 tasks"
    x = max(ZERO, (e_term - p_min) / denom)
    bounds = {t.id: x + 2 * t.period for t in system}
    return BoundReport(mode, ub, e_term, x, p_min, bounds)
