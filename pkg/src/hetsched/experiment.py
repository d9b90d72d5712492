"""Batch experiment harness: bound statistics over random task systems.

Two sweep families mirror the evaluation the analyzer is built for, both on
the default two-speed platform with total utilization pinned to capacity:

* period-sweep: every task shares one fixed period per sweep point (the
  point value, in ms); the non-heavy utilization bucket is the scenario
  parameter; up to two heavy tasks are drawn as usual.
* util-sweep: the period is fixed per scenario (100/300/600 ms) and the
  sweep points are the utilization buckets.  No heavy tasks are drawn here:
  with them, a single draw of two near-capacity tasks dominates the maximum
  curve and the per-period statistics stop saying anything about the bucket
  being swept.

Per sweep point the harness aggregates, over all tasks of all generated
sets, the response-time bound (ms) and the bound/period ratio; with
simulation enabled it also runs the scheduler and counts bound violations
(exact comparisons; the count must stay zero).

Rows are deterministic given the seed: set i at point j uses generation
substream (seed, j * sets_per_point + i), and aggregation is order-free.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .bounds import compute_bounds
from .model import Platform
from .simulator import ArrivalSource, PolicyConfig, response_times, simulate
from .taskgen import GenConfig, generate

__all__ = ["ExperimentSpec", "PointStats", "run_experiment", "rows_to_csv", "CSV_COLUMNS"]

F = Fraction

PERIOD_SWEEP_DEFAULT_POINTS = (F(100), F(300), F(600))
UTIL_SWEEP_POINTS = ("light", "medium", "heavy")

CSV_COLUMNS = [
    "scenario",
    "point",
    "n_sets",
    "bound_max_ms",
    "bound_avg_ms",
    "bound_min_ms",
    "ratio_max",
    "ratio_avg",
    "ratio_min",
]
CSV_SIM_COLUMNS = ["obs_max_ms", "violations"]


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str  # "period-sweep" | "util-sweep"
    util_class: str = "heavy"  # period-sweep: bucket under test
    period_ms: Fraction = F(100)  # util-sweep: the fixed period
    points: tuple = ()  # periods (ms) or bucket names
    sets_per_point: int = 1000
    seed: int = 0
    simulate: bool = False
    policy: str = "gedf-h-preemptive"
    horizon_multiplier: Fraction = F(50)
    platform: Platform | None = None

    def __post_init__(self):
        if self.scenario not in ("period-sweep", "util-sweep"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.sets_per_point < 1:
            raise ValueError("sets_per_point must be >= 1")
        if not self.points:
            raise ValueError("points must be non-empty")
        if self.scenario == "util-sweep":
            bad = [p for p in self.points if p not in UTIL_SWEEP_POINTS]
            if bad:
                raise ValueError(f"util-sweep points must be buckets, got {bad}")

    def gen_config(self, point, seed: int) -> GenConfig:
        kwargs = dict(seed=seed)
        if self.platform is not None:
            kwargs["platform"] = self.platform
        if self.scenario == "period-sweep":
            return GenConfig(
                util_class=self.util_class,
                period_mode="fixed",
                period_fixed=F(point),
                **kwargs,
            )
        return GenConfig(
            util_class=point,
            period_mode="fixed",
            period_fixed=F(self.period_ms),
            max_phi1_count=0,
            **kwargs,
        )

    def label(self) -> str:
        if self.scenario == "period-sweep":
            return f"period-sweep-{self.util_class}"
        return f"util-sweep-{self.period_ms}ms"


@dataclass
class PointStats:
    """Exact aggregates over every task of every set at one sweep point."""

    n_sets: int = 0
    n_tasks: int = 0
    bound_max: Fraction | None = None
    bound_min: Fraction | None = None
    bound_sum: Fraction = F(0)
    ratio_max: Fraction | None = None
    ratio_min: Fraction | None = None
    ratio_sum: Fraction = F(0)
    obs_max: Fraction | None = None
    violations: int = 0
    violating_jobs: list = field(default_factory=list)

    def merge(self, other: "PointStats") -> None:
        self.n_sets += other.n_sets
        self.n_tasks += other.n_tasks
        self.bound_sum += other.bound_sum
        self.ratio_sum += other.ratio_sum
        self.violations += other.violations
        self.violating_jobs.extend(other.violating_jobs)
        for name in ("bound_max", "ratio_max", "obs_max"):
            mine, theirs = getattr(self, name), getattr(other, name)
            if theirs is not None and (mine is None or theirs > mine):
                setattr(self, name, theirs)
        for name in ("bound_min", "ratio_min"):
            mine, theirs = getattr(self, name), getattr(other, name)
            if theirs is not None and (mine is None or theirs < mine):
                setattr(self, name, theirs)

    @property
    def bound_avg(self) -> Fraction:
        return self.bound_sum / self.n_tasks if self.n_tasks else F(0)

    @property
    def ratio_avg(self) -> Fraction:
        return self.ratio_sum / self.n_tasks if self.n_tasks else F(0)


def _mode_for(policy: str) -> str:
    return "nonpreemptive" if policy == "gedf-h-nonpreemptive" else "preemptive"


def _evaluate_one(spec: ExperimentSpec, point, set_index: int, point_index: int) -> PointStats:
    batch = point_index * spec.sets_per_point + set_index
    cfg = spec.gen_config(point, spec.seed)
    sys_ = generate(cfg, batch_index=batch)
    report = compute_bounds(sys_, cfg.platform, _mode_for(spec.policy))

    stats = PointStats(n_sets=1)
    for t in sys_:
        b = report.per_task_bound[t.id]
        r = b / t.period
        stats.n_tasks += 1
        stats.bound_sum += b
        stats.ratio_sum += r
        if stats.bound_max is None or b > stats.bound_max:
            stats.bound_max = b
        if stats.bound_min is None or b < stats.bound_min:
            stats.bound_min = b
        if stats.ratio_max is None or r > stats.ratio_max:
            stats.ratio_max = r
        if stats.ratio_min is None or r < stats.ratio_min:
            stats.ratio_min = r

    if spec.simulate:
        horizon = spec.horizon_multiplier * max(t.period for t in sys_)
        trace = simulate(
            sys_, cfg.platform, ArrivalSource.periodic(), PolicyConfig(spec.policy), horizon
        )
        for tid, resp in response_times(trace).items():
            bound = report.per_task_bound[tid]
            for i, r in enumerate(resp.responses, start=1):
                if stats.obs_max is None or r > stats.obs_max:
                    stats.obs_max = r
                if r > bound:
                    stats.violations += 1
                    stats.violating_jobs.append((batch, f"T{tid}.{i}"))
        # a censored job already past its bound is a violation too
        for job in trace.jobs.values():
            if job.completion is None and horizon - job.release > report.per_task_bound[job.task_id]:
                stats.violations += 1
                stats.violating_jobs.append((batch, f"T{job.task_id}.{job.index}"))
    return stats


def _worker(args) -> tuple[int, PointStats]:
    spec, point, point_index, lo, hi = args
    acc = PointStats()
    for i in range(lo, hi):
        acc.merge(_evaluate_one(spec, point, i, point_index))
    return point_index, acc


def worker_count() -> int:
    """Parallelism cap: HETSCHED_THREADS, else single-threaded."""
    raw = os.environ.get("HETSCHED_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """One row per sweep point, in point order, deterministic given the seed."""
    workers = worker_count()
    per_point: dict[int, PointStats] = {}

    jobs = []
    for pi, point in enumerate(spec.points):
        chunk = max(1, spec.sets_per_point // max(1, workers * 4))
        lo = 0
        while lo < spec.sets_per_point:
            hi = min(spec.sets_per_point, lo + chunk)
            jobs.append((spec, point, pi, lo, hi))
            lo = hi

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_worker, jobs)
    else:
        results = map(_worker, jobs)
    for pi, stats in results:
        if pi in per_point:
            per_point[pi].merge(stats)
        else:
            per_point[pi] = stats

    rows = []
    for pi, point in enumerate(spec.points):
        st = per_point[pi]
        row = {
            "scenario": spec.label(),
            "point": str(point),
            "n_sets": st.n_sets,
            "bound_max_ms": _dec(st.bound_max),
            "bound_avg_ms": _dec(st.bound_avg),
            "bound_min_ms": _dec(st.bound_min),
            "ratio_max": _dec(st.ratio_max),
            "ratio_avg": _dec(st.ratio_avg),
            "ratio_min": _dec(st.ratio_min),
        }
        if spec.simulate:
            row["obs_max_ms"] = _dec(st.obs_max)
            row["violations"] = st.violations
        rows.append(row)
    return rows


def _dec(v: Fraction | None) -> str:
    """Fixed six-decimal rendering; exact values are in the JSON outputs."""
    if v is None:
        return ""
    return f"{float(v):.6f}"


def rows_to_csv(rows: list[dict], simulate: bool) -> str:
    cols = CSV_COLUMNS + (CSV_SIM_COLUMNS if simulate else [])
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in cols))
    return "\n".join(lines) + "\n"
