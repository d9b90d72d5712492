from fractions import Fraction

import pytest

from hetsched.model import SporadicTask, validate_task_system
from hetsched.oracle import (
    JobSetD,
    PsSchedule,
    big_lag,
    blocking_intervals,
    blocking_workload,
    busy_intervals,
    check_properties,
    lag,
    ps_allocation,
    select_pivots,
    sweep_properties,
)
from hetsched.simulator import (
    ArrivalSource,
    PolicyConfig,
    read_trace,
    simulate,
    write_trace,
)
from hetsched.rng import SplitMix64

from helpers import (
    example1_platform,
    example1_system,
    platform,
    random_small_instance,
    system,
)

F = Fraction
PREEMPTIVE = PolicyConfig("gedf-h-preemptive")
NONPREEMPTIVE = PolicyConfig("gedf-h-nonpreemptive")


@pytest.fixture(scope="module")
def ex1_trace():
    return simulate(
        example1_system(), example1_platform(), ArrivalSource.periodic(), PREEMPTIVE, 2
    )


def periodic_releases(task, horizon):
    return ArrivalSource.periodic().release_times(task, F(horizon))


class TestPsAllocation:
    def test_example1_heavy_task_first_period(self):
        t = SporadicTask(2, F(2), F(1))
        assert ps_allocation(t, F(0), F(1), periodic_releases(t, 2)) == F(2)

    def test_before_first_release(self):
        t = SporadicTask(1, F(1), F(1))
        assert ps_allocation(t, F(0), F(3), [F(5)]) == F(0)

    def test_active_throughout(self):
        t = SporadicTask(1, F(1), F(1))
        assert ps_allocation(t, F(0), F(5, 2), periodic_releases(t, 3)) == F(5, 2)

    def test_each_job_completes_exactly_at_deadline(self):
        for cost, period in ((2, 1), (1, 1), (3, 7), (5, 4)):
            t = SporadicTask(1, F(cost), F(period))
            for r in periodic_releases(t, 4 * period):
                got = ps_allocation(t, r, r + t.period, periodic_releases(t, 8 * period))
                assert got == t.cost

    def test_bad_interval(self):
        t = SporadicTask(1, F(1), F(1))
        with pytest.raises(ValueError):
            ps_allocation(t, F(2), F(1), [])

    def test_matches_step_integration_small_instances(self):
        """Closed form equals a 1/64-time-step integration of the ideal schedule."""
        step = F(1, 64)
        rng = SplitMix64(404)
        checked = 0
        while checked < 100:
            n = rng.randint(1, 3)
            tasks = [
                SporadicTask(i + 1, F(rng.randint(1, 4)), F(rng.randint(1, 4)))
                for i in range(n)
            ]
            horizon = F(6)
            for t in tasks:
                rel = periodic_releases(t, horizon)
                windows = [(r, r + t.period) for r in rel]
                acc = F(0)
                k = 0
                while k * step < horizon:
                    lo = k * step
                    assert ps_allocation(t, F(0), lo, rel) == acc
                    if any(a <= lo < b for a, b in windows):
                        acc += t.utilization * step
                    k += 1
            checked += 1


class TestLag:
    def test_zero_at_time_zero(self, ex1_trace):
        d = JobSetD.from_pivot(ex1_trace, (4, 1))
        for tid in (1, 2, 3, 4):
            t = example1_system().by_id(tid)
            assert lag(t, F(0), ex1_trace, d) == F(0)

    def test_tau4_at_completion_of_heavies(self, ex1_trace):
        # ideal schedule gave 0.8, the trace gave nothing yet
        d = JobSetD.from_pivot(ex1_trace, (4, 1))
        t4 = example1_system().by_id(4)
        assert lag(t4, F(4, 5), ex1_trace, d) == F(4, 5)

    def test_matched_speed_processor_keeps_zero_lag(self):
        sys_ = system((1, 1, 2))  # utilization 1/2
        pf = platform(("1/2", 1))  # a single processor of exactly that speed
        tr = simulate(sys_, pf, ArrivalSource.periodic(), PREEMPTIVE, 6)
        d = JobSetD.from_pivot(tr, (1, 3))
        task = sys_.by_id(1)
        for b in (F(0), F(1), F(2), F(3), F(4), F(5)):
            assert lag(task, b, tr, d) == F(0)

    def test_big_lag_is_sum_of_task_lags(self, ex1_trace):
        d = JobSetD.from_pivot(ex1_trace, (2, 1))
        t = F(1)
        total = sum(
            (lag(example1_system().by_id(tid), t, ex1_trace, d) for tid in (1, 2, 3, 4)),
            F(0),
        )
        assert big_lag(d, t, ex1_trace) == total

    def test_big_lag_nonincreasing_over_busy_intervals(self):
        for seed in range(120):
            sys_, pf = random_small_instance(seed)
            if not len(sys_) or not validate_task_system(sys_, pf).accepted:
                continue
            tr = simulate(sys_, pf, ArrivalSource.periodic(), PREEMPTIVE, 20)
            for pivot in select_pivots(tr, 4):
                d = JobSetD.from_pivot(tr, pivot)
                for a, b in busy_intervals(tr, d):
                    assert big_lag(d, b, tr) <= big_lag(d, a, tr), (seed, pivot)

    def test_ps_schedule_class_matches_function(self, ex1_trace):
        ps = PsSchedule(ex1_trace)
        t2 = example1_system().by_id(2)
        rel = periodic_releases(t2, 2)
        for t in (F(1, 2), F(1), F(3, 2), F(2)):
            total = sum((ps.allocation_before((2, i), t) for i in (1, 2)), F(0))
            assert total == ps_allocation(t2, F(0), t, rel)


class TestJobSetD:
    def test_members_by_priority(self, ex1_trace):
        d = JobSetD.from_pivot(ex1_trace, (2, 1))
        assert d.t_d == F(1)
        assert d.members == {(1, 1), (2, 1)}
        assert (2, 1) in d and (3, 1) not in d

    def test_pivot_always_member(self, ex1_trace):
        for pivot in ex1_trace.jobs:
            assert pivot in JobSetD.from_pivot(ex1_trace, pivot)


class TestBusyIntervals:
    def test_example1_first_deadline(self, ex1_trace):
        d = JobSetD.from_pivot(ex1_trace, (4, 1))
        assert busy_intervals(ex1_trace, d) == [(F(0), F(4, 5))]

    def test_overloaded_interval_busy(self):
        # three always-pending tasks of the set on two processors
        sys_ = system((1, 2, 3), (2, 2, 3), (3, 2, 3))
        pf = platform((1, 2))
        tr = simulate(sys_, pf, ArrivalSource.periodic(), PREEMPTIVE, 3)
        d = JobSetD.from_pivot(tr, (3, 1))
        assert busy_intervals(tr, d)[0] == (F(0), F(2))

    def test_single_task_two_procs_never_busy(self):
        sys_ = system((1, 1, 2))
        tr = simulate(sys_, platform((1, 2)), ArrivalSource.periodic(), PREEMPTIVE, 6)
        d = JobSetD.from_pivot(tr, (1, 3))
        assert busy_intervals(tr, d) == []


class TestCheckProperties:
    def test_gedfh_traces_pass(self):
        count = 0
        for seed in range(200):
            sys_, pf = random_small_instance(seed)
            if not len(sys_) or not validate_task_system(sys_, pf).accepted:
                continue
            tr = simulate(sys_, pf, ArrivalSource.periodic(), PREEMPTIVE, 24)
            sweep = sweep_properties(tr, budget=6)
            assert sweep.ok, (seed, sweep.to_dict())
            count += 1
        assert count > 40

    def test_corrupted_assignment_fails_p0(self, ex1_trace, tmp_path):
        path = tmp_path / "trace.jsonl"
        write_trace(path, ex1_trace)
        text = path.read_text()
        # move the heavy job T1.1 onto the unit-speed processor 0
        bad = text.replace(
            '{"id":0,"job":"T3.1"},{"id":1,"job":"T1.1"}',
            '{"id":0,"job":"T1.1"},{"id":1,"job":"T3.1"}',
            1,
        )
        assert bad != text
        path.write_text(bad)
        tr = read_trace(path, example1_system(), example1_platform())
        rep = check_properties(tr, JobSetD.from_pivot(tr, (4, 1)))
        assert not rep.p0_ok
        t, proc, key = rep.p0_violations[0]
        assert t == F(0) and key == (1, 1)

    def test_empty_trace_vacuous_pass(self):
        sys_ = system((1, 1, 1))
        tr = simulate(
            sys_, platform((1, 1)),
            ArrivalSource.from_lists({1: []}), PREEMPTIVE, 5,
        )
        assert not tr.jobs
        sweep = sweep_properties(tr, budget=20)
        assert sweep.ok and sweep.reports == ()

    def test_sweep_matches_per_pivot_reference(self):
        """The one-pass multi-pivot sweep equals pivot-by-pivot checking."""
        for seed in range(0, 160, 7):
            sys_, pf = random_small_instance(seed)
            if not len(sys_) or not validate_task_system(sys_, pf).accepted:
                continue
            for policy in (PREEMPTIVE, NONPREEMPTIVE):
                tr = simulate(sys_, pf, ArrivalSource.periodic(), policy, 18)
                sweep = sweep_properties(tr, budget=7)
                for rep in sweep.reports:
                    ref = check_properties(tr, JobSetD.from_pivot(tr, rep.pivot))
                    assert rep.p1_violations == ref.p1_violations, (seed, rep.pivot)
                    assert rep.p2_violations == ref.p2_violations, (seed, rep.pivot)

    def test_sweep_matches_reference_on_corrupted_trace(self, ex1_trace, tmp_path):
        # blank out one job's executions so the checks see idle fast processors
        path = tmp_path / "t.jsonl"
        write_trace(path, ex1_trace)
        text = path.read_text().replace('{"id":1,"job":"T2.2"}', '{"id":1,"job":null}')
        path.write_text(text)
        tr = read_trace(path, example1_system(), example1_platform())
        sweep = sweep_properties(tr, budget=10)
        for rep in sweep.reports:
            ref = check_properties(tr, JobSetD.from_pivot(tr, rep.pivot))
            assert rep.p1_violations == ref.p1_violations
            assert rep.p2_violations == ref.p2_violations

    def test_p1_sweep_matches_direct_lag_comparison(self):
        """Dual route: the incremental rate sweep agrees with direct LAG values."""
        from hetsched.oracle import _boundaries

        for seed in (3, 11, 19, 44, 61):
            sys_, pf = random_small_instance(seed)
            if not len(sys_) or not validate_task_system(sys_, pf).accepted:
                continue
            tr = simulate(sys_, pf, ArrivalSource.periodic(), PREEMPTIVE, 12)
            for pivot in select_pivots(tr, 3):
                d = JobSetD.from_pivot(tr, pivot)
                T = min(d.t_d, tr.horizon)
                bounds = [b for b in _boundaries(tr) if b <= T]
                busy = busy_intervals(tr, d)

                def is_busy_at(t):
                    return any(a <= t < b for a, b in busy)

                naive = []
                for a, b in zip(bounds, bounds[1:]):
                    if big_lag(d, b, tr) > big_lag(d, a, tr) and is_busy_at(a):
                        naive.append((a, b))
                rep = check_properties(tr, d)
                assert list(rep.p1_violations) == naive


@pytest.fixture(scope="module")
def np_trace():
    sys_ = system((1, 2, 1), (2, 1, 2), (3, 1, 2))
    pf = platform((1, 1), (2, 1))
    arrivals = ArrivalSource.from_lists({1: [F(1, 5)], 2: [0], 3: [0]})
    return simulate(sys_, pf, arrivals, NONPREEMPTIVE, 3)


class TestBlocking:

    def test_blocking_interval_matches_events(self, np_trace):
        d = JobSetD.from_pivot(np_trace, (1, 1))  # t_d = 1.2
        assert blocking_intervals(np_trace, d) == [(F(1, 5), F(1, 2))]

    def test_def10_predicate_at_block_instant(self, np_trace):
        # at t = 0.2 the heavy job is enabled, not executing, while the
        # lower-priority job T3.1 runs
        d = JobSetD.from_pivot(np_trace, (1, 1))
        seg = next(s for s in np_trace.segments if s.start <= F(1, 5) < s.end or s.start == F(1, 5))
        executing = {k for k in seg.assignment if k is not None}
        assert (1, 1) in d and (1, 1) not in executing
        assert any(k not in d for k in executing)

    def test_blocking_workload(self, np_trace):
        # T3.1 blocks in [0.2, 0.5) but completes at 0.5, well before t_d;
        # nothing outside d still runs at t_d, so the pending blocker load is 0
        d = JobSetD.from_pivot(np_trace, (1, 1))
        jobs, total = blocking_workload(np_trace, d)
        assert jobs == [] and total == F(0)

    def test_blocker_running_at_td_counted(self):
        # T3.1 takes the slow processor, pushing T2.1 onto the fast one; the
        # heavy T1.1 then waits behind T2.1, which still runs at T1.1's t_d
        sys_ = system((1, 2, 1), (2, "5/2", 4), (3, "1/2", 2))
        pf = platform((1, 1), (2, 1))
        arrivals = ArrivalSource.from_lists({1: [F(1, 5)], 2: [0], 3: [0]})
        assert validate_task_system(sys_, pf).accepted
        tr = simulate(sys_, pf, arrivals, NONPREEMPTIVE, 4)
        d = JobSetD.from_pivot(tr, (1, 1))  # t_d = 1.2
        assert blocking_intervals(tr, d) == [(F(1, 5), F(6, 5))]
        jobs, total = blocking_workload(tr, d)
        assert jobs == [(2, 1)]
        # blocker ran at speed 2 from 0 to 1.2: 2.4 of its 2.5 units done
        assert total == F(5, 2) - F(12, 5)
