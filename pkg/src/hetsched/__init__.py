"""Exact scheduling simulator and schedulability analyzer for sporadic task
systems on uniform heterogeneous multiprocessors.

The package models platforms whose processors differ only in speed, decides
whether a task system admits bounded response times under speed-aware global
EDF scheduling, computes analytical response-time bounds for the preemptive
and non-preemptive schedulers, simulates schedules exactly in rational
arithmetic, and validates simulated traces against an ideal processor-share
schedule (lag accounting, busy intervals, assignment legality).
"""

from .bounds import BoundReport, compute_bounds, e_bar, e_star, u_bar
from .model import (
    FeasibilityReport,
    ModelError,
    Platform,
    SpeedClass,
    SporadicTask,
    TaskSystem,
    load_system,
    min_speed_class,
    phi_set,
    psi_set,
    save_system,
    system_from_dict,
    system_to_dict,
    total_capacity,
    total_utilization,
    validate_task_system,
)
from .oracle import (
    JobSetD,
    PropertyReport,
    PropertySweep,
    PsSchedule,
    big_lag,
    blocking_intervals,
    blocking_workload,
    busy_intervals,
    check_properties,
    lag,
    ps_allocation,
    sweep_properties,
)
from .rational import format_rational, parse_rational
from .simulator import (
    ArrivalSource,
    EngineFault,
    InfeasibleSystemError,
    Job,
    PolicyConfig,
    ScheduleTrace,
    gedfh_assign,
    migration_count,
    np_dispatch,
    read_trace,
    response_times,
    simulate,
    trace_to_jsonl,
    write_trace,
)
from .taskgen import GenConfig, GenerationError, generate
from .experiment import ExperimentSpec, run_experiment

__version__ = "0.1.0"
