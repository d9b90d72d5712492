"""Command-line interface.

Subcommands:
  analyze     feasibility gate plus response-time bounds for a task system
  simulate    run a scheduling policy and report response statistics
  verify      simulate (or replay) a trace and check its analysis properties
  experiment  sweep random task systems and emit bound statistics as CSV
  generate    emit random task systems in the task-system JSON format

Exit codes: 0 success / accepted; 1 usage or parse error; 2 system rejected
by the feasibility gate; 3 a bound or property violation was detected.
Every command is deterministic given its inputs and seeds.
"""

import argparse
import json
import sys
from fractions import Fraction

from .bounds import compute_bounds
from .experiment import (
    ExperimentSpec,
    PERIOD_SWEEP_DEFAULT_POINTS,
    UTIL_SWEEP_POINTS,
    rows_to_csv,
    run_experiment,
)
from .model import (
    ModelError,
    load_system,
    system_to_dict,
    validate_task_system,
)
from .oracle import sweep_properties
from .rational import format_rational, parse_rational
from .simulator import (
    ArrivalSource,
    GEDFH_POLICIES,
    InfeasibleSystemError,
    PLAIN_SELECTORS,
    PolicyConfig,
    migration_count,
    read_trace,
    response_times,
    simulate,
    write_trace,
)
from .taskgen import GenConfig, UTIL_CLASSES, generate, generation_metadata

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2
EXIT_VIOLATION = 3

POLICY_NAMES = {
    "gedf-h": "gedf-h-preemptive",
    "np-gedf-h": "gedf-h-nonpreemptive",
    "gedf-plain": "gedf-plain",
}


def _fmt(q) -> str:
    return f"{format_rational(q)} ({float(q):.6f})"


def _load(path):
    try:
        return load_system(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file")
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    except ModelError as exc:
        raise CliError(f"{path}: {exc}")


class CliError(Exception):
    pass


def _policy_from_args(args) -> PolicyConfig:
    policy = POLICY_NAMES[args.policy]
    if policy == "gedf-plain":
        return PolicyConfig(policy, args.selector or "arbitrary-lowest-id")
    if args.selector:
        raise CliError("--selector only applies to --policy gedf-plain")
    return PolicyConfig(policy)


def _arrivals_from_args(args) -> ArrivalSource:
    if args.arrivals == "periodic":
        return ArrivalSource.periodic()
    return ArrivalSource.sporadic(seed=args.seed)


def _horizon_for(args, system) -> Fraction:
    if args.horizon is not None:
        return parse_rational(args.horizon)
    if not len(system):
        return Fraction(1)
    return Fraction(50) * max(t.period for t in system)


# --------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    system, platform = _load(args.file)
    report = validate_task_system(system, platform)
    out = {"feasibility": report.to_dict()}
    if report.accepted:
        out["bounds"] = {
            mode: compute_bounds(system, platform, mode).to_dict()
            for mode in ("preemptive", "nonpreemptive")
        }

    if args.json:
        print(json.dumps(out, indent=2))
    else:
        print(f"tasks: {len(system)}   processors: {platform.m}")
        print(f"total utilization: {_fmt(report.u_sum)}")
        print(f"total capacity:    {_fmt(report.r_sum)}")
        for c in report.eq1_checks:
            mark = "ok" if c.ok else "VIOLATED"
            print(
                f"class {c.class_index} (speed {format_rational(c.threshold)}): "
                f"{c.heavy_tasks} heavy tasks vs {c.fast_processors} faster processors "
                f"[{mark}]"
            )
        slow = [tid for tid, ok in report.per_task_speed_ok.items() if not ok]
        if slow:
            print(f"tasks too heavy for the fastest class: {slow}")
        print(f"accepted: {report.accepted}")
        if not report.accepted:
            for msg in report.failures():
                print(f"  - {msg}")
        else:
            for mode in ("preemptive", "nonpreemptive"):
                rep = compute_bounds(system, platform, mode)
                print(f"[{mode}] x = {_fmt(rep.x)}")
                for t in system:
                    b = rep.per_task_bound[t.id]
                    print(
                        f"  task {t.id}: bound {_fmt(b)}"
                        f"  ({float(b / t.period):.3f} periods)"
                    )
    return EXIT_OK if report.accepted else EXIT_REJECTED


def cmd_simulate(args) -> int:
    system, platform = _load(args.file)
    policy = _policy_from_args(args)
    report = validate_task_system(system, platform)
    if not report.accepted and policy.policy in GEDFH_POLICIES:
        print("system rejected by the feasibility gate:", file=sys.stderr)
        for msg in report.failures():
            print(f"  - {msg}", file=sys.stderr)
        return EXIT_REJECTED
    if not report.accepted and not args.allow_infeasible:
        print(
            "system is infeasible; pass --allow-infeasible to simulate anyway",
            file=sys.stderr,
        )
        return EXIT_REJECTED

    horizon = _horizon_for(args, system)
    if horizon <= 0:
        raise CliError("--horizon must be positive")
    trace = simulate(system, platform, _arrivals_from_args(args), policy, horizon)
    if args.trace:
        write_trace(args.trace, trace)

    bounds = None
    if report.accepted and policy.policy in GEDFH_POLICIES:
        mode = "nonpreemptive" if policy.policy == "gedf-h-nonpreemptive" else "preemptive"
        bounds = compute_bounds(system, platform, mode)

    stats = response_times(trace)
    migrations = migration_count(trace)
    violations = []
    rows = []
    for t in system:
        st = stats.get(t.id)
        if st is None:
            continue
        bound = bounds.per_task_bound[t.id] if bounds else None
        for i, r in enumerate(st.responses, start=1):
            if bound is not None and r > bound:
                violations.append((t.id, i, r, bound))
        rows.append(
            {
                "task": t.id,
                "jobs": len(st.responses),
                "censored": st.censored,
                "max_response": format_rational(st.max) if st.max is not None else None,
                "mean_response": format_rational(st.mean) if st.mean is not None else None,
                "migrations": migrations.get(t.id, 0),
                "bound": format_rational(bound) if bound is not None else None,
            }
        )

    if args.json:
        print(
            json.dumps(
                {
                    "policy": policy.policy,
                    "horizon": format_rational(horizon),
                    "tasks": rows,
                    "bound_violations": [
                        {"task": tid, "job": i, "response": format_rational(r),
                         "bound": format_rational(b)}
                        for tid, i, r, b in violations
                    ],
                },
                indent=2,
            )
        )
    else:
        print(f"policy {policy.policy}, horizon {format_rational(horizon)}")
        for row in rows:
            line = (
                f"task {row['task']}: {row['jobs']} jobs"
                f" (censored {row['censored']}), max {row['max_response']},"
                f" mean {row['mean_response']}, migrations {row['migrations']}"
            )
            if row["bound"] is not None:
                line += f", bound {row['bound']}"
            print(line)
        if bounds is not None:
            print(f"bound check: {'VIOLATED' if violations else 'ok'}")
        for tid, i, r, b in violations:
            print(f"  T{tid}.{i}: response {format_rational(r)} > bound {format_rational(b)}")
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_verify(args) -> int:
    system, platform = _load(args.file)
    if args.replay:
        try:
            trace = read_trace(args.replay, system, platform)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"{args.replay}: cannot replay trace: {exc}")
    else:
        policy = _policy_from_args(args)
        report = validate_task_system(system, platform)
        if not report.accepted and policy.policy in GEDFH_POLICIES:
            print("system rejected by the feasibility gate", file=sys.stderr)
            return EXIT_REJECTED
        horizon = _horizon_for(args, system)
        trace = simulate(system, platform, _arrivals_from_args(args), policy, horizon)

    sweep = sweep_properties(trace, budget=args.pivots)
    if args.json:
        print(json.dumps(sweep.to_dict(), indent=2))
    else:
        print(f"pivots checked: {len(sweep.reports)}")
        p0 = "ok" if not sweep.p0_violations else f"{len(sweep.p0_violations)} violations"
        print(f"assignment legality: {p0}")
        for t, proc, key in sweep.p0_violations[:10]:
            print(f"  t={format_rational(t)} proc={proc} job=T{key[0]}.{key[1]}")
        bad = [r for r in sweep.reports if not (r.p1_ok and r.p2_ok)]
        if bad:
            for r in bad:
                print(
                    f"pivot T{r.pivot[0]}.{r.pivot[1]}: "
                    f"lag-rule violations {len(r.p1_violations)}, "
                    f"pending-rule violations {len(r.p2_violations)}"
                )
        else:
            print("lag and pending rules: ok at every boundary")
    return EXIT_OK if sweep.ok else EXIT_VIOLATION


def cmd_experiment(args) -> int:
    if args.scenario == "period-sweep":
        points = (
            tuple(parse_rational(p) for p in args.points.split(","))
            if args.points
            else PERIOD_SWEEP_DEFAULT_POINTS
        )
        spec = ExperimentSpec(
            "period-sweep",
            util_class=args.util_class,
            points=points,
            sets_per_point=args.sets,
            seed=args.seed,
            simulate=args.simulate,
            policy=POLICY_NAMES[args.policy],
        )
    else:
        points = tuple(args.points.split(",")) if args.points else UTIL_SWEEP_POINTS
        spec = ExperimentSpec(
            "util-sweep",
            period_ms=parse_rational(args.period_ms),
            points=points,
            sets_per_point=args.sets,
            seed=args.seed,
            simulate=args.simulate,
            policy=POLICY_NAMES[args.policy],
        )
    try:
        rows = run_experiment(spec)
    except ValueError as exc:
        raise CliError(str(exc))
    text = rows_to_csv(rows, spec.simulate)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    total_violations = sum(int(r.get("violations", 0) or 0) for r in rows)
    return EXIT_VIOLATION if total_violations else EXIT_OK


def cmd_generate(args) -> int:
    cfg = GenConfig(
        util_class=args.util_class,
        period_mode=args.period_mode,
        period_fixed=parse_rational(args.period) if args.period else None,
        max_phi1_count=args.max_heavy,
        target_usum=parse_rational(args.target) if args.target else None,
        seed=args.seed,
    )
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.count == 1:
            system = generate(cfg)
            json.dump(system_to_dict(system, cfg.platform), out, indent=2)
            out.write("\n")
        else:
            header = {"meta": generation_metadata(cfg), "count": args.count}
            out.write(json.dumps(header, separators=(",", ":")) + "\n")
            for i in range(args.count):
                system = generate(cfg, batch_index=i)
                doc = system_to_dict(system, cfg.platform)
                doc["batch_index"] = i
                out.write(json.dumps(doc, separators=(",", ":")) + "\n")
    finally:
        if args.out:
            out.close()
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetsched",
        description="Exact scheduling simulator and schedulability analyzer "
        "for sporadic tasks on uniform heterogeneous multiprocessors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_policy_flags(p):
        p.add_argument("--policy", choices=sorted(POLICY_NAMES), default="gedf-h")
        p.add_argument("--selector", choices=PLAIN_SELECTORS, default=None)
        p.add_argument("--horizon", default=None, help="rational, e.g. 20 or 41/2")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--arrivals", choices=("periodic", "sporadic"), default="periodic")
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("analyze", help="feasibility gate and response-time bounds")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run a policy and report response times")
    p.add_argument("file")
    add_policy_flags(p)
    p.add_argument("--trace", default=None, help="write the trace as JSON lines")
    p.add_argument("--allow-infeasible", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check analysis properties on a trace")
    p.add_argument("file")
    add_policy_flags(p)
    p.add_argument("--pivots", type=int, default=20)
    p.add_argument("--replay", default=None, help="verify a recorded trace instead")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="bound statistics over random systems")
    p.add_argument("--scenario", choices=("period-sweep", "util-sweep"), required=True)
    p.add_argument("--util-class", choices=sorted(UTIL_CLASSES), default="heavy")
    p.add_argument("--period-ms", default="100")
    p.add_argument("--points", default=None, help="comma-separated sweep points")
    p.add_argument("--sets", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--policy", choices=sorted(POLICY_NAMES), default="gedf-h")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("generate", help="emit random task systems")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--util-class", choices=sorted(UTIL_CLASSES), default="medium")
    p.add_argument("--period-mode", choices=("uniform", "fixed"), default="uniform")
    p.add_argument("--period", default=None, help="fixed period (rational)")
    p.add_argument("--max-heavy", type=int, default=2)
    p.add_argument("--target", default=None, help="target total utilization")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, InfeasibleSystemError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
