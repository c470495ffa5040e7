"""Command-line driver.

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .builder import GroupLayout, build_full_schedule
from .extraction import extract_tour
from .lreduction import check_c, forward_map, resolve_wheel_tour, run_pipeline, wheel_size
from .metric import (
    format_true,
    gen_12_instance,
    oracle_limit,
    read_instance,
    solve_tsp_exact,
    write_text_atomic,
)
from .ttp import InfeasibleSchedule, Schedule, TtpInstance, evaluate_cost, validate_schedule
from .wheel import verify_corollary1

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

MODE_FLAGS = {
    "lemma2": ("schedule.", "accounting.", "lemma2."),
    "lemma3": ("lemma3.",),
    "condition2": ("condition2.",),
    "condition3": ("lemma3.", "condition3."),
}
MODES = ("corollary1", *MODE_FLAGS, "all")


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


def _layout_path(schedule_path) -> Path:
    return Path(f"{schedule_path}.layout")


def write_schedule(path, schedule: Schedule, tour) -> None:
    write_text_atomic(path, schedule.to_text())
    layout = schedule.groups
    lines = [f"groups {layout.group_count} {layout.group_size}"]
    lines += [" ".join(map(str, row)) for row in layout.teams.tolist()]
    lines += [f"segment {name} {start} {stop}" for name, start, stop in schedule.segments]
    lines.append("tour " + " ".join(map(str, tour.order)))
    lines.append(f"tour_cost_half {tour.cost}")
    write_text_atomic(_layout_path(path), "\n".join(lines) + "\n")


def read_schedule(path) -> Schedule:
    schedule = Schedule.from_text(Path(path).read_text(encoding="utf-8"))
    side = _layout_path(path)
    if not side.exists():
        return schedule
    lines = side.read_text(encoding="utf-8").splitlines()
    G, s = (int(x) for x in lines[0].split()[1:])
    teams = np.array([[int(x) for x in ln.split()] for ln in lines[1 : 1 + G]])
    segments = tuple(
        (parts[1], int(parts[2]), int(parts[3]))
        for parts in (ln.split() for ln in lines[1 + G :])
        if parts and parts[0] == "segment"
    )
    return Schedule(schedule.team_count, schedule.games, schedule.day_starts, segments, GroupLayout(teams))


def _load_instance(path):
    try:
        return read_instance(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None


def _load_ttp(path) -> TtpInstance:
    try:
        return TtpInstance.from_text(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise UsageError(f"cannot read TTP instance {path}: {exc}") from None


def _load_schedule(path) -> Schedule:
    try:
        return read_schedule(path)
    except (OSError, ValueError, IndexError) as exc:
        raise UsageError(f"cannot read schedule {path}: {exc}") from None


def cmd_gen(args) -> int:
    if args.n < 3:
        raise UsageError("--n must be at least 3")
    if not 0 <= args.density <= 1:
        raise UsageError("--density must lie in [0, 1]")
    inst = gen_12_instance(args.n, args.density, args.seed)
    _emit(inst.matrix.to_text(), args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    base = _load_instance(args.instance)
    try:
        inst, boosted = forward_map(
            base, args.c, allow_small_c=args.allow_small_c, require_even=not args.skip_parity, central=args.central
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_text_atomic(out / "wheel.txt", inst.wheel.matrix.to_text())
    write_text_atomic(out / "ttp_instance.txt", inst.to_text())
    params = [
        ("n", base.n),
        ("c", args.c),
        ("central", args.central),
        ("m", inst.m),
        ("teams", inst.team_count),
        ("boost", boosted.boost),
        ("w_u_half", inst.hub_weight),
        ("w_u_true", format_true(inst.hub_weight)),
    ]
    write_text_atomic(out / "params.txt", "".join(f"{k} = {v}\n" for k, v in params))
    return EXIT_OK


def cmd_build(args) -> int:
    base = _load_instance(args.instance)
    try:
        inst, _ = forward_map(base, args.c, allow_small_c=args.allow_small_c)
        given = [int(x) for x in args.tour.split()] if args.tour else None
        base_opt = None if given else solve_tsp_exact(base.matrix)
        tour = resolve_wheel_tour(inst.wheel, given, base_opt)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    schedule = build_full_schedule(inst, tour)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_schedule(args.out, schedule, tour)
    if args.instance_out:
        write_text_atomic(args.instance_out, inst.to_text())
    return EXIT_OK


def cmd_validate(args) -> int:
    inst, schedule = _load_ttp(args.ttp), _load_schedule(args.schedule)
    report = validate_schedule(inst, schedule, check_no_repeaters=not args.allow_repeaters)
    _emit(report.to_text(), args.out)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_evaluate(args) -> int:
    inst, schedule = _load_ttp(args.ttp), _load_schedule(args.schedule)
    try:
        cost = evaluate_cost(inst, schedule)
    except InfeasibleSchedule as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_FAIL
    _emit(cost.to_text(), args.out)
    return EXIT_OK


def cmd_extract(args) -> int:
    inst, schedule = _load_ttp(args.ttp), _load_schedule(args.schedule)
    try:
        ext = extract_tour(inst, schedule)
    except InfeasibleSchedule as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_FAIL
    _emit(ext.to_text(), args.out)
    if args.tour_out:
        write_text_atomic(args.tour_out, ext.tour.to_text())
    return EXIT_OK if ext.holds else EXIT_FAIL


def _verify_instances(args):
    if args.instance:
        return [("file", _load_instance(args.instance))]
    if args.n is None:
        raise UsageError("verify needs --instance or --n")
    if args.n < 3:
        raise UsageError("--n must be at least 3")
    return [(f"seed {seed}", gen_12_instance(args.n, args.density, seed))
            for seed in range(args.seed, args.seed + args.seeds)]


def cmd_verify(args) -> int:
    instances = _verify_instances(args)
    limit = oracle_limit()
    n = instances[0][1].n
    needed = wheel_size(n, args.c) if args.mode == "corollary1" else n
    if needed > limit:
        raise UsageError(f"mode {args.mode} needs the exact oracle on {needed} vertices; limit is {limit}")

    blocks, passed = [], 0
    if args.mode == "corollary1":
        for label, base in instances:
            rep = verify_corollary1(base, args.central, args.c)
            passed += rep.holds
            blocks.append(
                f"[{label}]\nopt_base_half = {rep.opt_base}\nopt_wheel_half = {rep.opt_wheel}\n"
                f"c = {args.c}\nholds = {'pass' if rep.holds else 'FAIL'}\n"
            )
    else:
        try:
            check_c(args.c, allow_small_c=True)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        prefixes = None if args.mode == "all" else MODE_FLAGS[args.mode]
        for label, base in instances:
            rep = run_pipeline(base, args.c, allow_small_c=True)
            if prefixes is not None:
                rep.flags = {k: v for k, v in rep.flags.items() if k.startswith(prefixes)}
            passed += rep.ok
            sys.stderr.write(f"{label}: {rep.runtime:.2f} s\n")
            blocks.append(f"[{label}]\nmode = {args.mode}\n" + rep.to_text())
    summary = f"[summary]\nmode = {args.mode}\npassed = {passed}/{len(instances)}\n"
    _emit("\n".join(blocks) + "\n" + summary, args.out)
    return EXIT_OK if passed == len(instances) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uttp-reduction",
        description="(1,2)-TSP to unconstrained TTP reduction: construction and exact verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random (1,2)-TSP instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, default=0.5, help="fraction of cost-1 edges")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("reduce", help="write the wheel and TTP instance for a (1,2)-TSP instance")
    p.add_argument("instance")
    p.add_argument("--c", type=int, default=6)
    p.add_argument("--central", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--allow-small-c", action="store_true", help="permit c < 5 (test runs)")
    p.add_argument("--skip-parity", action="store_true", help="permit odd c (no schedule can be built)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("build", help="build the two-phase schedule from a tour")
    p.add_argument("instance")
    p.add_argument("--c", type=int, default=6)
    p.add_argument("--tour", help="space-separated base or wheel tour; default: exact optimum")
    p.add_argument("--allow-small-c", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--instance-out", help="also write the TTP instance here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", help="check a schedule against every feasibility rule")
    p.add_argument("ttp")
    p.add_argument("schedule")
    p.add_argument("--allow-repeaters", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evaluate", help="total travel cost of a schedule")
    p.add_argument("ttp")
    p.add_argument("schedule")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("extract", help="recover a base tour from a schedule")
    p.add_argument("ttp")
    p.add_argument("schedule")
    p.add_argument("--out")
    p.add_argument("--tour-out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="run bound checks on generated or given instances")
    p.add_argument("--mode", choices=MODES, default="all")
    p.add_argument("--instance")
    p.add_argument("--n", type=int)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--c", type=int, default=6)
    p.add_argument("--central", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{parser.prog}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
