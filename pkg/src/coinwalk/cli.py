"""Command-line front end: synth, run, verify, bell, cost, sweep."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bell import BellParams, bell_schedule, bell_target
from .circuit import CROSS_COST_PER_BLOCK, cost
from .core import TargetState, WalkState, fidelity, random_target
from .engine import Schedule, apply_coin, apply_shift
from .errors import CoinWalkError, FormatError, NotBipartite, NotPowerOfTwo
from .logcoin import synthesize_logcoin
from .stepwise import synthesize_stepwise

EXIT_FIDELITY = 1
EXIT_BAD_INPUT = 2
EXIT_PRECONDITION = 3

DEFAULT_VERIFY_TOL = 1e-10


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_target(path: str) -> TargetState:
    return TargetState.load(path)


def _resolve_target(args) -> TargetState:
    if args.target:
        return _load_target(args.target)
    if args.random:
        if args.d is None:
            raise CoinWalkError("--random needs --d")
        return random_target(args.c, args.d, np.random.default_rng(args.seed))
    raise CoinWalkError("provide --target FILE or --random")


def cmd_synth(args) -> int:
    try:
        if args.scheme == "bell":
            if args.d is None:
                return _fail(EXIT_PRECONDITION, "--scheme bell needs --d")
            params = BellParams(args.d, args.n, args.m)
            target = bell_target(params)
            schedule = bell_schedule(params)
        else:
            target = _resolve_target(args)
            if args.scheme == "log":
                schedule = synthesize_logcoin(target)
            else:
                schedule = synthesize_stepwise(target, fused=not args.unfused)
    except (NotPowerOfTwo, NotBipartite) as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    except (FormatError, OSError, CoinWalkError) as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))

    schedule.save(args.out)
    if args.target_out:
        target.save(args.target_out)
    print(f"scheme={args.scheme} d={schedule.dimension} c={schedule.party_count}")
    print(f"steps={len(schedule.steps)} total_shift={schedule.total_shift()}")
    print(f"non_identity_blocks={schedule.block_count()}")
    if args.describe:
        print(schedule.describe())
    print(f"schedule written to {args.out}")
    return 0


def cmd_run(args) -> int:
    try:
        schedule = Schedule.load(args.schedule)
        state = _run_schedule(schedule)[-1]
    except (FormatError, CoinWalkError) as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    print(f"norm={state.norm()!r}")
    print(f"positions={state.position_count}")
    entries = sorted(state.items(), key=lambda kv: -abs(kv[1]))
    for (position, coin), amp in entries[:16]:
        print(f"  pos={list(position)} coin={coin} amp={amp.real!r}{amp.imag:+}j")
    if len(entries) > 16:
        print(f"  ... {len(entries) - 16} more")
    if args.out:
        _save_state(state, args.out)
        print(f"state written to {args.out}")
    return 0


def _run_schedule(schedule: Schedule) -> list[WalkState]:
    """Final state plus the per-step trail, for collapse reporting."""
    states = []
    state = WalkState.origin(schedule.party_count, schedule.dimension)
    for step in schedule.steps:
        state = apply_coin(state, step.blocks)
        state = apply_shift(state, step.shift_power)
        if step.post_blocks:
            state = apply_coin(state, step.post_blocks)
        states.append(state)
    if not states:
        states.append(state)
    return states


def _save_state(state: WalkState, path: str) -> None:
    entries = [
        {
            "pos": list(position),
            "coin": coin,
            "re": float(amp.real),
            "im": float(amp.imag),
        }
        for (position, coin), amp in state.items()
    ]
    payload = {
        "c": state.party_count,
        "d": state.dimension,
        "amplitudes": entries,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_verify(args) -> int:
    tol = args.tolerance
    if tol is None:
        tol = float(os.environ.get("QWALK_TOL", DEFAULT_VERIFY_TOL))
    try:
        schedule = Schedule.load(args.schedule)
        target = _load_target(args.target)
        trail = _run_schedule(schedule)
    except (FormatError, CoinWalkError) as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    final = trail[-1]
    try:
        value = fidelity(final, target)
    except CoinWalkError as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    print(f"fidelity={value!r}")
    print(f"norm_drift={abs(final.norm() - 1.0):.3e}")
    for index, (state, step) in enumerate(zip(trail, schedule.steps)):
        rest = state.coin_rest_probability()
        note = "restored" if step.post_blocks else "no restore map"
        print(f"step {index}: coin_rest_probability={rest:.15f} ({note})")
    ok = value >= 1.0 - tol
    print(f"{'PASS' if ok else 'FAIL'} (tolerance {tol:g})")
    return 0 if ok else EXIT_FIDELITY


def cmd_bell(args) -> int:
    try:
        params = BellParams(args.d, args.n, args.m)
    except ValueError as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    target = bell_target(params)
    target.save(args.out)
    print(
        f"bell target d={params.dimension} n={params.phase_index} "
        f"m={params.shift_index} written to {args.out}"
    )
    if args.schedule_out:
        bell_schedule(params).save(args.schedule_out)
        print(f"schedule written to {args.schedule_out}")
    return 0


def cmd_cost(args) -> int:
    try:
        schedule = Schedule.load(args.schedule)
    except FormatError as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    try:
        report = cost(schedule, cross_cost=args.cross_cost)
    except NotBipartite as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    except CoinWalkError as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    print(report.to_table())
    if args.out:
        report.save(args.out)
        print(f"report written to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    dims = [int(v) for v in args.d_list.split(",")]
    rows = []
    for d in dims:
        counts = []
        for i in range(args.per_d):
            target = random_target(2, d, np.random.default_rng(args.seed + i))
            counts.append(
                cost(
                    synthesize_stepwise(target), cross_cost=args.cross_cost
                ).long_distance_cnots
            )
        rows.append({"d": d, "mean_cross_cnots": sum(counts) / len(counts)})
    xs = np.log2([row["d"] for row in rows])
    ys = np.log2([row["mean_cross_cnots"] for row in rows])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(rows) > 1 else float("nan")
    print(f"{'d':>6} {'cross_cnots':>14}")
    for row in rows:
        print(f"{row['d']:>6} {row['mean_cross_cnots']:>14.1f}")
    print(f"log-log slope: {slope:.4f}")
    if args.out:
        payload = {"seed": args.seed, "rows": rows, "slope": slope}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"sweep written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coinwalk",
        description="Engineer multipartite qudit states with coined walks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize a coin schedule")
    synth.add_argument(
        "--scheme", choices=("stepwise", "log", "bell"), default="stepwise"
    )
    synth.add_argument("--target", help="target state JSON file")
    synth.add_argument("--random", action="store_true", help="draw a random target")
    synth.add_argument("--c", type=int, default=2, help="particle count")
    synth.add_argument("--d", type=int, help="qudit dimension")
    synth.add_argument("--n", type=int, default=0, help="bell phase index")
    synth.add_argument("--m", type=int, default=0, help="bell pairing offset")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--unfused", action="store_true", help="keep restores separate")
    synth.add_argument(
        "--describe", action="store_true", help="print every non-identity block"
    )
    synth.add_argument("--target-out", help="also write the target state")
    synth.add_argument("-o", "--out", required=True, help="schedule output file")
    synth.set_defaults(func=cmd_synth)

    runp = sub.add_parser("run", help="simulate a schedule")
    runp.add_argument("--schedule", required=True)
    runp.add_argument("-o", "--out", help="final state output file")
    runp.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="check a schedule against a target")
    verify.add_argument("--schedule", required=True)
    verify.add_argument("--target", required=True)
    verify.add_argument("--tolerance", type=float, default=None)
    verify.set_defaults(func=cmd_verify)

    bell = sub.add_parser("bell", help="emit a generalized Bell target")
    bell.add_argument("--d", type=int, required=True)
    bell.add_argument("--n", type=int, default=0)
    bell.add_argument("--m", type=int, default=0)
    bell.add_argument("--schedule-out", help="also write the closed-form schedule")
    bell.add_argument("-o", "--out", required=True)
    bell.set_defaults(func=cmd_bell)

    costp = sub.add_parser("cost", help="long-distance gate cost of a schedule")
    costp.add_argument("--schedule", required=True)
    costp.add_argument("--cross-cost", type=int, default=CROSS_COST_PER_BLOCK)
    costp.add_argument("-o", "--out")
    costp.set_defaults(func=cmd_cost)

    sweep = sub.add_parser("sweep", help="cost scaling over dimensions")
    sweep.add_argument("--d-list", default="4,8,16,32,64")
    sweep.add_argument("--per-d", type=int, default=3)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--cross-cost", type=int, default=CROSS_COST_PER_BLOCK)
    sweep.add_argument("-o", "--out")
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
