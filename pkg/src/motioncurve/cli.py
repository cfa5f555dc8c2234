"""``motioncurve`` command-line interface.

Subcommands chain into a pipeline::

    motioncurve synth --kind sinusoid --T 128 -o walk.json
    motioncurve fit walk.json -o finest.json
    motioncurve degrade finest.json --step 8 -o coarse.json   # writes coarse_s8.json
    motioncurve resample coarse_s8.json --times all -o rec.json
    motioncurve eval rec.json walk.json

Settings resolve as flag > config file (``--config`` or
``$MOTIONCURVE_CONFIG``) > built-in default.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io as mio
from .analysis import ANALYZE_STEPS, SWEEP_RATIOS, bridged_errors, control_ratio_table, robustness_sweep
from .degradation import Schedule, degrade_chain, pack_levels
from .errors import DomainError, MotionCurveError
from .fitting import Trajectory, fit_trajectory
from .geometry import eval_chain
from .metrics import evaluate
from .reconstruction import bridge_gaps, build_block_causal_mask, resample_chains
from .synth import KINDS, SynthSpec, add_noise, gen_trajectory, make_frame_mask, sinusoid_fixture

EXIT_OK = 0
EXIT_ERROR = 1


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pick(flag, config_value):
    return config_value if flag is None else flag


def _suffixed(path: str, step: int) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_s{step}{p.suffix or '.json'}")


def _map_joints(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# subcommands ------------------------------------------------------------------


def cmd_synth(args, cfg) -> int:
    base = cfg.synth
    if args.kind is None and base is None:
        raise DomainError("--kind is required (or a 'synth' section in the config)")
    params = dict(base.params) if base is not None and (args.kind in (None, base.kind)) else {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        params[key] = json.loads(value)
    spec = SynthSpec(
        kind=_pick(args.kind, base.kind if base else None),
        T=_pick(args.T, base.T if base else 128),
        K=_pick(args.K, base.K if base else 1),
        fps=_pick(args.fps, base.fps if base else cfg.fps),
        params=params,
        seed=_pick(args.seed, base.seed if base else cfg.seed),
    )
    traj = gen_trajectory(spec)
    if args.noise:
        traj = add_noise(traj, args.noise, spec.seed)
    mio.write_trajectory(traj, args.output)
    return EXIT_OK


def cmd_fit(args, cfg) -> int:
    traj = mio.read_trajectory(args.input)
    chains = fit_trajectory(traj, jobs=args.jobs)
    frames = traj.frame_times()
    residual = max(float(np.max(np.abs(eval_chain(c, frames) - traj.positions[:, k]))) for k, c in enumerate(chains))
    mio.write_chains(chains, args.output, schedule_step=1, fps=traj.fps)
    print(f"interpolation residual: {residual:g}")
    return EXIT_OK


def cmd_degrade(args, cfg) -> int:
    chains, step, fps = mio.read_chains(args.input)
    if step != 1:
        raise DomainError(f"degrade expects a finest chain file (schedule_step 1), got step {step}")
    spf = _pick(args.samples_per_frame, cfg.samples_per_frame)
    if args.pack:
        schedule = Schedule(tuple(_pick(args.schedule, cfg.schedule)))
        mio.write_multilevel(pack_levels(chains, schedule, spf), args.output)
        print(args.output)
        return EXIT_OK
    steps = [args.step] if args.step is not None else _pick(args.schedule, cfg.schedule)
    T = chains[0].n_anchors
    for s in steps:
        if s >= T:
            raise DomainError(f"step s={s} must be smaller than T={T}")
    for s in steps:
        coarse = _map_joints(lambda c: degrade_chain(c, s, spf), chains, args.jobs)
        out = _suffixed(args.output, s)
        mio.write_chains(coarse, out, schedule_step=s, fps=fps)
        print(out)
    return EXIT_OK


def cmd_resample(args, cfg) -> int:
    chains, _, fps = mio.read_chains(args.input)
    fps = _pick(args.fps, fps if fps is not None else cfg.fps)
    t0, t1 = chains[0].t_span
    if args.times == "all":
        times = np.arange(np.ceil(t0), np.floor(t1) + 1.0)
    else:
        times = np.asarray(_float_list(args.times), dtype=float)
    mio.write_trajectory(Trajectory(resample_chains(chains, times), fps), args.output)
    return EXIT_OK


def cmd_bridge(args, cfg) -> int:
    traj = mio.read_trajectory(args.input)
    if args.mask:
        mask = mio.read_frame_mask(args.mask)
    else:
        mask = make_frame_mask(traj.T, args.policy, args.ratio, _pick(args.seed, cfg.seed))
    mio.write_trajectory(bridge_gaps(traj, mask), args.output)
    return EXIT_OK


def cmd_eval(args, cfg) -> int:
    pred = mio.read_trajectory(args.pred)
    gt = mio.read_trajectory(args.gt)
    report = evaluate(pred, gt, root_align=args.root_align)
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    print(text)
    return EXIT_OK


def cmd_analyze(args, cfg) -> int:
    traj = mio.read_trajectory(args.input)
    bad = [s for s in args.steps if not 1 <= s < traj.T]
    if bad:
        raise DomainError(f"steps {bad} must satisfy 1 <= step < T={traj.T}")
    rows = control_ratio_table(traj, args.steps, _pick(args.samples_per_frame, cfg.samples_per_frame), jobs=args.jobs)
    header = ["step", "control_point_ratio", "rmse_m", "accel_err_cm_s2", "max_err_m"]
    mio.write_csv(args.output, header, [[r[h] for h in header] for r in rows])
    return EXIT_OK


def cmd_mask(args, cfg) -> int:
    schedule = Schedule(tuple(_pick(args.schedule, cfg.schedule)))
    mask = build_block_causal_mask(args.T, schedule)
    text = mask.to_csv() if args.format == "csv" else mask.to_json() + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mask_demo(args, cfg) -> int:
    seed = _pick(args.seed, cfg.seed)
    traj = mio.read_trajectory(args.input) if args.input else sinusoid_fixture(T=args.T, fps=cfg.fps)
    T = traj.T
    policies = ["continuous", "random"] if args.policy == "both" else [args.policy]
    prefix = args.output

    mask = make_frame_mask(T, policies[0], args.ratio, seed)
    Path(f"{prefix}_frame_mask.csv").write_text(mio.frame_mask_csv(mask), encoding="utf-8")

    summary = {"T": T, "seed": seed, "n_seeds": args.n_seeds, "ratio": args.ratio, "requested": {}, "sweep": []}
    for policy in policies:
        total, gap = bridged_errors(traj, make_frame_mask(T, policy, args.ratio, seed))
        summary["requested"][policy] = {"rmse_m": total, "gap_rmse_m": gap}

    sweep = []
    for policy in policies:
        sweep += robustness_sweep(traj, policy, args.ratios, seeds=range(seed, seed + args.n_seeds))
    summary["sweep"] = sweep
    mio.write_csv(
        f"{prefix}_errors.csv",
        ["policy", "ratio", "rmse_m", "gap_rmse_m"],
        [[r["policy"], r["ratio"], r["rmse_m"], r["gap_rmse_m"]] for r in sweep],
    )

    if args.attention:
        schedule = Schedule(tuple(_pick(args.schedule, cfg.schedule)))
        attn = build_block_causal_mask(T, schedule)
        Path(f"{prefix}_attention.csv").write_text(attn.to_csv(), encoding="utf-8")
        Path(f"{prefix}_attention.json").write_text(attn.to_json() + "\n", encoding="utf-8")
    Path(f"{prefix}_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary["requested"]))
    return EXIT_OK


# parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motioncurve", description="Bezier multi-level motion representation tools")
    parser.add_argument("--config", help=f"RunConfig JSON (default: ${mio.CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic trajectory file")
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--T", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--fps", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--param", action="append", metavar="KEY=JSON", help="generator parameter, repeatable")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma in meters")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit the finest Bezier chain per joint")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--jobs", type=int, default=1, help="threads across joints")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("degrade", help="degrade a finest chain file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="output path; per-step files get a _s<step> suffix")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--step", type=int)
    g.add_argument("--schedule", type=_int_list)
    p.add_argument("--pack", action="store_true", help="write one multi-level JSON instead of per-step chain files")
    p.add_argument("--samples-per-frame", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("resample", help="evaluate a chain file at frame times")
    p.add_argument("input")
    p.add_argument("--times", default="all", help="'all' or comma-separated frame times")
    p.add_argument("--fps", type=float)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("bridge", help="fill dropped frames from a chain through observed frames")
    p.add_argument("input")
    p.add_argument("--mask", help="frame mask CSV (frame,observed)")
    p.add_argument("--policy", choices=["continuous", "random"], default="continuous")
    p.add_argument("--ratio", type=float, default=0.25)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_bridge)

    p = sub.add_parser("eval", help="MPJPE / accel error / RMSE report")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--root-align", action="store_true", help="subtract joint 0 before MPJPE")
    p.add_argument("-o", "--output", help="report JSON path")
    p.add_argument("--csv", help="one-row CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="approximation error versus control-point ratio")
    p.add_argument("input")
    p.add_argument("--steps", type=_int_list, default=list(ANALYZE_STEPS))
    p.add_argument("--samples-per-frame", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mask", help="dump the block-causal attention mask")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--schedule", type=_int_list)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("mask-demo", help="frame-drop robustness harness")
    p.add_argument("--T", type=int, default=128)
    p.add_argument("--input", help="trajectory file (default: sinusoid fixture of length T)")
    p.add_argument("--policy", choices=["continuous", "random", "both"], default="both")
    p.add_argument("--ratio", type=float, default=0.25)
    p.add_argument("--ratios", type=_float_list, default=list(SWEEP_RATIOS))
    p.add_argument("--seed", type=int)
    p.add_argument("--n-seeds", type=int, default=8, help="sweep rows average over seeds seed..seed+n-1")
    p.add_argument("--schedule", type=_int_list)
    p.add_argument("--attention", action="store_true", help="also dump the attention mask")
    p.add_argument("-o", "--output", required=True, help="output prefix")
    p.set_defaults(func=cmd_mask_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = mio.load_config(args.config)
        return args.func(args, cfg)
    except (MotionCurveError, ValueError, OSError) as exc:
        print(f"motioncurve {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
