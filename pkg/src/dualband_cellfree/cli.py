"""Command line front end: single runs, Monte Carlo sweeps and beam maps."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .beamforming import beam_gain_map, multicast_beam_heuristic
from .errors import ConfigurationError
from .pipeline import RealizationContext, run_realization, sweep_and_emit
from .scenario import derive_seed, load_config


def _parse_overrides(pairs):
    overrides = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _parse_g_axis(text):
    """Group size axis: 'a:b' inclusive range or comma-separated list."""
    if text is None:
        return None
    if ":" in text:
        lo, hi = text.split(":", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ConfigurationError(f"empty group size range {text!r}")
        return list(range(lo, hi + 1))
    return [int(v) for v in text.split(",")]


def _parse_list(text, cast):
    if text is None:
        return None
    return [cast(v) for v in text.split(",")]


def _build_config(args):
    overrides = _parse_overrides(getattr(args, "set", None))
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "realizations", None) is not None:
        overrides["realizations"] = args.realizations
    return load_config(args.config, overrides)


def _cmd_run(args):
    config = _build_config(args)
    seed = derive_seed(config.master_seed, args.realization)
    result = run_realization(config, seed, mode=args.mode, tdma=args.tdma,
                             g=args.g)
    payload = {
        "seed": result.seed,
        "mode": result.mode,
        "tdma": result.tdma,
        "g_star": result.g_star,
        "gamma_star": result.gamma_star,
        "per_user_access_bps": result.per_user_access_bps.tolist(),
        "per_user_fronthaul_bps": result.per_user_fronthaul_bps.tolist(),
        "per_user_end_to_end_bps": result.per_user_end_to_end_bps.tolist(),
        "t": result.schedule.t.tolist() if result.schedule is not None else None,
        "groups": [members.tolist() for members in result.groups],
        "history": result.history,
        "meta": result.meta,
    }
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_sweep(args):
    config = _build_config(args)
    result = sweep_and_emit(
        config, args.out, mode=args.mode, tdma=args.tdma,
        g_values=_parse_g_axis(args.sweep_g),
        bw_values=_parse_list(args.sweep_bw, float),
        m_values=_parse_list(args.sweep_m, int),
        include_fiber=not args.no_fiber, workers=args.workers,
        basename=args.basename)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows) "
          f"and {result.json_path}")
    return 0


def _cmd_beammap(args):
    config = _build_config(args)
    seed = derive_seed(config.master_seed, args.realization)
    ctx = RealizationContext(config, seed, args.mode)
    _, beam_groups = ctx._grouping(args.g)
    group = beam_groups[args.user]
    solution = multicast_beam_heuristic(group, ctx.fronthaul, ctx.codebook,
                                        ctx.powers.rho_fh)

    half = config.area_side_m / 2.0
    axis = np.linspace(-half, half, args.grid_n)
    xx, yy = np.meshgrid(axis, axis)
    points = np.column_stack([xx.ravel(), yy.ravel()])
    gains = beam_gain_map(solution.beam, points, ctx.placement.cpu_position)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    map_path = out / f"{args.basename}.csv"
    with open(map_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "gain"])
        for (x, y), gain in zip(points, gains):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(gain))])

    markers_path = out / f"{args.basename}_markers.csv"
    in_group = set(int(m) for m in group)
    cpu = ctx.placement.cpu_position
    ap_gains = beam_gain_map(solution.beam, ctx.placement.ap_positions, cpu)
    ue_gains = beam_gain_map(solution.beam, ctx.placement.ue_positions, cpu)
    with open(markers_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "index", "x", "y", "in_group", "gain"])
        writer.writerow(["cpu", 0, repr(float(cpu[0])), repr(float(cpu[1])),
                         0, repr(0.0)])
        for m, (x, y) in enumerate(ctx.placement.ap_positions):
            writer.writerow(["ap", m, repr(float(x)), repr(float(y)),
                             int(m in in_group), repr(float(ap_gains[m]))])
        for k, (x, y) in enumerate(ctx.placement.ue_positions):
            writer.writerow(["ue", k, repr(float(x)), repr(float(y)),
                             int(k == args.user), repr(float(ue_gains[k]))])
    print(f"wrote {map_path} and {markers_path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dualband-cellfree",
        description="Cell-free massive MIMO with wireless dual-band fronthaul: "
                    "simulation runs, sweeps and beam gain maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help="flat JSON file of configuration fields")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration field")
        p.add_argument("--mode", default="separate",
                       choices=["separate", "mixed", "fiber"])
        p.add_argument("--tdma", default="approach2",
                       choices=["approach1", "approach2"])
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides config)")

    run = sub.add_parser("run", help="single realization, JSON to stdout")
    common(run)
    run.add_argument("--realization", type=int, default=0,
                     help="realization index used to derive the seed")
    run.add_argument("--g", type=int, default=None,
                     help="fixed group size (default: sum-rate iteration)")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="Monte Carlo sweep to CSV + JSON")
    common(sweep)
    sweep.add_argument("--sweep-g", default=None, metavar="A:B",
                       help="group size axis, inclusive range a:b or list")
    sweep.add_argument("--sweep-bw", default=None, metavar="LIST",
                       help="comma-separated fronthaul bandwidths in Hz")
    sweep.add_argument("--sweep-m", default=None, metavar="LIST",
                       help="comma-separated AP counts")
    sweep.add_argument("--realizations", type=int, default=None)
    sweep.add_argument("--no-fiber", action="store_true",
                       help="skip the fiber baseline rows")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--basename", default="sweep")
    sweep.set_defaults(func=_cmd_sweep)

    beammap = sub.add_parser("beammap", help="beam gain map over the area")
    common(beammap)
    beammap.add_argument("--realization", type=int, default=0)
    beammap.add_argument("--g", type=int, default=12, help="group size")
    beammap.add_argument("--user", type=int, default=0,
                         help="user whose group beam is mapped")
    beammap.add_argument("--grid-n", type=int, default=120,
                         help="grid resolution per axis")
    beammap.add_argument("--out", required=True, help="output directory")
    beammap.add_argument("--basename", default="beammap")
    beammap.set_defaults(func=_cmd_beammap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
