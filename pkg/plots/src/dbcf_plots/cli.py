"""Command line front end: render figures from sweep and beam map CSVs."""

from __future__ import annotations

import argparse
import json
import sys

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render


def _spec_from_json(path) -> FigureSpec:
    with open(path) as fh:
        payload = json.load(fh)
    known = {"kind", "inputs", "output", "title", "xlabel", "ylabel", "auto_g"}
    unknown = set(payload) - known
    if unknown:
        raise SchemaError(f"unknown figure spec fields {sorted(unknown)}")
    return FigureSpec(**payload)


def _cmd_plot(args):
    path = render(_spec_from_json(args.spec))
    print(f"wrote {path}")
    return 0


def _cmd_kind(args):
    inputs = list(args.csv)
    if getattr(args, "markers", None):
        inputs.append(args.markers)
    spec = FigureSpec(kind=args.kind, inputs=inputs, output=args.out,
                      title=args.title, xlabel=args.xlabel,
                      ylabel=args.ylabel,
                      auto_g=getattr(args, "auto_g", False))
    path = render(spec)
    print(f"wrote {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dbcf-plots",
        description="Render sweep CSVs and beam gain maps into figures.")
    sub = parser.add_subparsers(dest="command", required=True)

    plot = sub.add_parser("plot", help="render from a JSON figure spec")
    plot.add_argument("--spec", required=True,
                      help="JSON file with FigureSpec fields")
    plot.set_defaults(func=_cmd_plot)

    def common(p):
        p.add_argument("--csv", action="append", required=True,
                       help="input CSV (repeatable)")
        p.add_argument("--out", required=True, help="output image path")
        p.add_argument("--title", default=None)
        p.add_argument("--xlabel", default=None)
        p.add_argument("--ylabel", default=None)

    for kind in FIGURE_KINDS:
        name = kind.replace("_", "-")
        p = sub.add_parser(name, help=f"render a {kind} figure")
        common(p)
        if kind == "beam_heatmap":
            p.add_argument("--markers", default=None,
                           help="markers CSV with AP/UE/CPU positions")
        if kind == "rates_vs_m":
            p.add_argument("--auto-g", action="store_true", dest="auto_g",
                           help="collapse per-realization group sizes")
        p.set_defaults(func=_cmd_kind, kind=kind)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
