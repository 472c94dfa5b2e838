"""``plot`` command: one figure per invocation from a results CSV."""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, render
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a report figure from a qmemsim results CSV.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--kind", required=True, choices=KINDS, help="figure kind")
    parser.add_argument("--in", dest="input_path", required=True, help="results CSV")
    parser.add_argument("--out", dest="output_path", required=True,
                        help="output image (.svg default, .png supported)")
    parser.add_argument("--yscale", choices=["log", "linear"], default=None,
                        help="y-axis scale (default: per-kind)")
    parser.add_argument("--observable", default=None,
                        help="dynamics observable for lifetime_vs_beta "
                             "(default: memory_lifetime)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(input_path=args.input_path, kind=args.kind,
                        output_path=args.output_path, yscale=args.yscale,
                        observable=args.observable)
        summary = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {summary.output_path} ({len(summary.series)} series)")
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
