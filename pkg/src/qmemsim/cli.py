"""Command-line entry point.

One verb per experiment kind (analyze, barrier, dynamics, spectrum) plus
``report``. A JSON config supplies defaults; explicit CLI flags override it.
Exit codes: 0 success, 1 config error, 2 completed with refused sub-jobs.
"""
from __future__ import annotations

import argparse
import json
import sys

from .harness import ExperimentConfig, report, run_experiment


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--seed", type=int, default=None, help="master seed (default: 0)")
    parser.add_argument("--out", default=None, help="results CSV path")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker processes for trials (default: 1)")
    parser.add_argument("--family", default=None,
                        help="model family: ising1d, ising2d, surface2d, toric3d "
                             "(default: surface2d)")
    parser.add_argument("--sizes", type=_int_list, default=None,
                        help="comma-separated linear sizes (default: 2,3)")
    parser.add_argument("--gauge-only", action="store_true", default=None,
                        help="toric3d variant without star checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmemsim",
        description="Memory-model experiments: code properties, energy barriers, "
                    "thermal lifetimes, and spectra.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="code properties (n, k, distance, validation)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)

    p = sub.add_parser("barrier", help="energy barriers per size",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    p.add_argument("--method", choices=["exact", "annealed", "exhaustive"], default=None,
                   help="barrier search method (default: exact)")
    p.add_argument("--target", choices=["X", "Z", "both"], default=None,
                   help="logical sector to target (default: X)")

    p = sub.add_parser("dynamics", help="finite-temperature lifetime trials",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    p.add_argument("--betas", type=_float_list, default=None,
                   help="comma-separated inverse temperatures (default: 1.0)")
    p.add_argument("--trials", type=int, default=None, help="trials per grid point (default: 10)")
    p.add_argument("--t-max", type=int, default=None, help="sweep budget per trial (default: 1000)")
    p.add_argument("--check-interval", type=int, default=None,
                   help="sweeps between decoded read-outs (default: 1)")
    p.add_argument("--decoder", default=None,
                   help="decoder id: majority, ml, greedy, match2d "
                        "(default: family-appropriate)")
    p.add_argument("--tracked", default=None,
                   help="comma-separated tracked observables, e.g. Xbar_ec,Zbar_ec "
                        "(default: family-appropriate)")

    p = sub.add_parser("spectrum", help="ground-space splitting under a field",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    p.add_argument("--direction", choices=["X", "Z"], default=None,
                   help="field direction (default: Z)")
    p.add_argument("--epsilons", type=_float_list, default=None,
                   help="comma-separated field strengths (default: 0.0,0.1)")

    p = sub.add_parser("report", help="summarize a results CSV",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("results", help="results CSV path")
    p.add_argument("--json", dest="json_out", default=None, help="write JSON summary here")

    return parser


_FLAG_TO_FIELD = {
    "seed": "master_seed",
    "out": "out",
    "threads": "threads",
    "family": "family",
    "sizes": "sizes",
    "gauge_only": "gauge_only",
    "betas": "betas",
    "trials": "trials",
    "t_max": "t_max",
    "check_interval": "check_interval",
    "decoder": "decoder",
    "method": "method",
    "target": "target",
    "direction": "direction",
    "epsilons": "epsilons",
}


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    data["kind"] = args.command
    for flag, fieldname in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[fieldname] = value
    if isinstance(data.get("tracked"), str):
        data["tracked"] = [t for t in data["tracked"].split(",") if t]
    elif getattr(args, "tracked", None):
        data["tracked"] = [t for t in args.tracked.split(",") if t]
    return ExperimentConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "report":
        rep = report(args.results)
        sys.stdout.write(rep.text)
        if args.json_out:
            with open(args.json_out, "w") as fh:
                json.dump(rep.data, fh, indent=2, sort_keys=True)
        return 0

    try:
        cfg = _config_from_args(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    result = run_experiment(cfg)
    print(json.dumps(result.summary, sort_keys=True))
    if cfg.out:
        print(f"wrote {len(result.rows)} rows to {cfg.out}")
    return 2 if result.summary["refusals"] else 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
