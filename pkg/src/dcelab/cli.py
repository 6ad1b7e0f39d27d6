"""Command-line entry point: ``dce <verb> [action] --scenario FILE | --preset NAME``."""

from __future__ import annotations

import argparse
import sys

from .errors import DceError
from .scenarios import MIRROR_ACTIONS, VERBS, ScenarioError, load_preset, load_scenario, preset_names, run_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ALL_FAILED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dce", description="Dynamical Casimir effect scenarios.")
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("presets", help="list bundled presets")
    for verb in VERBS:
        p = sub.add_parser(verb, help=f"run a {verb} scenario")
        if verb == "mirror":
            p.add_argument("action", choices=MIRROR_ACTIONS)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", metavar="FILE", help="scenario JSON file")
        src.add_argument("--preset", metavar="NAME", help="bundled preset name")
        p.add_argument("--out", default=".", metavar="DIR", help="output directory (default: current)")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for sweeps")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "presets":
        for name in preset_names():
            print(name)
        return EXIT_OK
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    action = getattr(args, "action", None)
    try:
        if args.scenario:
            sc = load_scenario(args.scenario, args.verb, action)
        else:
            sc = load_preset(args.preset, args.verb, action)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        outcome = run_scenario(sc, args.out, args.jobs)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALL_FAILED
    for f in outcome.report["failures"]:
        print(f"point {f['index']} failed: {f['error']}", file=sys.stderr)
    for path in outcome.files:
        print(path)
    if outcome.n_ok == 0:
        return EXIT_ALL_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
