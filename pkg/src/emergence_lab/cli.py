"""``emergence-lab`` command line: run, list and check experiments."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .experiments import EXPERIMENTS, run_experiment, verify_manifest

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emergence-lab", description="Emergence and entropy experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--experiment", required=True, help="experiment name (see 'list')")
    run.add_argument("--config", help="flat key=value config file")
    run.add_argument("--seed", type=int, help="seed (overrides 'seed=' in the config)")
    run.add_argument("--out", required=True, help="output directory")
    sub.add_parser("list", help="list experiments")
    chk = sub.add_parser("check", help="re-verify the manifest in an output directory")
    chk.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)

    if args.command == "list":
        width = max(map(len, EXPERIMENTS))
        for name, exp in EXPERIMENTS.items():
            print(f"{name:<{width}}  {exp.claim}")
        return 0

    if args.command == "check":
        try:
            ok, problems = verify_manifest(args.out)
        except (OSError, ValueError, KeyError) as exc:
            print(f"emergence-lab: cannot read manifest in {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
        for line in problems:
            print(line)
        print("manifest ok" if ok else f"{len(problems)} problem(s)")
        return 0 if ok else EXIT_FAILED

    if args.experiment not in EXPERIMENTS:
        parser.error(f"unknown experiment {args.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"emergence-lab: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    except ValueError:
        parser.error(f"seed must be an integer, got {cfg['seed']!r}")
    if seed < 0 or seed >= 1 << 64:
        parser.error("seed must be an unsigned 64-bit integer")
    try:
        manifest = run_experiment(args.experiment, cfg, seed, args.out)
    except ConfigError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"emergence-lab: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO

    for c in manifest["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  {c['detail']}")
    failed = sum(not c["passed"] for c in manifest["checks"])
    print(f"{args.experiment}: {len(manifest['checks']) - failed}/{len(manifest['checks'])} checks passed; outputs in {args.out}")
    return EXIT_FAILED if failed else 0


if __name__ == "__main__":
    sys.exit(main())
