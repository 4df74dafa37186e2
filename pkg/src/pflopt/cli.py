"""Command-line entry point: ``pflopt run|preset|verify``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import PRESETS, ExperimentConfig, preset, run_experiment
from .verify import verify_suite


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pflopt",
        description="Personalized federated learning optimization workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run an experiment from a JSON config")
    run_parser.add_argument("--config", required=True, help="path to the JSON config")
    run_parser.add_argument("--workers", type=int, default=1,
                            help="concurrent (optimizer, seed) runs")
    run_parser.add_argument("--out", default=None,
                            help="output directory (default: config run.out_dir, "
                                 "or $PFLOPT_OUT if set)")

    preset_parser = sub.add_parser("preset", help="emit a preset experiment config")
    preset_parser.add_argument("name", choices=PRESETS)
    preset_parser.add_argument("--emit", required=True, help="path to write the JSON config")
    preset_parser.add_argument("--desk", action="store_true",
                               help="desk-scale sizes instead of the full experiment")

    sub.add_parser("verify", help="run the numerical oracle self-checks")

    args = parser.parse_args(argv)

    if args.command == "run":
        config = ExperimentConfig.from_json(args.config)
        out = args.out or os.environ.get("PFLOPT_OUT")
        manifest = run_experiment(config, workers=args.workers, out_dir=out)
        failed = [r for r in manifest["runs"] if r["status"] != "ok"]
        for run in failed:
            print(f"FAILED {run['label']} {run['optimizer']} seed={run['seed']}: "
                  f"{run['error']}", file=sys.stderr)
        print(f"{len(manifest['runs']) - len(failed)}/{len(manifest['runs'])} runs ok; "
              f"{len(manifest['aggregates'])} aggregate CSVs written")
        return 1 if failed else 0

    if args.command == "preset":
        config = preset(args.name, desk=args.desk)
        with open(args.emit, "w", encoding="utf-8") as fh:
            json.dump(config.to_dict(), fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.name} config to {args.emit}")
        return 0

    # verify
    return 0 if verify_suite(verbose=True) else 1


if __name__ == "__main__":
    raise SystemExit(main())
