"""Run every CLI pipeline with one configuration and print a pass/fail table.

    python3 scripts/run_all.py --out out/all [--config cfg.json]
"""

import argparse
import json
import logging
from pathlib import Path

from capjackson import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--out", default="out/all")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    base = cli.ExperimentConfig.load(args.config) if args.config else cli.ExperimentConfig()
    status = {}
    for command in cli.COMMANDS:
        cfg = cli.ExperimentConfig.from_dict(json.loads(base.to_json()))
        cfg.out = str(Path(args.out) / command)
        status[command] = cli.execute(cfg, command)
    names = {0: "pass", 1: "check failed", 2: "config error", 3: "non-convergence"}
    for command, rc in status.items():
        print(f"{command:18s} exit {rc} ({names[rc]})")
    return max(status.values())


if __name__ == "__main__":
    raise SystemExit(main())
