#!/usr/bin/env python3
"""Run every example experiment config and summarize the exit codes.

The broken convergence config is expected to exit 2 (it deliberately
violates the second-order condition); everything else must exit 0.
"""

import sys
from pathlib import Path

from genalpha.cli import main as cli_main

EXPECTED = {"ode_convergence_broken.ini": 2}


def run() -> int:
    root = Path(__file__).resolve().parent.parent
    configs = sorted((root / "configs").glob("*.ini"))
    if not configs:
        print("no configs found", file=sys.stderr)
        return 1
    failures = 0
    for config in configs:
        out = root / "out" / config.stem
        code = cli_main(["run", str(config), "--out", str(out), "--quiet"])
        expected = EXPECTED.get(config.name, 0)
        status = "ok" if code == expected else "UNEXPECTED"
        if code != expected:
            failures += 1
        print(f"{config.name:32s} exit={code} (expected {expected}) {status}")
    print(f"\n{len(configs) - failures}/{len(configs)} configs behaved as expected")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(run())
