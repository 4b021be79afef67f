#!/usr/bin/env python3
"""Run the default certification suites and print a per-check table.

    python3 scripts/run_default_suite.py [--config configs/default.yaml] [--output-dir DIR]
"""
import argparse
import sys
import time
from pathlib import Path

from vhardy import SuiteConfig, run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=Path(__file__).resolve().parents[1] / "configs" / "default.yaml")
    ap.add_argument("--output-dir", default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    cfg = SuiteConfig.load(args.config).override(output_dir=args.output_dir, seed=args.seed)
    start = time.perf_counter()
    result = run_suite(cfg)
    for suite, report in result.reports.items():
        for c in report["checks"]:
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['id']:<45} {result.timings[suite]:7.1f}s")
    print(f"\n{len(result.failing)} failing; {time.perf_counter() - start:.1f}s total; "
          f"reports in {result.output_dir}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
