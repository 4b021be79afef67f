#!/usr/bin/env python3
"""Write the area-function and coefficient-histogram figures for a config.

    python3 scripts/make_plots.py [--config configs/default.yaml] [--output-dir DIR]
"""
import argparse
from pathlib import Path

from vhardy import SuiteConfig
from vhardy.plots import write_plots
from vhardy.suites import make_context


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=Path(__file__).resolve().parents[1] / "configs" / "default.yaml")
    ap.add_argument("--output-dir", default=None)
    args = ap.parse_args()
    cfg = SuiteConfig.load(args.config).override(output_dir=args.output_dir)
    out = cfg.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    for path in write_plots(make_context(cfg), out):
        print(path)


if __name__ == "__main__":
    main()
