#!/usr/bin/env python3
"""Run the bundled default experiment config and emit the report."""

import sys
from pathlib import Path

from polysieve.cli import ExperimentConfig, emit_report, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "runs" / "default"
    cfg = ExperimentConfig.load(ROOT / "configs" / "default.json")
    summary = run_experiment(cfg, out)
    print(f"wrote {summary['records']} records to {summary['out_dir']}")
    print(emit_report(out))
    return 1 if summary["failed_required"] else 0


if __name__ == "__main__":
    sys.exit(main())
