"""Reproduce the six-row benchmark and compare with the reference values.

    python3 scripts/run_benchmark.py --seeds 0 1 2 --out results/
"""

import argparse
import json
from pathlib import Path

import numpy as np

from sysindex.bench import REFERENCE_VALUES, BenchConfig, bench_table1, format_table


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, nargs="+", default=[0])
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--pulse-phase", type=float, default=0.5)
    parser.add_argument("--exclude-calibration", action="store_true")
    parser.add_argument("--out", type=Path)
    args = parser.parse_args()

    reports = []
    for seed in args.seeds:
        cfg = BenchConfig(dt=args.dt, seed=seed, pulse_phase=args.pulse_phase,
                          exclude_calibration=args.exclude_calibration)
        report = bench_table1(cfg)
        reports.append(report)
        print(f"seed {seed}")
        print(format_table(report))
        print()
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            report.write_json(args.out / f"bench_seed{seed}.json")

    print("relative deviation from reference values (mean over seeds)")
    for i, row in enumerate(reports[0].rows):
        ref = REFERENCE_VALUES[(row.system, row.index)]
        got = np.array([[r.rows[i].ks, r.rows[i].avg_terminal, r.rows[i].ffo_terminal]
                        for r in reports]).mean(axis=0)
        dev = 100 * (got - np.array(ref)) / np.abs(ref)
        print(f"  {row.system} {row.index}:  Ks {dev[0]:+6.1f}%  AVG {dev[1]:+6.1f}%  "
              f"FFO {dev[2]:+6.1f}%")
    if args.out:
        summary = {"seeds": args.seeds, "reports": [r.to_dict() for r in reports]}
        (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
