"""Fuzz the ratio solver against brute-force enumeration over many seeds."""

import argparse
import time

from sysindex.cli import oracle_check


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--max-len", type=int, default=12)
    parser.add_argument("--seeds", type=int, default=20)
    args = parser.parse_args()

    total = bad = 0
    start = time.perf_counter()
    for seed in range(args.seeds):
        cases, mismatches = oracle_check(args.n, args.max_len, seed)
        total += cases
        bad += mismatches
        if mismatches:
            print(f"seed {seed}: {mismatches} mismatches")
    print(f"{total} cases, {bad} mismatches, {time.perf_counter() - start:.1f} s")
    raise SystemExit(3 if bad else 0)


if __name__ == "__main__":
    main()
