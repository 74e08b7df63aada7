"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 oracle mismatch or bound violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .bench import BenchConfig, bench_table1, format_table
from .core import CONTINUOUS, DISCRETE, IndexKind
from .csvio import read_trajectory_csv, write_trajectory_csv
from .errors import BoundViolation, SysIndexError
from .estimators import (ALL_KINDS, EstimateSeries, OnlineEstimator, avg_estimates,
                         bounds_report, calibrate_ks, estimate_series, ffo_estimates,
                         param_free_estimates)
from .ffop import MAX, MIN, brute_force_oracle, random_signal, results_agree, solve
from .sim import benchmark_input, builtin_system, simulate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("SYSINDEX_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SYSINDEX_SEED must be an integer, got {raw!r}") from None


def _num(x):
    """JSON-safe float: NaN and infinities become strings."""
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else str(x)


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _kinds(arg: str):
    return ALL_KINDS if arg == "all" else (IndexKind(arg),)


def _parse_ks(raw: str):
    if raw == "auto":
        return "auto"
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"--ks must be a number or 'auto', got {raw!r}") from None
    if not value >= 0:
        raise UsageError("--ks must be nonnegative")
    return value


def _online_series(traj, ks, kinds) -> EstimateSeries:
    """Fold the streaming estimator; used when realization breaks are present."""
    est = OnlineEstimator(ks, traj.time_kind)
    starts = set(traj.breaks)
    n = len(traj)
    out = {name: {k: np.full(n, np.nan) for k in kinds} for name in ("avg", "ffo", "pf")}
    for i, s in enumerate(traj):
        if i in starts:
            est.new_realization()
        est.update(s)
        readings = {"ffo": est.ffo(), "pf": est.param_free()}
        if est.avg_valid:
            readings["avg"] = est.avg()
        for name, r in readings.items():
            for k in kinds:
                v = r.get(k)
                if v is not None:
                    out[name][k][i] = v
    return EstimateSeries(traj.t, out["avg"], out["ffo"], out["pf"])


def cmd_simulate(args) -> int:
    spec = benchmark_input(args.system, args.seed, args.noise_amp, args.pulse_phase)
    traj = simulate(builtin_system(args.system), spec, args.t_end, args.dt, args.decimation)
    write_trajectory_csv(traj, args.out)
    print(f"wrote {len(traj)} samples to {args.out}")
    return EXIT_OK


def _load(args):
    return read_trajectory_csv(args.input, DISCRETE if args.discrete else CONTINUOUS)


def _calibration_payload(cal) -> dict:
    return {"ks": {k: _num(v) for k, v in cal.as_dict().items()},
            "raw_ks": {k: _num(v) for k, v in cal.raw.items()},
            "window": list(cal.window),
            "mean_estimates": {k.value: _num(cal.mean_estimates.get(k)) for k in ALL_KINDS
                               if cal.mean_estimates.get(k) is not None}}


def cmd_calibrate(args) -> int:
    traj = _load(args)
    cal = calibrate_ks(traj, args.calib_end)
    payload = _calibration_payload(cal)
    print(json.dumps(payload["ks"]))
    if args.report:
        _write_json(args.report, payload)
    return EXIT_OK


def cmd_estimate(args) -> int:
    traj = _load(args)
    kinds = _kinds(args.index)
    ks = _parse_ks(args.ks)
    payload = {"input": str(args.input), "index": args.index}
    if ks == "auto":
        cal = calibrate_ks(traj, args.calib_end, kinds)
        payload["calibration"] = _calibration_payload(cal)
        ks = cal
    else:
        payload["ks"] = ks
    if args.exclude_calibration:
        start = len(traj.before(float(traj.t[0]) + args.calib_end))
        if start >= len(traj):
            raise UsageError("--exclude-calibration leaves no samples")
        traj = type(traj)(traj.t[start:], traj.u[start:], traj.y[start:], traj.time_kind,
                          tuple(b - start for b in traj.breaks if b > start))
    ffo = ffo_estimates(traj, ks, kinds, args.zero_tol)
    pf = param_free_estimates(traj, kinds, args.zero_tol)
    avg = None if traj.breaks else avg_estimates(traj, kinds)
    terminal = {}
    for k in kinds:
        terminal[k.value] = {"avg": _num(avg.get(k)) if avg else None,
                             "ffo": _num(ffo.get(k)), "param_free": _num(pf.get(k)),
                             "ffo_witness_t": _num(ffo.witnesses[k])}
    payload["terminal"] = terminal
    if avg is not None:
        rep = bounds_report(avg, pf, ffo, strict=False)
        payload["bounds"] = {"ok": rep.ok, "l2g_sq_lower": _num(rep.l2g_sq_lower),
                             "ifp_upper": _num(rep.ifp_upper), "ofp_upper": _num(rep.ofp_upper)}
    print(json.dumps(terminal))
    if args.report:
        _write_json(args.report, payload)
    if args.series:
        series = _online_series(traj, ks, kinds) if traj.breaks else \
            estimate_series(traj, ks, kinds, args.zero_tol)
        _write_series(series, kinds, args.series)
    if avg is not None and not payload["bounds"]["ok"]:
        raise BoundViolation("estimate ordering violated")
    return EXIT_OK


def _write_series(series: EstimateSeries, kinds, path) -> None:
    cols = [series.t]
    header = ["t"]
    for k in kinds:
        for name, table in (("avg", series.avg), ("ffo", series.ffo), ("pf", series.param_free)):
            header.append(f"{name}_{k.value}")
            cols.append(table[k])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def cmd_bench(args) -> int:
    config = BenchConfig(dt=args.dt, seed=args.seed, t_end=args.t_end, calib_end=args.calib_end,
                         noise_amp=args.noise_amp, pulse_phase=args.pulse_phase,
                         exclude_calibration=args.exclude_calibration)
    report = bench_table1(config)
    print(format_table(report))
    if args.report:
        report.write_json(args.report)
    if args.csv:
        report.write_csv(args.csv)
    return EXIT_OK


def oracle_check(n: int, max_len: int, seed: int) -> tuple[int, int]:
    """Fuzz the solver against exhaustive enumeration; returns (cases, mismatches)."""
    rng = np.random.default_rng(seed)
    cases = mismatches = 0
    for _ in range(n):
        sig = random_signal(rng, max_len)
        for direction in (MAX, MIN):
            cases += 1
            try:
                got = solve(sig, direction)
            except SysIndexError as exc:
                got = type(exc)
            try:
                want = brute_force_oracle(sig, direction, cap=max(64, max_len))
            except SysIndexError as exc:
                want = type(exc)
            if isinstance(got, type) or isinstance(want, type):
                ok = got is want
            else:
                ok = results_agree(got, want)
            mismatches += not ok
    return cases, mismatches


def cmd_oracle_check(args) -> int:
    start = time.perf_counter()
    cases, bad = oracle_check(args.n, args.max_len, args.seed)
    print(f"{cases} cases, {bad} mismatches, {time.perf_counter() - start:.2f} s")
    return EXIT_MISMATCH if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    p = _Parser(prog="sysindex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a benchmark plant to CSV")
    s.add_argument("--system", required=True, choices=["H1", "H2", "H3", "H4"])
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--t-end", type=float, default=100.0)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--noise-amp", type=float, default=0.01)
    s.add_argument("--pulse-phase", type=float, default=0.5,
                   help="square-wave phase offset; 0.5 starts low (default), 0 starts high")
    s.add_argument("--decimation", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    def data_args(q):
        q.add_argument("--in", dest="input", required=True)
        q.add_argument("--discrete", action="store_true", help="treat t as a step index")
        q.add_argument("--calib-end", type=float, default=10.0)

    e = sub.add_parser("estimate", help="estimate indices from a trajectory CSV")
    data_args(e)
    e.add_argument("--index", choices=["l2g", "ifp", "ofp", "all"], default="all")
    e.add_argument("--ks", default="auto", help="nonnegative number or 'auto'")
    e.add_argument("--exclude-calibration", action="store_true")
    e.add_argument("--zero-tol", type=float, default=1e-12)
    e.add_argument("--series")
    e.add_argument("--report")
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("calibrate", help="learn Ks from the leading window")
    data_args(c)
    c.add_argument("--report")
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("bench", help="run the six-row benchmark")
    b.add_argument("--report")
    b.add_argument("--csv")
    b.add_argument("--dt", type=float, default=1e-3)
    b.add_argument("--seed", type=int, default=seed)
    b.add_argument("--t-end", type=float, default=100.0)
    b.add_argument("--calib-end", type=float, default=10.0)
    b.add_argument("--noise-amp", type=float, default=0.01)
    b.add_argument("--pulse-phase", type=float, default=0.5)
    b.add_argument("--exclude-calibration", action="store_true")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle-check", help="fuzz the ratio solver against brute force")
    o.add_argument("--n", type=int, default=1000)
    o.add_argument("--max-len", type=int, default=12)
    o.add_argument("--seed", type=int, default=seed)
    o.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (SysIndexError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
