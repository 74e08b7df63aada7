"""Benchmark harness: terminal and time-averaged errors of the AVG and FFO estimators."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import IndexKind, Trajectory
from .errors import EmptySeries
from .estimators import calibrate_ks, estimate_series
from .sim import benchmark_input, builtin_system, simulate

# (system, index, optimal value); L2G optima are squared gains
BENCH_ROWS = (
    ("H1", IndexKind.L2G, 17.575),
    ("H1", IndexKind.IFP, -8.067),
    ("H2", IndexKind.IFP, -2.017),
    ("H2", IndexKind.OFP, -2.630),
    ("H3", IndexKind.L2G, 1.000),
    ("H4", IndexKind.OFP, 0.750),
)

# reference learned Ks and terminal AVG / FFO values, in the same units as above
REFERENCE_VALUES = {
    ("H1", "l2g"): (2165.0, 7.933, 16.931),
    ("H1", "ifp"): (322.5, -2.629, -3.850),
    ("H2", "ifp"): (35.06, -0.955, -1.276),
    ("H2", "ofp"): (6.634, -0.983, -2.231),
    ("H3", "l2g"): (12.37, 0.249, 0.627),
    ("H4", "ofp"): (2.876, 0.850, 0.799),
}


@dataclass(frozen=True)
class Metrics:
    aee: float
    maee: float


def compute_metrics(t, estimates, optimal: float, window_end: float | None = None) -> Metrics:
    """Terminal absolute error and its trapezoidal time average.

    Samples where the estimate is undefined (NaN) are left out; the average is
    taken over the span of the remaining samples before ``window_end``.
    """
    t = np.asarray(t, dtype=float)
    est = np.asarray(estimates, dtype=float)
    keep = ~np.isnan(est)
    if window_end is not None:
        keep &= t < window_end
    t, est = t[keep], est[keep]
    if t.size == 0:
        raise EmptySeries("no defined estimates in the window")
    err = np.abs(optimal - est)
    span = t[-1] - t[0]
    maee = float(np.trapezoid(err, t) / span) if span > 0 else float(err[-1])
    return Metrics(float(err[-1]), maee)


def improvement_pct(baseline: float, ours: float) -> float | None:
    return 100.0 * (baseline - ours) / baseline if baseline > 0 else None


@dataclass(frozen=True)
class BenchConfig:
    dt: float = 1e-3
    seed: int = 0
    t_end: float = 100.0
    calib_end: float = 10.0
    noise_amp: float = 0.01
    # the benchmark square wave starts low; see README
    pulse_phase: float = 0.5
    exclude_calibration: bool = False


@dataclass(frozen=True)
class BenchRow:
    system: str
    index: str
    optimal: float
    ks: float
    avg_terminal: float
    ffo_terminal: float
    aee_avg: float
    aee_ffo: float
    aee_improvement_pct: float | None
    maee_avg: float
    maee_ffo: float
    maee_improvement_pct: float | None


@dataclass
class RunReport:
    config: dict
    rows: list[BenchRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"config": dict(self.config), "rows": [asdict(r) for r in self.rows]}

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    def write_csv(self, path) -> None:
        names = list(BenchRow.__dataclass_fields__)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for r in self.rows:
                w.writerow([_cell(getattr(r, n)) for n in names])


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def evaluate_row(traj: Trajectory, system: str, kind: IndexKind, optimal: float,
                 calib_end: float = 10.0, exclude_calibration: bool = False) -> BenchRow:
    """Calibrate Ks on the leading window, stream both estimators and score them."""
    kind = IndexKind(kind)
    cal = calibrate_ks(traj, calib_end, kinds=[kind])
    stream = traj
    if exclude_calibration:
        start = len(traj.before(float(traj.t[0]) + calib_end))
        stream = Trajectory(traj.t[start:], traj.u[start:], traj.y[start:], traj.time_kind)
    series = estimate_series(stream, cal, kinds=[kind])
    m_avg = compute_metrics(series.t, series.avg[kind], optimal)
    m_ffo = compute_metrics(series.t, series.ffo[kind], optimal)
    return BenchRow(system, kind.value, optimal, cal.for_kind(kind),
                    float(series.avg[kind][-1]), float(series.ffo[kind][-1]),
                    m_avg.aee, m_ffo.aee, improvement_pct(m_avg.aee, m_ffo.aee),
                    m_avg.maee, m_ffo.maee, improvement_pct(m_avg.maee, m_ffo.maee))


def bench_table1(config: BenchConfig = BenchConfig()) -> RunReport:
    """Simulate each benchmark plant once and score every reference (system, index) row."""
    report = RunReport(asdict(config))
    trajs = {}
    for system, kind, optimal in BENCH_ROWS:
        if system not in trajs:
            spec = benchmark_input(system, config.seed, config.noise_amp, config.pulse_phase)
            trajs[system] = simulate(builtin_system(system), spec, config.t_end, config.dt)
        report.rows.append(evaluate_row(trajs[system], system, kind, optimal,
                                        config.calib_end, config.exclude_calibration))
    return report


def format_table(report: RunReport) -> str:
    head = f"{'system':<7}{'index':<6}{'optimal':>9}{'Ks':>11}{'AVG':>10}{'FFO':>10}" \
           f"{'%AEE':>8}{'%MAEE':>8}"
    lines = [head]
    for r in report.rows:
        pct = [f"{p:8.2f}" if p is not None else f"{'-':>8}"
               for p in (r.aee_improvement_pct, r.maee_improvement_pct)]
        lines.append(f"{r.system:<7}{r.index:<6}{r.optimal:9.3f}{r.ks:11.4g}{r.avg_terminal:10.4f}"
                     f"{r.ffo_terminal:10.4f}{pct[0]}{pct[1]}")
    return "\n".join(lines)
