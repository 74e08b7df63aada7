"""System-index estimators: averaging baseline, parameter-free, FFO and the streaming form.

Squared L2-gain values are carried throughout (``l2g_sq``); :func:`gain_of_squared`
converts to gain units for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from .core import CONTINUOUS, DISCRETE, IndexKind, Method, Sample, Trajectory
from .errors import (AllDeadZone, BoundViolation, HasRealizationBreaks, NonFiniteInput,
                     NoSamples, NonMonotoneTime, ZeroDenominator)
from .ffop import MAX, MIN, RatioSignal, optimize_pointwise

ALL_KINDS = (IndexKind.L2G, IndexKind.IFP, IndexKind.OFP)
DEFAULT_ZERO_TOL = 1e-12


class Terms(NamedTuple):
    uu: float
    yy: float
    uy: float


def per_sample_terms(s: Sample) -> Terms:
    return Terms(float(s.u @ s.u), float(s.y @ s.y), float(s.u @ s.y))


def _terms(traj: Trajectory):
    uu = np.einsum("ij,ij->i", traj.u, traj.u)
    yy = np.einsum("ij,ij->i", traj.y, traj.y)
    uy = np.einsum("ij,ij->i", traj.u, traj.y)
    return uu, yy, uy


def _kinds(kinds) -> tuple[IndexKind, ...]:
    if kinds is None:
        return ALL_KINDS
    return tuple(IndexKind(k) for k in kinds)


@dataclass(frozen=True)
class IndexEstimates:
    """One estimate per index; indices that were not requested are ``None``."""

    l2g_sq: float | None
    ifp: float | None
    ofp: float | None
    method: Method
    witnesses: dict = field(default_factory=dict)

    def get(self, kind: IndexKind | str) -> float | None:
        return getattr(self, _FIELD[IndexKind(kind)])


_FIELD = {IndexKind.L2G: "l2g_sq", IndexKind.IFP: "ifp", IndexKind.OFP: "ofp"}


def _pack(values: Mapping[IndexKind, float], method, witnesses) -> IndexEstimates:
    return IndexEstimates(values.get(IndexKind.L2G), values.get(IndexKind.IFP),
                          values.get(IndexKind.OFP), method, dict(witnesses))


def _integrals(traj: Trajectory):
    uu, yy, uy = _terms(traj)
    # sequential accumulation, so the result matches the streaming and series forms
    if traj.time_kind == DISCRETE:
        return tuple(float(np.cumsum(f)[-1]) for f in (uu, yy, uy))
    dt = np.diff(traj.t)

    def trap(f):
        return float(np.cumsum(0.5 * (f[:-1] + f[1:]) * dt)[-1]) if dt.size else 0.0

    return trap(uu), trap(yy), trap(uy)


def avg_estimates(traj: Trajectory, kinds=None) -> IndexEstimates:
    """Whole-window energy ratios: trapezoidal integrals, or plain sums for discrete data."""
    if traj.breaks:
        raise HasRealizationBreaks("the averaging estimator needs one contiguous realization")
    if len(traj) == 0:
        raise NoSamples("empty trajectory")
    iuu, iyy, iuy = _integrals(traj)
    values = {}
    for kind in _kinds(kinds):
        num, den = {IndexKind.L2G: (iyy, iuu), IndexKind.IFP: (iuy, iuu),
                    IndexKind.OFP: (iuy, iyy)}[kind]
        if not den > 0:
            raise ZeroDenominator(f"{kind.value}: zero energy in the denominator signal")
        values[kind] = num / den
    window = (float(traj.t[0]), float(traj.t[-1]))
    return _pack(values, Method.AVG, {k: window for k in values})


def _ks_for(ks, kind: IndexKind) -> float:
    if isinstance(ks, KsCalibration):
        value = ks.for_kind(kind)
    elif isinstance(ks, Mapping):
        value = ks[kind] if kind in ks else ks[kind.value]
    else:
        value = ks
    value = float(value)
    if not value >= 0:
        raise ValueError(f"Ks must be nonnegative, got {value}")
    return value


def _ratio_signal(kind: IndexKind, uu, yy, uy, ks: float, zero_tol: float) -> tuple[RatioSignal, str]:
    if kind is IndexKind.L2G:
        return RatioSignal(yy, uu, r_slope=-ks, zero_tol=zero_tol), MAX
    if kind is IndexKind.IFP:
        return RatioSignal(uy, uu, r_slope=ks, zero_tol=zero_tol), MIN
    return RatioSignal(uy, yy, r_slope=ks, zero_tol=zero_tol), MIN


def ffo_estimates(traj: Trajectory, ks, kinds=None, zero_tol: float = DEFAULT_ZERO_TOL,
                  method: Method = Method.FFO) -> IndexEstimates:
    """Pointwise extrema of the Ks-corrected per-sample ratios.

    ``ks`` is a scalar, a per-index mapping, or a :class:`KsCalibration`. Samples
    with a vanishing denominator signal are skipped.
    """
    if len(traj) == 0:
        raise NoSamples("empty trajectory")
    uu, yy, uy = _terms(traj)
    values, witnesses = {}, {}
    for kind in _kinds(kinds):
        sig, direction = _ratio_signal(kind, uu, yy, uy, _ks_for(ks, kind), zero_tol)
        try:
            res = optimize_pointwise(sig, direction)
        except AllDeadZone as exc:
            raise AllDeadZone(f"{kind.value}: {exc}") from None
        values[kind] = res.value
        witnesses[kind] = float(traj.t[res.witness[0]])
    return _pack(values, method, witnesses)


def param_free_estimates(traj: Trajectory, kinds=None,
                         zero_tol: float = DEFAULT_ZERO_TOL) -> IndexEstimates:
    return ffo_estimates(traj, 0.0, kinds, zero_tol, method=Method.PARAM_FREE)


class Gain(NamedTuple):
    value: float
    negative: bool


def gain_of_squared(l2g_sq: float) -> Gain:
    """Square root of a squared-gain estimate; negative inputs clamp to 0 and are flagged."""
    if l2g_sq >= 0:
        return Gain(math.sqrt(l2g_sq), False)
    return Gain(0.0, True)


class MeanEstimates(NamedTuple):
    l2g_sq: float | None
    ifp: float | None
    ofp: float | None

    def get(self, kind: IndexKind | str):
        return getattr(self, _FIELD[IndexKind(kind)])


def mean_estimates(avg: IndexEstimates, pf: IndexEstimates) -> MeanEstimates:
    out = []
    for kind in ALL_KINDS:
        a, b = avg.get(kind), pf.get(kind)
        if a is None or b is None:
            out.append(None)
            continue
        if not (math.isfinite(a) and math.isfinite(b)):
            raise NonFiniteInput(f"{kind.value}: cannot average {a} and {b}")
        out.append(0.5 * (a + b))
    return MeanEstimates(*out)


@dataclass(frozen=True)
class KsCalibration:
    ks_l2g: float | None
    ks_ifp: float | None
    ks_ofp: float | None
    window: tuple[float, float]
    mean_estimates: MeanEstimates
    # candidate values before clamping at zero
    raw: dict = field(default_factory=dict)

    def for_kind(self, kind: IndexKind | str) -> float:
        value = getattr(self, "ks_" + IndexKind(kind).value)
        if value is None:
            raise KeyError(f"no Ks calibrated for {IndexKind(kind).value}")
        return value

    def as_dict(self) -> dict:
        return {k.value: getattr(self, "ks_" + k.value) for k in ALL_KINDS
                if getattr(self, "ks_" + k.value) is not None}


def ks_from_means(traj: Trajectory, means, kinds=None,
                  zero_tol: float = DEFAULT_ZERO_TOL) -> dict[str, float]:
    """Unclamped Ks candidates: the largest per-sample supply excess over ``means``.

    ``means`` is anything with ``.get(kind)``, e.g. :class:`MeanEstimates`.
    """
    uu, yy, uy = _terms(traj)
    live_u = uu > zero_tol
    live_y = yy > zero_tol
    raw = {}
    for kind in _kinds(kinds):
        m = means.get(kind)
        if kind is IndexKind.L2G:
            cand = (yy - m * uu)[live_u]
        elif kind is IndexKind.IFP:
            cand = (m * uu - uy)[live_u]
        else:
            cand = (m * yy - uy)[live_y]
        if cand.size == 0:
            raise AllDeadZone(f"{kind.value}: no live samples for a Ks candidate")
        raw[kind.value] = float(cand.max())
    return raw


def calibrate_ks(traj: Trajectory, calib_end: float | None = 10.0, kinds=None,
                 zero_tol: float = DEFAULT_ZERO_TOL) -> KsCalibration:
    """Learn one Ks per index from the leading ``calib_end`` time units.

    Ks is the largest per-sample excess of the supply term over the mean of the
    averaging and parameter-free estimates, clamped below at zero.
    """
    window = traj if calib_end is None else traj.before(float(traj.t[0]) + calib_end)
    if len(window) == 0:
        raise NoSamples("calibration window holds no samples")
    kinds = _kinds(kinds)
    means = mean_estimates(avg_estimates(window, kinds), param_free_estimates(window, kinds, zero_tol))
    raw = ks_from_means(window, means, kinds, zero_tol)
    clamped = {k: max(0.0, v) for k, v in raw.items()}
    return KsCalibration(clamped.get("l2g"), clamped.get("ifp"), clamped.get("ofp"),
                         (float(window.t[0]), float(window.t[-1])), means, raw)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class BoundsReport:
    checks: tuple[BoundCheck, ...]
    # lower bound on the squared gain, upper bounds on the two passivity indices
    l2g_sq_lower: float | None
    ifp_upper: float | None
    ofp_upper: float | None
    slack: dict

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)


def bounds_report(avg: IndexEstimates, pf: IndexEstimates, ffo: IndexEstimates,
                  rel_tol: float = 0.0, strict: bool = True) -> BoundsReport:
    """Check the ordering between the three estimate families and derive baseline bounds.

    ``rel_tol`` admits floating-point round-off on equality cases; the
    inequalities themselves are exact consequences of Ks >= 0.
    """
    checks = []

    def le(name, lhs, rhs):
        holds = lhs <= rhs + rel_tol * max(abs(lhs), abs(rhs))
        checks.append(BoundCheck(name, lhs, rhs, holds))

    slack = {}
    l2g_lower = ifp_upper = ofp_upper = None
    if avg.l2g_sq is not None and pf.l2g_sq is not None and ffo.l2g_sq is not None:
        le("ffo_l2g <= pf_l2g", ffo.l2g_sq, pf.l2g_sq)
        le("avg_l2g <= pf_l2g", avg.l2g_sq, pf.l2g_sq)
        slack["l2g"] = pf.l2g_sq - ffo.l2g_sq
        l2g_lower = avg.l2g_sq - 2.0 * slack["l2g"]
    if avg.ifp is not None and pf.ifp is not None and ffo.ifp is not None:
        le("pf_ifp <= ffo_ifp", pf.ifp, ffo.ifp)
        le("pf_ifp <= avg_ifp", pf.ifp, avg.ifp)
        slack["ifp"] = ffo.ifp - pf.ifp
        ifp_upper = avg.ifp + 2.0 * slack["ifp"]
    if avg.ofp is not None and pf.ofp is not None and ffo.ofp is not None:
        le("pf_ofp <= ffo_ofp", pf.ofp, ffo.ofp)
        le("pf_ofp <= avg_ofp", pf.ofp, avg.ofp)
        slack["ofp"] = ffo.ofp - pf.ofp
        ofp_upper = avg.ofp + 2.0 * slack["ofp"]
    report = BoundsReport(tuple(checks), l2g_lower, ifp_upper, ofp_upper, slack)
    if strict and not report.ok:
        failed = ", ".join(c.name for c in report.checks if not c.holds)
        raise BoundViolation(f"estimate ordering violated: {failed}")
    return report


class OnlineEstimator:
    """Constant-memory streaming form of the AVG, parameter-free and FFO estimators.

    Feed samples with :meth:`update`; read estimates at any time. After N updates
    the readings equal the batch estimators applied to the first N samples.
    """

    __slots__ = ("ks", "time_kind", "zero_tol", "count", "last_t", "prev_terms",
                 "integrals", "avg_valid", "ffo_best", "pf_best", "_ks")

    def __init__(self, ks=0.0, time_kind: str = CONTINUOUS, zero_tol: float = DEFAULT_ZERO_TOL):
        self.ks = ks
        self._ks = tuple(_ks_for(ks, k) if _has_ks(ks, k) else None for k in ALL_KINDS)
        self.time_kind = time_kind
        self.zero_tol = zero_tol
        self.count = 0
        self.last_t = None
        self.prev_terms = None
        self.integrals = [0.0, 0.0, 0.0]  # uu, yy, uy
        self.avg_valid = True
        # (value, time) per index; None until a live sample arrives
        self.ffo_best = [None, None, None]
        self.pf_best = [None, None, None]

    def new_realization(self):
        """Start a new realization; the averaging estimates become unavailable."""
        self.last_t = None
        self.prev_terms = None
        self.avg_valid = False

    def update(self, sample: Sample) -> "OnlineEstimator":
        t = float(sample.t)
        if self.last_t is not None and not t > self.last_t:
            raise NonMonotoneTime(f"sample time {t} does not exceed {self.last_t}", index=self.count)
        terms = per_sample_terms(sample)
        if self.time_kind == DISCRETE:
            for i in range(3):
                self.integrals[i] += terms[i]
        elif self.prev_terms is not None:
            dt = t - self.last_t
            for i in range(3):
                self.integrals[i] += 0.5 * (self.prev_terms[i] + terms[i]) * dt
        uu, yy, uy = terms
        for i, kind in enumerate(ALL_KINDS):
            if kind is IndexKind.L2G:
                num, den = yy, uu
            elif kind is IndexKind.IFP:
                num, den = uy, uu
            else:
                num, den = uy, yy
            if den <= self.zero_tol:
                continue
            pf_val = num / den
            if _improves(pf_val, self.pf_best[i], kind):
                self.pf_best[i] = (pf_val, t)
            ks = self._ks[i]
            if ks is not None:
                val = (num - ks if kind is IndexKind.L2G else num + ks) / den
                if _improves(val, self.ffo_best[i], kind):
                    self.ffo_best[i] = (val, t)
        self.prev_terms = terms
        self.last_t = t
        self.count += 1
        return self

    def avg(self) -> IndexEstimates:
        if self.count == 0:
            raise NoSamples("no samples processed")
        if not self.avg_valid:
            raise HasRealizationBreaks("the averaging estimator needs one contiguous realization")
        iuu, iyy, iuy = self.integrals
        values = {}
        for kind, (num, den) in zip(ALL_KINDS, ((iyy, iuu), (iuy, iuu), (iuy, iyy))):
            values[kind] = num / den if den > 0 else None
        return _pack(values, Method.AVG, {})

    def _read(self, best, method):
        if self.count == 0:
            raise NoSamples("no samples processed")
        values = {k: b[0] for k, b in zip(ALL_KINDS, best) if b is not None}
        wits = {k: b[1] for k, b in zip(ALL_KINDS, best) if b is not None}
        return _pack(values, method, wits)

    def ffo(self) -> IndexEstimates:
        return self._read(self.ffo_best, Method.FFO)

    def param_free(self) -> IndexEstimates:
        return self._read(self.pf_best, Method.PARAM_FREE)


def _has_ks(ks, kind):
    if isinstance(ks, KsCalibration):
        return getattr(ks, "ks_" + kind.value) is not None
    if isinstance(ks, Mapping):
        return kind in ks or kind.value in ks
    return True


def _improves(val, best, kind):
    if best is None:
        return True
    return val > best[0] if kind.maximize else val < best[0]


def online_update(state: OnlineEstimator, s: Sample) -> OnlineEstimator:
    return state.update(s)


@dataclass(frozen=True)
class EstimateSeries:
    """Running estimates after each sample; NaN where an estimate is not yet defined."""

    t: np.ndarray
    avg: dict
    ffo: dict
    param_free: dict


def estimate_series(traj: Trajectory, ks, kinds=None,
                    zero_tol: float = DEFAULT_ZERO_TOL) -> EstimateSeries:
    """Vectorized equivalent of folding :class:`OnlineEstimator` over one realization."""
    if traj.breaks:
        raise HasRealizationBreaks("estimate series are computed per realization")
    uu, yy, uy = _terms(traj)
    if traj.time_kind == DISCRETE:
        cum = [np.cumsum(f) for f in (uu, yy, uy)]
    else:
        dt = np.diff(traj.t)
        cum = [np.concatenate(([0.0], np.cumsum(0.5 * (f[:-1] + f[1:]) * dt)))
               for f in (uu, yy, uy)]
    iuu, iyy, iuy = cum
    avg, ffo, pf = {}, {}, {}
    with np.errstate(divide="ignore", invalid="ignore"):
        for kind in _kinds(kinds):
            if kind is IndexKind.L2G:
                num, den, inum, iden = yy, uu, iyy, iuu
            elif kind is IndexKind.IFP:
                num, den, inum, iden = uy, uu, iuy, iuu
            else:
                num, den, inum, iden = uy, yy, iuy, iyy
            avg[kind] = np.where(iden > 0, inum / iden, np.nan)
            live = den > zero_tol
            fill = -np.inf if kind.maximize else np.inf
            acc = np.maximum.accumulate if kind.maximize else np.minimum.accumulate
            k_s = _ks_for(ks, kind)
            shifted = num - k_s if kind is IndexKind.L2G else num + k_s
            for out, top in ((pf, num), (ffo, shifted)):
                running = acc(np.where(live, top / np.where(live, den, 1.0), fill))
                out[kind] = np.where(np.isinf(running), np.nan, running)
    return EstimateSeries(traj.t, avg, ffo, pf)

