"""Fractional function optimization over sub-windows of a sampled record.

The objective for a window ``[i, j)`` of samples is::

    (sum_k w_k p_k + r_slope * D) / (sum_k w_k q_k + s_slope * D),   D = sum_k w_k

with ``w_k = 1`` for discrete data and ``w_k`` the gap to the next sample time for
continuous-sampled data (left-rectangle quadrature of a zero-order-hold signal).
Extremizing this over every window reduces to extremizing a per-sample ratio,
plus a small set of boundary candidates next to runs where ``q`` vanishes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import CONTINUOUS, DISCRETE, TIME_KINDS
from .errors import (AllDeadZone, EmptyInterval, IndeterminateZeroOverZero,
                     NonPositiveDenominator, SlopeInDenominator, TooLarge)

MAX = "max"
MIN = "min"


class Ordering(enum.Enum):
    ALL_LESS = "all_less"
    ALL_EQUAL = "all_equal"
    ALL_GREATER = "all_greater"


def mediant_compare(a: float, b: float, c: float, d: float) -> Ordering:
    """Order of the chain ``a/b, (a+c)/(b+d), c/d`` for ``b, d > 0``.

    The three ratios are always monotone along the chain, so one comparison
    (``a*d`` against ``b*c``, done exactly in rationals) decides it.
    """
    if not (b > 0 and d > 0):
        raise NonPositiveDenominator(f"denominators must be positive, got b={b}, d={d}")
    lhs, rhs = a * d, b * c
    # products farther apart than their rounding error decide the order directly
    gap = abs(lhs - rhs)
    if not gap > 4e-16 * (abs(lhs) + abs(rhs)) + 1e-300:
        lhs = Fraction(a) * Fraction(d)
        rhs = Fraction(b) * Fraction(c)
    if lhs < rhs:
        return Ordering.ALL_LESS
    if lhs > rhs:
        return Ordering.ALL_GREATER
    return Ordering.ALL_EQUAL


@dataclass(frozen=True, eq=False)
class RatioSignal:
    """Numerator/denominator samples plus the ramp slopes of a fractional function.

    ``q`` entries within ``zero_tol`` of zero are stored as exactly 0. ``breaks``
    marks realization starts; no window may straddle one. ``t_end`` closes the last
    sample's hold for continuous data (default: repeat the previous gap).
    """

    p: np.ndarray
    q: np.ndarray
    r_slope: float = 0.0
    s_slope: float = 0.0
    times: np.ndarray | None = None
    time_kind: str = DISCRETE
    zero_tol: float = 1e-12
    breaks: tuple[int, ...] = ()
    t_end: float | None = None
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(-1)
        q = np.array(self.q, dtype=float).reshape(-1)
        n = p.size
        if n == 0 or q.size != n:
            raise ValueError(f"p and q need equal nonzero length, got {p.size} and {q.size}")
        if self.time_kind not in TIME_KINDS:
            raise ValueError(f"unknown time_kind {self.time_kind!r}")
        if self.zero_tol < 0 or self.s_slope < 0:
            raise ValueError("zero_tol and s_slope must be nonnegative")
        if (q < -self.zero_tol).any():
            raise ValueError(f"q must be nonnegative, found {q.min()}")
        q = np.where(np.abs(q) <= self.zero_tol, 0.0, q)
        times = (np.arange(n, dtype=float) if self.times is None
                 else np.array(self.times, dtype=float).reshape(-1))
        if times.size != n:
            raise ValueError("times must match p and q in length")
        breaks = tuple(sorted(int(b) for b in self.breaks))
        if any(b <= 0 or b >= n for b in breaks):
            raise ValueError(f"invalid breaks {breaks}")
        if self.time_kind == DISCRETE:
            w = np.ones(n)
        else:
            w = _hold_weights(times, breaks, self.t_end)
        for name, arr in (("p", p), ("q", q), ("times", times), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "r_slope", float(self.r_slope))
        object.__setattr__(self, "s_slope", float(self.s_slope))
        object.__setattr__(self, "breaks", breaks)

    def __len__(self) -> int:
        return self.p.size

    @property
    def continuous(self) -> bool:
        return self.time_kind == CONTINUOUS

    def realizations(self) -> list[tuple[int, int]]:
        edges = [0, *self.breaks, len(self)]
        return list(zip(edges[:-1], edges[1:]))


def _hold_weights(times, breaks, t_end):
    n = times.size
    w = np.empty(n)
    edges = [0, *breaks, n]
    for a, b in zip(edges[:-1], edges[1:]):
        gaps = np.diff(times[a:b])
        if (gaps <= 0).any():
            raise ValueError("sample times must strictly increase within a realization")
        w[a:b - 1] = gaps
        if b == n and t_end is not None:
            last = t_end - times[n - 1]
            if not last > 0:
                raise ValueError("t_end must exceed the last sample time")
        else:
            last = gaps[-1] if gaps.size else 1.0
        w[b - 1] = last
    return w


@dataclass(frozen=True)
class DeadZones:
    """Maximal half-open index runs ``(start, end)`` where ``q`` is zero."""

    intervals: tuple[tuple[int, int], ...] = ()

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)


@dataclass(frozen=True)
class FfopResult:
    value: float
    witness: tuple[int, int]
    saturated: bool = False


def interval_value(sig: RatioSignal, t0_index: int, t1_index: int) -> float:
    """Objective over the window ``[t0_index, t1_index)``; ``±inf`` on a zero denominator."""
    if not 0 <= t0_index < t1_index <= len(sig):
        raise EmptyInterval(f"need 0 <= t0 < t1 <= {len(sig)}, got [{t0_index}, {t1_index})")
    sl = slice(t0_index, t1_index)
    w = sig.weights[sl]
    span = float(w.sum())
    num = float(np.dot(w, sig.p[sl])) + sig.r_slope * span
    den = float(np.dot(w, sig.q[sl])) + sig.s_slope * span
    return _ratio(num, den)


def _ratio(num, den):
    if den == 0.0:
        if num == 0.0:
            raise IndeterminateZeroOverZero("0/0 over a dead-zone window")
        return math.copysign(math.inf, num)
    return num / den


def find_dead_zones(sig: RatioSignal) -> DeadZones:
    dead = sig.q == 0.0
    out = []
    for a, b in sig.realizations():
        k = a
        while k < b:
            if dead[k]:
                start = k
                while k < b and dead[k]:
                    k += 1
                out.append((start, k))
            else:
                k += 1
    return DeadZones(tuple(out))


def _check_direction(direction):
    if direction not in (MAX, MIN):
        raise ValueError(f"direction must be 'max' or 'min', got {direction!r}")
    return direction == MAX


def _better(a, b, maximize):
    return a > b if maximize else a < b


def optimize_pointwise(sig: RatioSignal, direction: str) -> FfopResult:
    """Extremum of the per-sample ratio ``(p + r_slope) / (q + s_slope)``.

    With ``s_slope == 0`` samples where ``q`` is zero are skipped, which is exact
    when dead zones cannot contribute (see :func:`optimize_with_dead_zones`).
    """
    maximize = _check_direction(direction)
    den = sig.q + sig.s_slope
    live = np.flatnonzero(den > 0)
    if live.size == 0:
        raise AllDeadZone("every sample lies in a dead zone")
    vals = (sig.p[live] + sig.r_slope) / den[live]
    pos = int(np.argmax(vals) if maximize else np.argmin(vals))
    k = int(live[pos])
    return FfopResult(float(vals[pos]), (k, k + 1), False)


def optimize_with_dead_zones(sig: RatioSignal, direction: str) -> FfopResult:
    """Exact extremum over every window that is not entirely inside a dead zone.

    Continuous-sampled data: a window that overlaps a dead zone and only an
    infinitesimal sliver of its neighbouring live sample has value ``±inf`` with
    the sign of the dead-zone integral, so each dead zone contributes ``±inf`` or
    nothing. Discrete data: every optimal window holds exactly one live sample,
    extended into the dead runs on either side by the most favourable prefix or
    suffix.
    """
    maximize = _check_direction(direction)
    if sig.s_slope != 0.0:
        raise SlopeInDenominator("dead-zone handling needs s_slope == 0")
    if not (sig.q > 0).any():
        raise AllDeadZone("every sample lies in a dead zone")
    if sig.continuous:
        return _continuous_dead_zone_opt(sig, maximize)
    return _discrete_dead_zone_opt(sig, maximize)


def _continuous_dead_zone_opt(sig, maximize):
    best = optimize_pointwise(sig, MAX if maximize else MIN)
    contrib = sig.weights * (sig.p + sig.r_slope)
    sign = 1.0 if maximize else -1.0
    starts = {a for a, _ in sig.realizations()}
    stops = {b for _, b in sig.realizations()}
    saturating = []
    for zs, ze in find_dead_zones(sig):
        seg = contrib[zs:ze] * sign
        if zs not in starts:
            # windows [zs - 1 + eps, t)
            prefix = np.cumsum(seg)
            hit = np.flatnonzero(prefix > 0)
            if hit.size:
                saturating.append((zs - 1, zs + 1 + int(hit[0])))
        if ze not in stops:
            # windows [t, ze + eps)
            suffix = np.cumsum(seg[::-1])[::-1]
            hit = np.flatnonzero(suffix > 0)
            if hit.size:
                saturating.append((zs + int(hit[0]), ze + 1))
    if saturating:
        return FfopResult(sign * math.inf, min(saturating), True)
    return best


def _discrete_dead_zone_opt(sig, maximize):
    c = sig.p + sig.r_slope
    dead = sig.q == 0.0
    sign = 1.0 if maximize else -1.0
    best = None
    for a, b in sig.realizations():
        for k in range(a, b):
            if dead[k]:
                continue
            left_gain, lo = 0.0, k
            run, m = 0.0, k - 1
            while m >= a and dead[m]:
                run += c[m]
                if sign * run > sign * left_gain:
                    left_gain, lo = run, m
                m -= 1
            right_gain, hi = 0.0, k + 1
            run, m = 0.0, k + 1
            while m < b and dead[m]:
                run += c[m]
                if sign * run > sign * right_gain:
                    right_gain, hi = run, m + 1
                m += 1
            val = (left_gain + c[k] + right_gain) / sig.q[k]
            if best is None or _better(val, best.value, maximize):
                best = FfopResult(float(val), (lo, hi), False)
    return best


def solve(sig: RatioSignal, direction: str) -> FfopResult:
    """Exact window extremum, picking the pointwise or dead-zone route as needed."""
    if sig.s_slope > 0 or not (sig.q == 0.0).any():
        return optimize_pointwise(sig, direction)
    return optimize_with_dead_zones(sig, direction)


def brute_force_oracle(sig: RatioSignal, direction: str, cap: int = 64) -> FfopResult:
    """Enumerate every window and return the exact extremum.

    Windows lying wholly inside a dead zone are excluded. For continuous-sampled
    data each window's end samples may also be cut down to a vanishing sliver of
    their hold; the objective is linear-fractional in each sliver length, so the
    two corners (full, vanishing) cover the continuum of window positions.
    """
    maximize = _check_direction(direction)
    n = len(sig)
    if n > cap:
        raise TooLarge(f"signal length {n} exceeds oracle cap {cap}")
    w = sig.weights
    nums = [float(w[k] * sig.p[k] + sig.r_slope * w[k]) for k in range(n)]
    dens = [float(w[k] * sig.q[k] + sig.s_slope * w[k]) for k in range(n)]
    shrinkable = sig.continuous
    best = None

    def consider(val, witness, saturated):
        nonlocal best
        if best is None or _better(val, best.value, maximize):
            best = FfopResult(val, witness, saturated)

    for a, b in sig.realizations():
        for i in range(a, b):
            for j in range(i + 1, b + 1):
                num = sum(nums[i:j])
                den = sum(dens[i:j])
                if den != 0.0:
                    consider(num / den, (i, j), False)
                if not shrinkable or j - i < 2:
                    continue
                # corners where the first and/or last sample shrink to a sliver
                for cut_first, cut_last in ((True, False), (False, True), (True, True)):
                    lo = i + 1 if cut_first else i
                    hi = j - 1 if cut_last else j
                    core_num = sum(nums[lo:hi])
                    core_den = sum(dens[lo:hi])
                    if core_den != 0.0:
                        continue  # limit equals the value of window [lo, hi)
                    edge_den = (dens[i] if cut_first else 0.0) + (dens[j - 1] if cut_last else 0.0)
                    if edge_den > 0.0 and core_num != 0.0:
                        consider(math.copysign(math.inf, core_num), (i, j), True)
    if best is None:
        raise AllDeadZone("no window with a nonzero denominator")
    return best


def random_signal(rng: np.random.Generator, max_len: int = 12, continuous: bool | None = None,
                  dead_zones: bool = True, breaks: bool = True) -> RatioSignal:
    """Random test signal on a dyadic grid so window sums are exact in floating point."""
    n = int(rng.integers(1, max_len + 1))
    if continuous is None:
        continuous = bool(rng.integers(0, 2))
    p = rng.integers(-16, 17, size=n) / 8.0
    q = rng.integers(1, 17, size=n) / 8.0
    if dead_zones and n > 1:
        for _ in range(int(rng.integers(0, 3))):
            start = int(rng.integers(0, n))
            stop = min(n, start + int(rng.integers(1, 4)))
            q[start:stop] = 0.0
        if rng.random() < 0.3:
            p[q == 0.0] = 0.0
    use_s = rng.random() < 0.25
    r_slope = float(rng.integers(-8, 9) / 4.0)
    s_slope = float(rng.integers(1, 9) / 4.0) if use_s else 0.0
    cuts: Sequence[int] = ()
    if breaks and n > 2 and rng.random() < 0.3:
        cuts = tuple(sorted(set(int(x) for x in rng.integers(1, n, size=int(rng.integers(1, 3))))))
    if continuous:
        gaps = rng.integers(1, 5, size=n) / 2.0
        times = np.cumsum(gaps) - gaps[0]
        for cut in cuts:
            times[cut:] -= times[cut]  # each realization restarts its clock at 0
        return RatioSignal(p, q, r_slope, s_slope, times=times, time_kind=CONTINUOUS,
                           breaks=cuts, t_end=float(times[-1] + gaps[-1]))
    return RatioSignal(p, q, r_slope, s_slope, time_kind=DISCRETE, breaks=cuts)


def results_agree(a: FfopResult, b: FfopResult, rel: float = 1e-12) -> bool:
    if a.saturated != b.saturated:
        return False
    if math.isinf(a.value) or math.isinf(b.value):
        return a.value == b.value
    return math.isclose(a.value, b.value, rel_tol=rel, abs_tol=rel * 1e-3)
