"""Shared domain types: samples, trajectories, index kinds and estimate records."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, Empty, NonFiniteValue, NonMonotoneTime

CONTINUOUS = "continuous"
DISCRETE = "discrete"
TIME_KINDS = (CONTINUOUS, DISCRETE)


class IndexKind(enum.Enum):
    L2G = "l2g"
    IFP = "ifp"
    OFP = "ofp"

    @property
    def maximize(self) -> bool:
        # the L2-gain is an upper bound, the passivity indices are lower bounds
        return self is IndexKind.L2G


class Method(enum.Enum):
    AVG = "avg"
    FFO = "ffo"
    PARAM_FREE = "param_free"
    MEAN = "mean"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Sample:
    t: float
    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "u", _frozen(np.atleast_1d(np.array(self.u, dtype=float))))
        object.__setattr__(self, "y", _frozen(np.atleast_1d(np.array(self.y, dtype=float))))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Input-output record, stored column-wise.

    ``t`` has shape (n,), ``u`` (n, m_u) and ``y`` (n, m_y). ``breaks`` lists the
    sample indices at which a new realization starts (never 0). Construction only
    checks array shapes; use :func:`validate_trajectory` for the remaining
    invariants.
    """

    t: np.ndarray
    u: np.ndarray
    y: np.ndarray
    time_kind: str = CONTINUOUS
    breaks: tuple[int, ...] = field(default=())

    def __post_init__(self):
        t = np.array(self.t, dtype=float).reshape(-1)
        u = np.array(self.u, dtype=float)
        y = np.array(self.y, dtype=float)
        if u.ndim == 1:
            u = u.reshape(-1, 1)
        if y.ndim == 1:
            y = y.reshape(-1, 1)
        if u.shape[0] != t.shape[0] or y.shape[0] != t.shape[0]:
            raise DimensionMismatch(
                f"row counts differ: t={t.shape[0]}, u={u.shape[0]}, y={y.shape[0]}")
        if self.time_kind not in TIME_KINDS:
            raise ValueError(f"time_kind must be one of {TIME_KINDS}, got {self.time_kind!r}")
        breaks = tuple(sorted(int(b) for b in self.breaks))
        if any(b <= 0 or b >= len(t) for b in breaks) or len(set(breaks)) != len(breaks):
            raise ValueError(f"invalid realization breaks {breaks} for {len(t)} samples")
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "breaks", breaks)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], time_kind: str = CONTINUOUS,
                     breaks: Sequence[int] = ()) -> "Trajectory":
        samples = [s if isinstance(s, Sample) else Sample(*s) for s in samples]
        if not samples:
            return cls(np.empty(0), np.empty((0, 1)), np.empty((0, 1)), time_kind, tuple(breaks))
        mu, my = samples[0].u.size, samples[0].y.size
        for i, s in enumerate(samples):
            if s.u.size != mu or s.y.size != my:
                raise DimensionMismatch(
                    f"sample {i} has dims (u={s.u.size}, y={s.y.size}), expected ({mu}, {my})",
                    index=i)
        return cls(np.array([s.t for s in samples]), np.stack([s.u for s in samples]),
                   np.stack([s.y for s in samples]), time_kind, tuple(breaks))

    def __len__(self) -> int:
        return self.t.shape[0]

    def __getitem__(self, i: int) -> Sample:
        return Sample(self.t[i], self.u[i], self.y[i])

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def samples(self) -> list[Sample]:
        return list(self)

    @property
    def m_u(self) -> int:
        return self.u.shape[1]

    @property
    def m_y(self) -> int:
        return self.y.shape[1]

    @property
    def discrete(self) -> bool:
        return self.time_kind == DISCRETE

    def realizations(self) -> list[tuple[int, int]]:
        """Half-open ``(start, stop)`` index ranges of each realization."""
        edges = [0, *self.breaks, len(self)]
        return list(zip(edges[:-1], edges[1:]))

    def head(self, count: int) -> "Trajectory":
        count = max(0, min(count, len(self)))
        return Trajectory(self.t[:count], self.u[:count], self.y[:count], self.time_kind,
                          tuple(b for b in self.breaks if b < count))

    def before(self, t_end: float) -> "Trajectory":
        """Leading samples of the first realization with ``t < t_end``."""
        stop = self.realizations()[0][1] if len(self) else 0
        count = int(np.searchsorted(self.t[:stop], t_end, side="left"))
        return self.head(count)


@dataclass(frozen=True)
class EstimateRecord:
    kind: IndexKind
    value: float
    witness: object
    ks_used: float
    method: Method

    def __post_init__(self):
        if not self.ks_used >= 0:
            raise ValueError(f"ks_used must be nonnegative, got {self.ks_used}")


def validate_trajectory(traj: Trajectory) -> Trajectory:
    """Return ``traj`` unchanged if all invariants hold, otherwise raise.

    Samples are scanned in order; the error names the first offending index.
    """
    n = len(traj)
    if n == 0:
        raise Empty("trajectory has no samples")
    finite = (np.isfinite(traj.t) & np.isfinite(traj.u).all(axis=1)
              & np.isfinite(traj.y).all(axis=1))
    starts = set(traj.breaks)
    for i in range(n):
        if not finite[i]:
            raise NonFiniteValue(f"non-finite value at sample {i}", index=i)
        if i > 0 and i not in starts and not traj.t[i] > traj.t[i - 1]:
            raise NonMonotoneTime(
                f"time {traj.t[i]} at sample {i} does not exceed {traj.t[i - 1]}", index=i)
    return traj


def concat_realizations(trajs: Sequence[Trajectory]) -> Trajectory:
    """Join realizations into one long profile, recording where each one starts."""
    trajs = list(trajs)
    if not trajs:
        raise Empty("nothing to concatenate")
    first = trajs[0]
    for k, tr in enumerate(trajs[1:], start=1):
        if (tr.m_u, tr.m_y) != (first.m_u, first.m_y):
            raise DimensionMismatch(
                f"realization {k} has dims (u={tr.m_u}, y={tr.m_y}), "
                f"expected ({first.m_u}, {first.m_y})", index=k)
        if tr.time_kind != first.time_kind:
            raise DimensionMismatch(f"realization {k} has time kind {tr.time_kind!r}", index=k)
    breaks: list[int] = []
    offset = 0
    for tr in trajs:
        if offset and len(tr):
            breaks.append(offset)
        breaks.extend(offset + b for b in tr.breaks)
        offset += len(tr)
    return Trajectory(np.concatenate([tr.t for tr in trajs]),
                      np.concatenate([tr.u for tr in trajs]),
                      np.concatenate([tr.y for tr in trajs]),
                      first.time_kind, tuple(breaks))
