"""Trajectory CSV files: header ``t,u1..um,y1..ym[,realization]``."""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .core import CONTINUOUS, Trajectory, validate_trajectory
from .errors import ParseError

_COLUMN = re.compile(r"^([uy])(\d+)$")


def _parse_header(header: list[str]) -> tuple[int, int, bool]:
    names = [h.strip() for h in header]
    if not names or names[0] != "t":
        raise ParseError("first column must be 't'", line=1)
    has_real = names[-1] == "realization"
    body = names[1:-1] if has_real else names[1:]
    seen = {"u": [], "y": []}
    for name in body:
        m = _COLUMN.match(name)
        if not m:
            raise ParseError(f"unexpected column {name!r}", line=1)
        seen[m.group(1)].append(int(m.group(2)))
    for sig in "uy":
        if not seen[sig]:
            raise ParseError(f"no {sig} columns", line=1)
        if seen[sig] != list(range(1, len(seen[sig]) + 1)):
            raise ParseError(f"{sig} columns must be {sig}1..{sig}{len(seen[sig])} in order", line=1)
    if body != [f"u{i}" for i in seen["u"]] + [f"y{i}" for i in seen["y"]]:
        raise ParseError("u columns must precede y columns", line=1)
    return len(seen["u"]), len(seen["y"]), has_real


def read_trajectory_csv(path, time_kind: str = CONTINUOUS) -> Trajectory:
    """Parse and validate a trajectory file.

    A change in the ``realization`` label starts a new realization; each label
    must form one contiguous block of rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("file is empty", line=1)
        m_u, m_y, has_real = _parse_header(header)
        width = 1 + m_u + m_y + int(has_real)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise ParseError(f"expected {width} fields, got {len(row)}", line=lineno)
            try:
                rows.append([float(c) for c in row[:1 + m_u + m_y]])
                if has_real:
                    labels.append((row[-1].strip(), lineno))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    if not rows:
        raise ParseError("no data rows", line=2)
    breaks, done = [], set()
    for i in range(1, len(labels)):
        if labels[i][0] != labels[i - 1][0]:
            done.add(labels[i - 1][0])
            if labels[i][0] in done:
                raise ParseError(f"realization {labels[i][0]!r} is not contiguous", line=labels[i][1])
            breaks.append(i)
    data = np.array(rows)
    traj = Trajectory(data[:, 0], data[:, 1:1 + m_u], data[:, 1 + m_u:], time_kind, tuple(breaks))
    return validate_trajectory(traj)


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    """Write with shortest round-trip float formatting; add a realization column if needed."""
    path = Path(path)
    header = ["t", *(f"u{i + 1}" for i in range(traj.m_u)), *(f"y{i + 1}" for i in range(traj.m_y))]
    labels = np.zeros(len(traj), dtype=int)
    for b in traj.breaks:
        labels[b:] += 1
    if traj.breaks:
        header.append("realization")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(traj)):
            row = [repr(float(traj.t[i]))]
            row += [repr(float(v)) for v in traj.u[i]]
            row += [repr(float(v)) for v in traj.y[i]]
            if traj.breaks:
                row.append(str(labels[i]))
            w.writerow(row)
    return path
