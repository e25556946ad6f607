"""Complementary cumulative distribution built from decile means.

The decile means become the abscissae of an 11-point survival curve::

    (0, 100), (m1, 90), (m2, 80), ..., (m9, 10), (m10, 0)

with probabilities kept in percent. ``p`` at ``x`` is the share of the
population whose income exceeds ``x``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateAbscissaError, InsufficientDataError, PreconditionError
from .ingest import DecileRecord

#: survival percentages paired with deciles 1..10
DECILE_LEVELS = (90.0, 80.0, 70.0, 60.0, 50.0, 40.0, 30.0, 20.0, 10.0, 0.0)
ANCHOR = (0.0, 100.0)


class Space(str, enum.Enum):
    LINEAR = "linear"
    LOGLOG = "loglog"


@dataclass(frozen=True)
class CcdfPoint:
    x: float
    p: float


@dataclass(frozen=True)
class CcdfSeries:
    points: tuple[CcdfPoint, ...]
    space: Space = Space.LINEAR
    source: Optional[tuple] = None

    def __post_init__(self):
        xs, ps = self.x, self.p
        if np.any(np.diff(xs) <= 0):
            raise DegenerateAbscissaError("abscissae must be strictly increasing")
        if np.any(np.diff(ps) >= 0):
            raise PreconditionError("probabilities must be strictly decreasing")
        if self.space is Space.LINEAR:
            if np.any(xs < 0) or np.any(ps < 0) or np.any(ps > 100):
                raise PreconditionError("linear-space point out of range")

    @property
    def x(self) -> np.ndarray:
        return np.array([pt.x for pt in self.points], dtype=float)

    @property
    def p(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points], dtype=float)

    def __len__(self):
        return len(self.points)

    def x_at(self, p: float) -> float:
        """Abscissa of the point whose probability is exactly ``p``."""
        for pt in self.points:
            if pt.p == p:
                return pt.x
        raise KeyError(p)


def build_ccdf(record: DecileRecord, anchor: bool = True) -> CcdfSeries:
    """Build the survival-curve point set of a decile record.

    Parameters
    ----------
    record : DecileRecord
        A record that passes :func:`~decfit.ingest.validate_record`.
    anchor : bool
        Include the ``(0, 100)`` point. Without it the series has 10 points.

    Raises
    ------
    DegenerateAbscissaError
        Two points would share an abscissa (tied decile means, or a zero
        first-decile mean colliding with the anchor).
    """
    xs = [float(m) for m in record.means]
    ps = list(DECILE_LEVELS)
    if anchor:
        xs.insert(0, ANCHOR[0])
        ps.insert(0, ANCHOR[1])
    for i in range(1, len(xs)):
        if xs[i] <= xs[i - 1]:
            raise DegenerateAbscissaError(
                f"tied abscissa {xs[i]!r} at p={ps[i - 1]:g} and p={ps[i]:g}")
    points = tuple(CcdfPoint(x, p) for x, p in zip(xs, ps))
    return CcdfSeries(points, Space.LINEAR, record.key)


def log_transform(series: CcdfSeries) -> CcdfSeries:
    """Map a linear series to base-10 log-log space.

    Points with ``x == 0`` or ``p == 0`` are dropped first; for a full
    11-point series that leaves 9.
    """
    if series.space is not Space.LINEAR:
        raise PreconditionError("series is already in log-log space")
    kept = [pt for pt in series.points if pt.x > 0 and pt.p > 0]
    if len(kept) < 3:
        raise InsufficientDataError(
            f"only {len(kept)} points survive the log transform, need 3")
    points = tuple(CcdfPoint(math.log10(pt.x), math.log10(pt.p)) for pt in kept)
    return CcdfSeries(points, Space.LOGLOG, series.source)
