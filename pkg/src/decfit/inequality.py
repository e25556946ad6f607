"""Gini coefficient from grouped means, and its correlation with fit quality."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateVarianceError,
    InputError,
    InsufficientOverlapError,
)

VERDICT_TOL = 1e-12
MIN_YEARS = 3


class Verdict(str, enum.Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class GiniResult:
    value: float
    n_groups: int = 10
    source: Optional[tuple] = None


@dataclass(frozen=True)
class CorrelationReport:
    years: tuple[int, ...]
    r2_series: tuple[float, ...]
    gini_series: tuple[float, ...]
    pearson_r: float
    verdict: Verdict
    # (label, first_year, last_year, mean_r2, mean_gini); filled when a split year is given
    intervals: tuple = field(default=())


def gini_from_deciles(means: Sequence[float], source=None) -> GiniResult:
    """Gini index of equal-population groups with the given mean incomes.

    Uses the trapezoidal Lorenz curve, ``2*sum(i*m_i)/(n*sum(m_i)) - (n+1)/n``.
    Grouping hides within-group inequality, so this is a lower bound on the
    Gini of the underlying population; with ``n`` groups it never exceeds
    ``1 - 1/n``.
    """
    m = np.asarray(means, dtype=float)
    if m.ndim != 1 or m.size < 2:
        raise InputError("need at least two group means")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise InputError("group means must be finite and nonnegative")
    if np.any(np.diff(m) < 0):
        raise InputError("group means must be nondecreasing")
    total = float(m.sum())
    if total <= 0:
        raise DegenerateVarianceError("group means sum to zero")
    n = m.size
    ranks = np.arange(1, n + 1)
    value = 2.0 * float(ranks @ m) / (n * total) - (n + 1) / n
    # cancellation can leave -1e-17 for perfectly equal groups
    value = min(max(value, 0.0), 1.0 - 1.0 / n)
    return GiniResult(value, n, source)


def pearson_correlation(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("series must be 1-d and of equal length")
    if a.size < MIN_YEARS:
        raise InsufficientOverlapError(f"need at least {MIN_YEARS} pairs, got {a.size}")
    da, db = a - a.mean(), b - b.mean()
    saa, sbb = float(da @ da), float(db @ db)
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateVarianceError("a series has zero variance")
    r = float(da @ db) / np.sqrt(saa * sbb)
    return float(np.clip(r, -1.0, 1.0))


def verdict_for(r: float, tol: float = VERDICT_TOL) -> Verdict:
    if r < -tol:
        return Verdict.NEGATIVE
    if r > tol:
        return Verdict.POSITIVE
    return Verdict.INDETERMINATE


def correlate_yearly(r2_by_year: Mapping[int, float],
                     gini_by_year: Mapping[int, float],
                     split_year: Optional[int] = None) -> CorrelationReport:
    """Pearson correlation of two yearly series over their common years.

    With ``split_year`` the report also carries mean R^2 and Gini for the
    years before it and from it onwards.
    """
    years = sorted(set(r2_by_year) & set(gini_by_year))
    if len(years) < MIN_YEARS:
        raise InsufficientOverlapError(
            f"need at least {MIN_YEARS} overlapping years, got {len(years)}")
    r2 = [float(r2_by_year[y]) for y in years]
    gini = [float(gini_by_year[y]) for y in years]
    r = pearson_correlation(r2, gini)

    intervals = ()
    if split_year is not None:
        parts = []
        for label, sel in (("before", [y < split_year for y in years]),
                           ("after", [y >= split_year for y in years])):
            ys = [y for y, s in zip(years, sel) if s]
            if ys:
                parts.append((label, ys[0], ys[-1],
                              float(np.mean([v for v, s in zip(r2, sel) if s])),
                              float(np.mean([v for v, s in zip(gini, sel) if s]))))
        intervals = tuple(parts)
    return CorrelationReport(tuple(years), tuple(r2), tuple(gini), r,
                             verdict_for(r), intervals)


def r2_gini_correlation(fits, ginis, split_year: Optional[int] = None) -> CorrelationReport:
    """Correlate yearly fit quality with yearly Gini.

    ``fits`` maps year to :class:`~decfit.polyfit.FitResult`, ``ginis`` maps
    year to :class:`GiniResult`; the two are inner-joined on year.
    """
    return correlate_yearly({y: f.r_squared for y, f in fits.items()},
                            {y: g.value for y, g in ginis.items()},
                            split_year)
