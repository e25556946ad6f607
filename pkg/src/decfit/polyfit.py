"""Least-squares polynomial fits of survival curves.

Models are ``y = P1*x**2 + P2*x + P3`` (or the first-degree ``P1*x + P2``),
coefficients stored highest power first in the same order as MATLAB's
``poly1``/``poly2``. Abscissae are income in currency units, often up to
1e6, so the design is scaled to ``[0, 1]`` before a QR solve and the
coefficients are mapped back afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg, optimize, special

from .ccdf import CcdfSeries, Space
from .errors import (
    BracketError,
    DegenerateVarianceError,
    InputError,
    InsufficientDataError,
    MonotonicityError,
    NoDegreesOfFreedomError,
    NumericalError,
    PreconditionError,
    SingularDesignError,
)

FIT_DEGREES = (1, 2)
DEFAULT_LEVEL = 0.95
DEFAULT_THRESHOLD = 90.0

# relative pivot size below which the scaled design is treated as rank deficient
_RANK_TOL = 1e-12


@dataclass(frozen=True)
class PolynomialModel:
    """Polynomial of degree 0, 1 or 2, coefficients highest power first."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coefs = tuple(float(c) for c in self.coefficients)
        if not 1 <= len(coefs) <= 3:
            raise InputError(f"expected 1 to 3 coefficients, got {len(coefs)}")
        if not np.all(np.isfinite(coefs)):
            raise InputError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coefs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


@dataclass(frozen=True)
class FitResult:
    model: PolynomialModel
    r_squared: float  # percent
    ci: tuple[tuple[float, float], ...]
    residuals: tuple[float, ...]
    space: Space
    n_points: int
    x: tuple[float, ...]
    y: tuple[float, ...]
    # (X'X)^-1 in the original x units; kept so intervals can be redone at other levels
    gram_inverse: tuple[tuple[float, ...], ...]

    @property
    def degree(self) -> int:
        return self.model.degree

    @property
    def dof(self) -> int:
        return self.n_points - (self.degree + 1)

    @property
    def fitted(self) -> np.ndarray:
        return np.asarray(self.y) - np.asarray(self.residuals)


@dataclass(frozen=True)
class SelectionResult:
    chosen: FitResult
    threshold: float
    candidates: tuple[FitResult, ...]
    passed: bool


def evaluate(model: PolynomialModel, x):
    """Horner evaluation; ``x`` may be a scalar or an array."""
    result = 0.0 * np.asarray(x, dtype=float)
    for c in model.coefficients:
        result = result * x + c
    return float(result) if np.ndim(result) == 0 else result


def implied_density(model: PolynomialModel) -> PolynomialModel:
    """Density implied by a survival model: minus its derivative.

    Units are percent of population per currency unit.
    """
    deriv = np.polyder(np.asarray(model.coefficients))
    return PolynomialModel(tuple(-deriv) if deriv.size else (0.0,))


def t_quantile(prob: float, dof: int) -> float:
    """Quantile of Student's t by inverting the regularised incomplete beta.

    Uses ``P(|T| > t) = I_{dof/(dof+t^2)}(dof/2, 1/2)``.
    """
    if not 0.0 < prob < 1.0:
        raise InputError(f"probability must lie in (0, 1), got {prob}")
    if dof < 1:
        raise NoDegreesOfFreedomError("t quantile needs at least one degree of freedom")
    if prob == 0.5:
        return 0.0
    tail = min(prob, 1.0 - prob)
    z = special.betaincinv(0.5 * dof, 0.5, 2.0 * tail)
    t = float(np.sqrt(dof * (1.0 - z) / z))
    return t if prob > 0.5 else -t


def r_squared(observed: Sequence[float], fitted: Sequence[float]) -> float:
    """Coefficient of determination in percent, ``100 * (1 - SSres/SStot)``.

    Not clamped: a fit worse than the mean gives a negative value.
    """
    obs = np.asarray(observed, dtype=float)
    fit = np.asarray(fitted, dtype=float)
    if obs.shape != fit.shape or obs.ndim != 1:
        raise InputError("observed and fitted must be 1-d and of equal length")
    if obs.size < 2:
        raise InsufficientDataError("R^2 needs at least two observations")
    ss_tot = float(np.sum((obs - obs.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateVarianceError("observed values have zero variance")
    ss_res = float(np.sum((obs - fit) ** 2))
    return 100.0 * (1.0 - ss_res / ss_tot)


def _intervals(coefs, gram_inverse, residuals, dof, level):
    if dof < 1:
        raise NoDegreesOfFreedomError("confidence intervals need residual degrees of freedom >= 1")
    if not 0.0 < level < 1.0:
        raise InputError(f"confidence level must lie in (0, 1), got {level}")
    resid = np.asarray(residuals)
    s2 = float(resid @ resid) / dof
    se = np.sqrt(s2 * np.diag(np.asarray(gram_inverse)))
    t = t_quantile(1.0 - (1.0 - level) / 2.0, dof)
    return tuple((float(c - t * s), float(c + t * s)) for c, s in zip(coefs, se))


def confidence_intervals(fit: FitResult, level: float = DEFAULT_LEVEL):
    """Per-coefficient ``(low, high)`` t-intervals, highest power first."""
    return _intervals(fit.model.coefficients, fit.gram_inverse, fit.residuals,
                      fit.dof, level)


def fit_polynomial(x, y, degree: int, space: Space = Space.LINEAR) -> FitResult:
    """Ordinary least-squares fit of ``y`` on a polynomial in ``x``.

    Works on raw arrays, with no survival-curve invariants checked; see
    :func:`fit_ols` for the series-level entry point.

    Raises
    ------
    SingularDesignError
        Fewer than ``degree + 1`` distinct abscissae, or a numerically rank
        deficient design.
    InsufficientDataError
        Fewer than ``degree + 2`` points.
    """
    if degree not in FIT_DEGREES:
        raise PreconditionError(f"degree must be 1 or 2, got {degree}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError("x and y must be 1-d and of equal length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InputError("non-finite data")
    n = x.size
    if n < degree + 2:
        raise InsufficientDataError(
            f"degree {degree} needs at least {degree + 2} points, got {n}")
    if np.unique(x).size < degree + 1:
        raise SingularDesignError(
            f"degree {degree} needs {degree + 1} distinct abscissae")

    scale = float(np.max(np.abs(x)))
    powers = np.arange(degree, -1, -1)
    design = np.vander(x / scale, degree + 1)
    q, r = np.linalg.qr(design)
    pivots = np.abs(np.diag(r))
    if pivots.min() <= _RANK_TOL * pivots.max():
        raise SingularDesignError("design matrix is numerically rank deficient")
    beta = linalg.solve_triangular(r, q.T @ y)
    fitted = design @ beta
    residuals = y - fitted

    unscale = scale ** -powers.astype(float)
    coefs = beta * unscale
    r_inv = linalg.solve_triangular(r, np.eye(degree + 1))
    gram_inv = (r_inv @ r_inv.T) * np.outer(unscale, unscale)

    r2 = r_squared(y, fitted)
    ci = _intervals(coefs, gram_inv, residuals, n - degree - 1, DEFAULT_LEVEL)
    return FitResult(
        model=PolynomialModel(tuple(coefs)),
        r_squared=r2,
        ci=ci,
        residuals=tuple(residuals.tolist()),
        space=Space(space),
        n_points=n,
        x=tuple(x.tolist()),
        y=tuple(y.tolist()),
        gram_inverse=tuple(tuple(row) for row in gram_inv.tolist()),
    )


def fit_ols(series: CcdfSeries, degree: int) -> FitResult:
    """Fit a survival series at the given degree (1 or 2)."""
    return fit_polynomial(series.x, series.p, degree, series.space)


def select_polynomial(x, y, threshold: float = DEFAULT_THRESHOLD,
                      max_degree: int = 2,
                      space: Space = Space.LINEAR) -> SelectionResult:
    """Lowest degree whose R^2 reaches ``threshold`` percent.

    Degrees are tried in increasing order and fitting stops at the first
    pass, so ``candidates`` holds only the degrees actually tried. If none
    passes, the best candidate is returned with ``passed=False``; ties go to
    the lower degree.
    """
    if max_degree not in FIT_DEGREES:
        raise PreconditionError(f"max_degree must be 1 or 2, got {max_degree}")
    candidates = []
    for degree in range(1, max_degree + 1):
        fit = fit_polynomial(x, y, degree, space)
        candidates.append(fit)
        if fit.r_squared >= threshold:
            return SelectionResult(fit, threshold, tuple(candidates), True)
    best = max(candidates, key=lambda f: f.r_squared)
    return SelectionResult(best, threshold, tuple(candidates), False)


def select_degree(series: CcdfSeries, threshold: float = DEFAULT_THRESHOLD,
                  max_degree: int = 2) -> SelectionResult:
    return select_polynomial(series.x, series.p, threshold, max_degree, series.space)


def invert_ccdf(model: PolynomialModel, p: float, bracket: tuple[float, float]) -> float:
    """Solve ``evaluate(model, x) == p`` by bisection on a decreasing branch.

    The result satisfies ``|evaluate(model, x) - p| <= 1e-9 * max(1, |p|)``.

    Raises
    ------
    MonotonicityError
        The model is not strictly decreasing on ``bracket``.
    BracketError
        ``p`` lies outside ``[model(high), model(low)]``.
    """
    lo, hi = (float(b) for b in bracket)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise PreconditionError(f"bracket must be finite with low < high, got {bracket}")
    slope = PolynomialModel(tuple(np.polyder(np.asarray(model.coefficients))) or (0.0,))
    magnitude = PolynomialModel(tuple(np.abs(slope.coefficients)))

    def sign(x):
        # slopes within rounding of zero (e.g. at a vertex end) count as zero
        s = evaluate(slope, x)
        return 0 if abs(s) <= 16 * np.finfo(float).eps * evaluate(magnitude, abs(x)) else s

    s_lo, s_hi = sign(lo), sign(hi)
    # slope is at most linear, so checking the ends covers the whole bracket
    if s_lo > 0 or s_hi > 0 or (s_lo == 0 and s_hi == 0):
        raise MonotonicityError(f"model is not decreasing on [{lo:g}, {hi:g}]")
    f_lo, f_hi = evaluate(model, lo), evaluate(model, hi)
    if not f_lo >= p >= f_hi:
        raise BracketError(
            f"p={p:g} not within [{f_hi:g}, {f_lo:g}] on [{lo:g}, {hi:g}]")

    x = optimize.bisect(lambda v: evaluate(model, v) - p, lo, hi,
                        xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=5000)
    tol = 1e-9 * max(1.0, abs(p))
    if abs(evaluate(model, x) - p) > tol:
        raise NumericalError(f"bisection did not reach tolerance for p={p:g}")
    return float(x)
