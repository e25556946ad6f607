"""Synthetic decile data generated from a known survival model.

Used for round-trip checks: data generated from published coefficients must
refit to the same coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ccdf import DECILE_LEVELS, CcdfPoint, CcdfSeries, Space
from .errors import BracketError, InputError, MonotonicityError, NumericalError
from .ingest import DecileRecord, Variable, validate_record
from .polyfit import PolynomialModel, evaluate, invert_ccdf

_MAX_DOUBLINGS = 2000


@dataclass(frozen=True)
class SynthSpec:
    model: PolynomialModel
    noise_sigma: float = 0.0
    seed: int = 0
    country: str = "synthetic"
    year: int = 2000
    variable: Variable = Variable.INCOME
    currency: str = "unit"

    def __post_init__(self):
        if not self.noise_sigma >= 0:
            raise InputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        try:
            model = data["model"]
            coefs = model["coefficients"] if isinstance(model, dict) else model
            rec = data.get("record", {})
            return cls(
                model=PolynomialModel(tuple(coefs)),
                noise_sigma=float(data.get("noise_sigma", 0.0)),
                seed=int(data.get("seed", 0)),
                country=str(rec.get("country", "synthetic")),
                year=int(rec.get("year", 2000)),
                variable=Variable(rec.get("variable", "income")),
                currency=str(rec.get("currency", "unit")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"bad synth spec: {exc}") from None


def decreasing_extent(model: PolynomialModel, start: float = 0.0,
                      floor: float = 0.0) -> tuple[float, float]:
    """Finite bracket ``[start, end]`` on which ``model`` strictly decreases.

    For a convex quadratic ``end`` is the vertex. Otherwise the model
    decreases without bound and ``end`` is pushed out until the model drops
    below ``floor``.
    """
    coefs = model.coefficients
    slope = np.polyder(np.asarray(coefs))
    if model.degree == 0 or np.polyval(slope, start) >= 0:
        raise MonotonicityError(f"model is not decreasing at x={start:g}")
    if model.degree == 2 and coefs[0] > 0:
        return (start, -coefs[1] / (2.0 * coefs[0]))
    step = max(1.0, abs(start))
    for _ in range(_MAX_DOUBLINGS):
        end = start + step
        if evaluate(model, end) < floor:
            return (start, end)
        step *= 2.0
    raise NumericalError("could not bracket the decreasing branch")


def perturbed_levels(sigma: float, seed: int) -> np.ndarray:
    """Decile survival levels with Gaussian noise, kept in (0, 100] and ordered."""
    levels = np.array(DECILE_LEVELS)
    if sigma == 0:
        return levels
    rng = np.random.default_rng(seed)
    noisy = levels + rng.normal(0.0, sigma, size=levels.size)
    noisy = np.clip(noisy, np.finfo(float).tiny, 100.0)
    return np.sort(noisy)[::-1]


def synthesize_means(spec: SynthSpec) -> tuple[float, ...]:
    """Decile means whose survival points lie on ``spec.model``.

    Each level is inverted on the model's decreasing branch starting at
    ``x = 0``. A level above ``model(0)`` would need a negative mean, and a
    level below the branch minimum has no preimage; both raise
    :class:`BracketError`.
    """
    levels = perturbed_levels(spec.noise_sigma, spec.seed)
    bracket = decreasing_extent(spec.model, 0.0, float(levels.min()))
    means = []
    for level in levels:
        try:
            means.append(invert_ccdf(spec.model, float(level), bracket))
        except BracketError:
            lo, hi = evaluate(spec.model, bracket[0]), evaluate(spec.model, bracket[1])
            raise BracketError(
                f"survival level {level:g}% is not reached for x >= 0: "
                f"the model spans [{hi:g}, {lo:g}] on its decreasing branch") from None
    return tuple(means)


def synthesize_record(spec: SynthSpec) -> DecileRecord:
    record = DecileRecord(spec.country, spec.year, spec.variable, spec.currency,
                          synthesize_means(spec))
    violations = validate_record(record)
    if violations:
        raise NumericalError("synthesized record is invalid: " + ", ".join(violations))
    return record


def sample_on_curve(model: PolynomialModel, levels=DECILE_LEVELS,
                    source=None) -> CcdfSeries:
    """Survival points taken exactly on ``model`` for ``x >= 0``.

    Returns the intercept point ``(0, model(0))`` followed by the inverse of
    every level the decreasing branch actually attains. Unlike
    :func:`synthesize_means` this never fails for a model that is decreasing
    at zero: levels above the intercept or below the branch minimum are
    skipped.
    """
    levels = sorted((float(v) for v in levels), reverse=True)
    bracket = decreasing_extent(model, 0.0, min(levels))
    top = evaluate(model, bracket[0])
    bottom = evaluate(model, bracket[1])
    points = [CcdfPoint(0.0, top)]
    for level in levels:
        if bottom <= level < top:
            points.append(CcdfPoint(invert_ccdf(model, level, bracket), level))
    return CcdfSeries(tuple(points), Space.LINEAR, source)
