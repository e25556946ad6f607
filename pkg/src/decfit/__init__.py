"""Polynomial survival-curve fits for decile-grouped income and expenditure."""

__version__ = "0.1.0"

from .ccdf import CcdfPoint, CcdfSeries, Space, build_ccdf, log_transform
from .ingest import DecileRecord, Dataset, Variable, format_dataset, parse_dataset, validate_record
from .inequality import (
    CorrelationReport,
    GiniResult,
    Verdict,
    gini_from_deciles,
    pearson_correlation,
    r2_gini_correlation,
)
from .polyfit import (
    FitResult,
    PolynomialModel,
    SelectionResult,
    confidence_intervals,
    evaluate,
    fit_ols,
    fit_polynomial,
    implied_density,
    invert_ccdf,
    r_squared,
    select_degree,
    t_quantile,
)
