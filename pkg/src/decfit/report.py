"""JSON report documents and their schemas.

Three document kinds are produced by the CLI: ``fit_report``,
``gini_report`` and ``correlation_report``. Their JSON Schemas ship in
``decfit/schemas``; :func:`validate` checks a document against the one named
by its ``kind`` field.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

from .errors import DecfitError, InputError
from .inequality import CorrelationReport, GiniResult
from .ingest import DecileRecord
from .polyfit import FitResult, SelectionResult

REPORT_VERSION = 1
KINDS = ("fit_report", "gini_report", "correlation_report")


@lru_cache(maxsize=None)
def load_schema(kind: str) -> dict:
    if kind not in KINDS:
        raise InputError(f"unknown report kind {kind!r}")
    text = resources.files("decfit").joinpath(f"schemas/{kind}.schema.json").read_text()
    return json.loads(text)


def validate(doc: dict) -> None:
    """Raise :class:`InputError` unless ``doc`` matches its declared schema."""
    kind = doc.get("kind") if isinstance(doc, dict) else None
    schema = load_schema(kind) if kind in KINDS else None
    if schema is None:
        raise InputError(f"document has no known 'kind' (got {kind!r})")
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise InputError(f"{kind} invalid at '{path}': {exc.message}") from None


def load_report(path, kind: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    validate(doc)
    if doc["kind"] != kind:
        raise InputError(f"{path}: expected a {kind}, got a {doc['kind']}")
    return doc


def source_dict(record: DecileRecord) -> dict:
    return {
        "country": record.country,
        "year": record.year,
        "variable": record.variable.value,
        "currency": record.currency,
    }


def error_dict(exc: DecfitError, space=None) -> dict:
    return {"code": exc.code, "message": str(exc), "space": space}


def _pairs(ci):
    return [[lo, hi] for lo, hi in ci]


def fit_dict(fit: FitResult) -> dict:
    return {
        "degree": fit.degree,
        "coefficients": list(fit.model.coefficients),
        "r_squared": fit.r_squared,
        "ci": _pairs(fit.ci),
        "residuals": list(fit.residuals),
        "n_points": fit.n_points,
        "space": fit.space.value,
    }


def selection_dict(sel: SelectionResult) -> dict:
    fit = sel.chosen
    return {
        "degree": fit.degree,
        "coefficients": list(fit.model.coefficients),
        "r_squared": fit.r_squared,
        "ci": _pairs(fit.ci),
        "passed": sel.passed,
        "threshold": sel.threshold,
        "n_points": fit.n_points,
    }


def gini_dict(result: GiniResult) -> dict:
    return {"value": result.value, "n_groups": result.n_groups}


def correlation_dict(report: CorrelationReport, country: str, variable: str,
                     gini_sources) -> dict:
    return {
        "country": country,
        "variable": variable,
        "years": list(report.years),
        "r2_series": list(report.r2_series),
        "gini_series": list(report.gini_series),
        "pearson_r": report.pearson_r,
        "verdict": report.verdict.value,
        "gini_sources": sorted(set(gini_sources)),
        "intervals": [
            {"label": label, "first_year": first, "last_year": last,
             "mean_r2": mean_r2, "mean_gini": mean_gini}
            for label, first, last, mean_r2, mean_gini in report.intervals
        ],
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"
