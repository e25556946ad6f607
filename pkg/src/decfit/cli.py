"""``decfit`` command line: fit, gini, correlate, synth.

Exit codes: 0 success, 2 input error, 3 insufficient data, 4 numerical
failure. When some records fail, the remaining results are still written
and the exit code is that of the first failure in input order.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys

import numpy as np

from . import __version__
from .ccdf import Space, build_ccdf, log_transform
from .errors import DecfitError, InputError, InsufficientOverlapError
from .ingest import format_dataset, iter_rows
from .inequality import correlate_yearly, gini_from_deciles
from .polyfit import (
    DEFAULT_LEVEL,
    DEFAULT_THRESHOLD,
    SelectionResult,
    evaluate,
    fit_ols,
    select_degree,
)
from .report import (
    REPORT_VERSION,
    correlation_dict,
    dumps,
    error_dict,
    fit_dict,
    load_report,
    selection_dict,
    source_dict,
)
from .synth import SynthSpec, synthesize_record

log = logging.getLogger("decfit")

EXIT_OK = 0
N_CURVE_SAMPLES = 101
CURVE_HEADER = ("country", "year", "variable", "space", "kind", "x", "p")
EXTERNAL_GINI_HEADER = ("country", "year", "gini")


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8") from None


def _write_text(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _exit_code(records) -> int:
    for rec in records:
        if rec["errors"]:
            return rec["_exit"]
    return EXIT_OK


def _strip_private(records):
    return [{k: v for k, v in r.items() if not k.startswith("_")} for r in records]


# -- fit ---------------------------------------------------------------------

def _select(series, degree, threshold) -> SelectionResult:
    if degree == "auto":
        return select_degree(series, threshold)
    fit = fit_ols(series, degree)
    return SelectionResult(fit, threshold, (fit,), fit.r_squared >= threshold)


def _curve_rows(record, space, series, selection):
    key = (record.country, record.year, record.variable.value, space.value)
    for x, p in zip(series.x, series.p):
        yield (*key, "observed", repr(float(x)), repr(float(p)))
    lo = 0.0 if space is Space.LINEAR else float(series.x.min())
    grid = np.linspace(lo, float(series.x.max()), N_CURVE_SAMPLES)
    fitted = evaluate(selection.chosen.model, grid)
    for x, p in zip(grid, fitted):
        yield (*key, "fitted", repr(float(x)), repr(float(p)))


def fit_record(record, degree="auto", threshold=DEFAULT_THRESHOLD,
               log_log=False, anchor=True, curve_rows=None) -> dict:
    entry = {"source": source_dict(record), "status": "ok",
             "anchor_included": anchor, "selection": {}, "fits": {}, "errors": []}
    try:
        linear = build_ccdf(record, anchor=anchor)
    except DecfitError as exc:
        entry["errors"].append(error_dict(exc))
        entry["_exit"] = exc.exit_code
        entry["status"] = "failed"
        return entry
    spaces = [Space.LINEAR] + ([Space.LOGLOG] if log_log else [])
    for space in spaces:
        try:
            series = linear if space is Space.LINEAR else log_transform(linear)
            sel = _select(series, degree, threshold)
        except DecfitError as exc:
            entry["errors"].append(error_dict(exc, space.value))
            entry.setdefault("_exit", exc.exit_code)
            continue
        entry["selection"][space.value] = selection_dict(sel)
        entry["fits"][space.value] = [fit_dict(f) for f in sel.candidates]
        if curve_rows is not None:
            curve_rows.extend(_curve_rows(record, space, series, sel))
    if entry["errors"]:
        entry["status"] = "failed"
    return entry


def _failed_row(row, exc, **extra) -> dict:
    return {"row": row, "source": None, "status": "failed", **extra,
            "errors": [error_dict(exc)], "_exit": exc.exit_code}


def cmd_fit(args) -> int:
    degree = args.degree if args.degree == "auto" else int(args.degree)
    anchor = not args.no_anchor
    text = _read_text(args.input)
    curve_rows = [] if args.curve_samples else None
    records = []
    for row, item in iter_rows(text):
        if isinstance(item, DecfitError):
            records.append(_failed_row(row, item, anchor_included=anchor,
                                       selection={}, fits={}))
            continue
        entry = fit_record(item, degree, args.r2_threshold, args.log_log,
                           anchor, curve_rows)
        records.append({"row": row, **entry})
    for rec in records:
        for err in rec["errors"]:
            log.error("row %d: %s", rec["row"], err["message"])
    doc = {
        "kind": "fit_report",
        "version": REPORT_VERSION,
        "settings": {"degree": degree, "r2_threshold": args.r2_threshold,
                     "log_log": args.log_log, "anchor_included": anchor,
                     "confidence_level": DEFAULT_LEVEL},
        "records": _strip_private(records),
    }
    _write_text(args.output, dumps(doc))
    if curve_rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        writer.writerows(curve_rows)
        _write_text(args.curve_samples, buf.getvalue())
    return _exit_code(records)


# -- gini --------------------------------------------------------------------

_GINI_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def read_external_gini(text: str) -> dict:
    """Parse a ``country,year,gini`` CSV into ``{(country, year): gini}``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != EXTERNAL_GINI_HEADER:
        raise InputError("external gini: malformed header, row 1")
    values = {}
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != 3:
            raise InputError(f"external gini: wrong column count, row {line}")
        country, year, gini = (c.strip() for c in row)
        if not year.isdigit() or not _GINI_NUMBER.match(gini):
            raise InputError(f"external gini: non-numeric cell, row {line}")
        g = float(gini)
        if not 0.0 <= g <= 1.0:
            raise InputError(f"external gini: value {g} outside [0, 1], row {line}")
        key = (country, int(year))
        if key in values:
            raise InputError(f"external gini: duplicate key {key}, row {line}")
        values[key] = g
    return values


def cmd_gini(args) -> int:
    text = _read_text(args.input)
    external = None
    if args.external_gini:
        external = read_external_gini(_read_text(args.external_gini))
    records = []
    for row, item in iter_rows(text):
        if isinstance(item, DecfitError):
            records.append(_failed_row(row, item, gini=None, gini_source=None,
                                       computed_gini=None, n_groups=None,
                                       warnings=[]))
            continue
        entry = {"row": row, "source": source_dict(item), "status": "ok",
                 "gini": None, "gini_source": None, "computed_gini": None,
                 "n_groups": None, "warnings": [], "errors": []}
        try:
            result = gini_from_deciles(item.means, item.key)
        except DecfitError as exc:
            entry.update(status="failed", errors=[error_dict(exc)], _exit=exc.exit_code)
            records.append(entry)
            continue
        entry.update(gini=result.value, gini_source="computed",
                     computed_gini=result.value, n_groups=result.n_groups)
        if external is not None:
            key = (item.country, item.year)
            if key in external:
                entry.update(gini=external[key], gini_source="external")
            else:
                msg = f"no external gini for {item.country} {item.year}; using computed value"
                entry["warnings"].append(msg)
                log.warning("row %d: %s", row, msg)
        records.append(entry)
    for rec in records:
        for err in rec["errors"]:
            log.error("row %d: %s", rec["row"], err["message"])
    doc = {"kind": "gini_report", "version": REPORT_VERSION,
           "external_gini": str(args.external_gini) if args.external_gini else None,
           "records": _strip_private(records)}
    _write_text(args.output, dumps(doc))
    return _exit_code(records)


# -- correlate ---------------------------------------------------------------

def cmd_correlate(args) -> int:
    fits = load_report(args.fit_report, "fit_report")
    ginis = load_report(args.gini_report, "gini_report")

    r2 = {}
    for rec in fits["records"]:
        sel = rec["selection"].get("linear")
        if rec["source"] is None or sel is None:
            continue
        src = rec["source"]
        r2.setdefault((src["country"], src["variable"]), {})[src["year"]] = sel["r_squared"]
    gini, sources = {}, {}
    for rec in ginis["records"]:
        if rec["source"] is None or rec["gini"] is None:
            continue
        src = rec["source"]
        key = (src["country"], src["variable"])
        gini.setdefault(key, {})[src["year"]] = rec["gini"]
        sources.setdefault(key, {})[src["year"]] = rec["gini_source"]

    reports, errors, warnings = [], [], []
    groups = sorted(set(r2) & set(gini))
    if not groups:
        errors.append({"country": "", "variable": "", "code": InsufficientOverlapError.code,
                       "message": "no (country, variable) group appears in both reports"})
    for key in groups:
        country, variable = key
        try:
            rep = correlate_yearly(r2[key], gini[key], args.split_year)
        except DecfitError as exc:
            errors.append({"country": country, "variable": variable,
                           "code": exc.code, "message": str(exc)})
            continue
        used = [sources[key][y] for y in rep.years]
        if len(set(used)) > 1:
            msg = f"{country}/{variable}: Gini series mixes computed and external values"
            warnings.append(msg)
            log.warning(msg)
        reports.append(correlation_dict(rep, country, variable, used))
    for err in errors:
        log.error("%s/%s: %s", err["country"], err["variable"], err["message"])
    doc = {"kind": "correlation_report", "version": REPORT_VERSION,
           "reports": reports, "errors": errors, "warnings": warnings}
    _write_text(args.output, dumps(doc))
    return InsufficientOverlapError.exit_code if errors else EXIT_OK


# -- synth -------------------------------------------------------------------

def cmd_synth(args) -> int:
    try:
        raw = json.loads(_read_text(args.input))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.input} is not valid JSON: {exc}") from None
    items = raw["specs"] if isinstance(raw, dict) and "specs" in raw else [raw]
    if not isinstance(items, list) or not all(isinstance(i, dict) for i in items):
        raise InputError("synth spec must be an object or {'specs': [objects]}")
    records = []
    for item in items:
        if args.seed is not None:
            item = {**item, "seed": args.seed}
        if args.noise_sigma is not None:
            item = {**item, "noise_sigma": args.noise_sigma}
        records.append(synthesize_record(SynthSpec.from_dict(item)))
    _write_text(args.output, format_dataset(records))
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def _degree(value: str):
    if value not in ("auto", "1", "2"):
        raise argparse.ArgumentTypeError("degree must be auto, 1 or 2")
    return value


def _u64(value: str) -> int:
    n = int(value)
    if not 0 <= n < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decfit",
        description="Fit polynomial survival curves to decile-grouped income data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit polynomials to each record's survival curve")
    p.add_argument("--input", required=True, help="decile CSV")
    p.add_argument("--output", help="fit report JSON (default: stdout)")
    p.add_argument("--degree", type=_degree, default="auto")
    p.add_argument("--r2-threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="percent; default %(default)s")
    p.add_argument("--log-log", action="store_true", help="also fit in log-log space")
    p.add_argument("--no-anchor", action="store_true",
                   help="leave the (0, 100%%) point out of the fit")
    p.add_argument("--curve-samples", help="CSV of observed points and fitted samples")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gini", help="Gini coefficient of each record")
    p.add_argument("--input", required=True)
    p.add_argument("--external-gini", help="CSV country,year,gini overriding computed values")
    p.add_argument("--output")
    p.set_defaults(func=cmd_gini)

    p = sub.add_parser("correlate", help="correlate yearly R^2 with Gini")
    p.add_argument("--fit-report", required=True)
    p.add_argument("--gini-report", required=True)
    p.add_argument("--output")
    p.add_argument("--split-year", type=int,
                   help="also report mean R^2 and Gini before/after this year")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("synth", help="decile records generated from a known model")
    p.add_argument("--input", required=True, help="synth spec JSON")
    p.add_argument("--output")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--noise-sigma", type=float)
    p.set_defaults(func=cmd_synth)
    return parser


def _configure_logging(verbose: bool) -> None:
    # bound to the current sys.stderr on every call; main() may run repeatedly in-process
    for handler in list(log.handlers):
        log.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("decfit: %(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except DecfitError as exc:
        print(f"decfit: {exc}", file=sys.stderr)
        return exc.exit_code


def run():
    sys.exit(main())
