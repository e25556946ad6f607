"""Reading and validating decile-grouped datasets.

A dataset is a CSV file with the fixed header::

    country,year,variable,currency,d1,d2,d3,d4,d5,d6,d7,d8,d9,d10

where ``d1`` .. ``d10`` are the mean income (or expenditure) of each decile,
poorest first.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import DatasetError

N_DECILES = 10
DECILE_COLUMNS = tuple(f"d{i}" for i in range(1, N_DECILES + 1))
HEADER = ("country", "year", "variable", "currency") + DECILE_COLUMNS

# plain decimal or scientific notation; no decimal commas, no inf/nan
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_YEAR = re.compile(r"^\d{1,4}$")


class Variable(str, enum.Enum):
    INCOME = "income"
    EXPENDITURE = "expenditure"


@dataclass(frozen=True)
class DecileRecord:
    """One country/year observation of decile means.

    ``means[0]`` is the mean of the poorest decile. Construction does not
    validate; use :func:`validate_record`.
    """

    country: str
    year: int
    variable: Variable
    currency: str
    means: tuple[float, ...]

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.country, self.year, self.variable.value)


@dataclass(frozen=True)
class Dataset:
    records: tuple[DecileRecord, ...]
    source_note: str = field(default="")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def validate_record(record: DecileRecord) -> list[str]:
    """Return the invariant violations of ``record`` as short codes.

    Codes: ``wrong_count``, ``non_finite``, ``negative_mean``,
    ``non_monotone``, ``nonpositive_top``. An empty list means the record is
    valid. Equal adjacent means are allowed.
    """
    means = record.means
    violations = []
    if len(means) != N_DECILES:
        violations.append("wrong_count")
    if not all(math.isfinite(m) for m in means):
        violations.append("non_finite")
        return violations
    if any(m < 0 for m in means):
        violations.append("negative_mean")
    if any(b < a for a, b in zip(means, means[1:])):
        violations.append("non_monotone")
    if not means or means[-1] <= 0:
        violations.append("nonpositive_top")
    return violations


def _parse_number(text: str) -> float:
    if not _NUMBER.match(text):
        raise ValueError(text)
    return float(text)


def _row_to_record(row: Sequence[str]) -> DecileRecord:
    if len(row) != len(HEADER):
        raise ValueError("wrong column count")
    country, year, variable, currency = (c.strip() for c in row[:4])
    if not country:
        raise ValueError("empty country")
    if not _YEAR.match(year):
        raise ValueError(f"invalid year {year!r}")
    try:
        var = Variable(variable)
    except ValueError:
        raise ValueError(f"unknown variable {variable!r}") from None
    means = []
    for col, cell in zip(DECILE_COLUMNS, row[4:]):
        try:
            means.append(_parse_number(cell.strip()))
        except ValueError:
            raise ValueError(f"non-numeric decile cell {col}={cell!r}") from None
    record = DecileRecord(country, int(year), var, currency, tuple(means))
    violations = validate_record(record)
    if violations:
        raise ValueError("invalid record: " + ", ".join(violations))
    return record


def iter_rows(csv_text: str) -> Iterator[tuple[int, DecileRecord | DatasetError]]:
    """Yield ``(row_number, record_or_error)`` for each data row.

    Lenient counterpart of :func:`parse_dataset` used when partial results
    are wanted. A bad header still raises immediately. Row numbers are
    1-based physical lines, so the first data row is row 2.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError([(1, "malformed header: empty input")]) from None
    if tuple(header) != HEADER:
        raise DatasetError([(1, "malformed header")])
    seen: dict[tuple, int] = {}
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        try:
            record = _row_to_record(row)
        except ValueError as exc:
            yield line, DatasetError([(line, str(exc))])
            continue
        if record.key in seen:
            msg = f"duplicate key {record.key} (first seen at row {seen[record.key]})"
            yield line, DatasetError([(line, msg)])
            continue
        seen[record.key] = line
        yield line, record


def parse_dataset(csv_text: str, source_note: str = "") -> Dataset:
    """Parse CSV text into a validated :class:`Dataset`.

    Raises
    ------
    DatasetError
        If the header is wrong or any row is invalid. All row problems are
        collected before raising, each tagged with its row number.
    """
    records, errors = [], []
    for _, item in iter_rows(csv_text):
        if isinstance(item, DatasetError):
            errors.extend(item.errors)
        else:
            records.append(item)
    if errors:
        raise DatasetError(errors)
    return Dataset(tuple(records), source_note)


def format_dataset(dataset: Dataset | Sequence[DecileRecord]) -> str:
    """Serialise records back to CSV; floats use ``repr`` so parsing round-trips."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in dataset:
        writer.writerow([r.country, r.year, r.variable.value, r.currency,
                         *(repr(float(m)) for m in r.means)])
    return buf.getvalue()
