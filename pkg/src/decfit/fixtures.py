"""Published coefficient tables shipped with the package.

``appendix_coefficients.csv`` transcribes the six appendix tables of fitted
coefficients (income for Brazil, Philippine, Singapore, Sweden and the UK;
expenditure for Uganda). Two rows are flagged ``suspect`` and carried as
printed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

from .ingest import Variable
from .polyfit import PolynomialModel


@dataclass(frozen=True)
class AppendixRow:
    appendix: int
    country: str
    variable: Variable
    year: int
    model: PolynomialModel
    r_squared: float
    suspect: bool
    note: str

    @property
    def label(self) -> str:
        return f"{self.country}-{self.year}"


def load_appendix() -> list[AppendixRow]:
    text = resources.files("decfit").joinpath("data/appendix_coefficients.csv").read_text()
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        degree = int(rec["degree"])
        coefs = [float(rec[k]) for k in ("p1", "p2", "p3")[: degree + 1]]
        rows.append(AppendixRow(
            appendix=int(rec["appendix"]),
            country=rec["country"],
            variable=Variable(rec["variable"]),
            year=int(rec["year"]),
            model=PolynomialModel(tuple(coefs)),
            r_squared=float(rec["r_squared"]),
            suspect=rec["suspect"] == "1",
            note=rec["note"],
        ))
    return rows


# equations printed under the two figures
PHILIPPINE_1997 = PolynomialModel((9.289e-11, -0.0001862, 90.89))
UGANDA_2006 = PolynomialModel((-0.0002116, 87.89))
