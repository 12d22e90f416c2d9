"""Record types and CSV ingestion for effect, search-space and prevalence data."""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from importlib import resources

from pvaudit.errors import (
    AuditError,
    DegenerateIntervalError,
    InvalidArgumentError,
    RatioDomainError,
    RowError,
    SchemaError,
)

log = logging.getLogger(__name__)

EFFECT_COLUMNS = ("study_id", "first_author", "pub_year", "subgroup", "rr", "lcl", "ucl")
EFFECT_OPTIONAL = ("conf_level", "reported_p")
SEARCHSPACE_COLUMNS = ("study_id", "outcomes", "predictors", "models", "lags", "covariates")
SEARCHSPACE_OPTIONAL = ("space1", "space2", "space3")
PREVALENCE_COLUMNS = ("disease", "prevalence", "note")

MAX_COVARIATES = 62

# label -> bundled file, with the record count each source table reports
FIXTURES = {
    "CO": ("zheng_co.csv", 42),
    "NO2": ("zheng_no2.csv", 66),
    "O3": ("zheng_o3.csv", 71),
    "PM2.5": ("zheng_pm25.csv", 37),
    "PM10": ("zheng_pm10.csv", 51),
    "SO2": ("zheng_so2.csv", 65),
    "CML": ("schnatter_cml.csv", 12),
    "Mesothelioma": ("schnatter_meso.csv", 10),
    "Exercise": ("barreto_exercise.csv", 69),
    "Smoking": ("lee_smoking.csv", 102),
}
POLLUTANTS = ("CO", "NO2", "O3", "PM2.5", "PM10", "SO2")
SEARCHSPACE_FIXTURE = "table3_searchspace.csv"
PREVALENCE_FIXTURE = "table1_prevalence.csv"


@dataclass(frozen=True)
class EffectRecord:
    study_id: str
    first_author: str
    pub_year: int | None
    subgroup: str | None
    rr: float
    lcl: float
    ucl: float
    conf_level: float = 0.95
    reported_p: float | None = None

    def __post_init__(self):
        for name in ("rr", "lcl", "ucl"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidArgumentError(f"{name} is not finite: {v!r}")
        if self.rr <= 0 or self.lcl <= 0 or self.ucl <= 0:
            raise RatioDomainError(
                f"{self.study_id}: ratio values must be positive "
                f"(rr={self.rr}, lcl={self.lcl}, ucl={self.ucl})"
            )
        if self.lcl >= self.ucl:
            raise DegenerateIntervalError(
                f"{self.study_id}: lcl {self.lcl} is not below ucl {self.ucl}"
            )
        if not 0.0 < self.conf_level < 1.0:
            raise InvalidArgumentError(f"{self.study_id}: conf_level {self.conf_level} outside (0, 1)")

    @property
    def inconsistent_interval(self):
        """Point estimate lies outside its own interval (kept, but flagged)."""
        return not self.lcl <= self.rr <= self.ucl

    @property
    def flags(self):
        return ("inconsistent_interval",) if self.inconsistent_interval else ()


@dataclass(frozen=True)
class PollutantDataset:
    label: str
    records: tuple
    diagnostics: tuple = ()
    row_errors: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise AuditError(f"dataset {self.label!r} has no records")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


@dataclass(frozen=True)
class SearchSpaceRecord:
    study_id: str
    outcomes: int
    predictors: int
    models: int
    lags: int
    covariates: int
    reported_spaces: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("outcomes", "predictors", "models", "lags"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{self.study_id}: {name} must be >= 1")
        if not 0 <= self.covariates <= MAX_COVARIATES:
            raise InvalidArgumentError(
                f"{self.study_id}: covariates must be in [0, {MAX_COVARIATES}], got {self.covariates}"
            )


@dataclass(frozen=True)
class PrevalenceRecord:
    disease: str
    prevalence: float
    population_note: str = ""

    def __post_init__(self):
        if not 0.0 < self.prevalence < 1.0:
            raise InvalidArgumentError(f"{self.disease}: prevalence {self.prevalence} outside (0, 1)")


def _reader(stream, required, optional=()):
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    header = reader.fieldnames
    if not header:
        raise SchemaError("empty input: no header row")
    header = [h.strip() for h in header]
    reader.fieldnames = header
    for col in required:
        if col not in header:
            raise SchemaError(f"missing column {col!r}", column=col)
    unknown = [h for h in header if h not in required and h not in optional]
    if unknown:
        raise SchemaError(f"unexpected column(s): {', '.join(unknown)}", column=unknown[0])
    return reader


def _float(row, col, idx, blank_ok=False):
    text = (row.get(col) or "").strip()
    if not text:
        if blank_ok:
            return None
        raise RowError(idx, f"{col} is empty")
    try:
        v = float(text)
    except ValueError:
        raise RowError(idx, f"{col} is not numeric: {text!r}") from None
    if not math.isfinite(v):
        raise RowError(idx, f"{col} is not finite: {text!r}")
    return v


def _int(row, col, idx):
    text = (row.get(col) or "").strip()
    try:
        return int(text)
    except ValueError:
        raise RowError(idx, f"{col} is not an integer: {text!r}") from None


def _effect_row(row, idx):
    year_text = (row.get("pub_year") or "").strip()
    year = _int(row, "pub_year", idx) if year_text else None
    conf = _float(row, "conf_level", idx, blank_ok=True)
    try:
        return EffectRecord(
            study_id=row["study_id"].strip(),
            first_author=row["first_author"].strip(),
            pub_year=year,
            subgroup=(row.get("subgroup") or "").strip() or None,
            rr=_float(row, "rr", idx),
            lcl=_float(row, "lcl", idx),
            ucl=_float(row, "ucl", idx),
            conf_level=0.95 if conf is None else conf,
            reported_p=_float(row, "reported_p", idx, blank_ok=True),
        )
    except RowError:
        raise
    except AuditError as exc:
        err = RowError(idx, str(exc))
        err.cause = exc
        raise err from exc


def parse_effect_csv(stream, label, *, strict=True, expected_count=None):
    """Parse an effect CSV into a :class:`PollutantDataset`.

    With ``strict=False`` malformed rows are skipped and kept in
    ``row_errors``; otherwise the first one raises :class:`RowError`.
    A record count differing from ``expected_count`` adds a diagnostic
    but never fails.
    """
    reader = _reader(stream, EFFECT_COLUMNS, EFFECT_OPTIONAL)
    records, errors, notes = [], [], []
    seen = set()
    for idx, row in enumerate(reader, start=1):
        try:
            rec = _effect_row(row, idx)
        except RowError as exc:
            if strict:
                raise
            errors.append(exc)
            continue
        key = (rec.study_id, rec.subgroup)
        if key in seen:
            msg = f"duplicate study_id/subgroup {key} at row {idx}"
            log.warning("%s: %s", label, msg)
            notes.append(msg)
        seen.add(key)
        if rec.inconsistent_interval:
            notes.append(
                f"{rec.study_id}: rr {rec.rr} outside [{rec.lcl}, {rec.ucl}] (inconsistent_interval)"
            )
        records.append(rec)
    if not records:
        raise SchemaError(f"{label}: no valid data rows")
    if expected_count is not None and len(records) != expected_count:
        notes.append(f"count mismatch: parsed {len(records)} records, source reports {expected_count}")
    return PollutantDataset(label, records, tuple(notes), tuple(errors))


def _fmt(v):
    return "" if v is None else repr(v)


def write_effect_csv(dataset, stream):
    has_conf = any(r.conf_level != 0.95 for r in dataset)
    has_rep = any(r.reported_p is not None for r in dataset)
    cols = list(EFFECT_COLUMNS) + (["conf_level"] if has_conf else []) + (["reported_p"] if has_rep else [])
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(cols)
    for r in dataset:
        row = [r.study_id, r.first_author, "" if r.pub_year is None else r.pub_year,
               r.subgroup or "", repr(r.rr), repr(r.lcl), repr(r.ucl)]
        if has_conf:
            row.append(repr(r.conf_level))
        if has_rep:
            row.append(_fmt(r.reported_p))
        w.writerow(row)


def dumps_effect_csv(dataset):
    buf = io.StringIO()
    write_effect_csv(dataset, buf)
    return buf.getvalue()


def parse_searchspace_csv(stream, *, strict=True):
    reader = _reader(stream, SEARCHSPACE_COLUMNS, SEARCHSPACE_OPTIONAL)
    out = []
    for idx, row in enumerate(reader, start=1):
        try:
            counts = [_int(row, c, idx) for c in SEARCHSPACE_COLUMNS[1:]]
            reported = None
            if all((row.get(c) or "").strip() for c in SEARCHSPACE_OPTIONAL):
                reported = tuple(_int(row, c, idx) for c in SEARCHSPACE_OPTIONAL)
            try:
                out.append(SearchSpaceRecord(row["study_id"].strip(), *counts, reported_spaces=reported))
            except AuditError as exc:
                raise RowError(idx, str(exc)) from exc
        except RowError:
            if strict:
                raise
            log.warning("skipping search-space row %d", idx)
    return out


def parse_prevalence_csv(stream):
    reader = _reader(stream, PREVALENCE_COLUMNS)
    out = []
    for idx, row in enumerate(reader, start=1):
        p = _float(row, "prevalence", idx)
        try:
            out.append(PrevalenceRecord(row["disease"].strip(), p, (row.get("note") or "").strip()))
        except AuditError as exc:
            raise RowError(idx, str(exc)) from exc
    return out


def fixture_text(filename):
    return resources.files("pvaudit").joinpath("data", filename).read_text(encoding="utf-8")


def load_fixture(label):
    """Load a bundled effect dataset by label (e.g. ``"PM2.5"``, ``"CML"``)."""
    try:
        filename, expected = FIXTURES[label]
    except KeyError:
        raise InvalidArgumentError(f"unknown fixture {label!r}; choose from {sorted(FIXTURES)}") from None
    return parse_effect_csv(fixture_text(filename), label, expected_count=expected)


def load_searchspace_fixture():
    return parse_searchspace_csv(fixture_text(SEARCHSPACE_FIXTURE))


def load_prevalence_fixture():
    return parse_prevalence_csv(fixture_text(PREVALENCE_FIXTURE))


def label_for_file(stem):
    """Dataset label for a file stem, using the bundled naming when it matches."""
    for label, (filename, _) in FIXTURES.items():
        if filename.rsplit(".", 1)[0] == stem:
            return label
    return stem
