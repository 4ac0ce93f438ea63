"""Patent record ingestion and corpus selection."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, asdict
from typing import Iterable, TextIO

log = logging.getLogger(__name__)

REQUIRED_FIELDS = ("patent_id", "application_id", "earliest_filing_id")


class CorpusFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class PatentRecord:
    patent_id: str
    application_id: str
    earliest_filing_id: str
    cpc_codes: tuple[str, ...] = ()
    title: str = ""
    abstract: str = ""
    filing_year: int = 0

    def __post_init__(self):
        for name in REQUIRED_FIELDS:
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")

    def to_json(self) -> dict:
        d = asdict(self)
        d["cpc_codes"] = list(self.cpc_codes)
        return d


@dataclass(frozen=True)
class CorpusFilter:
    cpc_prefix: str = "F"
    year_min: int = 2016
    year_max: int = 2021
    require_earliest_in_family: bool = True

    def __post_init__(self):
        if self.year_min > self.year_max:
            raise ValueError("year_min must not exceed year_max")
        if not self.cpc_prefix:
            raise ValueError("cpc_prefix must be non-empty")

    def accepts(self, rec: PatentRecord) -> bool:
        if not any(c.strip().startswith(self.cpc_prefix) for c in rec.cpc_codes):
            return False
        if not self.year_min <= rec.filing_year <= self.year_max:
            return False
        if self.require_earliest_in_family and rec.application_id != rec.earliest_filing_id:
            return False
        return True


@dataclass
class ParseReport:
    records: list[PatentRecord] = field(default_factory=list)
    errors: list[CorpusFormatError] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _record_from_mapping(row: dict, line: int, report: ParseReport) -> PatentRecord:
    missing = [k for k in REQUIRED_FIELDS if not row.get(k)]
    if missing:
        raise CorpusFormatError(line, f"missing required field(s): {', '.join(missing)}")
    cpc = row.get("cpc_codes") or []
    if isinstance(cpc, str):
        cpc = [c for c in cpc.split("|") if c.strip()]
    if not isinstance(cpc, list) or not all(isinstance(c, str) for c in cpc):
        raise CorpusFormatError(line, "cpc_codes must be a list of strings")
    abstract = row.get("abstract")
    if abstract is None:
        report.warnings.append(f"line {line}: no abstract, using empty text")
        abstract = ""
    year = row.get("filing_year")
    try:
        year = int(year) if year not in (None, "") else 0
    except (TypeError, ValueError):
        raise CorpusFormatError(line, f"filing_year is not an integer: {year!r}") from None
    return PatentRecord(
        patent_id=str(row["patent_id"]),
        application_id=str(row["application_id"]),
        earliest_filing_id=str(row["earliest_filing_id"]),
        cpc_codes=tuple(c.strip() for c in cpc),
        title=str(row.get("title") or ""),
        abstract=str(abstract),
        filing_year=year,
    )


def _iter_rows(stream: TextIO, fmt: str) -> Iterable[tuple[int, dict | None, str | None]]:
    if fmt == "jsonl":
        for lineno, raw in enumerate(stream, 1):
            if not raw.strip():
                continue
            try:
                row = json.loads(raw)
            except json.JSONDecodeError as e:
                yield lineno, None, f"invalid JSON ({e.msg})"
                continue
            if not isinstance(row, dict):
                yield lineno, None, "record is not a JSON object"
                continue
            yield lineno, row, None
    elif fmt == "csv":
        reader = csv.DictReader(stream)
        for row in reader:
            # header is line 1
            yield reader.line_num, row, None
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")


def parse_corpus_report(stream: TextIO, fmt: str = "jsonl", strict: bool = False) -> ParseReport:
    report = ParseReport()
    for lineno, row, problem in _iter_rows(stream, fmt):
        try:
            if problem is not None:
                raise CorpusFormatError(lineno, problem)
            report.records.append(_record_from_mapping(row, lineno, report))
        except CorpusFormatError as e:
            if strict:
                raise
            report.errors.append(e)
            log.warning("skipping record: %s", e)
    for w in report.warnings:
        log.warning(w)
    return report


def parse_corpus_file(stream: TextIO, fmt: str = "jsonl", strict: bool = False) -> list[PatentRecord]:
    """Read patent records from a JSONL or CSV stream, in input order.

    Malformed records are logged and skipped unless ``strict`` is set, in
    which case the first one raises :class:`CorpusFormatError`.
    """
    return parse_corpus_report(stream, fmt, strict).records


def filter_corpus(records: Iterable[PatentRecord], flt: CorpusFilter | None = None) -> list[PatentRecord]:
    flt = flt or CorpusFilter()
    return [r for r in records if flt.accepts(r)]


def write_corpus_jsonl(records: Iterable[PatentRecord], sink: TextIO) -> None:
    for r in records:
        sink.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")
