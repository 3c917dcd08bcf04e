"""Event records: ingestion, validation, salience filtering, collisions.

An event is identified by its fingerprint, the triple of event class,
country, and start date. Stores are immutable after load and keep
insertion order, so every downstream artifact is deterministic.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterator

from .countries import CountryTable, default_table
from .errors import EventStoreError, UnknownCountryError

logger = logging.getLogger(__name__)

BASE_CLASSES = frozenset(
    {"earthquake", "flood", "avalanche", "storm", "landslide", "volcano", "wildfire", "attack"}
)

SOURCES = ("EMDAT", "USGS", "GTD", "other")

_CLASS_RE = re.compile(r"[a-z0-9_]+")

_COLUMNS = ("id", "class", "country", "start_date", "deaths", "casualties", "source")


def normalize_class(label: str) -> str:
    """Lowercase an event-class label, mapping spaces/hyphens to `_`."""
    name = re.sub(r"[\s\-]+", "_", label.strip().casefold())
    if not name or not _CLASS_RE.fullmatch(name):
        raise EventStoreError(f"invalid event class label {label!r}")
    return name


@dataclass(frozen=True)
class EventFingerprint:
    """The ⟨class, country, start date⟩ triple identifying an event."""

    event_class: str
    country: str
    start_date: date

    def key(self) -> str:
        return f"{self.event_class}|{self.country}|{self.start_date.isoformat()}"


@dataclass(frozen=True)
class EventRecord:
    id: str
    fingerprint: EventFingerprint
    deaths: int | None = None
    casualties: int | None = None
    source: str = "other"
    raw: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.deaths is not None and self.deaths < 0:
            raise EventStoreError(f"event {self.id}: negative deaths")
        if self.casualties is not None and self.casualties < 0:
            raise EventStoreError(f"event {self.id}: negative casualties")
        if self.deaths is not None and self.casualties is not None and self.deaths > self.casualties:
            raise EventStoreError(f"event {self.id}: deaths exceed casualties")


class EventStore:
    """Ordered, immutable collection of records with a fingerprint index."""

    def __init__(self, records: list[EventRecord], rejected: list[tuple[int, str]] | None = None):
        self._records: list[EventRecord] = list(records)
        self._by_id: dict[str, EventRecord] = {}
        self._index: dict[EventFingerprint, list[str]] = {}
        for rec in self._records:
            if rec.id in self._by_id:
                raise EventStoreError(f"duplicate event id {rec.id!r}")
            self._by_id[rec.id] = rec
            self._index.setdefault(rec.fingerprint, []).append(rec.id)
        self.rejected: tuple[tuple[int, str], ...] = tuple(rejected or ())

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, event_id: str) -> bool:
        return event_id in self._by_id

    def get(self, event_id: str) -> EventRecord:
        try:
            return self._by_id[event_id]
        except KeyError:
            raise EventStoreError(f"unknown event id {event_id!r}") from None

    @property
    def index(self) -> dict[EventFingerprint, list[str]]:
        return {fp: list(ids) for fp, ids in self._index.items()}

    def ids(self) -> list[str]:
        return [r.id for r in self._records]

    def records_for(self, fingerprint: EventFingerprint) -> list[EventRecord]:
        return [self._by_id[i] for i in self._index.get(fingerprint, [])]


def load_events(
    path: str | Path,
    format: str | None = None,
    mapping: dict[str, str] | None = None,
    strict: bool = False,
    countries: CountryTable | None = None,
) -> EventStore:
    """Load events from CSV or JSONL.

    `mapping` renames logical columns (class, country, start_date,
    deaths, casualties, source, id) to the file's own headers. Rows with
    unparseable mandatory fields are rejected and reported with their
    1-based data row numbers; in strict mode any rejection fails the
    load.
    """
    path = Path(path)
    if not path.exists():
        raise EventStoreError(f"events file not found: {path}")
    if format is None:
        format = "jsonl" if path.suffix in (".jsonl", ".ndjson") else "csv"
    if format not in ("csv", "jsonl"):
        raise EventStoreError(f"unknown events format {format!r}")
    table = countries if countries is not None else default_table()
    colmap = {c: c for c in _COLUMNS}
    if mapping:
        colmap.update(mapping)

    rows: list[dict[str, str]]
    if format == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [dict(r) for r in csv.DictReader(fh)]
    else:
        rows = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise EventStoreError(f"{path}:{lineno}: invalid JSON: {exc}") from None
                rows.append({str(k): "" if v is None else str(v) for k, v in obj.items()})

    records: list[EventRecord] = []
    rejected: list[tuple[int, str]] = []
    for rownum, row in enumerate(rows, 1):
        try:
            records.append(_parse_row(row, rownum, colmap, table))
        except (EventStoreError, UnknownCountryError) as exc:
            rejected.append((rownum, str(exc)))
    if rejected:
        summary = "; ".join(f"row {n}: {msg}" for n, msg in rejected[:20])
        if strict:
            raise EventStoreError(f"{len(rejected)} rejected rows in {path}: {summary}")
        logger.warning("%s: rejected %d rows (%s)", path, len(rejected), summary)
    return EventStore(records, rejected=rejected)


def _parse_row(
    row: dict[str, str], rownum: int, colmap: dict[str, str], table: CountryTable
) -> EventRecord:
    def cell(logical: str) -> str:
        return (row.get(colmap[logical]) or "").strip()

    cls_raw = cell("class")
    if not cls_raw:
        raise EventStoreError("missing event class")
    event_class = normalize_class(cls_raw)
    country_raw = cell("country")
    if not country_raw:
        raise EventStoreError("missing country")
    country = table.resolve(country_raw)
    date_raw = cell("start_date")
    if not date_raw:
        raise EventStoreError("missing start_date")
    try:
        start = date.fromisoformat(date_raw)
    except ValueError:
        raise EventStoreError(f"invalid start_date {date_raw!r}") from None
    source = cell("source") or "other"
    event_id = cell("id") or f"{source}:{rownum}"
    return EventRecord(
        id=event_id,
        fingerprint=EventFingerprint(event_class, country, start),
        deaths=_parse_count(cell("deaths"), "deaths"),
        casualties=_parse_count(cell("casualties"), "casualties"),
        source=source,
        raw=tuple(sorted((str(k), "" if v is None else str(v)) for k, v in row.items())),
    )


def _parse_count(value: str, name: str) -> int | None:
    if not value:
        return None
    try:
        n = int(value)
    except ValueError:
        raise EventStoreError(f"invalid {name} {value!r}") from None
    if n < 0:
        raise EventStoreError(f"negative {name} {value!r}")
    return n


def save_events(store: EventStore, path: str | Path, format: str | None = None) -> None:
    """Write the canonical columns; CSV or JSONL by extension/`format`."""
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix in (".jsonl", ".ndjson") else "csv"
    if format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(_COLUMNS)
            for rec in store:
                writer.writerow(
                    [
                        rec.id,
                        rec.fingerprint.event_class,
                        rec.fingerprint.country,
                        rec.fingerprint.start_date.isoformat(),
                        "" if rec.deaths is None else rec.deaths,
                        "" if rec.casualties is None else rec.casualties,
                        rec.source,
                    ]
                )
    elif format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for rec in store:
                obj = {
                    "id": rec.id,
                    "class": rec.fingerprint.event_class,
                    "country": rec.fingerprint.country,
                    "start_date": rec.fingerprint.start_date.isoformat(),
                    "source": rec.source,
                }
                if rec.deaths is not None:
                    obj["deaths"] = rec.deaths
                if rec.casualties is not None:
                    obj["casualties"] = rec.casualties
                fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")
    else:
        raise EventStoreError(f"unknown events format {format!r}")


def filter_gtd_salience(store: EventStore) -> EventStore:
    """Keep salient attack records: casualties > 10, or top 3 per country.

    Applies to source=GTD records only; others pass through unchanged.
    Missing casualty counts are treated as 0. Ties at rank 3 break by
    earlier date, then id.
    """
    gtd = [r for r in store if r.source.upper() == "GTD"]
    by_country: dict[str, list[EventRecord]] = {}
    for rec in gtd:
        by_country.setdefault(rec.fingerprint.country, []).append(rec)
    keep: set[str] = set()
    for recs in by_country.values():
        ranked = sorted(
            recs,
            key=lambda r: (-(r.casualties or 0), r.fingerprint.start_date, r.id),
        )
        for rec in ranked[:3]:
            keep.add(rec.id)
        for rec in recs:
            if (rec.casualties or 0) > 10:
                keep.add(rec.id)
    kept = [r for r in store if r.source.upper() != "GTD" or r.id in keep]
    return EventStore(kept)


def check_fingerprint_collisions(store: EventStore) -> dict[str, list[str]]:
    """Every fingerprint shared by ≥2 records, keyed `class|CODE|date`."""
    report: dict[str, list[str]] = {}
    for fp, ids in store.index.items():
        if len(ids) > 1:
            report[fp.key()] = sorted(ids)
    return report
