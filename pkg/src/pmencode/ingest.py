"""Reading and writing event logs (XES and CSV) and checking them.

XES support covers ``log``/``trace``/``event`` with ``string``, ``date``,
``int``, ``float``, ``boolean`` and ``id`` attributes.  Standard keys are
renamed on the way in:

==================  =============================
XES key             attribute
==================  =============================
``concept:name``    ``activity`` (event), case id (trace)
``time:timestamp``  ``timestamp``
``org:resource``    ``resource``
==================  =============================

Every other key is kept verbatim.  Extensions, globals, classifiers and
nested ``list``/``container`` attributes are skipped with a warning.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Any, Iterable, Union

from .errors import ConfigError, ParseError, ValidationError
from .log import ABSENT, ACTIVITY, TIMESTAMP, Case, Event, EventLog, Timestamp, value_kind

logger = logging.getLogger(__name__)

Source = Union[bytes, str, "os.PathLike[str]", IO[bytes]]

XES_KEYS = {"concept:name": ACTIVITY, "time:timestamp": TIMESTAMP, "org:resource": "resource"}
ATTRIBUTE_TYPES = ("text", "integer", "real", "timestamp")
ISO_FORMAT = "YYYY-MM-DDThh:mm:ss.SSS±zz:zz"


def _read_bytes(source: Source) -> tuple[bytes, str | None]:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source), None
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read(), os.fspath(source)
    return source.read(), getattr(source, "name", None)


# -- timestamps --------------------------------------------------------------

_ISO_RE = re.compile(
    r"^\s*(\d{4})-(\d{2})-(\d{2})"
    r"(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:[.,](\d+))?)?)?"
    r"\s*(Z|[+-]\d{2}:?\d{2})?\s*$"
)


def parse_iso8601(text: str) -> Timestamp:
    """Parse an ISO-8601 date or date-time.  No offset means UTC."""
    m = _ISO_RE.match(text)
    if not m:
        raise ValueError(f"not an ISO-8601 timestamp: {text!r}")
    y, mo, d, hh, mi, ss, frac, off = m.groups()
    millis = int((frac or "0")[:3].ljust(3, "0"))
    tz = timezone.utc
    if off and off != "Z":
        sign = -1 if off[0] == "-" else 1
        digits = off[1:].replace(":", "")
        tz = timezone(sign * timedelta(hours=int(digits[:2]), minutes=int(digits[2:])))
    dt = datetime(int(y), int(mo), int(d), int(hh or 0), int(mi or 0), int(ss or 0), millis * 1000, tzinfo=tz)
    return Timestamp.from_datetime(dt)


_TOKENS = {
    "YYYY": r"(?P<year>\d{4})",
    "MM": r"(?P<month>\d{2})",
    "DD": r"(?P<day>\d{2})",
    "hh": r"(?P<hour>\d{2})",
    "mm": r"(?P<minute>\d{2})",
    "ss": r"(?P<second>\d{2})",
    ".SSS": r"\.(?P<millis>\d{3})",
    "±zz:zz": r"(?P<offset>Z|[+-]\d{2}:\d{2})",
}


def compile_time_format(pattern: str) -> re.Pattern[str]:
    """Turn a pattern such as ``YYYY-MM-DD hh:mm`` into an anchored regex.

    Recognised tokens are ``YYYY MM DD hh mm ss .SSS ±zz:zz``; everything else
    matches literally.  Each token may appear at most once.
    """
    out = []
    seen = set()
    i = 0
    while i < len(pattern):
        for tok in sorted(_TOKENS, key=len, reverse=True):
            if pattern.startswith(tok, i):
                if tok in seen:
                    raise ConfigError(f"time format token {tok!r} repeated in {pattern!r}")
                seen.add(tok)
                out.append(_TOKENS[tok])
                i += len(tok)
                break
        else:
            out.append(re.escape(pattern[i]))
            i += 1
    if "YYYY" not in seen:
        raise ConfigError(f"time format {pattern!r} lacks a YYYY token")
    return re.compile("^" + "".join(out) + "$")


def parse_timestamp(text: str, pattern: str | re.Pattern[str] | None = None) -> Timestamp:
    if pattern is None:
        return parse_iso8601(text)
    rx = compile_time_format(pattern) if isinstance(pattern, str) else pattern
    m = rx.match(text.strip())
    if not m:
        raise ValueError(f"{text!r} does not match the time format")
    g = m.groupdict()
    tz = timezone.utc
    off = g.get("offset")
    if off and off != "Z":
        sign = -1 if off[0] == "-" else 1
        tz = timezone(sign * timedelta(hours=int(off[1:3]), minutes=int(off[4:6])))
    dt = datetime(
        int(g["year"]),
        int(g.get("month") or 1),
        int(g.get("day") or 1),
        int(g.get("hour") or 0),
        int(g.get("minute") or 0),
        int(g.get("second") or 0),
        int(g.get("millis") or 0) * 1000,
        tzinfo=tz,
    )
    return Timestamp.from_datetime(dt)


def format_timestamp(ts: Timestamp) -> str:
    """Render in the ``YYYY-MM-DDThh:mm:ss.SSS±zz:zz`` pattern, always UTC."""
    return ts.isoformat()[:-1] + "+00:00"


# -- XES ---------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _xes_value(kind: str, raw: str | None) -> Any:
    if raw is None:
        return ABSENT
    if kind in ("string", "id"):
        return raw
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "boolean":
        return raw.strip().lower() == "true"
    if kind == "date":
        return parse_iso8601(raw)
    raise ValueError(f"unsupported attribute kind {kind!r}")


_SCALAR_KINDS = {"string", "date", "int", "float", "boolean", "id"}


def _attributes(elem: ET.Element, where: str, skipped: dict[str, int]) -> dict[str, Any]:
    attrs: dict[str, Any] = {}
    for child in elem:
        kind = _local(child.tag)
        if kind == "event":
            continue
        if kind not in _SCALAR_KINDS:
            skipped[kind] = skipped.get(kind, 0) + 1
            continue
        key = child.get("key")
        if key is None:
            raise ParseError(f"{where}: <{kind}> without a key")
        try:
            attrs[key] = _xes_value(kind, child.get("value"))
        except ValueError as exc:
            raise ParseError(f"{where}: attribute {key!r}: {exc}") from None
    return attrs


def parse_xes(source: Source) -> EventLog:
    """Read an XES document into an :class:`EventLog`."""
    data, name = _read_bytes(source)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML: {exc.msg if hasattr(exc, 'msg') else exc}", line, col + 1, name) from None
    if _local(root.tag) != "log":
        raise ParseError(f"root element is <{_local(root.tag)}>, expected <log>", source=name)

    skipped: dict[str, int] = {}
    cases: list[Case] = []
    seen_cases: set[str] = set()
    moved = 0
    for child in root:
        kind = _local(child.tag)
        if kind != "trace":
            if kind not in _SCALAR_KINDS:
                skipped[kind] = skipped.get(kind, 0) + 1
            continue
        t_index = len(cases)
        t_attrs = _attributes(child, f"trace {t_index}", skipped)
        case_id = str(t_attrs.get("concept:name", f"trace{t_index}"))
        if case_id in seen_cases:
            raise ParseError(f"trace {t_index}: duplicate case id {case_id!r}", source=name)
        seen_cases.add(case_id)
        events = []
        for ev in child:
            if _local(ev.tag) != "event":
                continue
            e_index = len(events) + 1
            raw = _attributes(ev, f"trace {t_index}, event {e_index}", skipped)
            attrs = {XES_KEYS.get(k, k): v for k, v in raw.items()}
            attrs.pop("identity:id", None)
            if not isinstance(attrs.get(TIMESTAMP), Timestamp):
                raise ValidationError(f"trace {t_index} ({case_id!r}), event {e_index}: missing time:timestamp")
            event_id = str(raw.get("identity:id", f"{case_id}.{e_index}"))
            events.append(Event(event_id, case_id, attrs))
        ordered = sorted(events, key=lambda e: int(e.timestamp))
        moved += sum(1 for a, b in zip(events, ordered) if a is not b)
        cases.append(Case(case_id, tuple(ordered)))
    for kind, n in sorted(skipped.items()):
        logger.warning("ignored %d <%s> element(s)", n, kind)
    return EventLog(cases, reordered_events=moved)


# -- CSV ---------------------------------------------------------------------


@dataclass(frozen=True)
class CsvMapping:
    case_column: str = "case_id"
    activity_column: str = "activity"
    timestamp_column: str = "timestamp"
    timestamp_format: str | None = None
    extra_columns: tuple[tuple[str, str, str], ...] = ()
    event_id_column: str | None = None

    def __post_init__(self) -> None:
        mandatory = (self.case_column, self.activity_column, self.timestamp_column)
        if len(set(mandatory)) != 3:
            raise ConfigError(f"case, activity and timestamp columns must be distinct, got {mandatory}")
        object.__setattr__(self, "extra_columns", tuple(tuple(x) for x in self.extra_columns))
        for col, attr, kind in self.extra_columns:
            if kind not in ATTRIBUTE_TYPES:
                raise ConfigError(f"column {col!r}: unknown type {kind!r}, expected one of {ATTRIBUTE_TYPES}")
            if attr in (ACTIVITY, TIMESTAMP):
                raise ConfigError(f"column {col!r} may not be mapped onto {attr!r}")
        if self.timestamp_format is not None:
            compile_time_format(self.timestamp_format)


def _convert(raw: str, kind: str, time_rx: re.Pattern[str] | None) -> Any:
    if raw == "":
        return ABSENT
    if kind == "text":
        return raw
    if kind == "integer":
        return int(raw)
    if kind == "real":
        return float(raw)
    return parse_timestamp(raw, time_rx)


def parse_csv(source: Source, mapping: CsvMapping | None = None) -> EventLog:
    """Read a CSV event log (RFC 4180, UTF-8, header row required).

    Rows are grouped by the case column in order of first appearance and
    each case is sorted by timestamp, keeping row order on ties.
    """
    mapping = mapping or CsvMapping()
    data, name = _read_bytes(source)
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc.reason}", source=name) from None
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header row", 1, source=name) from None
    except csv.Error as exc:
        raise ParseError(str(exc), reader.line_num, source=name) from None
    index = {col: i for i, col in enumerate(header)}
    wanted = [mapping.case_column, mapping.activity_column, mapping.timestamp_column]
    wanted += [c for c, _, _ in mapping.extra_columns]
    if mapping.event_id_column:
        wanted.append(mapping.event_id_column)
    missing = [c for c in wanted if c not in index]
    if missing:
        raise ConfigError(f"column(s) {missing} not in CSV header {header}")

    time_rx = compile_time_format(mapping.timestamp_format) if mapping.timestamp_format else None
    ci, ai, ti = index[mapping.case_column], index[mapping.activity_column], index[mapping.timestamp_column]
    ei = index[mapping.event_id_column] if mapping.event_id_column else None
    events = []
    row_no = 1
    try:
        for row in reader:
            row_no = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(row)}", row_no, source=name)
            try:
                ts = parse_timestamp(row[ti], time_rx)
            except ValueError as exc:
                raise ParseError(f"bad timestamp: {exc}", row_no, ti + 1, name) from None
            attrs: dict[str, Any] = {TIMESTAMP: ts}
            if row[ai] != "":
                attrs[ACTIVITY] = row[ai]
            for col, attr, kind in mapping.extra_columns:
                try:
                    value = _convert(row[index[col]], kind, time_rx)
                except ValueError as exc:
                    raise ParseError(f"column {col!r}: {exc}", row_no, index[col] + 1, name) from None
                if value is not ABSENT:
                    attrs[attr] = value
            event_id = row[ei] if ei is not None else f"row{row_no}"
            events.append(Event(event_id, row[ci], attrs))
    except csv.Error as exc:
        raise ParseError(str(exc), reader.line_num, source=name) from None
    return EventLog.from_events(events)


def infer_mapping(log: EventLog) -> CsvMapping:
    """Mapping that reads back what :func:`write_csv` produces for ``log``."""
    kinds: dict[str, set[str]] = {}
    for e in log.events:
        for k, v in e.attributes.items():
            if k in (ACTIVITY, TIMESTAMP) or v is ABSENT:
                continue
            kinds.setdefault(k, set()).add(value_kind(v))
    extra = []
    for attr in sorted(kinds):
        ks = kinds[attr]
        if ks == {"integer"}:
            kind = "integer"
        elif ks <= {"integer", "real"}:
            kind = "real"
        elif ks == {"timestamp"}:
            kind = "timestamp"
        else:
            kind = "text"
        extra.append((attr, attr, kind))
    reserved = {"case_id", "event_id", ACTIVITY, TIMESTAMP}
    clash = reserved.intersection(a for a, _, _ in extra)
    if clash:
        raise ConfigError(f"attribute name(s) {sorted(clash)} collide with reserved CSV columns")
    return CsvMapping("case_id", ACTIVITY, TIMESTAMP, ISO_FORMAT, tuple(extra), "event_id")


def _render(value: Any, kind: str) -> str:
    if value is ABSENT:
        return ""
    if isinstance(value, Timestamp):
        return format_timestamp(value)
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    if kind == "real" and isinstance(value, int):
        return repr(float(value))
    return str(value)


def write_csv(log: EventLog, out: IO[str] | None = None) -> str:
    """Serialize ``log`` as CSV; returns the text and also writes it to ``out`` if given.

    Columns are ``case_id, event_id, activity, timestamp`` followed by every
    other attribute in name order.  Absent values become empty cells.
    """
    mapping = infer_mapping(log)
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case_id", "event_id", ACTIVITY, TIMESTAMP] + [a for a, _, _ in mapping.extra_columns])
    for case in log:
        for e in case.events:
            row = [case.case_id, e.event_id, _render(e.activity, "text"), _render(e.timestamp, "timestamp")]
            row += [_render(e[a], kind) for a, _, kind in mapping.extra_columns]
            w.writerow(row)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    event_count: int = 0
    case_count: int = 0
    monotonicity_violations: int = 0
    duplicate_event_ids: int = 0
    missing_activity: int = 0
    missing_timestamp: int = 0
    duplicate_ids: tuple[str, ...] = field(default=(), compare=False)

    @property
    def ok(self) -> bool:
        return self.duplicate_event_ids == 0 and self.missing_timestamp == 0

    def as_dict(self) -> dict[str, Any]:
        return {
            "event_count": self.event_count,
            "case_count": self.case_count,
            "monotonicity_violations": self.monotonicity_violations,
            "duplicate_event_ids": self.duplicate_event_ids,
            "missing_activity": self.missing_activity,
            "missing_timestamp": self.missing_timestamp,
        }


def validate(log: EventLog) -> ValidationReport:
    """Count the ways ``log`` departs from a well-formed event log.

    ``monotonicity_violations`` adds the events moved while the log was built
    to any out-of-order neighbours still present.
    """
    seen: set[str] = set()
    dupes: list[str] = []
    missing_act = missing_ts = disorder = 0
    for case in log:
        prev = None
        for e in case.events:
            if e.event_id in seen:
                dupes.append(e.event_id)
            seen.add(e.event_id)
            if e.activity is ABSENT:
                missing_act += 1
            ts = e.timestamp
            if ts is ABSENT:
                missing_ts += 1
                continue
            if prev is not None and ts < prev:
                disorder += 1
            prev = ts
    return ValidationReport(
        event_count=log.n_events,
        case_count=len(log),
        monotonicity_violations=log.reordered_events + disorder,
        duplicate_event_ids=len(dupes),
        missing_activity=missing_act,
        missing_timestamp=missing_ts,
        duplicate_ids=tuple(dupes),
    )


def read_log(path: str | os.PathLike[str], fmt: str | None = None, mapping: CsvMapping | None = None) -> EventLog:
    """Dispatch on ``fmt`` (``xes``/``csv``) or the file extension."""
    fmt = fmt or os.fspath(path).rsplit(".", 1)[-1].lower()
    if fmt == "xes":
        return parse_xes(path)
    if fmt == "csv":
        return parse_csv(path, mapping)
    raise ConfigError(f"unknown log format {fmt!r}; expected xes or csv")


__all__: Iterable[str] = [
    "CsvMapping",
    "ValidationReport",
    "compile_time_format",
    "format_timestamp",
    "infer_mapping",
    "parse_csv",
    "parse_iso8601",
    "parse_timestamp",
    "parse_xes",
    "read_log",
    "validate",
    "write_csv",
]
