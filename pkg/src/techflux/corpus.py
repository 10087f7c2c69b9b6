"""Document collections: loading, validation, serialization, time-windowing.

A corpus is an immutable, ordered list of dated documents. Two on-disk
formats are supported:

* JSONL: one object per line with fields ``id`` (string), ``date``
  ("YYYY-MM-DD"), ``text`` (string), ``tags`` (array of strings).
* CSV: header ``id,date,text,tags`` with ``;``-separated tags, UTF-8,
  RFC-4180 quoting.

Tags are normalized on load: Unicode case-fold, trim, internal whitespace
collapsed to single spaces, duplicates dropped (first occurrence wins).
Dates with a time component are truncated to the day.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import CorpusError
from .fileio import atomic_write_text


def normalize_tag(raw: str) -> str:
    """Case-fold, trim, and collapse internal whitespace to single spaces."""
    return " ".join(raw.casefold().split())


def normalize_tags(raw_tags: list[str] | tuple[str, ...]) -> tuple[str, ...]:
    """Normalize and deduplicate tags, preserving first-occurrence order."""
    seen: dict[str, None] = {}
    for raw in raw_tags:
        tag = normalize_tag(str(raw))
        if tag and tag not in seen:
            seen[tag] = None
    return tuple(seen)


def parse_date(raw: str) -> dt.date:
    """Parse an ISO-8601 date, truncating any time component to the day."""
    raw = raw.strip()
    try:
        return dt.date.fromisoformat(raw)
    except ValueError:
        pass
    try:
        return dt.datetime.fromisoformat(raw).date()
    except ValueError:
        raise CorpusError(f"invalid ISO-8601 date: {raw!r}") from None


@dataclass(frozen=True)
class Document:
    """One dated article with free text and author-assigned tags."""

    id: str
    date: dt.date
    text: str = ""
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("document id must be nonempty")
        if not isinstance(self.date, dt.date):
            raise CorpusError(f"document {self.id!r}: date must be a date, got {type(self.date).__name__}")


@dataclass(frozen=True)
class TimeWindow:
    """Half-open date interval [start, end)."""

    start: dt.date
    end: dt.date
    label: str = ""

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise CorpusError(f"window {self.describe()}: start must precede end")

    def describe(self) -> str:
        return self.label or f"[{self.start.isoformat()},{self.end.isoformat()})"

    def contains(self, date: dt.date) -> bool:
        return self.start <= date < self.end

    @classmethod
    def parse(cls, spec: str, label: str = "") -> "TimeWindow":
        """Parse a "START:END" string of ISO dates."""
        parts = spec.split(":")
        if len(parts) != 2:
            raise CorpusError(f"window spec must be START:END, got {spec!r}")
        return cls(parse_date(parts[0]), parse_date(parts[1]), label)


@dataclass(frozen=True)
class Corpus:
    """Immutable ordered document collection."""

    documents: tuple[Document, ...] = ()
    source_label: str = ""

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)


def _make_document(record: dict, where: str) -> Document:
    for field_name in ("id", "date"):
        if record.get(field_name) in (None, ""):
            raise CorpusError(f"{where}: missing field {field_name!r}")
    if "text" not in record and "tags" not in record:
        raise CorpusError(f"{where}: record needs at least one of 'text'/'tags'")
    tags = record.get("tags") or []
    if not isinstance(tags, (list, tuple)):
        raise CorpusError(f"{where}: field 'tags' must be a list")
    try:
        date = parse_date(str(record["date"]))
    except CorpusError as exc:
        raise CorpusError(f"{where}: field 'date': {exc}") from None
    return Document(
        id=str(record["id"]),
        date=date,
        text=str(record.get("text") or ""),
        tags=normalize_tags(tags),
    )


def _load_jsonl(path: Path) -> list[Document]:
    docs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path.name} line {lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise CorpusError(f"{where}: record must be a JSON object")
            docs.append(_make_document(record, where))
    return docs


_CSV_COLUMNS = ("id", "date", "text", "tags")


def _load_csv(path: Path) -> list[Document]:
    docs = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _CSV_COLUMNS if c not in header]
        if missing:
            raise CorpusError(f"{path.name}: header missing column(s) {', '.join(missing)}")
        for record in reader:
            where = f"{path.name} line {reader.line_num}"
            raw_tags = record.get("tags") or ""
            tags = [t for t in raw_tags.split(";") if t.strip()]
            docs.append(_make_document({**record, "tags": tags}, where))
    return docs


def load_corpus(path: str | Path, format: str | None = None, source_label: str | None = None) -> Corpus:
    """Load a corpus from a JSONL or CSV file.

    ``format`` is inferred from the file suffix when omitted. Record order is
    preserved; tags come back case-folded and deduplicated per document.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format == "jsonl":
        docs = _load_jsonl(path)
    elif format == "csv":
        docs = _load_csv(path)
    else:
        raise CorpusError(f"unknown corpus format: {format!r} (expected jsonl or csv)")
    label = source_label if source_label is not None else path.stem
    return Corpus(documents=tuple(docs), source_label=label)


def save_corpus(corpus: Corpus, path: str | Path, format: str | None = None) -> None:
    """Serialize a corpus; the output loads back to an equal Corpus."""
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format == "jsonl":
        lines = []
        for doc in corpus.documents:
            lines.append(json.dumps(
                {"id": doc.id, "date": doc.date.isoformat(), "text": doc.text, "tags": list(doc.tags)},
                ensure_ascii=False,
            ))
        atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
    elif format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(_CSV_COLUMNS)
        for doc in corpus.documents:
            bad = [t for t in doc.tags if ";" in t]
            if bad:
                raise CorpusError(f"document {doc.id!r}: tag {bad[0]!r} contains ';', not representable in CSV")
            writer.writerow([doc.id, doc.date.isoformat(), doc.text, ";".join(doc.tags)])
        atomic_write_text(path, buf.getvalue())
    else:
        raise CorpusError(f"unknown corpus format: {format!r} (expected jsonl or csv)")


def window_filter(corpus: Corpus, window: TimeWindow) -> Corpus:
    """Documents with start <= date < end, in original order."""
    kept = tuple(doc for doc in corpus.documents if window.contains(doc.date))
    return Corpus(documents=kept, source_label=corpus.source_label)


def load_windows(path: str | Path) -> list[TimeWindow]:
    """Load a JSON array of {"start", "end", "label"} window records."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"windows file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path.name}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, list):
        raise CorpusError(f"{path.name}: expected a JSON array of window records")
    windows = []
    for i, rec in enumerate(raw):
        if not isinstance(rec, dict) or "start" not in rec or "end" not in rec:
            raise CorpusError(f"{path.name}: window {i} needs 'start' and 'end'")
        windows.append(TimeWindow(parse_date(str(rec["start"])), parse_date(str(rec["end"])), str(rec.get("label", ""))))
    return windows
