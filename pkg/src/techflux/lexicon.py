"""Technology term lexicon: compiled regex matchers and term extraction.

The lexicon file is a JSON array of ``{"canonical": str, "patterns": [str]}``
entries. Patterns are meant to cover inflections (singular/plural, spelling
variants) of one canonical term. The compiler wraps every pattern with word
boundaries and compiles it case-insensitively, so e.g. a pattern ``ai`` will
not fire inside "maintain".

Pattern dialect: Python `re`, restricted by convention to constructs common
to mainstream engines -- character classes, alternation, optional/repeat
quantifiers, non-capturing groups. Backreferences are not supported.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document
from .errors import LexiconError


@dataclass(frozen=True)
class TermPattern:
    """One canonical term plus the compiled patterns that detect it."""

    canonical: str
    patterns: tuple[str, ...]
    compiled: tuple[re.Pattern, ...]


@dataclass(frozen=True)
class TermLexicon:
    entries: tuple[TermPattern, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            if entry.canonical in seen:
                raise LexiconError(f"duplicate canonical term: {entry.canonical!r}")
            seen.add(entry.canonical)

    @property
    def canonical_terms(self) -> frozenset[str]:
        return frozenset(entry.canonical for entry in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _compile_entry(canonical: str, patterns: list[str]) -> TermPattern:
    canonical = " ".join(canonical.casefold().split())
    if not canonical:
        raise LexiconError("lexicon entry with empty canonical term")
    if not patterns:
        raise LexiconError(f"entry {canonical!r}: needs at least one pattern")
    compiled = []
    for pattern in patterns:
        try:
            rx = re.compile(rf"\b(?:{pattern})\b", re.IGNORECASE | re.UNICODE)
        except re.error as exc:
            raise LexiconError(f"entry {canonical!r}: pattern {pattern!r} does not compile: {exc}") from None
        if rx.search(canonical) is None:
            raise LexiconError(f"entry {canonical!r}: pattern {pattern!r} fails self-test (does not match the canonical form)")
        compiled.append(rx)
    return TermPattern(canonical=canonical, patterns=tuple(patterns), compiled=tuple(compiled))


def compile_lexicon(path: str | Path) -> TermLexicon:
    """Load and compile a lexicon file, self-testing every pattern."""
    path = Path(path)
    if not path.exists():
        raise LexiconError(f"lexicon file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LexiconError(f"{path.name}: invalid JSON ({exc.msg})") from None
    return lexicon_from_records(raw, where=path.name)


def lexicon_from_records(raw: object, where: str = "lexicon") -> TermLexicon:
    """Build a lexicon from already-parsed ``[{"canonical", "patterns"}]`` records."""
    if not isinstance(raw, list):
        raise LexiconError(f"{where}: expected a JSON array of entries")
    entries = []
    for i, rec in enumerate(raw):
        if not isinstance(rec, dict) or "canonical" not in rec:
            raise LexiconError(f"{where}: entry {i} needs a 'canonical' field")
        patterns = rec.get("patterns")
        if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
            raise LexiconError(f"{where}: entry {rec['canonical']!r}: 'patterns' must be a list of strings")
        entries.append(_compile_entry(str(rec["canonical"]), patterns))
    return TermLexicon(entries=tuple(entries))


def extract_terms(doc: Document, lexicon: TermLexicon) -> set[str]:
    """Canonical terms whose any pattern matches the document text.

    Set semantics: within-document repetition is discarded. Matching runs on
    the case-folded text, so extraction is invariant under case changes.
    """
    text = doc.text.casefold()
    if not text:
        return set()
    found = set()
    for entry in lexicon.entries:
        for rx in entry.compiled:
            if rx.search(text):
                found.add(entry.canonical)
                break
    return found
