"""Transcript data model and JSONL corpus serialization.

A corpus is a list of transcripts; each transcript is an ordered list of
dialogue messages carrying character-offset PII labels. This module owns the
17-type PII taxonomy and the on-disk JSONL format shared by every other
component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable


class PiiType(Enum):
    """The 17 PII categories."""

    AGE = "AGE"
    COURSE_NUMBER = "COURSE_NUMBER"
    DATE = "DATE"
    EMAIL_ADDRESS = "EMAIL_ADDRESS"
    GRADE_LEVEL = "GRADE_LEVEL"
    IP_ADDRESS = "IP_ADDRESS"
    LOCATION = "LOCATION"
    NRP = "NRP"
    PERSON = "PERSON"
    PHONE_NUMBER = "PHONE_NUMBER"
    SCHOOL = "SCHOOL"
    SOCIAL_HANDLE = "SOCIAL_HANDLE"
    URL = "URL"
    US_BANK_NUMBER = "US_BANK_NUMBER"
    US_DRIVER_LICENSE = "US_DRIVER_LICENSE"
    US_PASSPORT = "US_PASSPORT"
    US_SSN = "US_SSN"

    @classmethod
    def parse(cls, value: str) -> "PiiType":
        """Parse a type code, accepting the prompt-taxonomy alias COURSE."""
        code = value.strip().upper().replace(" ", "_")
        if code in _TYPE_ALIASES:
            return _TYPE_ALIASES[code]
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"unknown PII type {value!r}") from None

    @property
    def prompt_name(self) -> str:
        """Name used in prompt taxonomies (COURSE_NUMBER appears as COURSE)."""
        return "COURSE" if self is PiiType.COURSE_NUMBER else self.value


# Prompt taxonomies abbreviate COURSE_NUMBER to COURSE; accept it on input,
# always emit the canonical code.
_TYPE_ALIASES = {"COURSE": PiiType.COURSE_NUMBER}


class Provenance(Enum):
    UPSTREAM = "UPSTREAM"
    LLM_AUDIT = "LLM_AUDIT"
    SURROGATE = "SURROGATE"
    DETECTED = "DETECTED"


class CorpusError(ValueError):
    """Raised on malformed corpus files or data-model violations."""


@dataclass
class PiiSpan:
    """A labeled PII character range within one message's text."""

    start: int
    end: int
    surface: str
    pii_type: PiiType
    provenance: Provenance = Provenance.UPSTREAM

    def overlaps(self, other: "PiiSpan") -> bool:
        return self.start < other.end and other.start < self.end

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "type": self.pii_type.value,
            "provenance": self.provenance.value,
        }


@dataclass
class Message:
    index: int
    role: str
    text: str
    labels: list[PiiSpan] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "role": self.role,
            "text": self.text,
            "labels": [s.to_dict() for s in self.labels],
        }


@dataclass
class Transcript:
    session_id: str
    messages: list[Message]

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "messages": [m.to_dict() for m in self.messages],
        }

    @property
    def label_count(self) -> int:
        return sum(len(m.labels) for m in self.messages)


def _merge_same_type(spans: list[PiiSpan], text: str) -> list[PiiSpan]:
    """Merge overlapping spans of the same type into their union."""
    merged: list[PiiSpan] = []
    for span in sorted(spans, key=lambda s: (s.start, s.end)):
        prev = next(
            (m for m in merged if m.pii_type is span.pii_type and m.overlaps(span)),
            None,
        )
        if prev is None:
            merged.append(span)
        else:
            prev.start = min(prev.start, span.start)
            prev.end = max(prev.end, span.end)
            prev.surface = text[prev.start : prev.end]
    merged.sort(key=lambda s: (s.start, s.end))
    return merged


def _span_from_dict(raw: dict, text: str, where: str) -> PiiSpan:
    try:
        start, end = int(raw["start"]), int(raw["end"])
        pii_type = PiiType.parse(str(raw["type"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"{where}: bad label {raw!r}: {exc}") from None
    if not (0 <= start < end <= len(text)):
        raise CorpusError(f"{where}: span [{start}, {end}) out of bounds for text of length {len(text)}")
    provenance = Provenance(raw.get("provenance", "UPSTREAM"))
    return PiiSpan(start, end, text[start:end], pii_type, provenance)


def transcript_from_dict(raw: dict) -> Transcript:
    session_id = raw.get("session_id")
    if not isinstance(session_id, str) or not session_id:
        raise CorpusError("missing or empty session_id")
    raw_messages = raw.get("messages")
    if not isinstance(raw_messages, list) or not raw_messages:
        raise CorpusError(f"session {session_id}: needs at least one message")
    messages = []
    for pos, m in enumerate(raw_messages):
        where = f"session {session_id} message {pos}"
        try:
            index = int(m["index"])
            role = str(m.get("role", ""))
            text = m["text"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{where}: {exc}") from None
        if not isinstance(text, str):
            raise CorpusError(f"{where}: text must be a string")
        if index != pos:
            raise CorpusError(f"{where}: index {index} not contiguous from 0")
        spans = [_span_from_dict(s, text, where) for s in m.get("labels", [])]
        messages.append(Message(index, role, text, _merge_same_type(spans, text)))
    return Transcript(session_id, messages)


def load_corpus(path: str | Path) -> list[Transcript]:
    """Load a JSONL corpus, validating every transcript.

    Malformed lines raise CorpusError carrying the 1-based line number.
    """
    corpus: list[Transcript] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON: {exc}") from None
            try:
                transcript = transcript_from_dict(raw)
            except CorpusError as exc:
                raise CorpusError(f"line {lineno}: {exc}") from None
            if transcript.session_id in seen:
                raise CorpusError(f"line {lineno}: duplicate session_id {transcript.session_id!r}")
            seen.add(transcript.session_id)
            corpus.append(transcript)
    return corpus


def write_corpus(corpus: Iterable[Transcript], path: str | Path) -> None:
    """Write transcripts as one JSON object per line (UTF-8, not ASCII-escaped)."""
    with open(path, "w", encoding="utf-8") as fh:
        for transcript in corpus:
            fh.write(json.dumps(transcript.to_dict(), ensure_ascii=False))
            fh.write("\n")


def corpus_stats(corpus: list[Transcript]) -> dict:
    """Message/label totals plus a per-type label breakdown."""
    by_type: dict[str, int] = {}
    messages = 0
    for t in corpus:
        messages += len(t.messages)
        for m in t.messages:
            for s in m.labels:
                by_type[s.pii_type.value] = by_type.get(s.pii_type.value, 0) + 1
    return {
        "transcripts": len(corpus),
        "messages": messages,
        "labels": sum(by_type.values()),
        "labels_by_type": dict(sorted(by_type.items(), key=lambda kv: -kv[1])),
    }
