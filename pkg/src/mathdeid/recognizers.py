"""Baseline detection engine: regex recognizers plus a pluggable NER adapter.

Structured identifiers (emails, SSNs, license-style numbers, dates, ...) are
matched by regular expressions; context-dependent types (PERSON, LOCATION,
NRP, DATE) come from a named-entity provider when one is configured. The
engine intentionally carries no math awareness: bare number runs and
slash-separated numbers trigger the numeric recognizers, which is exactly the
over-redaction failure mode the rest of the pipeline measures.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .corpus import Message, PiiSpan, PiiType, Provenance, Transcript
from .results import Detection, DetectionResult, MessageDetections

NerEntityFn = Callable[[str], list[tuple[int, int, str]]]


@dataclass
class Recognizer:
    name: str
    target_type: PiiType
    patterns: list[re.Pattern]
    context_words: list[str] = field(default_factory=list)


@dataclass
class NerAdapter:
    provider_id: str
    type_mapping: dict[str, PiiType]
    entity_fn: NerEntityFn | None = None


DEFAULT_NER_MAPPING = {
    "PERSON": PiiType.PERSON,
    "GPE": PiiType.LOCATION,
    "LOC": PiiType.LOCATION,
    "NORP": PiiType.NRP,
    "DATE": PiiType.DATE,
}

# name, type, pattern sources. Case-sensitive by default; use (?i:...) where
# lowercase forms are legitimate.
_BUILTIN_SOURCES: list[tuple[str, PiiType, list[str]]] = [
    (
        "email_address",
        PiiType.EMAIL_ADDRESS,
        [r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b"],
    ),
    (
        "url",
        PiiType.URL,
        [
            r"\bhttps?://[^\s<>\"']+",
            r"(?i:\bwww\.[a-z0-9.-]+\.[a-z]{2,}(?:/[^\s<>\"']*)?)",
        ],
    ),
    ("ip_address", PiiType.IP_ADDRESS, [r"\b(?:\d{1,3}\.){3}\d{1,3}\b"]),
    (
        "phone_number",
        PiiType.PHONE_NUMBER,
        [
            r"\(?\b\d{3}\)?[-.\s]\d{3}[-.\s]\d{4}\b",
            r"\+1[-.\s]?\(?\d{3}\)?[-.\s]?\d{3}[-.\s]?\d{4}\b",
        ],
    ),
    ("us_ssn", PiiType.US_SSN, [r"\b\d{3}-\d{2}-\d{4}\b"]),
    # Deliberately loose numeric patterns: these reproduce the upstream
    # system's numeric over-triggering on math text.
    ("us_driver_license", PiiType.US_DRIVER_LICENSE, [r"\b[A-Z]\d{7,8}\b", r"\b\d{7,9}\b"]),
    ("us_passport", PiiType.US_PASSPORT, [r"\b[A-Z]\d{8}\b", r"\b\d{9}\b"]),
    ("us_bank_number", PiiType.US_BANK_NUMBER, [r"\b\d{8,17}\b"]),
    (
        "date",
        PiiType.DATE,
        [
            r"\b\d{1,4}[/-]\d{1,2}(?:[/-]\d{1,4})?\b",
            r"\b\d{4}-\d{2}-\d{2}\b",
            r"(?i:\b(?:january|february|march|april|may|june|july|august|september|october"
            r"|november|december|jan|feb|mar|apr|jun|jul|aug|sept?|oct|nov|dec)\.?\s+\d{1,2}"
            r"(?:st|nd|rd|th)?(?:,?\s+\d{4})?\b)",
        ],
    ),
    ("social_handle", PiiType.SOCIAL_HANDLE, [r"(?<![\w.])@[A-Za-z0-9_]{2,}\b"]),
    (
        "school",
        PiiType.SCHOOL,
        [
            r"\bPS\s?\d{1,4}\b",
            r"\b\d{2}[A-Z]\d{3}\b",
            r"\b[A-Z][a-z]+ (?:High|Middle|Elementary|Academy)\b",
        ],
    ),
    (
        "grade_level",
        PiiType.GRADE_LEVEL,
        [r"(?i:\b\d{1,2}(?:st|nd|rd|th)\s+grade\b)", r"(?i:\bgrade\s+\d{1,2}\b)"],
    ),
    (
        "course_number",
        PiiType.COURSE_NUMBER,
        [
            r"(?i:\b(?:math|algebra|geometry|geo|calculus|calc|precalc|precalculus|trig"
            r"|trigonometry|stats?|statistics|physics|chem|chemistry|bio|biology|cs"
            r"|english|history|science|econ)\s?\d{2,}\b)"
        ],
    ),
    (
        "age",
        PiiType.AGE,
        [
            r"(?i:\b\d{1,2}\s+years?\s+old\b)",
            r"(?i:\b(?:i\s*am|i'm|im)\s+\d{1,2}\b)",
            r"(?i:\bage\s+\d{1,2}\b)",
        ],
    ),
]


def compile_recognizer(
    name: str, type_code: str, sources: list[str], context: list[str] | None = None
) -> Recognizer:
    return Recognizer(
        name=name,
        target_type=PiiType.parse(type_code),
        patterns=[re.compile(src) for src in sources],
        context_words=list(context or []),
    )


def builtin_recognizers() -> list[Recognizer]:
    return [compile_recognizer(name, t.value, srcs) for name, t, srcs in _BUILTIN_SOURCES]


def load_recognizers(path: str | Path) -> list[Recognizer]:
    """Load a recognizer set from JSON: {"recognizers": [{name,type,patterns,context}]}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return [
        compile_recognizer(r["name"], r["type"], r["patterns"], r.get("context"))
        for r in raw["recognizers"]
    ]


# Provider registry so tests (and optional spaCy installs) can plug in NER
# backends by id. "spacy:<model>" resolves lazily; anything else must be
# registered first.
_NER_PROVIDERS: dict[str, NerEntityFn] = {}


def register_ner_provider(provider_id: str, fn: NerEntityFn) -> None:
    _NER_PROVIDERS[provider_id] = fn


def resolve_ner(provider_id: str | None, mapping: dict[str, PiiType] | None = None) -> NerAdapter | None:
    """Build an adapter for the provider id; None disables NER.

    An unresolvable provider returns an adapter with entity_fn=None so corpus
    detection can degrade to pattern-only and record a warning.
    """
    if provider_id is None:
        return None
    mapping = mapping or dict(DEFAULT_NER_MAPPING)
    fn = _NER_PROVIDERS.get(provider_id)
    if fn is None and provider_id.startswith("spacy:"):
        try:
            import spacy

            model = spacy.load(provider_id.split(":", 1)[1])

            def fn(text: str, _model=model) -> list[tuple[int, int, str]]:
                return [(e.start_char, e.end_char, e.label_) for e in _model(text).ents]

            _NER_PROVIDERS[provider_id] = fn
        except Exception:
            fn = None
    return NerAdapter(provider_id=provider_id, type_mapping=mapping, entity_fn=fn)


def _merge_widest(hits: list[tuple[int, int, PiiType]], text: str) -> list[PiiSpan]:
    """Merge overlapping same-type hits into their widest covering span."""
    spans: list[PiiSpan] = []
    for start, end, pii_type in sorted(hits, key=lambda h: (h[2].value, h[0], h[1])):
        prev = spans[-1] if spans else None
        if prev is not None and prev.pii_type is pii_type and start < prev.end and end > prev.start:
            prev.start = min(prev.start, start)
            prev.end = max(prev.end, end)
            prev.surface = text[prev.start : prev.end]
        else:
            spans.append(PiiSpan(start, end, text[start:end], pii_type, Provenance.DETECTED))
    spans.sort(key=lambda s: (s.start, s.end, s.pii_type.value))
    return spans


def detect_baseline(
    message: Message,
    recognizers: list[Recognizer],
    ner: NerAdapter | None = None,
) -> list[PiiSpan]:
    """Run every recognizer (and the NER adapter, when usable) over one message."""
    hits: list[tuple[int, int, PiiType]] = []
    for rec in recognizers:
        for pattern in rec.patterns:
            for m in pattern.finditer(message.text):
                if m.end() > m.start():
                    hits.append((m.start(), m.end(), rec.target_type))
    if ner is not None and ner.entity_fn is not None:
        for start, end, label in ner.entity_fn(message.text):
            mapped = ner.type_mapping.get(label)
            if mapped is not None and end > start:
                hits.append((start, end, mapped))
    return _merge_widest(hits, message.text)


def detect_baseline_corpus(
    corpus: list[Transcript],
    recognizers: list[Recognizer] | None = None,
    ner: NerAdapter | None = None,
) -> list[DetectionResult]:
    """Deterministic baseline detection over a whole corpus, engine id "baseline"."""
    recognizers = builtin_recognizers() if recognizers is None else recognizers
    warnings = []
    if ner is not None and ner.entity_fn is None:
        warnings = [f"NER provider {ner.provider_id!r} unavailable; pattern-only detection"]
    results = []
    for t in corpus:
        result = DetectionResult(t.session_id, "baseline", warnings=list(warnings))
        for m in t.messages:
            spans = detect_baseline(m, recognizers, ner)
            result.messages.append(
                MessageDetections(
                    index=m.index,
                    detections=[Detection(s.surface, s.pii_type, s.start, s.end) for s in spans],
                )
            )
        results.append(result)
    return results
