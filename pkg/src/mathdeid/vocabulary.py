"""Math vocabulary: single words, multi-word phrases, and regex patterns.

The shipped vocabulary file (data/vocabulary.json) carries the full term list
and the ten pattern families used for density scoring. Patterns that spell out
uppercase letters (the probability family, ``P(A|B)``) are treated as
case-significant; all others compile case-insensitively.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

DEFAULT_WEIGHTS = {"word": 1.0, "phrase": 1.5, "pattern": 2.0}


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class MathVocabulary:
    single_words: frozenset[str]
    phrases: tuple[str, ...]
    phrase_patterns: tuple[re.Pattern, ...]
    patterns: tuple[re.Pattern, ...]
    pattern_sources: tuple[str, ...]
    weight_word: float = 1.0
    weight_phrase: float = 1.5
    weight_pattern: float = 2.0


def compile_pattern(source: str) -> re.Pattern:
    """Compile a vocabulary pattern; lowercase-only sources get IGNORECASE."""
    flags = 0 if re.search(r"[A-Z]", source) else re.IGNORECASE
    return re.compile(source, flags)


def _phrase_pattern(phrase: str) -> re.Pattern:
    # Word-bounded, whitespace-flexible match on lowercased text.
    words = [re.escape(w) for w in phrase.split()]
    return re.compile(r"\b" + r"\s+".join(words) + r"\b")


def build_vocabulary(
    single_words: list[str],
    phrases: list[str],
    pattern_sources: list[str],
    weights: dict | None = None,
) -> MathVocabulary:
    weights = dict(DEFAULT_WEIGHTS, **(weights or {}))
    words = frozenset(w.lower() for w in single_words)
    phrase_list = tuple(sorted({p.lower() for p in phrases}))
    for w in words:
        if " " in w:
            raise VocabularyError(f"single word contains a space: {w!r}")
    for p in phrase_list:
        if " " not in p:
            raise VocabularyError(f"phrase has no space: {p!r}")
    try:
        compiled = tuple(compile_pattern(src) for src in pattern_sources)
    except re.error as exc:
        raise VocabularyError(f"bad pattern: {exc}") from None
    return MathVocabulary(
        single_words=words,
        phrases=phrase_list,
        phrase_patterns=tuple(_phrase_pattern(p) for p in phrase_list),
        patterns=compiled,
        pattern_sources=tuple(pattern_sources),
        weight_word=float(weights["word"]),
        weight_phrase=float(weights["phrase"]),
        weight_pattern=float(weights["pattern"]),
    )


def load_vocabulary(path: str | Path | None = None) -> MathVocabulary:
    """Load a vocabulary JSON file; None loads the shipped default."""
    if path is None:
        raw = json.loads(
            resources.files("mathdeid.data").joinpath("vocabulary.json").read_text("utf-8")
        )
    else:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    try:
        return build_vocabulary(
            raw["single_words"], raw["phrases"], raw["patterns"], raw.get("weights")
        )
    except KeyError as exc:
        raise VocabularyError(f"vocabulary file missing key {exc}") from None
