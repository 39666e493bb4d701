"""Per-message math density scoring.

The density of a message is a token-normalized weighted sum of three hit
counts: vocabulary words among the message's tokens, non-overlapping phrase
occurrences in the lowercased text, and non-overlapping regex-pattern matches
in the raw text.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from .vocabulary import MathVocabulary

_PUNCT = string.punctuation


@dataclass(frozen=True)
class DensityScore:
    value: float
    token_count: int
    word_hits: int
    phrase_hits: int
    pattern_hits: int


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, trim punctuation off each token."""
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


def math_density(text: str, vocab: MathVocabulary) -> DensityScore:
    tokens = tokenize(text)
    if not tokens:
        return DensityScore(0.0, 0, 0, 0, 0)

    word_hits = sum(1 for tok in tokens if tok in vocab.single_words)

    lowered = text.lower()
    phrase_hits = sum(len(pat.findall(lowered)) for pat in vocab.phrase_patterns)

    # Patterns run against the original text; case rules live in the compile flags.
    pattern_hits = sum(sum(1 for _ in pat.finditer(text)) for pat in vocab.patterns)

    value = (
        vocab.weight_word * word_hits
        + vocab.weight_phrase * phrase_hits
        + vocab.weight_pattern * pattern_hits
    ) / len(tokens)
    return DensityScore(value, len(tokens), word_hits, phrase_hits, pattern_hits)
