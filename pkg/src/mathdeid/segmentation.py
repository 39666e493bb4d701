"""Density-anchored math segmentation.

A message whose math density reaches the anchor threshold seeds a segment.
The segment then grows over adjacent messages, alternating forward/backward,
admitting a candidate when its cosine similarity to the running centroid (the
mean embedding of current members) reaches the similarity threshold. Segments
from later anchors that overlap or abut earlier ones are merged, and every
message inside a segment is labeled MATH.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Transcript
from .density import math_density
from .embeddings import EmbeddingProvider, cosine
from .vocabulary import MathVocabulary

MATH = "MATH"
NON_MATH = "NON-MATH"


@dataclass(frozen=True)
class Thresholds:
    anchor: float
    similarity: float


@dataclass
class Segment:
    transcript_id: str
    anchor_index: int
    start_index: int
    end_index: int
    centroid: np.ndarray

    def __contains__(self, index: int) -> bool:
        return self.start_index <= index <= self.end_index


@dataclass
class TranscriptFeatures:
    """Densities and embeddings computed once, reused across threshold settings."""

    session_id: str
    densities: list[float]
    embeddings: np.ndarray  # (n_messages, dim)


@dataclass
class SegmentLabeling:
    thresholds: Thresholds
    labels: dict[str, list[str]] = field(default_factory=dict)
    segments: dict[str, list[Segment]] = field(default_factory=dict)

    def label(self, session_id: str, index: int) -> str:
        return self.labels[session_id][index]

    def covers(self, corpus: list[Transcript]) -> bool:
        return all(
            t.session_id in self.labels and len(self.labels[t.session_id]) == len(t.messages)
            for t in corpus
        )

    def math_message_share(self) -> float:
        total = sum(len(v) for v in self.labels.values())
        math = sum(v.count(MATH) for v in self.labels.values())
        return math / total if total else 0.0


def math_token_share(corpus: list[Transcript], labeling: "SegmentLabeling") -> float:
    """Fraction of corpus tokens sitting inside MATH-labeled messages."""
    from .density import tokenize

    total = 0
    math = 0
    for t in corpus:
        labels = labeling.labels[t.session_id]
        for m in t.messages:
            n = len(tokenize(m.text))
            total += n
            if labels[m.index] == MATH:
                math += n
    return math / total if total else 0.0


def find_anchors(transcript: Transcript, vocab: MathVocabulary, thresholds: Thresholds) -> list[int]:
    """Indices of messages whose density reaches the anchor threshold, ascending."""
    return [
        m.index
        for m in transcript.messages
        if math_density(m.text, vocab).value >= thresholds.anchor
    ]


def compute_features(
    corpus: list[Transcript], vocab: MathVocabulary, embedder: EmbeddingProvider
) -> list[TranscriptFeatures]:
    features = []
    for t in corpus:
        texts = [m.text for m in t.messages]
        features.append(
            TranscriptFeatures(
                session_id=t.session_id,
                densities=[math_density(x, vocab).value for x in texts],
                embeddings=embedder.embed_batch(texts),
            )
        )
    return features


def _expand(embeddings: np.ndarray, anchor: int, t_sim: float) -> tuple[int, int, np.ndarray]:
    """Grow [lo, hi] around the anchor; returns bounds and final centroid."""
    n = embeddings.shape[0]
    lo = hi = anchor
    centroid_sum = embeddings[anchor].astype(np.float64).copy()
    count = 1
    forward_open = hi + 1 < n
    backward_open = lo - 1 >= 0
    forward_turn = True  # alternation starts forward
    while forward_open or backward_open:
        if forward_turn and forward_open:
            cand = hi + 1
            if cosine(embeddings[cand], centroid_sum / count) >= t_sim:
                hi = cand
                centroid_sum += embeddings[cand]
                count += 1
                forward_open = hi + 1 < n
            else:
                forward_open = False
        elif not forward_turn and backward_open:
            cand = lo - 1
            if cosine(embeddings[cand], centroid_sum / count) >= t_sim:
                lo = cand
                centroid_sum += embeddings[cand]
                count += 1
                backward_open = lo - 1 >= 0
            else:
                backward_open = False
        forward_turn = not forward_turn
    return lo, hi, centroid_sum / count


def expand_segment(
    transcript: Transcript,
    anchor_index: int,
    thresholds: Thresholds,
    embedder: EmbeddingProvider,
) -> Segment:
    embeddings = embedder.embed_batch([m.text for m in transcript.messages])
    lo, hi, centroid = _expand(embeddings, anchor_index, thresholds.similarity)
    return Segment(transcript.session_id, anchor_index, lo, hi, centroid)


def _label_one(features: TranscriptFeatures, thresholds: Thresholds) -> tuple[list[str], list[Segment]]:
    n = len(features.densities)
    anchors = [i for i, d in enumerate(features.densities) if d >= thresholds.anchor]
    raw: list[Segment] = []
    covered: set[int] = set()
    for a in anchors:
        if a in covered:
            continue
        lo, hi, centroid = _expand(features.embeddings, a, thresholds.similarity)
        raw.append(Segment(features.session_id, a, lo, hi, centroid))
        covered.update(range(lo, hi + 1))

    # Merge overlapping or abutting ranges; centroid becomes the merged mean.
    merged: list[Segment] = []
    for seg in sorted(raw, key=lambda s: (s.start_index, s.end_index)):
        if merged and seg.start_index <= merged[-1].end_index + 1:
            prev = merged[-1]
            prev.end_index = max(prev.end_index, seg.end_index)
            prev.centroid = features.embeddings[prev.start_index : prev.end_index + 1].mean(axis=0)
        else:
            merged.append(seg)

    labels = [NON_MATH] * n
    for seg in merged:
        for i in range(seg.start_index, seg.end_index + 1):
            labels[i] = MATH
    return labels, merged


def label_from_features(
    features: list[TranscriptFeatures], thresholds: Thresholds
) -> SegmentLabeling:
    labeling = SegmentLabeling(thresholds=thresholds)
    for f in features:
        labels, segments = _label_one(f, thresholds)
        labeling.labels[f.session_id] = labels
        labeling.segments[f.session_id] = segments
    return labeling


def label_corpus(
    corpus: list[Transcript],
    vocab: MathVocabulary,
    thresholds: Thresholds,
    embedder: EmbeddingProvider,
) -> SegmentLabeling:
    return label_from_features(compute_features(corpus, vocab, embedder), thresholds)


def write_labeling(labeling: SegmentLabeling, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for session_id, labels in labeling.labels.items():
            fh.write(json.dumps({"session_id": session_id, "labels": labels}))
            fh.write("\n")


def load_labeling(path: str | Path, thresholds: Thresholds | None = None) -> SegmentLabeling:
    labeling = SegmentLabeling(thresholds=thresholds or Thresholds(0.0, 0.0))
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            bad = [x for x in raw["labels"] if x not in (MATH, NON_MATH)]
            if bad:
                raise ValueError(f"bad segment labels {bad[:3]} in session {raw['session_id']}")
            labeling.labels[raw["session_id"]] = list(raw["labels"])
    return labeling
