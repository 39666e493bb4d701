"""Scoring detection results against benchmark labels.

Matching is message-scoped and greedy one-to-one. The default policy matches
on (type, normalized text) because LLM engines emit text/type pairs without
offsets; an overlap policy is available for offset-producing engines. Counts
are micro-aggregated; confidence intervals come from resampling transcripts
with replacement.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from math import ceil

import numpy as np

from .corpus import PiiSpan, Transcript
from .results import Detection, DetectionResult
from .segmentation import MATH, NON_MATH, SegmentLabeling


class MatchMode(Enum):
    TEXT_AND_TYPE = "TEXT_AND_TYPE"
    OVERLAP_AND_TYPE = "OVERLAP_AND_TYPE"


@dataclass(frozen=True)
class MatchPolicy:
    mode: MatchMode = MatchMode.TEXT_AND_TYPE

    @classmethod
    def parse(cls, name: str) -> "MatchPolicy":
        key = name.strip().upper()
        aliases = {"TEXT": MatchMode.TEXT_AND_TYPE, "OVERLAP": MatchMode.OVERLAP_AND_TYPE}
        mode = aliases.get(key) or MatchMode(key)
        return cls(mode=mode)


def normalize_text(text: str) -> str:
    return text.strip().casefold()


@dataclass
class MetricSet:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0

    def add(self, other: "MetricSet") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class MatchOutcome:
    matched: list[tuple[PiiSpan, Detection]] = field(default_factory=list)
    false_positives: list[Detection] = field(default_factory=list)
    false_negatives: list[PiiSpan] = field(default_factory=list)

    @property
    def counts(self) -> MetricSet:
        return MetricSet(len(self.matched), len(self.false_positives), len(self.false_negatives))


def _dedup_gold(spans: list[PiiSpan]) -> list[PiiSpan]:
    seen = set()
    out = []
    for s in sorted(spans, key=lambda s: (s.start, s.end)):
        key = (s.pii_type, normalize_text(s.surface))
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def _dedup_predictions(dets: list[Detection]) -> list[Detection]:
    seen = set()
    out = []
    for d in dets:
        key = (d.pii_type, normalize_text(d.text))
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


def match_spans(
    gold: list[PiiSpan], predicted: list[Detection], policy: MatchPolicy
) -> MatchOutcome:
    """Greedy one-to-one matching within a single message.

    Both sides are deduplicated per (type, normalized text) first, so repeated
    mentions count once; unmatched predictions are false positives, unmatched
    gold spans false negatives.
    """
    gold = _dedup_gold(gold)
    predicted = _dedup_predictions(predicted)
    outcome = MatchOutcome()
    taken: set[int] = set()
    for det in predicted:
        match_at = None
        for i, g in enumerate(gold):
            if i in taken or g.pii_type is not det.pii_type:
                continue
            if policy.mode is MatchMode.TEXT_AND_TYPE:
                hit = normalize_text(g.surface) == normalize_text(det.text)
            else:
                hit = det.grounded and det.start < g.end and g.start < det.end
            if hit:
                match_at = i
                break
        if match_at is None:
            outcome.false_positives.append(det)
        else:
            taken.add(match_at)
            outcome.matched.append((gold[match_at], det))
    outcome.false_negatives.extend(g for i, g in enumerate(gold) if i not in taken)
    return outcome


@dataclass
class BootstrapCI:
    metric: str
    lower: float
    upper: float
    iterations: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "lower": self.lower,
            "upper": self.upper,
            "iterations": self.iterations,
            "seed": self.seed,
        }


@dataclass
class EvalReport:
    engine: str
    policy: MatchPolicy
    overall: MetricSet
    per_type: dict[str, MetricSet]
    per_segment: dict[str, MetricSet] | None
    per_transcript: dict[str, MetricSet]
    cis: dict[str, BootstrapCI] | None = None

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "policy": self.policy.mode.value,
            "overall": self.overall.to_dict(),
            "per_type": {k: v.to_dict() for k, v in self.per_type.items()},
            "per_segment": (
                {k: v.to_dict() for k, v in self.per_segment.items()}
                if self.per_segment is not None
                else None
            ),
            "per_transcript": {k: v.to_dict() for k, v in self.per_transcript.items()},
            "cis": {k: v.to_dict() for k, v in self.cis.items()} if self.cis else None,
        }


class StrataError(ValueError):
    pass


def evaluate(
    corpus: list[Transcript],
    results: list[DetectionResult],
    policy: MatchPolicy = MatchPolicy(),
    labeling: SegmentLabeling | None = None,
    with_segments: bool = False,
) -> EvalReport:
    """Micro-aggregated overall, per-type, and (optionally) per-segment metrics."""
    if with_segments and labeling is None:
        raise StrataError("per-segment metrics requested but no segment labeling supplied")
    by_session = {r.session_id: r for r in results}
    engine = results[0].engine if results else "unknown"
    overall = MetricSet()
    per_type: dict[str, MetricSet] = {}
    per_segment: dict[str, MetricSet] | None = (
        {MATH: MetricSet(), NON_MATH: MetricSet()} if with_segments else None
    )
    per_transcript: dict[str, MetricSet] = {}

    for t in corpus:
        result = by_session.get(t.session_id)
        preds_by_index = (
            {md.index: md.detections for md in result.messages} if result is not None else {}
        )
        t_counts = MetricSet()
        for m in t.messages:
            preds = preds_by_index.get(m.index, [])
            outcome = match_spans(m.labels, preds, policy)
            counts = outcome.counts
            t_counts.add(counts)
            overall.add(counts)
            for g, _d in outcome.matched:
                per_type.setdefault(g.pii_type.value, MetricSet()).tp += 1
            for d in outcome.false_positives:
                per_type.setdefault(d.pii_type.value, MetricSet()).fp += 1
            for g in outcome.false_negatives:
                per_type.setdefault(g.pii_type.value, MetricSet()).fn += 1
            if per_segment is not None:
                per_segment[labeling.label(t.session_id, m.index)].add(counts)
        per_transcript[t.session_id] = t_counts
    return EvalReport(engine, policy, overall, per_type, per_segment, per_transcript)


def _nearest_rank(sorted_values: np.ndarray, percentile: float) -> float:
    n = len(sorted_values)
    rank = max(1, ceil(percentile / 100.0 * n))
    return float(sorted_values[min(rank, n) - 1])


def _metrics_from_counts(tp: np.ndarray, fp: np.ndarray, fn: np.ndarray) -> dict[str, np.ndarray]:
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(tp + fp > 0, tp / np.maximum(tp + fp, 1), 0.0)
        recall = np.where(tp + fn > 0, tp / np.maximum(tp + fn, 1), 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / np.maximum(denom, 1e-300), 0.0)
    return {"precision": precision, "recall": recall, "f1": f1}


def bootstrap_ci(
    corpus: list[Transcript],
    results: list[DetectionResult],
    policy: MatchPolicy = MatchPolicy(),
    iterations: int = 1000,
    seed: int = 0,
    parallel: bool = False,
) -> dict[str, BootstrapCI]:
    """95% CIs for precision/recall/F1 by resampling transcripts with replacement.

    Each iteration draws N transcripts (N = corpus size), pools their counts
    with multiplicity, and recomputes the metrics; bounds are the nearest-rank
    2.5th/97.5th percentiles. The resample index matrix is derived from the
    seed up front, so parallel and serial execution are bit-identical.
    """
    report = evaluate(corpus, results, policy)
    counts = np.array(
        [
            [report.per_transcript[t.session_id].tp,
             report.per_transcript[t.session_id].fp,
             report.per_transcript[t.session_id].fn]
            for t in corpus
        ],
        dtype=np.int64,
    )
    n = len(corpus)
    if n == 0:
        raise ValueError("bootstrap needs at least one transcript")
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, n, size=(iterations, n))

    def pool_rows(rows: np.ndarray) -> np.ndarray:
        return counts[rows].sum(axis=1)  # (chunk, 3)

    if parallel:
        chunks = np.array_split(indices, 8)
        with ThreadPoolExecutor(max_workers=8) as pool:
            pooled = np.concatenate(list(pool.map(pool_rows, chunks)))
    else:
        pooled = pool_rows(indices)

    stats = _metrics_from_counts(
        pooled[:, 0].astype(float), pooled[:, 1].astype(float), pooled[:, 2].astype(float)
    )
    cis = {}
    for metric, values in stats.items():
        ordered = np.sort(values)
        cis[metric] = BootstrapCI(
            metric=metric,
            lower=_nearest_rank(ordered, 2.5),
            upper=_nearest_rank(ordered, 97.5),
            iterations=iterations,
            seed=seed,
        )
    return cis
