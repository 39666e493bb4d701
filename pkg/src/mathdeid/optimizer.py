"""Grid search over (anchor, similarity) thresholds.

Each grid point labels the corpus, then measures how the resulting math
segments capture audited upstream labels: the proportion of false-positive
labels (audited "Not PII") falling inside MATH-labeled messages, and the same
proportion for true PII. The objective is the harmonic mean of the
false-positive proportion and one minus the true-positive proportion, so the
best thresholds sweep up mistaken redactions while leaving real PII outside.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Iterable, Mapping

from .corpus import Transcript
from .embeddings import EmbeddingProvider
from .segmentation import (
    MATH,
    SegmentLabeling,
    Thresholds,
    TranscriptFeatures,
    compute_features,
    label_from_features,
)
from .vocabulary import MathVocabulary

DEFAULT_ANCHOR_RANGE = tuple(round(0.05 + 0.01 * i, 10) for i in range(6))  # 0.05..0.10
DEFAULT_SIM_RANGE = tuple(round(0.1 * i, 10) for i in range(6))  # 0.0..0.5

# Verdict strings as used by the audit workflow.
VERDICT_PII = "PII"
VERDICT_NOT_PII = "NOT_PII"
VERDICT_UNCERTAIN = "UNCERTAIN"

LabelKey = tuple[str, int, int, int]  # (session_id, message_index, start, end)


class UnauditedLabelError(ValueError):
    pass


def harmonic_objective(fp_proportion: float, tp_proportion: float) -> float:
    """H = 2*a*(1-t) / (a + (1-t)), defined as 0 when the denominator is 0."""
    a = fp_proportion
    b = 1.0 - tp_proportion
    return 2.0 * a * b / (a + b) if (a + b) > 0 else 0.0


@dataclass(frozen=True)
class GridPoint:
    thresholds: Thresholds
    fp_captured: int
    fp_total: int
    tp_captured: int
    tp_total: int

    @property
    def fp_proportion(self) -> float:
        return self.fp_captured / self.fp_total if self.fp_total else 0.0

    @property
    def tp_proportion(self) -> float:
        return self.tp_captured / self.tp_total if self.tp_total else 0.0

    @property
    def objective(self) -> float:
        # A degenerate grid point (no labels at all) scores 0.
        if self.fp_total == 0 and self.tp_total == 0:
            return 0.0
        return harmonic_objective(self.fp_proportion, self.tp_proportion)


def _count_point(
    corpus: list[Transcript],
    labeling: SegmentLabeling,
    verdicts: Mapping[LabelKey, str],
    uncertain: str,
) -> tuple[int, int, int, int]:
    fp_cap = fp_tot = tp_cap = tp_tot = 0
    for t in corpus:
        for m in t.messages:
            in_math = labeling.label(t.session_id, m.index) == MATH
            for span in m.labels:
                key = (t.session_id, m.index, span.start, span.end)
                verdict = verdicts.get(key)
                if verdict is None:
                    raise UnauditedLabelError(
                        f"label {span.pii_type.value} at {key} has no audit verdict"
                    )
                if verdict == VERDICT_UNCERTAIN:
                    verdict = {"exclude": None, "pii": VERDICT_PII, "not_pii": VERDICT_NOT_PII}[
                        uncertain
                    ]
                if verdict == VERDICT_NOT_PII:
                    fp_tot += 1
                    fp_cap += in_math
                elif verdict == VERDICT_PII:
                    tp_tot += 1
                    tp_cap += in_math
    return fp_cap, fp_tot, tp_cap, tp_tot


def evaluate_grid(
    corpus: list[Transcript],
    verdicts: Mapping[LabelKey, str],
    vocab: MathVocabulary,
    embedder: EmbeddingProvider,
    anchor_range: Iterable[float] = DEFAULT_ANCHOR_RANGE,
    sim_range: Iterable[float] = DEFAULT_SIM_RANGE,
    uncertain: str = "exclude",
    features: list[TranscriptFeatures] | None = None,
) -> list[GridPoint]:
    """One GridPoint per (anchor, similarity) pair, ordered by the pair.

    Densities and embeddings are computed once and shared by every
    configuration; ``uncertain`` controls whether UNCERTAIN verdicts count as
    excluded (default), as PII, or as NOT_PII.
    """
    anchor_values = list(anchor_range)
    sim_values = list(sim_range)
    if not anchor_values or not sim_values:
        raise ValueError("threshold ranges must be non-empty")
    if uncertain not in ("exclude", "pii", "not_pii"):
        raise ValueError(f"bad uncertain policy {uncertain!r}")
    if features is None:
        features = compute_features(corpus, vocab, embedder)
    grid = []
    for ta in anchor_values:
        for ts in sim_values:
            thresholds = Thresholds(ta, ts)
            labeling = label_from_features(features, thresholds)
            fp_cap, fp_tot, tp_cap, tp_tot = _count_point(corpus, labeling, verdicts, uncertain)
            grid.append(GridPoint(thresholds, fp_cap, fp_tot, tp_cap, tp_tot))
    return grid


def select_thresholds(grid: list[GridPoint]) -> Thresholds:
    """Argmax of the objective; ties broken by smaller anchor, then similarity."""
    if not grid:
        raise ValueError("empty grid")
    best = max(
        grid,
        key=lambda g: (g.objective, -g.thresholds.anchor, -g.thresholds.similarity),
    )
    return best.thresholds


def grid_to_csv(grid: list[GridPoint]) -> str:
    """Heatmap-ready table: t_anchor,t_sim,fp_prop,tp_prop,objective."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_anchor", "t_sim", "fp_prop", "tp_prop", "objective"])
    for g in grid:
        writer.writerow(
            [
                f"{g.thresholds.anchor:g}",
                f"{g.thresholds.similarity:g}",
                f"{g.fp_proportion:.6f}",
                f"{g.tp_proportion:.6f}",
                f"{g.objective:.6f}",
            ]
        )
    return buf.getvalue()
