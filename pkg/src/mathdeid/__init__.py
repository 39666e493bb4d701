"""mathdeid: utility-preserving PII detection for math tutoring transcripts.

The package covers the full pipeline: corpus modeling, math-density
segmentation with threshold optimization, baseline and prompt-driven PII
detection, bootstrap evaluation, and the human-in-the-loop audit/surrogation
workflow that turns an upstream-redacted corpus into a clean benchmark.
"""

__version__ = "0.1.0"

from .corpus import (
    CorpusError,
    Message,
    PiiSpan,
    PiiType,
    Provenance,
    Transcript,
    corpus_stats,
    load_corpus,
    write_corpus,
)
from .density import DensityScore, math_density, tokenize
from .embeddings import CachingEmbedder, HashedTfEmbedder, cosine, make_embedder
from .evaluation import (
    BootstrapCI,
    EvalReport,
    MatchMode,
    MatchPolicy,
    MetricSet,
    bootstrap_ci,
    evaluate,
    match_spans,
)
from .optimizer import GridPoint, evaluate_grid, harmonic_objective, select_thresholds
from .recognizers import (
    NerAdapter,
    Recognizer,
    builtin_recognizers,
    detect_baseline,
    detect_baseline_corpus,
    register_ner_provider,
    resolve_ner,
)
from .results import Detection, DetectionResult, MessageDetections
from .segmentation import (
    MATH,
    NON_MATH,
    Segment,
    SegmentLabeling,
    Thresholds,
    expand_segment,
    find_anchors,
    label_corpus,
)
from .surrogation import (
    AnnotationItem,
    SurrogateRegistry,
    SurrogationError,
    Vote,
    apply_surrogates,
    audit_corpus,
    close_iteration,
    resolution_rate,
)
from .vocabulary import MathVocabulary, build_vocabulary, load_vocabulary

__all__ = [
    "__version__",
    "CorpusError",
    "Message",
    "PiiSpan",
    "PiiType",
    "Provenance",
    "Transcript",
    "corpus_stats",
    "load_corpus",
    "write_corpus",
    "DensityScore",
    "math_density",
    "tokenize",
    "CachingEmbedder",
    "HashedTfEmbedder",
    "cosine",
    "make_embedder",
    "BootstrapCI",
    "EvalReport",
    "MatchMode",
    "MatchPolicy",
    "MetricSet",
    "bootstrap_ci",
    "evaluate",
    "match_spans",
    "GridPoint",
    "evaluate_grid",
    "harmonic_objective",
    "select_thresholds",
    "NerAdapter",
    "Recognizer",
    "builtin_recognizers",
    "detect_baseline",
    "detect_baseline_corpus",
    "register_ner_provider",
    "resolve_ner",
    "Detection",
    "DetectionResult",
    "MessageDetections",
    "MATH",
    "NON_MATH",
    "Segment",
    "SegmentLabeling",
    "Thresholds",
    "expand_segment",
    "find_anchors",
    "label_corpus",
    "AnnotationItem",
    "SurrogateRegistry",
    "SurrogationError",
    "Vote",
    "apply_surrogates",
    "audit_corpus",
    "close_iteration",
    "resolution_rate",
    "MathVocabulary",
    "build_vocabulary",
    "load_vocabulary",
]
