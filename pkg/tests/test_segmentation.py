import numpy as np
import pytest

from mathdeid.corpus import Transcript
from mathdeid.density import math_density
from mathdeid.embeddings import HashedTfEmbedder, cosine
from mathdeid.segmentation import (
    MATH,
    NON_MATH,
    Thresholds,
    compute_features,
    expand_segment,
    find_anchors,
    label_corpus,
    label_from_features,
    load_labeling,
    math_token_share,
    write_labeling,
)
from mathdeid.vocabulary import load_vocabulary

from helpers import mk_message, synth_corpus

VOCAB = load_vocabulary()


class VecEmbedder:
    """Maps exact texts to fixed vectors; everything else to zero."""

    provider_id = "stub"

    def __init__(self, table: dict[str, list[float]], dimension: int = 3):
        self.table = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        self.dimension = dimension

    def embed(self, text):
        return self.table.get(text, np.zeros(self.dimension))

    def embed_batch(self, texts):
        return np.stack([self.embed(t) for t in texts])


def test_find_anchors_thresholding():
    t = Transcript("t", [
        mk_message(0, "hello there friend"),
        mk_message(1, "the slope is 2 and the intercept is 3"),  # density 0.2
        mk_message(2, "see you tomorrow"),
    ])
    assert find_anchors(t, VOCAB, Thresholds(0.05, 0.3)) == [1]
    assert find_anchors(t, VOCAB, Thresholds(0.25, 0.3)) == []


def test_expand_segment_stub_similarities():
    # prev has cosine 0.4 to the anchor, next 0.2; T_sim = 0.3 keeps only prev.
    table = {
        "prev": [0.4, np.sqrt(1 - 0.16), 0.0],
        "anchor": [1.0, 0.0, 0.0],
        "next": [0.2, 0.0, np.sqrt(1 - 0.04)],
    }
    emb = VecEmbedder(table)
    assert abs(cosine(emb.embed("prev"), emb.embed("anchor")) - 0.4) < 1e-12
    assert abs(cosine(emb.embed("next"), emb.embed("anchor")) - 0.2) < 1e-12
    t = Transcript("t", [mk_message(0, "prev"), mk_message(1, "anchor"), mk_message(2, "next")])
    seg = expand_segment(t, 1, Thresholds(0.0, 0.3), emb)
    assert (seg.start_index, seg.end_index) == (0, 1)


def test_expand_segment_zero_threshold_spans_everything():
    emb = HashedTfEmbedder(64)  # nonnegative vectors, so all cosines are >= 0
    t = Transcript("t", [mk_message(i, x) for i, x in enumerate(
        ["aa bb", "cc dd", "solve the equation", "ee ff", "gg hh"]
    )])
    seg = expand_segment(t, 2, Thresholds(0.0, 0.0), emb)
    assert (seg.start_index, seg.end_index) == (0, 4)


def test_expand_segment_single_message():
    t = Transcript("t", [mk_message(0, "solve the equation")])
    seg = expand_segment(t, 0, Thresholds(0.0, 0.5), HashedTfEmbedder(32))
    assert (seg.start_index, seg.end_index) == (0, 0)


def test_centroid_updates_on_join():
    # candidate C clears the threshold against the running mean of {A, B}
    # but not against the anchor alone, so joining B must move the centroid.
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.5, np.sqrt(1 - 0.25), 0.0])
    c = np.array([0.1, np.sqrt(1 - 0.01), 0.0])
    t_sim = 0.5
    assert cosine(b, a) >= t_sim
    assert cosine(c, a) < t_sim
    assert cosine(c, (a + b) / 2) >= t_sim
    emb = VecEmbedder({"a": list(a), "b": list(b), "c": list(c)})
    t = Transcript("t", [mk_message(0, "a"), mk_message(1, "b"), mk_message(2, "c")])
    seg = expand_segment(t, 0, Thresholds(0.0, t_sim), emb)
    assert (seg.start_index, seg.end_index) == (0, 2)


def test_label_corpus_merges_overlapping_and_abutting():
    texts = [
        "hi how are you doing",
        "ok cool talk later",
        "my dog barked all night",
        "the slope is 2 and the intercept is 3",
        "add the fractions and simplify the ratio",
        "want to watch a movie",
        "bye bye see you",
    ]
    corpus = [Transcript("t", [mk_message(i, x) for i, x in enumerate(texts)])]
    # High similarity threshold: segments stay on their anchors, then merge.
    labeling = label_corpus(corpus, VOCAB, Thresholds(0.05, 0.99), HashedTfEmbedder(64))
    segments = labeling.segments["t"]
    assert len(segments) == 1
    assert (segments[0].start_index, segments[0].end_index) == (3, 4)
    assert labeling.labels["t"] == [NON_MATH] * 3 + [MATH, MATH] + [NON_MATH] * 2


def test_label_corpus_no_anchors_all_non_math():
    corpus = [Transcript("t", [mk_message(0, "hello"), mk_message(1, "bye")])]
    labeling = label_corpus(corpus, VOCAB, Thresholds(0.05, 0.3), HashedTfEmbedder(32))
    assert labeling.labels["t"] == [NON_MATH, NON_MATH]
    assert labeling.segments["t"] == []


def test_labeling_round_trip(tmp_path):
    corpus = synth_corpus(5, seed=3)
    labeling = label_corpus(corpus, VOCAB, Thresholds(0.05, 0.3), HashedTfEmbedder(64))
    path = tmp_path / "labels.jsonl"
    write_labeling(labeling, path)
    loaded = load_labeling(path)
    assert loaded.labels == labeling.labels


def test_load_labeling_rejects_bad_labels(tmp_path):
    path = tmp_path / "labels.jsonl"
    path.write_text('{"session_id": "x", "labels": ["MATH", "SORTA"]}\n')
    with pytest.raises(ValueError):
        load_labeling(path)


def test_cosine_zero_vector_is_zero():
    assert cosine(np.zeros(4), np.ones(4)) == 0.0
    assert cosine(np.ones(4), np.zeros(4)) == 0.0
    assert cosine(np.zeros(4), np.zeros(4)) == 0.0


def test_math_token_share():
    corpus = [Transcript("t", [
        mk_message(0, "one two three four"),          # 4 tokens, chat
        mk_message(1, "solve the equation now"),      # 4 tokens, math anchor
    ])]
    labeling = label_corpus(corpus, VOCAB, Thresholds(0.05, 0.99), HashedTfEmbedder(32))
    assert labeling.labels["t"] == [NON_MATH, MATH]
    assert math_token_share(corpus, labeling) == pytest.approx(0.5)


# --- property suite over synthetic transcripts --------------------------------

ANCHOR_GRID = [0.05, 0.10, 0.30]
SIM_GRID = [0.0, 0.2, 0.4, 0.6]


@pytest.fixture(scope="module")
def synth_features():
    corpus = synth_corpus(200, seed=11)
    embedder = HashedTfEmbedder(128)
    features = compute_features(corpus, VOCAB, embedder)
    densities = {f.session_id: f.densities for f in features}
    return corpus, features, densities


def test_anchor_containment(synth_features):
    corpus, features, densities = synth_features
    for ta in ANCHOR_GRID:
        for ts in SIM_GRID:
            labeling = label_from_features(features, Thresholds(ta, ts))
            for t in corpus:
                for i, d in enumerate(densities[t.session_id]):
                    if d >= ta:
                        assert labeling.labels[t.session_id][i] == MATH


def test_segments_disjoint_and_anchored(synth_features):
    corpus, features, densities = synth_features
    for ta in ANCHOR_GRID:
        for ts in SIM_GRID:
            labeling = label_from_features(features, Thresholds(ta, ts))
            for t in corpus:
                segs = sorted(labeling.segments[t.session_id], key=lambda s: s.start_index)
                for a, b in zip(segs, segs[1:]):
                    assert a.end_index < b.start_index  # disjoint after merge
                dens = densities[t.session_id]
                for seg in segs:
                    assert seg.start_index <= seg.end_index
                    assert any(
                        dens[i] >= ta for i in range(seg.start_index, seg.end_index + 1)
                    ), "segment without an anchor"


def test_monotone_in_similarity_threshold(synth_features):
    corpus, features, _ = synth_features
    for ta in ANCHOR_GRID:
        previous = None
        for ts in SIM_GRID:  # ascending
            labeling = label_from_features(features, Thresholds(ta, ts))
            math_set = {
                (sid, i)
                for sid, labels in labeling.labels.items()
                for i, lab in enumerate(labels)
                if lab == MATH
            }
            if previous is not None:
                assert math_set <= previous
            previous = math_set


def test_monotone_in_anchor_threshold(synth_features):
    corpus, features, densities = synth_features
    for sid, dens in densities.items():
        previous = None
        for ta in ANCHOR_GRID:
            anchors = {i for i, d in enumerate(dens) if d >= ta}
            if previous is not None:
                assert anchors <= previous
            previous = anchors
