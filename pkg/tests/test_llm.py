import json
import random
import string

import pytest

from mathdeid.corpus import PiiType, Transcript
from mathdeid.embeddings import HashedTfEmbedder
from mathdeid.evaluation import MatchPolicy, evaluate
from mathdeid.llm import (
    GatewayAbort,
    GatewayAuthError,
    GatewayRequest,
    MockChatClient,
    PromptVariant,
    ReplayClient,
    ResponseLog,
    build_prompt,
    detect_llm_corpus,
    parse_detections,
    request_hash,
)
from mathdeid.llm.client import GatewayTransientError, _RetryingClient
from mathdeid.llm.prompts import PromptConfigError
from mathdeid.results import PARSE_EMPTY, PARSE_MALFORMED, PARSE_OK
from mathdeid.segmentation import Thresholds, label_corpus
from mathdeid.vocabulary import load_vocabulary

from helpers import ScriptedDetector, llm_fixture_corpus, mk_message

NUMERIC_TYPES = {
    PiiType.DATE,
    PiiType.US_DRIVER_LICENSE,
    PiiType.PHONE_NUMBER,
    PiiType.US_SSN,
    PiiType.US_BANK_NUMBER,
}


# --- prompt templates ---------------------------------------------------------

def test_basic_template_contract():
    t = PromptVariant.BASIC.template
    assert "identify ALL PII in the provided message content" in t
    for pii_type in PiiType:
        assert pii_type.prompt_name in t
    assert "COURSE_NUMBER" not in t  # prompt taxonomy uses the COURSE alias


def test_math_aware_template_contract():
    assert "general math content should not be annotated as PII" in PromptVariant.MATH_AWARE.template


def test_segment_aware_template_contract():
    t = PromptVariant.SEGMENT_AWARE.template
    assert "math_label" in t
    assert '"MATH"' in t and "NON-MATH" in t
    assert "Be extra careful when detecting PII within math messages" in t


def test_build_prompt_context_window():
    t = Transcript("t", [mk_message(i, f"message number {i}") for i in range(10)])
    req = build_prompt(PromptVariant.BASIC, t, 5)
    payload = json.loads(req.user_text)
    assert payload["target_message"]["index"] == 5
    assert [m["index"] for m in payload["context"]] == [2, 3, 4, 6, 7, 8]


def test_build_prompt_segment_aware_carries_math_label():
    corpus = llm_fixture_corpus()
    labeling = label_corpus(corpus, load_vocabulary(), Thresholds(0.05, 0.3), HashedTfEmbedder(64))
    req = build_prompt(PromptVariant.SEGMENT_AWARE, corpus[0], 1, labeling=labeling)
    assert '"math_label": "MATH"' in req.user_text
    req0 = build_prompt(PromptVariant.SEGMENT_AWARE, corpus[0], 0, labeling=labeling)
    assert '"math_label": "NON-MATH"' in req0.user_text


def test_build_prompt_segment_aware_requires_labeling():
    corpus = llm_fixture_corpus()
    with pytest.raises(PromptConfigError):
        build_prompt(PromptVariant.SEGMENT_AWARE, corpus[0], 0, labeling=None)
    with pytest.raises(PromptConfigError):
        detect_llm_corpus(corpus, PromptVariant.SEGMENT_AWARE, MockChatClient(lambda r: ""))


# --- parser -------------------------------------------------------------------

def test_parse_direct_array():
    out = parse_detections('[{"text":"John","type":"PERSON"}]')
    assert out.parse_status == PARSE_OK
    assert [(d.text, d.pii_type) for d in out.detections] == [("John", PiiType.PERSON)]


def test_parse_empty_is_empty():
    for raw in ("", "   ", "\n\t"):
        out = parse_detections(raw)
        assert out.parse_status == PARSE_EMPTY and out.detections == []


def test_parse_course_alias():
    out = parse_detections('[{"text":"algebra 300","type":"COURSE"}]')
    assert out.detections[0].pii_type is PiiType.COURSE_NUMBER


def test_parse_fenced_block_and_prose():
    raw = 'Sure! Here are the findings:\n```json\n[{"text": "a@b.co", "type": "EMAIL_ADDRESS"}]\n```\nLet me know.'
    out = parse_detections(raw)
    assert out.parse_status == PARSE_OK and len(out.detections) == 1


def test_parse_skips_invalid_entries():
    raw = '[{"text":"x","type":"NOT_A_TYPE"}, {"type":"PERSON"}, 42, {"text":"Ana","type":"PERSON"}]'
    out = parse_detections(raw)
    assert out.parse_status == PARSE_OK
    assert [(d.text, d.pii_type) for d in out.detections] == [("Ana", PiiType.PERSON)]


def test_parse_garbage_is_malformed_never_raises():
    for raw in ("not json at all", "[1, 2,", '{"text": "a"}', "null", "[[", "[{]"):
        out = parse_detections(raw)
        assert out.parse_status == PARSE_MALFORMED
        assert out.detections == []


def test_parse_totality_over_adversarial_outputs():
    rng = random.Random(42)
    alphabet = string.printable + "🧮🙂«»[]{}\\\""
    crafted = [
        "[", "]", "[]", "[{}]", "[{\"text\":1,\"type\":\"PERSON\"}]",
        "```\n[\n```", "[" * 500, "{" * 500, '[{"text":"a","type":"PERSON"}' ,
        '[{"text": "\\ud800", "type": "PERSON"}]', "[null]", '["text"]',
    ]
    statuses = set()
    for i in range(1000):
        if i < len(crafted):
            raw = crafted[i]
        else:
            raw = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 120)))
        out = parse_detections(raw)  # must never raise
        assert out.parse_status in (PARSE_OK, PARSE_MALFORMED, PARSE_EMPTY)
        statuses.add(out.parse_status)
    assert PARSE_MALFORMED in statuses


# --- corpus detection ----------------------------------------------------------

def run_variant(variant, corpus=None, client=None, labeling=None, log=None):
    corpus = corpus or llm_fixture_corpus()
    client = client or MockChatClient(ScriptedDetector())
    if variant is PromptVariant.SEGMENT_AWARE and labeling is None:
        labeling = label_corpus(
            corpus, load_vocabulary(), Thresholds(0.05, 0.3), HashedTfEmbedder(64)
        )
    return detect_llm_corpus(corpus, variant, client, labeling=labeling, response_log=log)


def test_mock_end_to_end_deterministic():
    first = [r.to_dict() for r in run_variant(PromptVariant.BASIC)]
    second = [r.to_dict() for r in run_variant(PromptVariant.BASIC)]
    assert first == second
    assert first[0]["engine"] == "llm:basic"


def test_detections_grounded_to_first_occurrence():
    results = run_variant(PromptVariant.BASIC)
    by_session = {r.session_id: r for r in results}
    person = [
        d for d in by_session["llm-a"].messages[2].detections if d.pii_type is PiiType.PERSON
    ]
    assert person and person[0].start >= 0
    text = llm_fixture_corpus()[0].messages[2].text
    assert text[person[0].start : person[0].end] == "John Carter"


def test_numeric_fp_monotonicity_on_fixture():
    corpus = llm_fixture_corpus()
    policy = MatchPolicy.parse("text")

    def numeric_fp(variant):
        results = run_variant(variant, corpus=corpus)
        report = evaluate(corpus, results, policy)
        return sum(m.fp for t, m in report.per_type.items() if PiiType.parse(t) in NUMERIC_TYPES)

    basic = numeric_fp(PromptVariant.BASIC)
    math_aware = numeric_fp(PromptVariant.MATH_AWARE)
    segment_aware = numeric_fp(PromptVariant.SEGMENT_AWARE)
    assert basic > 0
    assert math_aware <= basic
    assert segment_aware <= basic
    # recall of true PII is not sacrificed on the fixture
    results = run_variant(PromptVariant.MATH_AWARE, corpus=corpus)
    report = evaluate(corpus, results, policy)
    assert report.overall.recall == 1.0


def test_retry_transient_then_success():
    client = MockChatClient(ScriptedDetector(), flaky=1)
    results = run_variant(PromptVariant.BASIC, client=client)
    attempts = {m.attempts for r in results for m in r.messages}
    assert attempts == {2}
    assert all(m.parse_status in (PARSE_OK, PARSE_EMPTY) for r in results for m in r.messages)


def test_retry_exhaustion_marks_malformed():
    client = MockChatClient(ScriptedDetector(), flaky=3)  # max_attempts is 3
    results = run_variant(PromptVariant.BASIC, client=client)
    statuses = {m.parse_status for r in results for m in r.messages}
    assert statuses == {PARSE_MALFORMED}
    assert all(m.attempts == 3 for r in results for m in r.messages)


def test_auth_error_aborts_with_completed_work():
    corpus = llm_fixture_corpus()
    seen = {"n": 0}

    class DyingClient(_RetryingClient):
        model_id = "dying"

        def _send(self, request):
            seen["n"] += 1
            if seen["n"] > 4:  # fail inside the second transcript
                raise GatewayAuthError("credentials expired")
            return ""

    with pytest.raises(GatewayAbort) as err:
        detect_llm_corpus(corpus, PromptVariant.BASIC, DyingClient(), concurrency_limit=1)
    assert err.value.completed  # first transcript finished
    assert err.value.completed[0].session_id == "llm-a"


def test_replay_reproduces_identical_results(tmp_path):
    corpus = llm_fixture_corpus()
    log_path = tmp_path / "responses.jsonl"
    log = ResponseLog(log_path)
    live = run_variant(PromptVariant.BASIC, corpus=corpus, log=log)
    replayed = detect_llm_corpus(corpus, PromptVariant.BASIC, ReplayClient(log_path, model_id="mock-model"))
    assert [r.to_dict() for r in replayed] == [r.to_dict() for r in live]


def test_replay_missing_request_is_error(tmp_path):
    log_path = tmp_path / "responses.jsonl"
    log_path.write_text("")
    corpus = llm_fixture_corpus()
    with pytest.raises(GatewayAbort):
        detect_llm_corpus(corpus, PromptVariant.BASIC, ReplayClient(log_path))


def test_request_hash_stable():
    req = GatewayRequest("m", "sys", "user")
    assert request_hash(req) == request_hash(GatewayRequest("m", "sys", "user"))
    assert request_hash(req) != request_hash(GatewayRequest("m", "sys", "other"))


def test_wire_format_pins_deterministic_decoding():
    wire = GatewayRequest("m", "sys", "user").to_wire()
    assert wire["model"] == "m"
    assert [m["role"] for m in wire["messages"]] == ["system", "user"]
    assert wire["temperature"] == 0.0


def test_gateway_rate_limiter_spaces_sends():
    from mathdeid.llm.client import ChatGatewayClient

    waits = []
    client = ChatGatewayClient(url="http://gateway.test", rate_limit_per_s=2.0,
                               sleep=waits.append)
    for _ in range(3):
        client._throttle()
    assert len(waits) == 2  # first send goes straight through
    assert 0.4 < waits[0] <= 0.51
    assert 0.9 < waits[1] <= 1.02


def test_empty_messages_skipped():
    t = Transcript("t", [mk_message(0, "   "), mk_message(1, "my name is John Carter")])
    results = detect_llm_corpus([t], PromptVariant.BASIC, MockChatClient(ScriptedDetector()))
    assert results[0].messages[0].parse_status == PARSE_EMPTY
    assert results[0].messages[0].detections == []
    assert results[0].messages[1].detections
