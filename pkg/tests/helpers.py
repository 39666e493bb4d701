"""Shared fixture builders: synthetic corpora and scripted mock clients."""

from __future__ import annotations

import json
import random

from mathdeid.corpus import Message, PiiSpan, PiiType, Provenance, Transcript
from mathdeid.llm.client import GatewayRequest

MATH_TEMPLATES = [
    "solve the equation {a}x + {b} = {c}",
    "the slope is {a} and the intercept is {b}",
    "add the fractions and simplify the ratio first",
    "compute the area of the triangle with base {a}",
    "find the least common multiple of {a} and {b}",
    "graph the quadratic and find the vertex",
    "so we divide both sides and the quotient is {a}",
    "the decimal {a}.{b} rounds to {a}",
]

CHAT_TEMPLATES = [
    "hi how was your weekend",
    "my teacher said we might have a quiz on friday",
    "thanks so much you are awesome",
    "i have to go soon my mom is calling me",
    "did you watch the game last night",
    "sorry i was away from the keyboard for a bit",
    "ok cool see you next week then",
    "this chat tool keeps lagging on my laptop",
]


def mk_message(index: int, text: str, labels=None, role: str | None = None) -> Message:
    return Message(
        index=index,
        role=role or ("Volunteer" if index % 2 == 0 else "Student"),
        text=text,
        labels=labels or [],
    )


def mk_span(text: str, needle: str, pii_type: PiiType,
            provenance: Provenance = Provenance.UPSTREAM) -> PiiSpan:
    start = text.index(needle)
    return PiiSpan(start, start + len(needle), needle, pii_type, provenance)


def synth_transcript(session_id: str, rng: random.Random, n_blocks: int = 3) -> Transcript:
    """Alternating chat / math blocks with realistic-ish filler."""
    messages = []
    index = 0
    for _block in range(n_blocks):
        for _ in range(rng.randint(2, 4)):
            messages.append(mk_message(index, rng.choice(CHAT_TEMPLATES)))
            index += 1
        for _ in range(rng.randint(2, 4)):
            template = rng.choice(MATH_TEMPLATES)
            text = template.format(
                a=rng.randint(1, 9), b=rng.randint(1, 9), c=rng.randint(10, 99)
            )
            messages.append(mk_message(index, text))
            index += 1
    return Transcript(session_id, messages)


def synth_corpus(n_transcripts: int, seed: int = 7) -> list[Transcript]:
    rng = random.Random(seed)
    return [synth_transcript(f"s{i:04d}", rng) for i in range(n_transcripts)]


def request_target_text(request: GatewayRequest) -> str:
    return json.loads(request.user_text)["target_message"]["text"]


def request_payload(request: GatewayRequest) -> dict:
    return json.loads(request.user_text)


class ScriptedDetector:
    """Mock LLM detector used for the offline end-to-end runs.

    The basic prompt over-triggers on the planted math sentence with numeric
    types; math-aware and segment-aware prompting stay quiet there. Real PII
    is detected under every variant.
    """

    def __call__(self, request: GatewayRequest) -> str:
        text = request_target_text(request)
        system = request.system_text
        math_aware = (
            "general math content should not be annotated as PII" in system
            or "math_label" in system
        )
        out = []
        if "2x + 5 = 11" in text and not math_aware:
            out.append({"text": "2x + 5 = 11", "type": "US_DRIVER_LICENSE"})
            out.append({"text": "5 = 11", "type": "DATE"})
        if "John Carter" in text:
            out.append({"text": "John Carter", "type": "PERSON"})
        if "jdoe@example.com" in text:
            out.append({"text": "jdoe@example.com", "type": "EMAIL_ADDRESS"})
        if "algebra 300" in text:
            out.append({"text": "algebra 300", "type": "COURSE"})
        if not out:
            return ""
        return json.dumps(out)


def llm_fixture_corpus() -> list[Transcript]:
    t1_texts = [
        "hi there, glad to see you today",
        "solve 2x + 5 = 11 for x",
        "my name is John Carter by the way",
        "email me at jdoe@example.com after class",
    ]
    t2_texts = [
        "i'm taking algebra 300 this semester",
        "ok lets practice with 2x + 5 = 11 again",
        "thanks, that helps a lot",
    ]
    t1 = Transcript("llm-a", [mk_message(i, x) for i, x in enumerate(t1_texts)])
    t2 = Transcript("llm-b", [mk_message(i, x) for i, x in enumerate(t2_texts)])
    t1.messages[2].labels = [mk_span(t1_texts[2], "John Carter", PiiType.PERSON)]
    t1.messages[3].labels = [mk_span(t1_texts[3], "jdoe@example.com", PiiType.EMAIL_ADDRESS)]
    t2.messages[0].labels = [mk_span(t2_texts[0], "algebra 300", PiiType.COURSE_NUMBER)]
    return [t1, t2]


class ScriptedAuditor:
    """Mock audit client: deterministic verdicts and surrogate values.

    Existing redactions are judged by type (numeric identifier types come
    back "Not PII" with math-sound replacements, everything else "PII");
    the unredacted name "Priya" is reported as newly discovered PII.
    """

    NOT_PII_TYPES = {"US_DRIVER_LICENSE", "PHONE_NUMBER", "US_BANK_NUMBER"}
    NOT_PII_REPLACEMENTS = ["1", "3", "7", "12"]

    def __init__(self, prefix: str = "Surrogate"):
        self.prefix = prefix

    def __call__(self, request: GatewayRequest) -> str:
        payload = request_payload(request)
        text = payload["target_message"]["text"]
        rows = []
        not_pii_seen = 0
        for k, red in enumerate(payload["existing_redactions"]):
            if red["type"] in self.NOT_PII_TYPES:
                rows.append(
                    {
                        "pii_type": red["type"],
                        "ai_redacted_content": "",
                        "pii_evaluation": "Not PII",
                        "surrogate": self.NOT_PII_REPLACEMENTS[
                            not_pii_seen % len(self.NOT_PII_REPLACEMENTS)
                        ],
                    }
                )
                not_pii_seen += 1
            else:
                rows.append(
                    {
                        "pii_type": red["type"],
                        "ai_redacted_content": "",
                        "pii_evaluation": "PII",
                        "surrogate": self.surrogate_for(red["type"], red["surface"], k),
                    }
                )
        if "Priya" in text:
            rows.append(
                {
                    "pii_type": "PERSON",
                    "ai_redacted_content": text.replace("Priya", "<PERSON>"),
                    "pii_evaluation": "PII",
                    "surrogate": self.surrogate_for("PERSON", "Priya", 99),
                }
            )
        return json.dumps(rows) if rows else ""

    def surrogate_for(self, pii_type: str, surface: str, k: int) -> str:
        # unique per (prefix, type, ordinal); the prefix carries the session
        return f"{self.prefix}-{pii_type.lower()}-{k}"


def surrogation_corpus(n: int = 50) -> list[Transcript]:
    corpus = []
    for i in range(n):
        t0 = f"hi my name is <PERSON> and i go to <SCHOOL> downtown"
        t1 = "<US_DRIVER_LICENSE> and <US_DRIVER_LICENSE> are the numbers of our coordinate"
        t2 = "my name is Priya btw"
        m0 = mk_message(0, t0, [
            mk_span(t0, "<PERSON>", PiiType.PERSON),
            mk_span(t0, "<SCHOOL>", PiiType.SCHOOL),
        ])
        dl1 = t1.index("<US_DRIVER_LICENSE>")
        dl2 = t1.index("<US_DRIVER_LICENSE>", dl1 + 1)
        m1 = mk_message(1, t1, [
            PiiSpan(dl1, dl1 + len("<US_DRIVER_LICENSE>"), "<US_DRIVER_LICENSE>",
                    PiiType.US_DRIVER_LICENSE),
            PiiSpan(dl2, dl2 + len("<US_DRIVER_LICENSE>"), "<US_DRIVER_LICENSE>",
                    PiiType.US_DRIVER_LICENSE),
        ])
        m2 = mk_message(2, t2)
        corpus.append(Transcript(f"sg{i:03d}", [m0, m1, m2]))
    return corpus


class PerSessionAuditor:
    """Wraps ScriptedAuditor with per-session surrogate prefixes so surrogates
    never collide across transcripts."""

    model_id = "mock-auditor"

    def __init__(self):
        self._inner: dict[str, ScriptedAuditor] = {}

    def complete(self, request: GatewayRequest):
        from mathdeid.llm.client import GatewayResponse, request_hash

        payload = request_payload(request)
        session = payload["target_message"]["session_id"]
        auditor = self._inner.setdefault(session, ScriptedAuditor(prefix=session))
        return GatewayResponse(
            raw_text=auditor(request),
            attempts=1,
            request_hash=request_hash(request),
        )
