"""Prompt-driven detection, fully offline.

Three prompt variants share one taxonomy: basic, math-aware (warns the model
off math content), and segment-aware (injects each message's MATH/NON-MATH
label). A scripted mock stands in for the gateway; recorded responses replay
bit-identically, which is how the test suite stays offline.
"""

import json

from mathdeid import (
    HashedTfEmbedder,
    MatchPolicy,
    Thresholds,
    evaluate,
    label_corpus,
    load_vocabulary,
)
from mathdeid.corpus import Message, PiiSpan, PiiType, Transcript
from mathdeid.llm import MockChatClient, PromptVariant, build_prompt, detect_llm_corpus

TEXTS = [
    "hi there, glad to see you today",
    "solve 2x + 5 = 11 for x",
    "my name is John Carter by the way",
]
transcript = Transcript("demo", [Message(i, "Student", t) for i, t in enumerate(TEXTS)])
transcript.messages[2].labels = [PiiSpan(11, 22, "John Carter", PiiType.PERSON)]
corpus = [transcript]

labeling = label_corpus(corpus, load_vocabulary(), Thresholds(0.05, 0.3), HashedTfEmbedder(64))

request = build_prompt(PromptVariant.SEGMENT_AWARE, transcript, 1, labeling=labeling)
print("=== segment-aware system prompt (first lines) ===")
print("\n".join(request.system_text.splitlines()[:6]))
print("\n=== user payload ===")
print(json.dumps(json.loads(request.user_text), indent=2)[:400], "...\n")


def scripted(request):
    """Basic prompting mislabels the equation; the aware variants do not."""
    target = json.loads(request.user_text)["target_message"]["text"]
    math_aware = ("general math content should not be annotated as PII" in request.system_text
                  or "math_label" in request.system_text)
    out = []
    if "2x + 5 = 11" in target and not math_aware:
        out.append({"text": "5 = 11", "type": "DATE"})
    if "John Carter" in target:
        out.append({"text": "John Carter", "type": "PERSON"})
    return json.dumps(out) if out else ""


policy = MatchPolicy.parse("text")
for variant in PromptVariant:
    results = detect_llm_corpus(corpus, variant, MockChatClient(scripted), labeling=labeling)
    report = evaluate(corpus, results, policy)
    print(f"{variant.name:14} precision={report.overall.precision:.2f} "
          f"recall={report.overall.recall:.2f} "
          f"(tp={report.overall.tp}, fp={report.overall.fp}, fn={report.overall.fn})")

print("\nThe DATE false positive on the equation disappears under the math-aware")
print("and segment-aware prompts while the PERSON detection survives.")
