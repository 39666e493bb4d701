"""The audit + surrogation workflow that builds a benchmark.

An upstream-redacted corpus goes through: (1) an LLM audit judging each
redaction PII / Not PII / Uncertain and hunting for missed PII, (2) human
votes, (3) iteration close, (4) surrogate application. Mistaken redactions
get context-fitting replacements and lose their labels; real PII gets
consistent, never-reused surrogates and keeps a SURROGATE-provenance label.
"""

import json

from mathdeid import apply_surrogates, audit_corpus, close_iteration, corpus_stats, resolution_rate
from mathdeid.corpus import Message, PiiSpan, PiiType, Transcript
from mathdeid.llm.client import GatewayResponse, request_hash
from mathdeid.surrogation import ledger_to_csv


def build_source(session: str) -> Transcript:
    t0 = "hi my name is <PERSON> and i go to <SCHOOL> downtown"
    t1 = "<US_DRIVER_LICENSE> and <US_DRIVER_LICENSE> are the numbers of our coordinate"
    t2 = "my name is Priya btw"
    m0 = Message(0, "Student", t0, [
        PiiSpan(t0.index("<PERSON>"), t0.index("<PERSON>") + 8, "<PERSON>", PiiType.PERSON),
        PiiSpan(t0.index("<SCHOOL>"), t0.index("<SCHOOL>") + 8, "<SCHOOL>", PiiType.SCHOOL),
    ])
    p1 = t1.index("<US_DRIVER_LICENSE>")
    p2 = t1.index("<US_DRIVER_LICENSE>", p1 + 1)
    m1 = Message(1, "Volunteer", t1, [
        PiiSpan(p1, p1 + 19, "<US_DRIVER_LICENSE>", PiiType.US_DRIVER_LICENSE),
        PiiSpan(p2, p2 + 19, "<US_DRIVER_LICENSE>", PiiType.US_DRIVER_LICENSE),
    ])
    return Transcript(session, [m0, m1, Message(2, "Student", t2)])


class DemoAuditor:
    """Judges numeric-identifier redactions Not PII, the rest PII, and
    reports the unredacted name as newly discovered."""

    model_id = "demo-auditor"
    SURROGATES = {"PERSON": "Jordan Vale", "SCHOOL": "Northview High", "NEW": "Meena Rao"}

    def complete(self, request):
        payload = json.loads(request.user_text)
        session = payload["target_message"]["session_id"]
        rows = []
        numbers = iter(["1", "3"])
        for red in payload["existing_redactions"]:
            if red["type"] == "US_DRIVER_LICENSE":
                rows.append({"pii_type": red["type"], "ai_redacted_content": "",
                             "pii_evaluation": "Not PII", "surrogate": next(numbers)})
            else:
                rows.append({"pii_type": red["type"], "ai_redacted_content": "",
                             "pii_evaluation": "PII",
                             "surrogate": f"{self.SURROGATES[red['type']]} {session[-1]}"})
        text = payload["target_message"]["text"]
        if "Priya" in text:
            rows.append({"pii_type": "PERSON",
                         "ai_redacted_content": text.replace("Priya", "<PERSON>"),
                         "pii_evaluation": "PII",
                         "surrogate": f"{self.SURROGATES['NEW']} {session[-1]}"})
        return GatewayResponse(raw_text=json.dumps(rows) if rows else "",
                               attempts=1, request_hash=request_hash(request))


corpus = [build_source("demo-a"), build_source("demo-b")]
print("source corpus:", corpus_stats(corpus))

items = audit_corpus(corpus, DemoAuditor())
print(f"\naudit produced {len(items)} items:")
for item in items:
    marker = "NEW" if item.discovered else "   "
    print(f"  {marker} {item.id:12} {item.pii_type.value:18} {item.evaluation:8} "
          f"surrogate={item.surrogate!r}")

# humans approve the discoveries, nobody objects to the rest
for item in items:
    if item.discovered:
        item.record_vote("reviewer-1", "UP")
close_iteration(items, 1)

decision = resolution_rate(set(), items)
print(f"\nno down-votes recorded -> resolution rate {decision.rate:.2f}, stop={decision.stop}")

benchmark, ledger = apply_surrogates(corpus, items)
print("\nbenchmark corpus:", corpus_stats(benchmark))
print("\nrewritten messages (session demo-a):")
for m in benchmark[0].messages:
    print(f"  [{m.index}] {m.text}")
    for s in m.labels:
        print(f"        label {s.pii_type.value} {s.surface!r} ({s.provenance.value})")

print("\nledger:")
print(ledger_to_csv(ledger))
