"""The regex/NER baseline and its numeric-ambiguity failure mode.

The baseline has no math awareness on purpose: fraction-like text triggers
the DATE recognizer, long digit runs trigger license/passport/bank numbers.
That over-triggering is exactly what the segmentation analysis quantifies.
"""

from mathdeid import builtin_recognizers, detect_baseline, register_ner_provider, resolve_ner
from mathdeid.corpus import Message

recognizers = builtin_recognizers()

MESSAGES = [
    "email me at jdoe@example.com",
    "I go to PS 123",
    "I'm taking algebra 300",
    "i'm in 9th grade now",
    "are 4/12 and 2/6 the same?",
    "500 - 70 - 2000 gives -1570",
    "my ssn is 123-45-6789 call (555) 123-4567",
    "x^2 + 3 = 12",
]

print("pattern recognizers only:\n")
for text in MESSAGES:
    spans = detect_baseline(Message(0, "Student", text), recognizers)
    hits = ", ".join(f"{s.pii_type.value}={s.surface!r}" for s in spans) or "-"
    print(f"  {text!r}\n      -> {hits}")


# A toy lexicon NER provider stands in for a spaCy model; swap in
# resolve_ner("spacy:en_core_web_lg") when the model is installed.
def toy_ner(text):
    out = []
    for name in ("Priya", "Boston"):
        pos = text.find(name)
        if pos >= 0:
            out.append((pos, pos + len(name), "PERSON" if name == "Priya" else "GPE"))
    return out


register_ner_provider("toy", toy_ner)
ner = resolve_ner("toy")
text = "Priya moved to Boston"
spans = detect_baseline(Message(0, "Student", text), recognizers, ner)
print("\nwith a NER adapter:")
print(f"  {text!r} -> {[(s.pii_type.value, s.surface) for s in spans]}")

print("\nNote the DATE hit on 4/12 and the license/bank hits on digit runs:")
print("high recall, terrible precision on math text. The LLM variants and the")
print("segment labels exist to fix precisely this.")
