"""Threshold grid search against audited labels.

The objective rewards configurations whose math segments capture labels the
audit judged "Not PII" (mistaken redactions of math) while leaving true PII
outside: H = 2*a*(1-t) / (a + (1-t)).
"""

from mathdeid import HashedTfEmbedder, evaluate_grid, load_vocabulary, select_thresholds
from mathdeid.corpus import Message, PiiSpan, PiiType, Transcript
from mathdeid.optimizer import grid_to_csv


def planted(session: str, tag: str):
    """Chat carries a real PERSON label; the math block carries a bogus
    US_DRIVER_LICENSE redaction over a plain number."""
    name = f"Rowan{tag}"
    number = f"4561{tag}00"
    texts = [
        f"hi my name is {name} nice to meet you",
        "how was school today for you",
        "solve 3x + 6 = 18 and simplify the fraction",
        f"so the sum {number} plus 9 is our total here",
        "the slope is 2 and the intercept is 3",
        "cool want to stop here for today",
    ]
    messages = [Message(i, "Student" if i % 2 else "Volunteer", t) for i, t in enumerate(texts)]
    messages[0].labels = [PiiSpan(texts[0].index(name), texts[0].index(name) + len(name),
                                  name, PiiType.PERSON)]
    messages[3].labels = [PiiSpan(texts[3].index(number), texts[3].index(number) + len(number),
                                  number, PiiType.US_DRIVER_LICENSE)]
    t = Transcript(session, messages)
    verdicts = {
        (session, 0, messages[0].labels[0].start, messages[0].labels[0].end): "PII",
        (session, 3, messages[3].labels[0].start, messages[3].labels[0].end): "NOT_PII",
    }
    return t, verdicts


corpus, verdicts = [], {}
for i in range(12):
    t, v = planted(f"g{i:02d}", f"{i:02d}")
    corpus.append(t)
    verdicts.update(v)

vocab = load_vocabulary()
grid = evaluate_grid(corpus, verdicts, vocab, HashedTfEmbedder(128))
print(grid_to_csv(grid))

best = select_thresholds(grid)
chosen = next(g for g in grid if g.thresholds == best)
print(f"selected: t_anchor={best.anchor:g} t_sim={best.similarity:g} "
      f"(a={chosen.fp_proportion:.2f}, t={chosen.tp_proportion:.2f}, H={chosen.objective:.3f})")
print("\nThe CSV above is the heatmap table: load it into pandas/matplotlib to plot.")
