"""Math density scoring, step by step.

Each tutoring message gets a density score: vocabulary word hits, multi-word
phrase hits (weight 1.5), and regex pattern hits (weight 2.0), normalized by
token count. Run this to see which component fires on which kind of text.
"""

from mathdeid import load_vocabulary, math_density

vocab = load_vocabulary()

MESSAGES = [
    "hello there, how are you",
    "so the slope is 2 and the intercept is 3",
    "we need the least common multiple here",
    "graph the line y = 2x + 3 on the coordinate plane",
    "f(x) = x^2 + 1 for x > 0",
    "is 4/12 equivalent to 2/6",
    "my bus leaves at nine and i hate mondays",
    "area equals pi times radius squared",
]

print(f"vocabulary: {len(vocab.single_words)} words, {len(vocab.phrases)} phrases, "
      f"{len(vocab.patterns)} pattern families\n")
print(f"{'density':>8}  {'tokens':>6}  {'words':>5}  {'phrases':>7}  {'patterns':>8}  message")
for text in MESSAGES:
    s = math_density(text, vocab)
    print(f"{s.value:8.3f}  {s.token_count:6d}  {s.word_hits:5d}  "
          f"{s.phrase_hits:7d}  {s.pattern_hits:8d}  {text!r}")

print("""
Notes:
 - pure chat scores 0; anything with equations, coordinates, or function
   notation scores far above typical anchor thresholds (0.05..0.10)
 - phrases add to their constituent words: "least common multiple" counts
   the phrase AND the words "least"/"common"
 - numeric fractions like 4/12 deliberately do NOT hit the fraction pattern
   (it requires a variable on one side), so date-like strings stay cheap
""")
