"""Transition-matrix embeddings: word attribution and contrastive pairs.

Each word's flattened transition matrix is a task-oriented embedding of
what that word does to the classifier. Influence scores turn that into a
per-class attribution; comparing embedding distances against a pretrained
table surfaces pairs the model treats alike (or apart) against semantic
expectations.
"""

import numpy as np

from wfakit import (
    PairCriteria,
    extract,
    influence_score,
    mine_pairs,
    sample_corpus,
    tme,
    top_influential,
)
from wfakit.corpus import Alphabet, EmbeddingTable
from wfakit.oracle import SyntheticModel, zipf_probs

# Ground truth with known attribution: "storm" pulls every state toward the
# weather label, "match" toward sports, "markets" toward finance; the rest
# are inert filler.
words = ["the", "a", "of", "storm", "match", "markets"]
q, L = 3, 3
T = np.zeros((len(words), q, q))
T[:3] = np.eye(q)  # fillers
T[3, :, 0] = 1.0   # storm  -> weather state
T[4, :, 1] = 1.0   # match  -> sports state
T[5, :, 2] = 1.0   # markets-> finance state
model = SyntheticModel(
    transitions=T,
    emissions=np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]]),
    start_state=0,
    alphabet=Alphabet.from_words(words),
    word_probs=zipf_probs(len(words), 0.5),
    seed=0,
)
labels = ["weather", "sports", "finance"]

corpus, _ = sample_corpus(model, 800, (2, 9), seed=5)
w = extract(corpus, k=3, seed=0)
space = tme(w.matrices)
scores = influence_score(space, w.states)

print("per-class attribution (top 3 words):")
for c, name in enumerate(labels):
    print(f"  {name:<8} {', '.join(top_influential(scores, c, count=3))}")

print("\ninfluence vector of 'storm' (sums to zero):")
sid = w.alphabet.index["storm"]
print("  ", np.round(scores.scores[sid], 3), "sum", round(scores.scores[sid].sum(), 12))

# Pretrained-style embeddings that disagree with the task: "storm" and
# "match" sit close together; "of" lands far from the other fillers even
# though the model treats all three identically.
emb = EmbeddingTable(2, {
    "the": np.array([0.0, 0.0]),
    "a": np.array([0.05, 0.0]),
    "of": np.array([3.0, -2.0]),
    "storm": np.array([5.0, 5.0]),
    "match": np.array([5.0, 5.2]),
    "markets": np.array([9.0, 0.0]),
})

adv = mine_pairs(space, emb, PairCriteria(epsilon=0.2, delta=0.01, mode="adversarial"))
print("\nadversarial pairs (close meaning, different behaviour):")
for h in adv:
    print(f"  {h.word_a} / {h.word_b}   d_t={h.d_t:.3f} d_s={h.d_s:.3f}")

collab = mine_pairs(space, emb, PairCriteria(epsilon=0.012, delta=0.1,
                                             mode="collaborative"))
print("collaborative pairs (different meaning, same behaviour):")
for h in collab:
    print(f"  {h.word_a} / {h.word_b}   d_t={h.d_t:.3f} d_s={h.d_s:.3f}")
