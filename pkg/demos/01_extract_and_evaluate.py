"""Extract a weighted automaton from traces and score it against the source.

Walks the core pipeline end to end on a synthetic ground-truth model:
sample stepwise traces, cluster the outputs into abstract states, count
transitions, build matrices under the three missing-row strategies, and
compare their consistency with the traced model.
"""

import numpy as np

from wfakit import (
    SyntheticModel,
    enhance_context,
    evaluate,
    extract,
    sample_corpus,
    suggest_beta,
)
from wfakit.abstraction import cluster_outputs
from wfakit.transitions import build_transition_matrices, count_transitions
from wfakit.wfa import Wfa

# A ground-truth automaton standing in for a black-box classifier: 8 states,
# 200 Zipf-distributed words, deterministic dynamics, one dominant label per
# state. Training sentences are short; held-out ones long, so the held-out
# set keeps hitting state/word combinations never seen in training.
model = SyntheticModel.random(
    states=8, words=200, labels=8, seed=42,
    zipf_exponent=1.1, attractor_frac=0.6, identity_frac=0.3,
)
train, _ = sample_corpus(model, 5000, (2, 5), seed=1, split_tag="train")
test, _ = sample_corpus(model, 1000, (10, 18), seed=2, split_tag="test")
print(f"train: {len(train)} sentences, {train.token_total()} tokens, "
      f"{len(train.alphabet)} words")
print(f"test:  {len(test)} sentences, {test.token_total()} tokens")

# The three missing-row strategies, same clustering throughout.
print("\nfilling strategies on the same corpus:")
print(f"{'filling':<12} {'CR':>7} {'JSD':>8} {'vanished':>9}")
for filling in ("null", "uniform", "empirical"):
    w = extract(train, k=8, seed=0, filling=filling, beta=None, alpha=0.0)
    ev = evaluate(w, test)
    print(f"{filling:<12} {ev.cr:>7.3f} {ev.jsd:>8.4f} {ev.vanished:>9}")

# beta comes from the data: the fraction of transitions that stay put.
states = cluster_outputs(train, k=8, seed=0)
counts = count_transitions(train, states)
print(f"\nself-transition proportion (suggested beta): {suggest_beta(counts):.3f}")

# Context enhancement trades divergence for label agreement; alpha sets how
# much of the previous state distribution every step retains.
print("\ncontext enhancement (empirical filling):")
print(f"{'alpha':<8} {'CR':>7} {'JSD':>8}")
base = build_transition_matrices(counts, states, "empirical", suggest_beta(counts))
for alpha in (0.0, 0.2, 0.4, 0.6):
    mats = enhance_context(base, alpha) if alpha else base
    w = Wfa(states=states, alphabet=train.alphabet, matrices=mats)
    ev = evaluate(w, test)
    print(f"{alpha:<8} {ev.cr:>7.3f} {ev.jsd:>8.4f}")
