"""Data augmentation for richer traces, and embedding-guided attacks.

Augmentation rewrites sentences (synonym swaps plus unknown-word dropout)
so a black-box model can be re-traced on more varied inputs. The attack
side uses the extracted embeddings the other way around: find the
substitution that moves the automaton's behaviour the most while staying
semantically close, and check whether the source model's label flips.
"""

import numpy as np

from wfakit import (
    AttackConfig,
    AugmentConfig,
    OracleQuery,
    attack_corpus,
    augment_corpus,
    build_synonyms,
    ensure_unk,
    extract,
    influence_score,
    sample_corpus,
    tme,
)
from wfakit.corpus import EmbeddingTable, Sentence
from wfakit.oracle import SyntheticModel, zipf_probs
from wfakit.corpus import Alphabet

# --- augmentation ---------------------------------------------------------
rng = np.random.default_rng(0)
words = [f"w{i}" for i in range(30)]
alphabet = ensure_unk(Alphabet.from_words(words))
emb = EmbeddingTable(4, {w: rng.normal(size=4) for w in words})
syn = build_synonyms(emb, alphabet, k=5)

sentences = [Sentence(list(rng.integers(0, 30, size=8))) for _ in range(2000)]
cfg = AugmentConfig(k=5, p_r=0.4, p_d=0.2, epochs=1, seed=7)
augmented = augment_corpus(sentences, syn, cfg)

variants = augmented[len(sentences):]
changed = unked = total = 0
for orig, var in zip(sentences, variants):
    for a, b in zip(orig.tokens, var.tokens):
        total += 1
        if b == alphabet.unk_id:
            unked += 1
        elif b != a:
            changed += 1
print(f"augmented corpus: {len(augmented)} sentences "
      f"({len(sentences)} originals + {len(variants)} variants)")
print(f"synonym replacements {changed / total:.3f} (target {cfg.p_r})")
print(f"unknown-word dropout {unked / total:.3f} "
      f"(target {(1 - cfg.p_r) * cfg.p_d:.2f})")

# --- attack ---------------------------------------------------------------
# A balance-counting model: "up" words push the label one way, "down" words
# the other. Each up-word has exactly one semantically close down-word, so a
# within-budget substitution provably flips sentences near the boundary.
up, down, pad = ["up0", "up1"], ["down0", "down1"], ["pad"]
vocab = up + down + pad
q = 5  # running balance clipped to -2..+2, start in the middle
T = np.zeros((len(vocab), q, q))
for wi, word in enumerate(vocab):
    for s in range(q):
        if word in up:
            T[wi, s, min(s + 1, q - 1)] = 1.0
        elif word in down:
            T[wi, s, max(s - 1, 0)] = 1.0
        else:
            T[wi, s, s] = 1.0
emissions = np.array([
    [0.15, 0.85], [0.3, 0.7], [0.55, 0.45], [0.7, 0.3], [0.85, 0.15],
])
model = SyntheticModel(
    transitions=T, emissions=emissions, start_state=2,
    alphabet=Alphabet.from_words(vocab),
    word_probs=zipf_probs(len(vocab), 0.0), seed=0,
)
attack_emb = EmbeddingTable(2, {
    "up0": np.array([0.0, 0.0]), "down0": np.array([0.0, 0.28]),
    "up1": np.array([10.0, 0.0]), "down1": np.array([10.0, 0.33]),
    "pad": np.array([500.0, 500.0]),
})

corpus, _ = sample_corpus(model, 800, (2, 8), seed=1)
w = extract(corpus, k=5, seed=0)
space = tme(w.matrices)
scores = influence_score(space, w.states)
query = OracleQuery(model)

targets = [Sentence([model.alphabet.index[t] for t in toks]) for toks in (
    ["up0", "pad"], ["up1", "pad"], ["up0", "up1"], ["up0", "up0"],
)]
print("\nattack success rate by substitution budget and words replaced:")
print(f"{'budget':<8} {'k=1':>6} {'k=2':>6}")
for name, eps in (("weak", 0.15), ("strong", 0.18)):
    row = []
    for k in (1, 2):
        rep = attack_corpus(targets, scores, space, attack_emb, query,
                            AttackConfig(top_k=k, d_s_max=eps))
        row.append(rep.asr)
    print(f"{name:<8} {row[0]:>6.2f} {row[1]:>6.2f}")

rep = attack_corpus(targets, scores, space, attack_emb, query,
                    AttackConfig(top_k=2, d_s_max=0.18))
print("\nstrong-budget substitutions, two words:")
for res in rep.results:
    subs = ", ".join(
        f"{model.alphabet.words[a]}->{model.alphabet.words[b]}"
        for _, a, b in res.substitutions
    ) or "(none feasible)"
    print(f"  {res.original_label}->{res.attacked_label} "
          f"flip={str(res.success):<5} {subs}")
