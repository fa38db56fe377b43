"""Corpus augmentation: synonym replacement and unknown-word dropout.

Augmented sentences exist to be re-traced through the black-box model so
the extraction sees more transition behaviour; this module only rewrites
token sequences and never fabricates outputs. Per token, independently:
replace it with one of its top-k embedding synonyms with probability p_r,
otherwise blank it to the unknown token with probability p_d, otherwise
keep it. Labels and lengths are untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Alphabet, EmbeddingTable, Sentence, TraceParseError, _open_text


@dataclass
class SynonymTable:
    """Per word: up to k nearest alphabet words by embedding distance, nearest first."""

    k: int
    alphabet: Alphabet
    lists: dict[int, list[int]]
    covered: int = 0  # alphabet words that have an embedding

    def synonyms(self, word_id: int) -> list[int]:
        return self.lists.get(word_id, [])


@dataclass
class AugmentConfig:
    k: int = 5
    p_r: float = 0.4
    p_d: float = 0.2
    epochs: int = 1
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.p_r <= 1.0 or not 0.0 <= self.p_d <= 1.0:
            raise ValueError("replacement and dropout probabilities must lie in [0, 1]")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.k < 1:
            raise ValueError("synonym count must be positive")


def build_synonyms(emb: EmbeddingTable, alphabet: Alphabet, k: int = 5) -> SynonymTable:
    """Top-k nearest alphabet words per word, by Euclidean embedding distance.

    Words without an embedding get an empty list (they are simply never
    replaced). Ties break toward the lower word id.
    """
    covered_ids = [i for i, w in enumerate(alphabet.words) if w in emb]
    if len(covered_ids) < 2:
        raise ValueError("embeddings cover fewer than two alphabet words")
    vecs = np.stack([emb[alphabet.words[i]] for i in covered_ids])
    ids = np.asarray(covered_ids)

    lists: dict[int, list[int]] = {}
    chunk = 512
    for lo in range(0, len(ids), chunk):
        hi = min(lo + chunk, len(ids))
        d2 = ((vecs[lo:hi, None, :] - vecs[None, :, :]) ** 2).sum(axis=2)
        for r in range(hi - lo):
            row = d2[r]
            order = np.lexsort((ids, row))  # distance first, then word id
            picked = [int(ids[j]) for j in order if ids[j] != ids[lo + r]][:k]
            lists[int(ids[lo + r])] = picked
    return SynonymTable(k=k, alphabet=alphabet, lists=lists, covered=len(covered_ids))


def augment_sentence(
    sentence: Sentence, syn: SynonymTable, cfg: AugmentConfig, rng: np.random.Generator
) -> Sentence:
    """One augmented variant of a sentence; length and label preserved."""
    unk = syn.alphabet.unk_id
    if unk is None:
        raise ValueError("alphabet has no unknown token; call ensure_unk first")
    out = []
    for tok in sentence.tokens:
        candidates = syn.synonyms(tok)
        if rng.random() < cfg.p_r and candidates:
            out.append(candidates[int(rng.integers(len(candidates)))])
        elif rng.random() < cfg.p_d:
            out.append(unk)
        else:
            out.append(tok)
    return Sentence(out, sentence.label)


def augment_corpus(
    sentences: list[Sentence], syn: SynonymTable, cfg: AugmentConfig
) -> list[Sentence]:
    """Originals plus `epochs` augmented variants per original: (t+1)N sentences.

    Each variant draws from its own stream seeded by (seed, epoch, index),
    so generation order never changes the result.
    """
    cfg.validate()
    out = list(sentences)
    for epoch in range(cfg.epochs):
        for i, s in enumerate(sentences):
            rng = np.random.default_rng((cfg.seed, epoch, i))
            out.append(augment_sentence(s, syn, cfg, rng))
    return out


def save_sentences(sentences: list[Sentence], alphabet: Alphabet, path) -> None:
    """One record per line: {"tokens": [str...], "label": int?}."""
    with _open_text(path, "wt") as fh:
        for s in sentences:
            rec: dict = {"tokens": [alphabet.words[t] for t in s.tokens]}
            if s.label is not None:
                rec["label"] = int(s.label)
            fh.write(json.dumps(rec) + "\n")


def load_sentences(path) -> tuple[list[Sentence], Alphabet]:
    """Read a sentence file; the alphabet is built from first appearances."""
    words: list[str] = []
    index: dict[str, int] = {}
    sentences: list[Sentence] = []
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceParseError(f"line {line_no}: invalid JSON ({e.msg})") from e
            if "tokens" not in rec or not rec["tokens"]:
                raise TraceParseError(f"line {line_no}: record needs non-empty tokens")
            ids = []
            for tok in rec["tokens"]:
                tok = str(tok)
                if tok not in index:
                    index[tok] = len(words)
                    words.append(tok)
                ids.append(index[tok])
            sentences.append(Sentence(ids, rec.get("label")))
    if not sentences:
        raise TraceParseError("sentence file contains no records")
    return sentences, Alphabet.from_words(words)
