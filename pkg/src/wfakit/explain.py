"""Explanation tools built on the extracted transition matrices.

Flattening a word's transition matrix gives a task-oriented embedding of
that word (how it moves the automaton between states), unlike pretrained
embeddings which encode general semantics. Comparing the two distance
structures surfaces word pairs the classifier treats alike despite distant
meanings (collaborative) or apart despite close meanings (adversarial);
the latter seed label-flipping substitutions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .abstraction import AbstractStateSet
from .corpus import Alphabet, EmbeddingTable, Sentence, save_embeddings
from .transitions import TransitionMatrices


@dataclass
class TmeSpace:
    """Per-word flattened transition matrices: vector length n*n, row-major."""

    n: int
    alphabet: Alphabet
    vectors: np.ndarray  # (len(alphabet), n*n)

    def vector(self, word_id: int) -> np.ndarray:
        return self.vectors[word_id]

    def matrix(self, word_id: int) -> np.ndarray:
        return self.vectors[word_id].reshape(self.n, self.n)


@dataclass
class InfluenceScores:
    """Per-word expected shift of the label distribution (one row per word)."""

    alphabet: Alphabet
    scores: np.ndarray      # (m, L)
    magnitudes: np.ndarray  # (m,) plain l2 norm per word


@dataclass
class PairCriteria:
    epsilon: float
    delta: float
    mode: str = "adversarial"  # or "collaborative"

    def validate(self) -> None:
        if self.epsilon < 0 or self.delta < 0:
            raise ValueError("pair thresholds must be non-negative")
        if self.mode not in ("collaborative", "adversarial"):
            raise ValueError(f"unknown pair mode: {self.mode!r}")


@dataclass
class PairHit:
    word_a: str
    word_b: str
    d_t: float
    d_s: float


@dataclass
class AttackConfig:
    top_k: int = 1
    d_t_min: float = 0.01   # required behaviour gap of a substitute
    d_s_max: float = 0.15   # allowed semantic drift of a substitute
    method: str = "tme"     # "tme": best adversarial pair; "embedding": nearest neighbor
    seed: int = 0


@dataclass
class AttackResult:
    sentence: Sentence
    success: bool
    original_label: int
    attacked_label: int
    substitutions: list[tuple[int, int, int]]  # (position, old word id, new word id)
    skipped: int = 0  # selected positions left unchanged for lack of a candidate


@dataclass
class AttackReport:
    asr: float
    results: list[AttackResult] = field(repr=False, default_factory=list)


def normalized_distance(a: np.ndarray, b: np.ndarray) -> float:
    """l2 norm of the difference divided by the number of elements."""
    diff = a - b
    return float(np.sqrt(diff @ diff)) / diff.shape[0]


def tme(matrices: TransitionMatrices) -> TmeSpace:
    """Flatten every word's transition matrix into its embedding vector."""
    m = len(matrices.alphabet)
    vectors = np.empty((m, matrices.n * matrices.n))
    for wid in range(m):
        vectors[wid] = matrices.matrix_for(wid).ravel()
    return TmeSpace(n=matrices.n, alphabet=matrices.alphabet, vectors=vectors)


def influence_score(space: TmeSpace, states: AbstractStateSet) -> InfluenceScores:
    """Expected label-distribution shift caused by reading each word.

    Transition i -> j moves the label distribution from center i to center j;
    weight each move by its probability and by how often state i occurs.
    """
    u = states.frequencies
    rho = states.centers
    # sum_i u_i * (E[i,:] @ rho - rowsum_i * rho_i), vectorized over words
    mats = space.vectors.reshape(-1, space.n, space.n)
    moved = np.einsum("i,wij,jl->wl", u, mats, rho)
    rowsums = mats.sum(axis=2)
    stayed = np.einsum("i,wi,il->wl", u, rowsums, rho)
    scores = moved - stayed
    return InfluenceScores(
        alphabet=space.alphabet,
        scores=scores,
        magnitudes=np.sqrt((scores ** 2).sum(axis=1)),
    )


def top_influential(scores: InfluenceScores, class_id: int, count: int = 10) -> list[str]:
    """Words with the largest influence on a class, ties toward the lower word id."""
    if not 0 <= class_id < scores.scores.shape[1]:
        raise ValueError(f"class id {class_id} out of range")
    order = np.argsort(-scores.scores[:, class_id], kind="stable")
    return [scores.alphabet.words[i] for i in order[:count]]


def mine_pairs(
    space: TmeSpace,
    emb: EmbeddingTable,
    criteria: PairCriteria,
    words: list[str] | None = None,
) -> list[PairHit]:
    """Scan unordered word pairs for the contrastive relation in `criteria`.

    Collaborative: behaviour distance <= epsilon and semantic distance >= delta.
    Adversarial:   behaviour distance >= delta and semantic distance <= epsilon.
    `words` restricts the scan (the full vocabulary scan is quadratic).
    """
    criteria.validate()
    pool = words if words is not None else space.alphabet.words
    cand = [w for w in pool if w in emb and space.alphabet.id_of(w) is not None]
    if not cand:
        return []
    t_vecs = np.stack([space.vector(space.alphabet.id_of(w)) for w in cand])
    s_vecs = np.stack([emb[w] for w in cand])

    hits: list[PairHit] = []
    for a in range(len(cand) - 1):
        d_t = np.sqrt(((t_vecs[a + 1:] - t_vecs[a]) ** 2).sum(axis=1)) / t_vecs.shape[1]
        d_s = np.sqrt(((s_vecs[a + 1:] - s_vecs[a]) ** 2).sum(axis=1)) / s_vecs.shape[1]
        if criteria.mode == "collaborative":
            ok = (d_t <= criteria.epsilon) & (d_s >= criteria.delta)
        else:
            ok = (d_t >= criteria.delta) & (d_s <= criteria.epsilon)
        for off in np.flatnonzero(ok):
            b = a + 1 + int(off)
            hits.append(PairHit(cand[a], cand[b], float(d_t[off]), float(d_s[off])))
    return hits


def _covered_ids(space: TmeSpace, emb: EmbeddingTable) -> np.ndarray:
    return np.array(
        [i for i, w in enumerate(space.alphabet.words) if w in emb], dtype=np.int64
    )


def _best_substitute(
    word_id: int, space: TmeSpace, emb: EmbeddingTable, cfg: AttackConfig,
    covered: np.ndarray,
) -> int | None:
    """The replacement for one word under the configured method, or None.

    tme: the candidate with the largest behaviour distance whose semantic
    distance fits the budget; embedding: the plain nearest neighbor.
    Ties break toward the lower word id.
    """
    word = space.alphabet.words[word_id]
    if word not in emb:
        return None
    others = covered[covered != word_id]
    if others.size == 0:
        return None
    g = emb[word]
    s_vecs = np.stack([emb[space.alphabet.words[i]] for i in others])
    d_s = np.sqrt(((s_vecs - g) ** 2).sum(axis=1)) / s_vecs.shape[1]

    if cfg.method == "embedding":
        return int(others[int(np.argmin(d_s))])

    d_t = (
        np.sqrt(((space.vectors[others] - space.vector(word_id)) ** 2).sum(axis=1))
        / space.vectors.shape[1]
    )
    feasible = (d_s <= cfg.d_s_max) & (d_t >= cfg.d_t_min)
    if not np.any(feasible):
        return None
    masked = np.where(feasible, d_t, -np.inf)
    return int(others[int(np.argmax(masked))])


def attack_sentence(
    sentence: Sentence,
    scores: InfluenceScores,
    space: TmeSpace,
    emb: EmbeddingTable,
    model_query,
    cfg: AttackConfig,
) -> AttackResult:
    """Replace the sentence's most influential words and test for a label flip.

    Positions are ranked by the l2 magnitude of their word's influence score;
    each selected word is swapped for the candidate with the largest
    behaviour distance within the semantic budget. A position with no
    feasible candidate is recorded and left alone.
    """
    mags = scores.magnitudes[np.asarray(sentence.tokens)]
    order = np.argsort(-mags, kind="stable")[: cfg.top_k]
    covered = _covered_ids(space, emb)

    tokens = list(sentence.tokens)
    substitutions: list[tuple[int, int, int]] = []
    skipped = 0
    for pos in sorted(int(p) for p in order):
        old = tokens[pos]
        new = _best_substitute(old, space, emb, cfg, covered)
        if new is None:
            skipped += 1
            continue
        tokens[pos] = new
        substitutions.append((pos, old, new))

    original_label = model_query(sentence)
    attacked = Sentence(tokens, sentence.label)
    attacked_label = model_query(attacked) if substitutions else original_label
    return AttackResult(
        sentence=attacked,
        success=attacked_label != original_label,
        original_label=original_label,
        attacked_label=attacked_label,
        substitutions=substitutions,
        skipped=skipped,
    )


def attack_corpus(
    sentences: list[Sentence],
    scores: InfluenceScores,
    space: TmeSpace,
    emb: EmbeddingTable,
    model_query,
    cfg: AttackConfig,
    threads: int = 1,
) -> AttackReport:
    """Attack every sentence; the success rate counts label flips over attempts."""
    if not sentences:
        raise ValueError("cannot attack an empty corpus")

    def one(s: Sentence) -> AttackResult:
        return attack_sentence(s, scores, space, emb, model_query, cfg)

    if threads > 1 and getattr(model_query, "parallel_safe", False):
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, sentences))
    else:
        results = [one(s) for s in sentences]
    successes = sum(1 for r in results if r.success)
    return AttackReport(asr=successes / len(results), results=results)


def export_tme(space: TmeSpace, path) -> None:
    """Write the embedding vectors in the Glove text convention (10 significant digits)."""
    save_embeddings(
        {space.alphabet.words[i]: space.vectors[i] for i in range(len(space.alphabet))},
        path,
    )
