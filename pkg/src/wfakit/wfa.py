"""The extracted weighted automaton: scoring, metrics, and artifact files.

A sentence's score vector is I * E_w1 * ... * E_wn * F where I is one-hot
at the initial state and row i of F is state i's center. With stochastic
transition matrices the result is itself a distribution over labels.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .abstraction import AbstractStateSet, cluster_outputs
from .corpus import Alphabet, Sentence, TraceCorpus
from .envelope import ArtifactError, decode_array, encode_array, read_envelope, write_envelope
from .transitions import (
    TransitionMatrices,
    build_transition_matrices,
    count_transitions,
    enhance_context,
    suggest_beta,
)

IDENTITY_STEP = -1  # token resolution marker: keep the state distribution as is


@dataclass
class Wfa:
    states: AbstractStateSet
    alphabet: Alphabet
    matrices: TransitionMatrices
    config: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.states.n

    @property
    def label_count(self) -> int:
        return self.states.label_count

    @property
    def initial_vector(self) -> np.ndarray:
        I = np.zeros(self.n)
        I[self.states.initial_id] = 1.0
        return I

    @property
    def final_matrix(self) -> np.ndarray:
        return self.states.centers


def _resolve_tokens(wfa: Wfa, sentence: Sentence, alphabet: Alphabet | None) -> list[int]:
    """Map sentence token ids into the automaton's alphabet.

    Out-of-alphabet words use the unknown token's matrix when the automaton
    has one, and otherwise step through the identity (stay put).
    """
    if alphabet is None or alphabet is wfa.alphabet:
        return list(sentence.tokens)
    fallback = wfa.alphabet.unk_id if wfa.alphabet.unk_id is not None else IDENTITY_STEP
    resolved = []
    for tok in sentence.tokens:
        wid = wfa.alphabet.id_of(alphabet.words[tok])
        resolved.append(fallback if wid is None else wid)
    return resolved


def run(wfa: Wfa, sentence: Sentence, alphabet: Alphabet | None = None) -> np.ndarray:
    """Score a sentence: the per-class weight vector of the automaton."""
    if len(sentence) == 0:
        raise ValueError("cannot score an empty sentence")
    d = wfa.initial_vector
    for wid in _resolve_tokens(wfa, sentence, alphabet):
        if wid == IDENTITY_STEP:
            continue
        d = d @ wfa.matrices.matrix_for(wid)
    return d @ wfa.final_matrix


def predict(wfa: Wfa, sentence: Sentence, alphabet: Alphabet | None = None) -> int:
    """Argmax class of the score vector; ties go to the lowest class id."""
    return int(np.argmax(run(wfa, sentence, alphabet)))


def jensen_shannon(a: np.ndarray, r: np.ndarray) -> float:
    """Symmetric divergence between two score vectors, natural log, 0*log(0) = 0."""
    total = 0.0
    for ai, ri in zip(a, r):
        s = ai + ri
        if s == 0.0:
            continue
        if ai > 0.0:
            total += ai * math.log(2.0 * ai / s)
        if ri > 0.0:
            total += ri * math.log(2.0 * ri / s)
    return 0.5 * total


@dataclass
class SentenceEval:
    wfa_label: int
    model_label: int
    wfa_scores: np.ndarray
    model_scores: np.ndarray
    jsd: float


@dataclass
class EvalReport:
    cr: float
    jsd: float
    seconds: float
    records: list[SentenceEval] = field(repr=False, default_factory=list)
    vanished: int = 0  # sentences whose score vector collapsed to all zeros
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "cr": self.cr,
            "jsd": self.jsd,
            "seconds": self.seconds,
            "sentences": len(self.records),
            "vanished": self.vanished,
            "config": self.config,
        }

    def table(self, label: str = "wfa") -> str:
        head = f"{'model':<12} {'CR':>8} {'JSD':>8} {'Time(s)':>8}"
        row = f"{label:<12} {self.cr:>8.4f} {self.jsd:>8.4f} {self.seconds:>8.1f}"
        if self.vanished:
            row += f"   [{self.vanished} sentences vanished to zero weight]"
        return head + "\n" + row


def evaluate(wfa: Wfa, corpus: TraceCorpus, threads: int = 1) -> EvalReport:
    """Consistency rate and mean divergence of the automaton against traced outputs.

    The reference score for each sentence is the trace's final-step output.
    """
    if not corpus.traces:
        raise ValueError("cannot evaluate on an empty corpus")
    start = time.perf_counter()

    def score_one(trace) -> SentenceEval:
        wfa_scores = run(wfa, trace.sentence, corpus.alphabet)
        model_scores = trace.outputs[-1]
        return SentenceEval(
            wfa_label=int(np.argmax(wfa_scores)),
            model_label=int(np.argmax(model_scores)),
            wfa_scores=wfa_scores,
            model_scores=model_scores,
            jsd=jensen_shannon(wfa_scores, model_scores),
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(score_one, corpus.traces))
    else:
        records = [score_one(t) for t in corpus.traces]

    matches = sum(1 for r in records if r.wfa_label == r.model_label)
    vanished = sum(1 for r in records if not np.any(r.wfa_scores))
    return EvalReport(
        cr=matches / len(records),
        jsd=float(np.mean([r.jsd for r in records])),
        seconds=time.perf_counter() - start,
        records=records,
        vanished=vanished,
        config=dict(wfa.config),
    )


def extract(
    corpus: TraceCorpus,
    k: int,
    seed: int = 0,
    filling: str = "empirical",
    beta: float | None = None,
    alpha: float = 0.0,
    config: dict | None = None,
) -> Wfa:
    """Full pipeline: cluster outputs, count transitions, build and enhance matrices.

    beta defaults to the corpus's own self-transition proportion.
    """
    states = cluster_outputs(corpus, k, seed)
    counts = count_transitions(corpus, states)
    if beta is None:
        beta = suggest_beta(counts)
    matrices = build_transition_matrices(counts, states, filling, beta)
    if alpha > 0.0:
        matrices = enhance_context(matrices, alpha)
    cfg = {
        "k": k,
        "seed": seed,
        "filling": filling,
        "beta": beta,
        "alpha": alpha,
        "label_count": corpus.label_count,
    }
    if config:
        cfg.update(config)
    return Wfa(states=states, alphabet=corpus.alphabet, matrices=matrices, config=cfg)


def save(wfa: Wfa, path) -> None:
    """Write the automaton to a single checksummed artifact file."""
    word_ids = sorted(wfa.matrices.matrices)
    stacked = (
        np.stack([wfa.matrices.matrices[w] for w in word_ids])
        if word_ids else np.zeros((0, wfa.n, wfa.n))
    )
    flags = (
        np.stack([wfa.matrices.missing_rows[w] for w in word_ids])
        if word_ids else np.zeros((0, wfa.n), dtype=bool)
    )
    payload = {
        "alphabet": {"words": wfa.alphabet.words, "unk_id": wfa.alphabet.unk_id},
        "states": {
            "centers": encode_array(wfa.states.centers),
            "frequencies": encode_array(wfa.states.frequencies),
            "initial_id": wfa.states.initial_id,
        },
        "matrices": {
            "filling": wfa.matrices.filling,
            "beta": wfa.matrices.beta,
            "alpha": wfa.matrices.alpha,
            "word_ids": word_ids,
            "data": encode_array(stacked),
            "missing_rows": encode_array(flags.astype(np.uint8)),
        },
        "config": wfa.config,
    }
    write_envelope("wfa", payload, path)


def load(path) -> Wfa:
    """Read an automaton artifact; verifies version and checksum."""
    payload = read_envelope("wfa", path)
    try:
        alphabet = Alphabet.from_words(payload["alphabet"]["words"])
        alphabet.unk_id = payload["alphabet"]["unk_id"]
        states = AbstractStateSet(
            centers=decode_array(payload["states"]["centers"]),
            frequencies=decode_array(payload["states"]["frequencies"]),
            initial_id=payload["states"]["initial_id"],
        )
        m = payload["matrices"]
        data = decode_array(m["data"])
        flags = decode_array(m["missing_rows"]).astype(bool)
        matrices = TransitionMatrices(
            n=states.n,
            alphabet=alphabet,
            matrices={wid: data[i] for i, wid in enumerate(m["word_ids"])},
            missing_rows={wid: flags[i] for i, wid in enumerate(m["word_ids"])},
            filling=m["filling"],
            beta=m["beta"],
            alpha=m["alpha"],
        )
    except (KeyError, IndexError, TypeError) as e:
        raise ArtifactError(f"malformed automaton payload: {e}") from e
    return Wfa(states=states, alphabet=alphabet, matrices=matrices,
               config=payload.get("config", {}))
