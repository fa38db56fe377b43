"""Synthetic ground-truth automata for exercising the extraction pipeline.

A synthetic model owns per-word row-stochastic transition matrices and a
fixed emission distribution per state, so sampled traces have exactly
computable outputs and the true generating states can be kept alongside
for tests. Word frequencies follow a Zipf law (ids are frequency ranks,
id 0 most frequent).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Alphabet, OutputTrace, Sentence, TraceCorpus
from .envelope import decode_array, encode_array, read_envelope, write_envelope


def zipf_probs(word_count: int, exponent: float = 1.0) -> np.ndarray:
    ranks = np.arange(1, word_count + 1, dtype=np.float64)
    p = ranks ** (-exponent)
    return p / p.sum()


@dataclass
class SyntheticModel:
    transitions: np.ndarray   # (m, q, q), each row stochastic
    emissions: np.ndarray     # (q, L), each row a distribution
    start_state: int
    alphabet: Alphabet
    word_probs: np.ndarray    # (m,) sampling law
    seed: int = 0

    @property
    def state_count(self) -> int:
        return self.emissions.shape[0]

    @property
    def label_count(self) -> int:
        return self.emissions.shape[1]

    @classmethod
    def random(
        cls,
        states: int,
        words: int,
        labels: int,
        seed: int,
        zipf_exponent: float = 1.0,
        emission_sharpness: float = 0.8,
        attractor_frac: float = 0.7,
        identity_frac: float = 0.15,
        stochasticity: float = 0.0,
    ) -> "SyntheticModel":
        """Random model with three kinds of word dynamics.

        Frequent words are "attractors" (every state moves to one word-specific
        target), mid-rank words permute states row-dependently, and the rarest
        words are inert (identity). `stochasticity` mixes each one-hot row with
        a random distribution to make transitions noisy.
        """
        if labels < states and emission_sharpness > 0:
            raise ValueError("need labels >= states for separated emissions")
        rng = np.random.default_rng(seed)
        q, m = states, words

        T = np.zeros((m, q, q))
        n_attract = int(round(attractor_frac * m))
        n_identity = int(round(identity_frac * m))
        for wid in range(m):
            if wid < n_attract:
                T[wid, :, rng.integers(q)] = 1.0
            elif wid >= m - n_identity:
                T[wid] = np.eye(q)
            else:
                targets = rng.integers(q, size=q)
                T[wid, np.arange(q), targets] = 1.0
        if stochasticity > 0.0:
            noise = rng.dirichlet(np.ones(q), size=(m, q))
            T = (1.0 - stochasticity) * T + stochasticity * noise

        spread = (1.0 - emission_sharpness) / (labels - 1) if labels > 1 else 0.0
        emissions = np.full((q, labels), spread)
        emissions[np.arange(q), np.arange(q)] = emission_sharpness

        width = len(str(m - 1))
        alphabet = Alphabet.from_words([f"w{idx:0{width}d}" for idx in range(m)])
        return cls(
            transitions=T,
            emissions=emissions,
            start_state=0,
            alphabet=alphabet,
            word_probs=zipf_probs(m, zipf_exponent),
            seed=seed,
        )


def sample_corpus(
    model: SyntheticModel,
    sentence_count: int,
    length_range: tuple[int, int],
    seed: int,
    split_tag: str = "train",
) -> tuple[TraceCorpus, list[list[int]]]:
    """Sample sentences and their traces; also return the true state paths.

    Each sentence draws from its own (seed, index)-derived stream. The i-th
    output row is the emission distribution of the state reached after the
    i-th token; the record label is the model's own final prediction.
    """
    lo, hi = length_range
    if lo < 1 or hi < lo:
        raise ValueError("length_range must satisfy 1 <= lo <= hi")
    q = model.state_count
    traces: list[OutputTrace] = []
    paths: list[list[int]] = []
    for i in range(sentence_count):
        rng = np.random.default_rng((seed, i))
        length = int(rng.integers(lo, hi + 1))
        tokens = rng.choice(len(model.word_probs), size=length, p=model.word_probs)
        state = model.start_state
        path = []
        outputs = np.empty((length, model.label_count))
        for t, tok in enumerate(tokens):
            state = int(rng.choice(q, p=model.transitions[tok, state]))
            path.append(state)
            outputs[t] = model.emissions[state]
        label = int(np.argmax(outputs[-1]))
        traces.append(OutputTrace(Sentence([int(t) for t in tokens], label), outputs))
        paths.append(path)
    corpus = TraceCorpus(model.alphabet, model.label_count, traces, split_tag)
    return corpus, paths


def query_label(model: SyntheticModel, sentence: Sentence,
                alphabet: Alphabet | None = None) -> int:
    """Deterministic label: track the state distribution, argmax the final mixture.

    Tokens outside the model's alphabet map to its unknown word if it has
    one and otherwise leave the distribution unchanged.
    """
    d = np.zeros(model.state_count)
    d[model.start_state] = 1.0
    for tok in sentence.tokens:
        if alphabet is not None and alphabet is not model.alphabet:
            wid = model.alphabet.id_of(alphabet.words[tok])
            if wid is None:
                wid = model.alphabet.unk_id
                if wid is None:
                    continue
            tok = wid
        d = d @ model.transitions[tok]
    return int(np.argmax(d @ model.emissions))


class OracleQuery:
    """Callable label oracle for attack evaluation; safe to call concurrently."""

    parallel_safe = True

    def __init__(self, model: SyntheticModel, alphabet: Alphabet | None = None):
        self.model = model
        self.alphabet = alphabet

    def __call__(self, sentence: Sentence) -> int:
        return query_label(self.model, sentence, self.alphabet)


def save_model(model: SyntheticModel, path) -> None:
    payload = {
        "transitions": encode_array(model.transitions),
        "emissions": encode_array(model.emissions),
        "start_state": model.start_state,
        "alphabet": {"words": model.alphabet.words, "unk_id": model.alphabet.unk_id},
        "word_probs": encode_array(model.word_probs),
        "seed": model.seed,
    }
    write_envelope("oracle", payload, path)


def load_model(path) -> SyntheticModel:
    payload = read_envelope("oracle", path)
    alphabet = Alphabet.from_words(payload["alphabet"]["words"])
    alphabet.unk_id = payload["alphabet"]["unk_id"]
    return SyntheticModel(
        transitions=decode_array(payload["transitions"]),
        emissions=decode_array(payload["emissions"]),
        start_state=payload["start_state"],
        alphabet=alphabet,
        word_probs=decode_array(payload["word_probs"]),
        seed=payload["seed"],
    )
