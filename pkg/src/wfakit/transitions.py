"""Per-word transition counting and transition-matrix construction.

Counting walks each trace once: the state before the first token is the
initial state, afterwards states are the cluster assignments of successive
outputs. Rows with observations are normalized frequencies; rows with none
("missing rows") are filled by one of three strategies:

  null      - leave the row all zero (weights vanish on contact),
  uniform   - spread mass evenly over all states,
  empirical - imitate the observed rows of the same word, weighted by
              softmin of state distance, with probability beta; keep still
              with probability 1 - beta.

Context enhancement then remixes every matrix with the identity so the
automaton keeps part of its previous state distribution at each step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .abstraction import AbstractStateSet, state_distance_matrix
from .corpus import Alphabet, TraceCorpus

FILLINGS = ("null", "uniform", "empirical")


@dataclass
class CountMatrices:
    """Sparse per-word transition counts plus corpus-wide totals."""

    n: int
    alphabet: Alphabet
    counts: dict[int, dict[tuple[int, int], int]]
    total: int = 0
    self_total: int = 0

    def dense(self, word_id: int) -> np.ndarray:
        mat = np.zeros((self.n, self.n), dtype=np.int64)
        for (i, j), c in self.counts.get(word_id, {}).items():
            mat[i, j] = c
        return mat

    def word_totals(self) -> np.ndarray:
        """Observed transition count per alphabet word."""
        totals = np.zeros(len(self.alphabet), dtype=np.int64)
        for wid, cells in self.counts.items():
            totals[wid] = sum(cells.values())
        return totals


@dataclass
class TransitionMatrices:
    """Dense per-word transition matrices for words seen in training.

    Words never observed share a lazily built default matrix. `missing_rows`
    marks, per word, which rows had no observations and were filled by the
    strategy.
    """

    n: int
    alphabet: Alphabet
    matrices: dict[int, np.ndarray]
    missing_rows: dict[int, np.ndarray]
    filling: str
    beta: float
    alpha: float = 0.0
    _default: np.ndarray | None = field(default=None, repr=False)

    def default_matrix(self) -> np.ndarray:
        if self._default is None:
            if self.filling == "null":
                base = np.zeros((self.n, self.n))
            elif self.filling == "uniform":
                base = np.full((self.n, self.n), 1.0 / self.n)
            else:
                base = np.eye(self.n)  # no evidence at all: keep still
            self._default = self.alpha * np.eye(self.n) + (1.0 - self.alpha) * base
        return self._default

    def matrix_for(self, word_id: int) -> np.ndarray:
        got = self.matrices.get(word_id)
        return got if got is not None else self.default_matrix()

    def is_missing_row(self, word_id: int, row: int) -> bool:
        flags = self.missing_rows.get(word_id)
        return True if flags is None else bool(flags[row])


def count_transitions(corpus: TraceCorpus, states: AbstractStateSet) -> CountMatrices:
    """Count every (state, word, state) transition triggered by the corpus."""
    counts: dict[int, dict[tuple[int, int], int]] = {}
    total = 0
    self_total = 0
    s0 = states.initial_id
    for trace in corpus.traces:
        assigned = states.assign(trace.outputs)
        src = s0
        for tok, dst in zip(trace.sentence.tokens, assigned):
            dst = int(dst)
            cells = counts.setdefault(tok, {})
            key = (src, dst)
            cells[key] = cells.get(key, 0) + 1
            total += 1
            if src == dst:
                self_total += 1
            src = dst
    return CountMatrices(
        n=states.n, alphabet=corpus.alphabet, counts=counts,
        total=total, self_total=self_total,
    )


def build_matrix_row(count_row: np.ndarray) -> np.ndarray | None:
    """Normalize one count row into transition probabilities.

    Returns None when the row has no observations, signalling a missing row
    for the caller's filling strategy.
    """
    count_row = np.asarray(count_row, dtype=np.float64)
    s = count_row.sum()
    if s == 0:
        return None
    return count_row / s


def fill_missing_row_empirical(
    row_index: int, count_matrix: np.ndarray, distances: np.ndarray, beta: float
) -> np.ndarray:
    """Fill a missing row by imitating the word's observed rows.

    Each observed row k contributes its counts weighted by softmin of the
    state distance d(i, k); the aggregate is blended with a self-loop:
    beta goes to the imitated distribution, 1 - beta stays put. When the
    whole count matrix is zero the row degenerates to a pure self-loop.
    """
    n = count_matrix.shape[0]
    # softmin weights; shifting by the min distance leaves the ratio unchanged
    d = distances[row_index]
    w = np.exp(-(d - d.min()))
    num = w @ count_matrix
    den = num.sum()
    if den == 0.0:
        row = np.zeros(n)
        row[row_index] = 1.0
        return row
    row = beta * (num / den)
    row[row_index] += 1.0 - beta
    return row


def build_transition_matrices(
    counts: CountMatrices,
    states: AbstractStateSet,
    filling: str = "empirical",
    beta: float = 0.3,
    distance_matrix: np.ndarray | None = None,
) -> TransitionMatrices:
    """Turn count matrices into row-stochastic transition matrices.

    `distance_matrix` overrides the center-derived distances (diagnostics
    and worked examples); by default it is computed from the state set.
    """
    if filling not in FILLINGS:
        raise ValueError(f"unknown filling strategy: {filling!r}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    n = states.n
    M = distance_matrix if distance_matrix is not None else state_distance_matrix(states)

    matrices: dict[int, np.ndarray] = {}
    missing: dict[int, np.ndarray] = {}
    for wid in counts.counts:
        T = counts.dense(wid)
        E = np.zeros((n, n))
        flags = np.zeros(n, dtype=bool)
        for i in range(n):
            row = build_matrix_row(T[i])
            if row is not None:
                E[i] = row
                continue
            flags[i] = True
            if filling == "uniform":
                E[i] = 1.0 / n
            elif filling == "empirical":
                E[i] = fill_missing_row_empirical(i, T, M, beta)
            # null: leave zeros
        matrices[wid] = E
        missing[wid] = flags
    return TransitionMatrices(
        n=n, alphabet=counts.alphabet, matrices=matrices,
        missing_rows=missing, filling=filling, beta=beta,
    )


def enhance_context(matrices: TransitionMatrices, alpha: float) -> TransitionMatrices:
    """Remix every matrix with the identity: alpha * I + (1 - alpha) * E.

    The automaton then stays in its current state with probability alpha at
    each step, so earlier decisions decay geometrically instead of being
    overwritten.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    eye = np.eye(matrices.n)
    enhanced = {
        wid: alpha * eye + (1.0 - alpha) * E for wid, E in matrices.matrices.items()
    }
    return TransitionMatrices(
        n=matrices.n,
        alphabet=matrices.alphabet,
        matrices=enhanced,
        missing_rows={wid: f.copy() for wid, f in matrices.missing_rows.items()},
        filling=matrices.filling,
        beta=matrices.beta,
        alpha=alpha,
    )


def suggest_beta(counts: CountMatrices) -> float:
    """Proportion of self-transitions in the corpus, the natural default for beta."""
    if counts.total == 0:
        raise ValueError("no transitions counted")
    return counts.self_total / counts.total
