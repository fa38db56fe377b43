"""State abstraction: cluster stepwise outputs into abstract states.

Each abstract state is a cluster of output distributions; its center is the
cluster mean and doubles as the state's weight in the final matrix of the
automaton. State 0 is a dedicated initial state that never receives
assignments; its center is the uniform distribution over labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import TraceCorpus


@dataclass
class AbstractStateSet:
    """Cluster centers plus the dedicated initial state (always id 0)."""

    centers: np.ndarray          # (n, L); row 0 is the initial state's center
    frequencies: np.ndarray      # (n,); how often each state absorbs an output; row 0 is 0
    initial_id: int = 0
    objective_history: list[float] = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    @property
    def label_count(self) -> int:
        return self.centers.shape[1]

    def assign(self, outputs: np.ndarray) -> np.ndarray:
        """Map output rows to their nearest cluster center (the initial state is
        never a target; distance ties go to the lowest state id)."""
        outputs = np.atleast_2d(outputs)
        cluster_centers = self.centers[1:]
        d2 = ((outputs[:, None, :] - cluster_centers[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1) + 1


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n_points = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=points.dtype)
    centers[0] = points[rng.integers(n_points)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total == 0.0:
            # all remaining points coincide with a chosen center
            centers[i:] = centers[0]
            break
        probs = d2 / total
        idx = rng.choice(n_points, p=probs)
        centers[i] = points[idx]
        d2 = np.minimum(d2, ((points - centers[i]) ** 2).sum(axis=1))
    return centers


def cluster_outputs(
    corpus: TraceCorpus, k: int, seed: int, max_iter: int = 100
) -> AbstractStateSet:
    """k-means over every stepwise output in the corpus, k-means++ seeded.

    Deterministic for a given seed. Iteration stops when no assignment
    changes; an emptied cluster is re-seeded to the point farthest from its
    assigned center. Returns k cluster states plus the initial state.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    points = corpus.all_outputs()
    distinct = np.unique(points, axis=0).shape[0]
    if distinct < k:
        raise ValueError(f"corpus has {distinct} distinct outputs, fewer than k={k}")

    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, k, rng)
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    history: list[float] = []

    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        point_cost = d2[np.arange(points.shape[0]), new_labels]

        for j in range(k):
            if not np.any(new_labels == j):
                far = int(point_cost.argmax())
                centers[j] = points[far]
                new_labels[far] = j
                point_cost[far] = 0.0

        history.append(float(point_cost.sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = points[labels == j]
            if members.shape[0]:
                centers[j] = members.mean(axis=0)

    L = corpus.label_count
    all_centers = np.vstack([np.full((1, L), 1.0 / L), centers])
    states = AbstractStateSet(
        centers=all_centers,
        frequencies=np.zeros(k + 1),
        objective_history=history,
    )
    states.frequencies = state_frequencies(corpus, states)
    return states


def state_distance_matrix(states: AbstractStateSet) -> np.ndarray:
    """Pairwise Euclidean distances between state centers (initial state included)."""
    c = states.centers
    diff = c[:, None, :] - c[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def state_frequencies(corpus: TraceCorpus, states: AbstractStateSet) -> np.ndarray:
    """Fraction of all outputs assigned to each state; the initial state gets 0."""
    assigned = states.assign(corpus.all_outputs())
    freq = np.bincount(assigned, minlength=states.n).astype(np.float64)
    total = freq.sum()
    if total > 0:
        freq /= total
    freq[states.initial_id] = 0.0
    return freq
