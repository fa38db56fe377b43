import numpy as np
import pytest
from scipy import stats

from oracles import brute_forward_label
from wfakit.abstraction import cluster_outputs
from wfakit.corpus import Alphabet, Sentence
from wfakit.oracle import (
    OracleQuery,
    SyntheticModel,
    load_model,
    query_label,
    sample_corpus,
    save_model,
    zipf_probs,
)
from wfakit.transitions import build_transition_matrices, count_transitions


def one_state_model():
    return SyntheticModel(
        transitions=np.ones((2, 1, 1)),
        emissions=np.array([[0.9, 0.1]]),
        start_state=0,
        alphabet=Alphabet.from_words(["a", "b"]),
        word_probs=np.array([0.5, 0.5]),
    )


def two_state_cycle():
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    return SyntheticModel(
        transitions=np.stack([flip]),
        emissions=np.array([[0.8, 0.2], [0.2, 0.8]]),
        start_state=0,
        alphabet=Alphabet.from_words(["x"]),
        word_probs=np.array([1.0]),
    )


def test_one_state_outputs_constant():
    corpus, paths = sample_corpus(one_state_model(), 20, (1, 5), seed=0)
    for trace in corpus.traces:
        for row in trace.outputs:
            np.testing.assert_allclose(row, [0.9, 0.1])
    assert all(s == 0 for path in paths for s in path)


def test_two_state_cycle_alternates():
    corpus, paths = sample_corpus(two_state_cycle(), 5, (6, 6), seed=0)
    for trace, path in zip(corpus.traces, paths):
        assert path == [1, 0, 1, 0, 1, 0]
        np.testing.assert_allclose(trace.outputs[0], [0.2, 0.8])
        np.testing.assert_allclose(trace.outputs[1], [0.8, 0.2])


def test_word_frequencies_follow_zipf_law():
    m = 50
    model = SyntheticModel.random(states=3, words=m, labels=3, seed=1)
    corpus, _ = sample_corpus(model, 12_000, (8, 10), seed=2)
    counts = np.zeros(m)
    for tr in corpus.traces:
        for t in tr.sentence.tokens:
            counts[t] += 1
    total = counts.sum()
    assert total > 1e5
    expected = zipf_probs(m, 1.0) * total
    chi2 = stats.chisquare(counts, expected)
    assert chi2.pvalue > 0.001


def test_sampling_deterministic_per_seed():
    model = SyntheticModel.random(states=4, words=30, labels=4, seed=5,
                                  stochasticity=0.4)
    a, pa = sample_corpus(model, 50, (2, 8), seed=7)
    b, pb = sample_corpus(model, 50, (2, 8), seed=7)
    assert pa == pb
    for ta, tb in zip(a.traces, b.traces):
        assert ta.sentence.tokens == tb.sentence.tokens
        assert np.array_equal(ta.outputs, tb.outputs)
    c, _ = sample_corpus(model, 50, (2, 8), seed=8)
    assert any(
        ta.sentence.tokens != tc.sentence.tokens
        for ta, tc in zip(a.traces, c.traces)
    )


def test_query_label_constant_model():
    model = one_state_model()
    for tokens in ([0], [1, 0, 1], [0, 0, 0, 0]):
        assert query_label(model, Sentence(tokens)) == 0


def test_query_label_single_token_hand_computed():
    model = two_state_cycle()
    # one token moves start 0 -> 1, whose emission argmax is label 1
    assert query_label(model, Sentence([0])) == 1
    assert query_label(model, Sentence([0, 0])) == 0


def test_query_label_matches_bruteforce_forward(rng):
    model = SyntheticModel.random(states=5, words=20, labels=5, seed=9,
                                  stochasticity=0.6)
    for _ in range(100):
        tokens = [int(t) for t in rng.integers(0, 20, size=rng.integers(1, 10))]
        expected = brute_forward_label(
            model.transitions.tolist(), model.emissions.tolist(),
            model.start_state, tokens,
        )
        assert query_label(model, Sentence(tokens)) == expected


def test_query_maps_unknown_tokens_like_the_automaton():
    model = two_state_cycle()
    other = Alphabet.from_words(["zzz"])
    # unmapped token leaves the distribution alone: start state wins
    assert query_label(model, Sentence([0]), other) == 0
    q = OracleQuery(model)
    assert q.parallel_safe
    assert q(Sentence([0])) == 1


def test_model_roundtrip(tmp_path):
    model = SyntheticModel.random(states=4, words=25, labels=4, seed=3,
                                  stochasticity=0.2)
    p = tmp_path / "m.oracle"
    save_model(model, p)
    back = load_model(p)
    assert np.array_equal(back.transitions, model.transitions)
    assert np.array_equal(back.emissions, model.emissions)
    assert np.array_equal(back.word_probs, model.word_probs)
    assert back.alphabet.words == model.alphabet.words
    assert back.start_state == model.start_state


def test_random_model_rows_stochastic():
    model = SyntheticModel.random(states=6, words=40, labels=6, seed=11,
                                  stochasticity=0.5)
    sums = model.transitions.sum(axis=2)
    np.testing.assert_allclose(sums, np.ones_like(sums), atol=1e-12)
    np.testing.assert_allclose(model.emissions.sum(axis=1), np.ones(6), atol=1e-12)


def test_transition_probabilities_recovered_at_scale():
    # law of large numbers: with separated emissions and k = q, frequent
    # words' rows are recovered within 0.05 per entry
    q, m = 4, 8
    model = SyntheticModel.random(states=q, words=m, labels=q, seed=21,
                                  zipf_exponent=0.3, stochasticity=0.35)
    corpus, _ = sample_corpus(model, 7500, (6, 10), seed=22)
    states = cluster_outputs(corpus, k=q, seed=0)
    counts = count_transitions(corpus, states)
    mats = build_transition_matrices(counts, states, "empirical", 0.3)

    # cluster ids are a permutation of true states; centers identify it
    perm = {}
    for true_state in range(q):
        d = ((states.centers[1:] - model.emissions[true_state]) ** 2).sum(axis=1)
        perm[true_state] = 1 + int(np.argmin(d))

    totals = counts.word_totals()
    checked = 0
    for wid in range(m):
        if totals[wid] < 10_000:
            continue
        checked += 1
        E = mats.matrix_for(wid)
        for i in range(q):
            for j in range(q):
                got = E[perm[i], perm[j]]
                assert abs(got - model.transitions[wid, i, j]) <= 0.05
    assert checked >= 1


def test_sample_corpus_validates_lengths():
    with pytest.raises(ValueError, match="length_range"):
        sample_corpus(one_state_model(), 5, (0, 3), seed=0)
    with pytest.raises(ValueError, match="length_range"):
        sample_corpus(one_state_model(), 5, (4, 2), seed=0)
