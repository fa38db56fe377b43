"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with `pytest -s tests/test_acceptance.py` to see one line per criterion.
"""

import math
import time

import numpy as np

from oracles import brute_cr_jsd
from planted import (
    STRONG_EPS,
    WEAK_EPS,
    attribution_model,
    counter_embeddings,
    counter_model,
    counter_sentences,
)
from wfakit.abstraction import AbstractStateSet
from wfakit.augment import AugmentConfig, SynonymTable, augment_corpus
from wfakit.corpus import Alphabet, Sentence, ensure_unk, zipf_median_estimate
from wfakit.explain import (
    AttackConfig,
    attack_corpus,
    influence_score,
    tme,
)
from wfakit.oracle import OracleQuery, SyntheticModel, sample_corpus
from wfakit.transitions import (
    CountMatrices,
    build_transition_matrices,
    enhance_context,
    suggest_beta,
)
from wfakit.wfa import Wfa, evaluate, extract, load, run, save
from wfakit.transitions import TransitionMatrices


def check(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def sparse_count_matrices(rng, n: int, words: int) -> CountMatrices:
    alphabet = Alphabet.from_words([f"w{i}" for i in range(words)])
    counts = {}
    total = self_total = 0
    for wid in range(words):
        dense = rng.integers(0, 4, size=(n, n))
        for row in range(n):
            if rng.random() < 0.45:
                dense[row] = 0
        cells = {}
        for i in range(n):
            for j in range(n):
                if dense[i, j]:
                    cells[(i, j)] = int(dense[i, j])
                    total += int(dense[i, j])
                    if i == j:
                        self_total += int(dense[i, j])
        counts[wid] = cells
    return CountMatrices(n=n, alphabet=alphabet, counts=counts,
                         total=total, self_total=self_total)


def uniform_states(n: int, labels: int) -> AbstractStateSet:
    return AbstractStateSet(
        centers=np.full((n, labels), 1.0 / labels),
        frequencies=np.zeros(n),
    )


def test_worked_example_bit_match():
    start = time.perf_counter()
    counts = sparse_count_matrices(np.random.default_rng(0), 3, 1)
    counts.counts[0] = {(0, 0): 1, (0, 1): 3, (1, 0): 1, (1, 1): 1}
    states = uniform_states(3, 3)
    # distances chosen so the third state imitates the first twice as strongly
    b = 1.0
    M = np.array([
        [0.0, 0.5, b - math.log(2)],
        [0.5, 0.0, b],
        [b - math.log(2), b, 0.0],
    ])
    mats = build_transition_matrices(counts, states, "empirical", beta=0.5,
                                     distance_matrix=M)
    E = mats.matrix_for(0)
    expected_E = np.array([[0.25, 0.75, 0.0], [0.5, 0.5, 0.0], [0.15, 0.35, 0.5]])
    e_err = float(np.max(np.abs(E - expected_E)))
    enhanced = enhance_context(mats, 0.2).matrix_for(0)
    expected_H = np.array([[0.4, 0.6, 0.0], [0.4, 0.6, 0.0], [0.12, 0.28, 0.6]])
    h_err = float(np.max(np.abs(enhanced - expected_H)))
    elapsed = time.perf_counter() - start
    check(
        "worked example bit-match",
        e_err <= 1e-12 and h_err <= 1e-12 and elapsed < 1.0,
        f"E err {e_err:.2e}, enhanced err {h_err:.2e}, {elapsed:.2f}s",
    )


def test_zipf_median_news_scale():
    start = time.perf_counter()
    value = zipf_median_estimate(20317, 205927)
    elapsed = time.perf_counter() - start
    check("zipf median estimate", 1.9 <= value <= 2.1 and elapsed < 1.0,
          f"estimate {value:.4f}")


def test_decision_decomposition_random_automata():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        length = int(rng.integers(1, 9))
        alpha = float(rng.choice([0.2, 0.5, 0.8]))
        raw = [rng.dirichlet(np.ones(n), size=n) for _ in range(length)]
        I = np.zeros(n)
        I[0] = 1.0
        d = I.copy()
        zs = []
        for step in range(length):
            zs.append(d @ raw[step])
            d = d @ (alpha * np.eye(n) + (1 - alpha) * raw[step])
            recon = alpha ** (step + 1) * I
            for k in range(step + 1):
                recon = recon + (1 - alpha) * alpha ** (step - k) * zs[k]
            worst = max(worst, float(np.max(np.abs(d - recon))))
    elapsed = time.perf_counter() - start
    check("context decomposition identity", worst <= 1e-10 and elapsed < 5.0,
          f"max deviation {worst:.2e}, {elapsed:.2f}s")


def test_stochastic_closure_bulk():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    n, words = 5, 10_000
    counts = sparse_count_matrices(rng, n, words)
    states = uniform_states(n, 4)
    worst = 0.0
    for filling in ("uniform", "empirical"):
        mats = build_transition_matrices(counts, states, filling, beta=0.3)
        stacked = np.stack([mats.matrix_for(w) for w in range(words)])
        worst = max(worst, float(np.max(np.abs(stacked.sum(axis=2) - 1.0))))
        for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
            enhanced = enhance_context(mats, alpha)
            stacked = np.stack([enhanced.matrix_for(w) for w in range(words)])
            worst = max(worst, float(np.max(np.abs(stacked.sum(axis=2) - 1.0))))
    rows_ok = worst <= 1e-9

    # scored sentences stay distributions
    run_worst = 0.0
    for _ in range(50):
        k = int(rng.integers(2, 6))
        labels = int(rng.integers(2, 5))
        sub = sparse_count_matrices(rng, k, 6)
        sub_states = AbstractStateSet(
            centers=np.vstack([np.full((1, labels), 1.0 / labels),
                               rng.dirichlet(np.ones(labels), size=k - 1)]),
            frequencies=np.zeros(k),
        )
        mats = build_transition_matrices(sub, sub_states, "empirical", beta=0.4)
        mats = enhance_context(mats, float(rng.choice([0.0, 0.2, 0.5])))
        automaton = Wfa(states=sub_states, alphabet=sub.alphabet, matrices=mats)
        sent = Sentence([int(t) for t in rng.integers(0, 6, size=7)])
        run_worst = max(run_worst, abs(float(run(automaton, sent).sum()) - 1.0))
    elapsed = time.perf_counter() - start
    check(
        "stochastic closure",
        rows_ok and run_worst <= 1e-6 and elapsed < 10.0,
        f"row err {worst:.2e}, score err {run_worst:.2e}, {elapsed:.1f}s",
    )


def test_oracle_recovery_and_filling_order():
    start = time.perf_counter()
    model = SyntheticModel.random(states=8, words=200, labels=8, seed=42,
                                  zipf_exponent=1.1, attractor_frac=0.6,
                                  identity_frac=0.3)
    train, _ = sample_corpus(model, 5000, (2, 5), seed=1, split_tag="train")
    test, _ = sample_corpus(model, 1000, (10, 18), seed=2, split_tag="test")
    emp = extract(train, k=8, seed=0, filling="empirical", beta=None, alpha=0.0)
    ev_emp = evaluate(emp, test)
    null_wfa = extract(train, k=8, seed=0, filling="null", beta=None, alpha=0.0)
    ev_null = evaluate(null_wfa, test)
    elapsed = time.perf_counter() - start
    check(
        "oracle recovery",
        ev_emp.cr >= 0.95 and ev_emp.jsd <= 0.02
        and (ev_emp.cr - ev_null.cr) >= 0.15 and elapsed < 60.0,
        f"CR {ev_emp.cr:.3f}, JSD {ev_emp.jsd:.4f}, "
        f"null CR {ev_null.cr:.3f}, {elapsed:.1f}s",
    )


def test_metric_equivalence_bruteforce():
    rng = np.random.default_rng(17)
    model = SyntheticModel.random(states=4, words=25, labels=4, seed=10,
                                  stochasticity=0.3)
    corpus, _ = sample_corpus(model, 50, (2, 7), seed=11)
    w = extract(corpus, k=4, seed=1, filling="uniform", alpha=0.3)
    ev = evaluate(w, corpus)
    cr, jsd = brute_cr_jsd(
        [r.wfa_scores.tolist() for r in ev.records],
        [r.model_scores.tolist() for r in ev.records],
    )
    check(
        "metric equivalence",
        abs(ev.cr - cr) <= 1e-12 and abs(ev.jsd - jsd) <= 1e-12,
        f"CR delta {abs(ev.cr - cr):.2e}, JSD delta {abs(ev.jsd - jsd):.2e}",
    )


def test_augmentation_statistics():
    m = 50
    words = [f"w{i}" for i in range(m)]
    alphabet = ensure_unk(Alphabet.from_words(words))
    syn = SynonymTable(
        k=5, alphabet=alphabet,
        lists={i: [(i + d) % m for d in range(1, 6)] for i in range(m)},
    )
    rng = np.random.default_rng(3)
    originals = [Sentence(list(rng.integers(0, m, size=10))) for _ in range(10_000)]
    out = augment_corpus(originals, syn, AugmentConfig(p_r=0.4, p_d=0.2,
                                                       epochs=1, seed=9))
    size_ok = len(out) == 2 * len(originals)
    total = replaced = dropped = 0
    for orig, var in zip(originals, out[len(originals):]):
        for a, b in zip(orig.tokens, var.tokens):
            total += 1
            if b == alphabet.unk_id:
                dropped += 1
            elif b != a:
                replaced += 1
    r_freq, d_freq = replaced / total, dropped / total
    check(
        "augmentation statistics",
        size_ok and total >= 100_000
        and abs(r_freq - 0.4) <= 0.01 and abs(d_freq - 0.12) <= 0.01,
        f"replace {r_freq:.4f}, unk {d_freq:.4f}, corpus {len(out)}",
    )


def test_influence_zero_sum_and_planted_rank():
    rng = np.random.default_rng(23)
    worst = 0.0
    for _ in range(20):
        n, L, m = 5, 4, 8
        alphabet = Alphabet.from_words([f"w{i}" for i in range(m)])
        mats = TransitionMatrices(
            n=n, alphabet=alphabet,
            matrices={w: rng.dirichlet(np.ones(n), size=n) for w in range(m)},
            missing_rows={w: np.zeros(n, dtype=bool) for w in range(m)},
            filling="empirical", beta=0.3,
        )
        states = AbstractStateSet(
            centers=rng.dirichlet(np.ones(L), size=n),
            frequencies=rng.dirichlet(np.ones(n)),
        )
        scores = influence_score(tme(mats), states)
        worst = max(worst, float(np.max(np.abs(scores.scores.sum(axis=1)))))

    model = attribution_model()
    corpus, _ = sample_corpus(model, 400, (2, 8), seed=3)
    w = extract(corpus, k=3, seed=0)
    ranked_scores = influence_score(tme(w.matrices), w.states)
    from wfakit.explain import top_influential

    ranked = top_influential(ranked_scores, class_id=2, count=3)
    check(
        "influence zero-sum and attribution",
        worst <= 1e-9 and ranked[0] == "driver",
        f"worst class-sum {worst:.2e}, top word {ranked[0]!r}",
    )


def test_attack_orderings():
    model = counter_model()
    corpus, _ = sample_corpus(model, 600, (2, 8), seed=1)
    w = extract(corpus, k=5, seed=0)
    space = tme(w.matrices)
    scores = influence_score(space, w.states)
    emb = counter_embeddings()
    query = OracleQuery(model)
    sentences = counter_sentences(model.alphabet)
    asr = {}
    for name, eps in (("weak", WEAK_EPS), ("strong", STRONG_EPS)):
        for k in (1, 2):
            cfg = AttackConfig(top_k=k, d_s_max=eps)
            asr[(name, k)] = attack_corpus(sentences, scores, space, emb,
                                           query, cfg).asr
    check(
        "attack orderings",
        asr[("weak", 2)] >= asr[("weak", 1)]
        and asr[("strong", 2)] >= asr[("strong", 1)]
        and asr[("strong", 1)] >= asr[("weak", 1)]
        and asr[("strong", 2)] >= asr[("weak", 2)],
        f"weak {asr[('weak', 1)]:.2f}/{asr[('weak', 2)]:.2f}, "
        f"strong {asr[('strong', 1)]:.2f}/{asr[('strong', 2)]:.2f}",
    )


def test_pipeline_determinism_and_roundtrip(tmp_path):
    model = SyntheticModel.random(states=5, words=80, labels=5, seed=7)
    runs = []
    for _ in range(2):
        corpus, _ = sample_corpus(model, 400, (2, 8), seed=4)
        w = extract(corpus, k=5, seed=2, filling="empirical", alpha=0.2)
        p = tmp_path / "det.wfa"
        save(w, p)
        runs.append(p.read_bytes())
    identical = runs[0] == runs[1]

    p = tmp_path / "round.wfa"
    corpus, _ = sample_corpus(model, 400, (2, 8), seed=4)
    w = extract(corpus, k=5, seed=2, filling="empirical", alpha=0.2)
    save(w, p)
    back = load(p)
    exact = (
        back.alphabet.words == w.alphabet.words
        and np.array_equal(back.states.centers, w.states.centers)
        and np.array_equal(back.states.frequencies, w.states.frequencies)
        and set(back.matrices.matrices) == set(w.matrices.matrices)
        and all(
            np.array_equal(back.matrices.matrices[i], w.matrices.matrices[i])
            for i in w.matrices.matrices
        )
        and back.config == w.config
    )
    check("determinism and round-trip", identical and exact,
          f"byte-identical {identical}, round-trip exact {exact}")
