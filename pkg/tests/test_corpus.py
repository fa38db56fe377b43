import gzip
import json
import math

import numpy as np
import pytest

from wfakit.corpus import (
    Alphabet,
    EmbeddingFormatError,
    TraceParseError,
    UNK_TOKEN,
    ensure_unk,
    load_embeddings,
    load_traces,
    save_embeddings,
    save_traces,
    zipf_median_estimate,
)
from wfakit.oracle import SyntheticModel, sample_corpus


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_load_single_step_trace(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [json.dumps({"tokens": ["a"], "outputs": [[1.0, 0.0]]})])
    c = load_traces(p)
    assert len(c) == 1
    assert c.label_count == 2
    assert c.alphabet.words == ["a"]
    assert c.traces[0].sentence.label is None
    np.testing.assert_allclose(c.traces[0].outputs, [[1.0, 0.0]])


def test_load_rejects_bad_row_sum(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [json.dumps({"tokens": ["a"], "outputs": [[0.5, 0.3]]})])
    with pytest.raises(TraceParseError, match="line 1.*sums to"):
        load_traces(p)


def test_load_rejects_length_mismatch(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [json.dumps({"tokens": ["a", "b"], "outputs": [[1.0, 0.0]]})])
    with pytest.raises(TraceParseError, match="1 output rows for 2 tokens"):
        load_traces(p)


def test_load_rejects_negative_probability(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [json.dumps({"tokens": ["a"], "outputs": [[1.5, -0.5]]})])
    with pytest.raises(TraceParseError, match="negative"):
        load_traces(p)


def test_load_rejects_ragged_outputs(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [json.dumps({"tokens": ["a", "b"],
                                "outputs": [[1.0, 0.0], [1.0]]})])
    with pytest.raises(TraceParseError, match="line 1"):
        load_traces(p)


def test_load_rejects_bad_json_with_line_number(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [json.dumps({"tokens": ["a"], "outputs": [[1.0]]}), "{nope"])
    with pytest.raises(TraceParseError, match="line 2"):
        load_traces(p)


def test_load_ignores_unknown_fields_and_blank_lines(tmp_path):
    p = tmp_path / "t.jsonl"
    rec = {"tokens": ["a"], "outputs": [[1.0, 0.0]], "label": 1, "extra": "x"}
    p.write_text(json.dumps(rec) + "\n\n", encoding="utf-8")
    c = load_traces(p)
    assert c.traces[0].sentence.label == 1


def test_load_renormalizes_within_tolerance(tmp_path):
    p = tmp_path / "t.jsonl"
    row = [0.5 + 2e-7, 0.5]
    write_lines(p, [json.dumps({"tokens": ["a"], "outputs": [row]})])
    c = load_traces(p)
    assert c.traces[0].outputs.sum() == pytest.approx(1.0, abs=1e-15)


def test_roundtrip_on_sampled_corpus(tmp_path):
    model = SyntheticModel.random(states=4, words=30, labels=4, seed=7)
    corpus, _ = sample_corpus(model, 100, (2, 9), seed=3)
    p = tmp_path / "c.jsonl"
    save_traces(corpus, p)
    back = load_traces(p)
    assert back.label_count == corpus.label_count
    assert back.alphabet.words == [
        corpus.alphabet.words[t]
        for t in dict.fromkeys(
            tok for tr in corpus.traces for tok in tr.sentence.tokens
        )
    ]
    assert len(back) == len(corpus)
    for a, b in zip(back.traces, corpus.traces):
        assert [back.alphabet.words[t] for t in a.sentence.tokens] == [
            corpus.alphabet.words[t] for t in b.sentence.tokens
        ]
        assert a.sentence.label == b.sentence.label
        np.testing.assert_allclose(a.outputs, b.outputs, atol=1e-15)


def test_gzip_transparent(tmp_path):
    p = tmp_path / "t.jsonl.gz"
    line = json.dumps({"tokens": ["a"], "outputs": [[0.25, 0.75]]})
    with gzip.open(p, "wt", encoding="utf-8") as fh:
        fh.write(line + "\n")
    c = load_traces(p)
    np.testing.assert_allclose(c.traces[0].outputs, [[0.25, 0.75]])


def test_alphabet_dense_ids_and_unk():
    a = Alphabet.from_words(["x", "y", UNK_TOKEN])
    assert [a.index[w] for w in a.words] == [0, 1, 2]
    assert a.unk_id == 2
    with pytest.raises(ValueError, match="duplicate"):
        Alphabet.from_words(["x", "x"])


def test_ensure_unk_appends_once():
    a = Alphabet.from_words(["x"])
    b = ensure_unk(a)
    assert b.words == ["x", UNK_TOKEN]
    assert ensure_unk(b) is b


def test_embeddings_load_small(tmp_path):
    p = tmp_path / "e.txt"
    write_lines(p, ["cat 0.1 0.2 0.3", "dog 1 2 3"])
    t = load_embeddings(p)
    assert t.dimension == 3
    assert len(t) == 2
    np.testing.assert_allclose(t["dog"], [1, 2, 3])


def test_embeddings_dimension_error(tmp_path):
    p = tmp_path / "e.txt"
    write_lines(p, ["cat 0.1 0.2 0.3", "dog 0.1 0.2"])
    with pytest.raises(EmbeddingFormatError, match="line 2"):
        load_embeddings(p)


def test_embeddings_empty_file(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("", encoding="utf-8")
    with pytest.raises(EmbeddingFormatError, match="empty"):
        load_embeddings(p)


def test_embeddings_duplicates_keep_first(tmp_path):
    p = tmp_path / "e.txt"
    write_lines(p, ["cat 1 2", "cat 3 4", "dog 5 6"])
    t = load_embeddings(p)
    assert t.duplicate_count == 1
    np.testing.assert_allclose(t["cat"], [1, 2])


def test_embeddings_write_then_read_exact(tmp_path, rng):
    words = {f"w{i}": rng.normal(size=4) for i in range(50)}
    p = tmp_path / "e.txt"
    save_embeddings(words, p)
    t = load_embeddings(p)
    assert len(t) == 50
    for w, v in words.items():
        np.testing.assert_allclose(t[w], v, atol=1e-8)


def test_zipf_median_news_vocabulary_scale():
    # 20317-word vocabulary, 205927 tokens: the estimate sits at about 2
    assert zipf_median_estimate(20317, 205927) == pytest.approx(2.0, abs=0.1)


def test_zipf_median_algebraic_identity():
    n = 2 * math.log(2)
    assert zipf_median_estimate(2, n) == pytest.approx(2.0, abs=1e-12)


def test_zipf_median_direct_formula():
    assert zipf_median_estimate(1000, 10**6) == pytest.approx(
        2 * 10**6 / (1000 * math.log(1000)), abs=1e-12
    )


def test_zipf_median_monotone_in_vocabulary():
    values = [zipf_median_estimate(m, 5e5) for m in (2, 10, 100, 1000, 20000)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_zipf_median_domain_errors():
    with pytest.raises(ValueError):
        zipf_median_estimate(1, 100)
    with pytest.raises(ValueError):
        zipf_median_estimate(10, 0)
