"""Alphabets, sentences, stepwise output traces, and their file formats.

A trace corpus pairs each tokenized sentence with the probability
distribution a black-box sequence classifier emitted after every prefix.
Everything downstream (state abstraction, transition counting, metrics)
consumes these corpora; nothing here ever runs a model.
"""

from __future__ import annotations

import gzip
import json
import math
from dataclasses import dataclass, field

import numpy as np

UNK_TOKEN = "<unk>"

PROB_TOL = 1e-6  # acceptable |row sum - 1| before a trace is rejected


class TraceParseError(ValueError):
    """A trace or sentence file record is malformed; message carries the line number."""


class EmbeddingFormatError(ValueError):
    """An embedding text file is empty or dimensionally inconsistent."""


@dataclass
class Alphabet:
    """Ordered token vocabulary with dense ids 0..m-1."""

    words: list[str]
    index: dict[str, int] = field(repr=False)
    unk_id: int | None = None

    @classmethod
    def from_words(cls, words: list[str]) -> "Alphabet":
        index: dict[str, int] = {}
        for w in words:
            if w in index:
                raise ValueError(f"duplicate word in alphabet: {w!r}")
            index[w] = len(index)
        unk_id = index.get(UNK_TOKEN)
        return cls(words=list(words), index=index, unk_id=unk_id)

    def __len__(self) -> int:
        return len(self.words)

    def id_of(self, word: str) -> int | None:
        return self.index.get(word)


def ensure_unk(alphabet: Alphabet) -> Alphabet:
    """Return an alphabet guaranteed to contain the unknown token (appended if absent)."""
    if alphabet.unk_id is not None:
        return alphabet
    return Alphabet.from_words(alphabet.words + [UNK_TOKEN])


@dataclass
class Sentence:
    tokens: list[int]
    label: int | None = None

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class OutputTrace:
    """A sentence plus the classifier's distribution over labels after each prefix."""

    sentence: Sentence
    outputs: np.ndarray  # (len(sentence), label_count), rows sum to 1

    def __len__(self) -> int:
        return len(self.sentence)


@dataclass
class TraceCorpus:
    alphabet: Alphabet
    label_count: int
    traces: list[OutputTrace]
    split_tag: str = "train"

    def __len__(self) -> int:
        return len(self.traces)

    def all_outputs(self) -> np.ndarray:
        """Every stepwise output in corpus order, stacked into one (T, L) array."""
        if not self.traces:
            return np.zeros((0, self.label_count))
        return np.concatenate([t.outputs for t in self.traces], axis=0)

    def token_total(self) -> int:
        return sum(len(t) for t in self.traces)


@dataclass
class EmbeddingTable:
    """word -> real vector, all of one dimension (Glove text convention)."""

    dimension: int
    vectors: dict[str, np.ndarray]
    duplicate_count: int = 0

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[word]

    def __len__(self) -> int:
        return len(self.vectors)


def _open_text(path, mode: str = "rt"):
    # Transparent gzip: sniff the two magic bytes rather than trusting the suffix.
    if "r" in mode:
        with open(path, "rb") as probe:
            magic = probe.read(2)
        if magic == b"\x1f\x8b":
            return gzip.open(path, mode, encoding="utf-8")
        return open(path, mode.replace("t", "") + "t", encoding="utf-8")
    if str(path).endswith(".gz"):
        return gzip.open(path, mode, encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def _check_outputs(rows, token_count: int, line_no: int) -> np.ndarray:
    try:
        out = np.asarray(rows, dtype=np.float64)
    except (ValueError, TypeError) as e:
        raise TraceParseError(f"line {line_no}: malformed outputs ({e})") from e
    if out.ndim != 2:
        raise TraceParseError(f"line {line_no}: outputs must be a list of rows")
    if out.shape[0] != token_count:
        raise TraceParseError(
            f"line {line_no}: {out.shape[0]} output rows for {token_count} tokens"
        )
    if np.any(out < 0):
        raise TraceParseError(f"line {line_no}: negative probability in outputs")
    sums = out.sum(axis=1)
    bad = np.abs(sums - 1.0) > PROB_TOL
    if np.any(bad):
        i = int(np.argmax(bad))
        raise TraceParseError(
            f"line {line_no}: output row {i} sums to {sums[i]:.8f}, not 1"
        )
    # Renormalize so downstream math sees exact distributions.
    return out / sums[:, None]


def load_traces(path, split_tag: str = "train") -> TraceCorpus:
    """Load a line-delimited trace file (optionally gzipped).

    Each line holds one record: {"tokens": [str...], "outputs": [[float...]...],
    "label": int?}. Unknown fields are ignored. The alphabet is built from
    tokens in order of first appearance.
    """
    words: list[str] = []
    index: dict[str, int] = {}
    records: list[tuple[list[int], int | None, np.ndarray]] = []
    label_count: int | None = None

    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceParseError(f"line {line_no}: invalid JSON ({e.msg})") from e
            if not isinstance(rec, dict) or "tokens" not in rec or "outputs" not in rec:
                raise TraceParseError(f"line {line_no}: record needs tokens and outputs")
            tokens = rec["tokens"]
            if not tokens:
                raise TraceParseError(f"line {line_no}: empty sentence")
            out = _check_outputs(rec["outputs"], len(tokens), line_no)
            if label_count is None:
                label_count = out.shape[1]
            elif out.shape[1] != label_count:
                raise TraceParseError(
                    f"line {line_no}: {out.shape[1]} classes, corpus has {label_count}"
                )
            ids = []
            for tok in tokens:
                tok = str(tok)
                if tok not in index:
                    index[tok] = len(words)
                    words.append(tok)
                ids.append(index[tok])
            records.append((ids, rec.get("label"), out))

    if label_count is None:
        raise TraceParseError("trace file contains no records")
    alphabet = Alphabet.from_words(words)
    traces = [
        OutputTrace(Sentence(ids, label), out) for ids, label, out in records
    ]
    return TraceCorpus(alphabet, label_count, traces, split_tag)


def save_traces(corpus: TraceCorpus, path) -> None:
    """Write a corpus back out in the line-delimited trace format."""
    with _open_text(path, "wt") as fh:
        for tr in corpus.traces:
            rec = {
                "tokens": [corpus.alphabet.words[t] for t in tr.sentence.tokens],
                "outputs": [[float(x) for x in row] for row in tr.outputs],
            }
            if tr.sentence.label is not None:
                rec["label"] = int(tr.sentence.label)
            fh.write(json.dumps(rec) + "\n")


def load_embeddings(path) -> EmbeddingTable:
    """Load a Glove-style text embedding file: `word f1 f2 ... fd` per line.

    Duplicate words keep their first occurrence; the number of dropped
    duplicates is recorded on the table.
    """
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    duplicates = 0
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2 or parts[0] == "":
                if line.strip() == "":
                    continue
                raise EmbeddingFormatError(f"line {line_no}: expected word and values")
            word = parts[0]
            try:
                vec = np.array([float(v) for v in parts[1:] if v != ""], dtype=np.float64)
            except ValueError as e:
                raise EmbeddingFormatError(f"line {line_no}: bad number") from e
            if dimension is None:
                dimension = vec.shape[0]
            elif vec.shape[0] != dimension:
                raise EmbeddingFormatError(
                    f"line {line_no}: dimension {vec.shape[0]}, file started with {dimension}"
                )
            if word in vectors:
                duplicates += 1
                continue
            vectors[word] = vec
    if dimension is None or not vectors:
        raise EmbeddingFormatError("embedding file is empty")
    return EmbeddingTable(dimension=dimension, vectors=vectors, duplicate_count=duplicates)


def save_embeddings(vectors: dict[str, np.ndarray], path, digits: int = 10) -> None:
    """Write vectors in the embedding text format with `digits` significant digits."""
    with _open_text(path, "wt") as fh:
        for word, vec in vectors.items():
            coords = " ".join(f"{x:.{digits}g}" for x in vec)
            fh.write(f"{word} {coords}\n")


def zipf_median_estimate(word_count: int, total_tokens: float) -> float:
    """Closed-form estimate 2N/(m ln m) of the median per-word occurrence count.

    Under a Zipf-distributed vocabulary of m words and N tokens, half the
    words are expected to occur no more often than this; use it to gauge
    how many per-word transition matrices will be mostly empty.
    """
    if word_count < 2:
        raise ValueError("word_count must be at least 2")
    if total_tokens < 1:
        raise ValueError("total_tokens must be at least 1")
    return 2.0 * total_tokens / (word_count * math.log(word_count))
