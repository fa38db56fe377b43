import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wfakit.corpus import Alphabet, OutputTrace, Sentence, TraceCorpus


def build_corpus(words, records, split_tag="train") -> TraceCorpus:
    """records: list of (token_word_list, outputs_rows, label_or_None)."""
    alphabet = Alphabet.from_words(words)
    traces = []
    label_count = len(records[0][1][0])
    for tokens, rows, label in records:
        ids = [alphabet.index[t] for t in tokens]
        traces.append(OutputTrace(Sentence(ids, label), np.asarray(rows, dtype=float)))
    return TraceCorpus(alphabet, label_count, traces, split_tag)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
