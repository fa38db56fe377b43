"""Weighted-automaton surrogates for black-box sequence classifiers.

Extract a weighted finite automaton from recorded stepwise output traces,
score its agreement with the traced model, and use its transition matrices
as task-oriented word embeddings for attribution, contrastive pair mining,
and substitution attacks.
"""

from .abstraction import AbstractStateSet, cluster_outputs, state_distance_matrix, state_frequencies
from .augment import AugmentConfig, SynonymTable, augment_corpus, augment_sentence, build_synonyms
from .corpus import (
    Alphabet,
    EmbeddingTable,
    OutputTrace,
    Sentence,
    TraceCorpus,
    UNK_TOKEN,
    ensure_unk,
    load_embeddings,
    load_traces,
    save_embeddings,
    save_traces,
    zipf_median_estimate,
)
from .explain import (
    AttackConfig,
    InfluenceScores,
    PairCriteria,
    TmeSpace,
    attack_corpus,
    attack_sentence,
    export_tme,
    influence_score,
    mine_pairs,
    tme,
    top_influential,
)
from .oracle import OracleQuery, SyntheticModel, query_label, sample_corpus
from .transitions import (
    CountMatrices,
    TransitionMatrices,
    build_matrix_row,
    build_transition_matrices,
    count_transitions,
    enhance_context,
    fill_missing_row_empirical,
    suggest_beta,
)
from .wfa import EvalReport, Wfa, evaluate, extract, jensen_shannon, load, predict, run, save

__version__ = "0.1.0"
