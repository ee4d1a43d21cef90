"""Python bindings for the metatag C++ core."""

from ._metatag import (
    ArgumentError,
    ConfigError,
    DimensionError,
    MetatagError,
    ParseError,
    Tagger,
    UnigramLM,
    advise,
    aggregate,
    attention_weights,
    charlm_perplexity,
    correct_multiplicity,
    crf_log_partition,
    crf_score,
    extract_spans,
    paired_permutation_test,
    parse_conll,
    parse_conllu,
    parse_rankings,
    perplexity,
    span_f1,
    spearman,
    token_accuracy,
    viterbi,
    vocab_overlap,
    vote,
)

__version__ = "0.1.0"
