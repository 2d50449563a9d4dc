"""qqmatch: query-to-question similarity engine for FAQ retrieval.

Five similarity scores per candidate pair (twin-LSTM cosine on the
unnormalized and normalized text, average word-vector cosine, a custom
fuzzy intersection ratio, and an optional sentence-embedding cosine)
are fused by a polynomial-kernel SVM into one match probability.
"""

from .embeddings import EmbeddingTable, average_embedding, cosine, load_table
from .errors import (
    BuildError,
    CacheMissError,
    ConfigError,
    ContractError,
    FormatError,
    InputError,
    QQMatchError,
    TrainingError,
    TransportError,
)
from .fuzzy import FuzzyConfig, FuzzyResult, fuzzy_intersection_ratio, norm_levenshtein
from .index import (
    MatchResponse,
    MatchResult,
    QuestionIndex,
    QuestionRecord,
    Resources,
    build_index,
    load_corpus,
    load_index,
    match_query,
    save_index,
    score_pair,
)
from .siamese import SiameseWeights, encode, load_weights, pair_score, save_weights, vectorize
from .svm import LabeledPair, MetaClassifier, kernel, load_model, save_model, train
from .textnorm import NormalizationConfig, PreprocessedQuery, preprocess

__version__ = "0.1.0"
