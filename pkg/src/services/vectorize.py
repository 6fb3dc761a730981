"""TF-IDF vocabulary fitting, max-abs metric scaling and feature assembly."""

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import sparse
from sklearn.preprocessing import normalize

from src.errors import AssemblyError, FitError
from src.services.lexer import ngrams
from src.services.metrics import METRIC_NAMES, MetricVector, metrics_matrix

logger = logging.getLogger(__name__)

METRICS = 'metrics'
TOK_U = 'tok-u'
TOK_UB = 'tok-ub'
MIX = 'mix'
VARIANTS = (METRICS, TOK_U, TOK_UB, MIX)

NGRAM_RANGES = {TOK_U: (1, 1), TOK_UB: (1, 2), MIX: (1, 2)}

N_METRICS = len(METRIC_NAMES)


def uses_tokens(variant: str) -> bool:
    return variant in NGRAM_RANGES


def uses_metrics(variant: str) -> bool:
    return variant in (METRICS, MIX)


@dataclass(frozen=True)
class TfidfModel:
    """Fitted vocabulary (term -> column), document frequencies and IDF weights."""
    vocabulary: Dict[str, int]
    idf: np.ndarray
    df: np.ndarray
    n_min: int
    n_max: int
    min_df: int
    n_docs: int

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> Dict:
        return {
            'vocabulary': self.vocabulary,
            'idf': self.idf.tolist(),
            'df': self.df.tolist(),
            'n_min': self.n_min,
            'n_max': self.n_max,
            'min_df': self.min_df,
            'n_docs': self.n_docs,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'TfidfModel':
        return cls(
            vocabulary={str(k): int(v) for k, v in data['vocabulary'].items()},
            idf=np.asarray(data['idf'], dtype=np.float64),
            df=np.asarray(data['df'], dtype=np.int64),
            n_min=int(data['n_min']),
            n_max=int(data['n_max']),
            min_df=int(data['min_df']),
            n_docs=int(data['n_docs']),
        )


@dataclass(frozen=True)
class MaxAbsScale:
    """Per-column divisors for the metric block."""
    factors: np.ndarray

    def to_dict(self) -> Dict:
        return {'factors': self.factors.tolist()}

    @classmethod
    def from_dict(cls, data: Dict) -> 'MaxAbsScale':
        return cls(factors=np.asarray(data['factors'], dtype=np.float64))


def fit_tfidf(docs: Sequence[List[str]], n_min: int = 1, n_max: int = 1, min_df: int = 2) -> TfidfModel:
    """
    Fit a TF-IDF vocabulary over token streams.

    Terms seen in fewer than min_df documents are dropped; the rest are
    indexed in lexicographic order. idf = ln((1 + N) / (1 + df)) + 1.
    """
    if not docs:
        raise FitError("cannot fit TF-IDF on an empty document list")

    doc_freq: Counter = Counter()
    for tokens in docs:
        doc_freq.update(set(ngrams(tokens, n_min, n_max)))

    terms = sorted(term for term, count in doc_freq.items() if count >= min_df)
    if not terms:
        raise FitError(
            f"empty vocabulary after min_df={min_df} filtering ({len(docs)} documents, {len(doc_freq)} distinct terms)"
        )

    df = np.array([doc_freq[t] for t in terms], dtype=np.int64)
    n_docs = len(docs)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0

    logger.debug(f"TF-IDF ({n_min},{n_max}) vocabulary: {len(terms)} of {len(doc_freq)} terms kept (min_df={min_df})")
    return TfidfModel(
        vocabulary={term: index for index, term in enumerate(terms)},
        idf=idf,
        df=df,
        n_min=n_min,
        n_max=n_max,
        min_df=min_df,
        n_docs=n_docs,
    )


def transform_many(model: TfidfModel, docs: Sequence[List[str]]) -> sparse.csr_matrix:
    """L2-normalised TF-IDF rows, one per document; out-of-vocabulary terms are ignored."""
    indptr = [0]
    indices: List[int] = []
    data: List[float] = []

    for tokens in docs:
        counts = Counter(ngrams(tokens, model.n_min, model.n_max))
        entries = sorted(
            (model.vocabulary[term], count)
            for term, count in counts.items()
            if term in model.vocabulary
        )
        for column, count in entries:
            indices.append(column)
            data.append(count * model.idf[column])
        indptr.append(len(indices))

    matrix = sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(docs), model.dim),
    )
    # All-zero rows stay all-zero
    matrix = normalize(matrix, norm='l2', copy=False)
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def transform_tfidf(model: TfidfModel, doc: List[str]) -> sparse.csr_matrix:
    """TF-IDF vector of a single document as a 1 x V sparse row."""
    return transform_many(model, [doc])


def dump_vocabulary(model: TfidfModel, path) -> Path:
    """Write the vocabulary as TSV (term, index, df, idf) in index order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    terms = sorted(model.vocabulary, key=model.vocabulary.get)
    frame = pd.DataFrame({
        'term': terms,
        'index': [model.vocabulary[t] for t in terms],
        'df': [int(model.df[model.vocabulary[t]]) for t in terms],
        'idf': [float(model.idf[model.vocabulary[t]]) for t in terms],
    })
    frame.to_csv(path, sep='\t', index=False, float_format='%.6f')
    logger.info(f"Wrote {len(terms)} vocabulary terms to {path}")
    return path


def fit_maxabs(rows: Union[Sequence[MetricVector], np.ndarray]) -> MaxAbsScale:
    """Column-wise max |value| over the fitting rows; all-zero columns get factor 1."""
    matrix = _as_metric_matrix(rows)
    if matrix.shape[0] == 0:
        raise FitError("cannot fit max-abs scaling on zero rows")
    factors = np.abs(matrix).max(axis=0)
    factors[factors == 0] = 1.0
    return MaxAbsScale(factors=factors)


def apply_maxabs(scale: MaxAbsScale, rows: Union[MetricVector, Sequence[MetricVector], np.ndarray]) -> np.ndarray:
    """
    Divide metric values by the fitted factors, without clamping.

    A single MetricVector gives a 5-vector; several rows give an (n, 5) array.
    """
    if isinstance(rows, MetricVector):
        return np.asarray(rows.as_tuple(), dtype=np.float64) / scale.factors
    return _as_metric_matrix(rows) / scale.factors


def _as_metric_matrix(rows) -> np.ndarray:
    if isinstance(rows, np.ndarray):
        return np.atleast_2d(rows).astype(np.float64)
    return metrics_matrix(list(rows))


def assemble_features(
    variant: str,
    tfidf_vec: Optional[sparse.spmatrix] = None,
    scaled_metrics: Optional[np.ndarray] = None
) -> sparse.csr_matrix:
    """
    Build the classifier input for a variant.

    metrics -> the 5 scaled metric columns; tok-u / tok-ub -> the TF-IDF
    block; mix -> TF-IDF block (columns 0..V-1) then metrics (V..V+4).
    Accepts a single row or a batch of rows.
    """
    if variant not in VARIANTS:
        raise AssemblyError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")

    needs_tokens = uses_tokens(variant)
    needs_metrics = uses_metrics(variant)
    if needs_tokens and tfidf_vec is None:
        raise AssemblyError(f"variant {variant} needs a TF-IDF block")
    if not needs_tokens and tfidf_vec is not None:
        raise AssemblyError(f"variant {variant} takes no TF-IDF block")
    if needs_metrics and scaled_metrics is None:
        raise AssemblyError(f"variant {variant} needs scaled metrics")
    if not needs_metrics and scaled_metrics is not None:
        raise AssemblyError(f"variant {variant} takes no metric block")

    blocks = []
    if needs_tokens:
        blocks.append(sparse.csr_matrix(tfidf_vec))
    if needs_metrics:
        dense = np.atleast_2d(np.asarray(scaled_metrics, dtype=np.float64))
        if dense.shape[1] != N_METRICS:
            raise AssemblyError(f"expected {N_METRICS} metric columns, got {dense.shape[1]}")
        blocks.append(sparse.csr_matrix(dense))

    if len(blocks) == 2 and blocks[0].shape[0] != blocks[1].shape[0]:
        raise AssemblyError(
            f"row count mismatch: {blocks[0].shape[0]} TF-IDF rows vs {blocks[1].shape[0]} metric rows"
        )

    features = sparse.hstack(blocks, format='csr') if len(blocks) == 2 else blocks[0]
    features.eliminate_zeros()
    features.sort_indices()
    return features


def ngram_range(variant: str) -> Tuple[int, int]:
    return NGRAM_RANGES[variant]
