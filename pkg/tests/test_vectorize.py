"""Tests for TF-IDF fitting, max-abs scaling and feature assembly."""

import math
from collections import Counter

import numpy as np
import pandas as pd
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import sparse

from src.errors import AssemblyError, FitError
from src.services.lexer import ngrams
from src.services.metrics import MetricVector
from src.services.vectorize import (
    METRICS,
    MIX,
    TOK_U,
    apply_maxabs,
    assemble_features,
    dump_vocabulary,
    fit_maxabs,
    fit_tfidf,
    transform_many,
    transform_tfidf,
)

TERMS = [f't{i}' for i in range(20)]

corpora = st.lists(st.lists(st.sampled_from(TERMS), max_size=8), min_size=1, max_size=10)


def dense_tfidf(docs, n_min, n_max, min_df):
    """Straightforward TF-IDF over Python lists."""
    grams = [ngrams(doc, n_min, n_max) for doc in docs]
    df = Counter(term for doc in grams for term in set(doc))
    vocabulary = sorted(term for term, count in df.items() if count >= min_df)
    n = len(docs)

    rows = []
    for doc in grams:
        counts = Counter(doc)
        row = [counts[t] * (math.log((1 + n) / (1 + df[t])) + 1) for t in vocabulary]
        norm = math.sqrt(sum(v * v for v in row))
        rows.append([v / norm if norm else 0.0 for v in row])
    return vocabulary, np.array(rows).reshape(len(docs), len(vocabulary))


def test_fit_tfidf_min_df_two():
    """Test that only terms in both documents survive min_df=2."""
    model = fit_tfidf([['a', 'b'], ['a', 'c']], 1, 1, min_df=2)

    assert model.vocabulary == {'a': 0}
    assert model.idf[0] == pytest.approx(1.0)


def test_fit_tfidf_min_df_one():
    """Test the smoothed idf formula."""
    model = fit_tfidf([['a', 'b'], ['a', 'c']], 1, 1, min_df=1)

    assert model.vocabulary == {'a': 0, 'b': 1, 'c': 2}
    assert model.idf[1] == pytest.approx(1.405465, abs=1e-6)


def test_fit_tfidf_single_document_is_degenerate():
    """Test that no term reaches min_df=2 in one document."""
    with pytest.raises(FitError, match="empty vocabulary"):
        fit_tfidf([['a', 'a', 'b']], 1, 1, min_df=2)


def test_transform_tfidf_example():
    """Test the normalised vector of [a, b]."""
    model = fit_tfidf([['a', 'b'], ['a', 'c']], 1, 1, min_df=1)

    vector = transform_tfidf(model, ['a', 'b'])

    assert vector.shape == (1, 3)
    assert vector.indices.tolist() == [0, 1]
    assert vector.data == pytest.approx([0.579739, 0.814802], abs=1e-6)


def test_transform_tfidf_out_of_vocabulary():
    """Test that a document of unknown tokens is the zero vector."""
    model = fit_tfidf([['a', 'b'], ['a', 'c']], 1, 1, min_df=2)

    vector = transform_tfidf(model, ['z', 'y'])

    assert vector.nnz == 0
    assert vector.shape == (1, 1)


def test_transform_tfidf_single_term():
    """Test that a lone in-vocabulary term normalises to one."""
    model = fit_tfidf([['a', 'b'], ['a', 'c']], 1, 1, min_df=2)

    assert transform_tfidf(model, ['a']).toarray().tolist() == [[1.0]]


@settings(max_examples=100, deadline=None)
@given(docs=corpora, min_df=st.integers(1, 3), bigrams=st.booleans())
def test_tfidf_matches_dense_computation(docs, min_df, bigrams):
    """Test fit and transform against a brute-force dense TF-IDF."""
    n_max = 2 if bigrams else 1
    vocabulary, expected = dense_tfidf(docs, 1, n_max, min_df)
    assume(vocabulary)

    model = fit_tfidf(docs, 1, n_max, min_df)
    matrix = transform_many(model, docs)

    assert sorted(model.vocabulary, key=model.vocabulary.get) == vocabulary
    np.testing.assert_allclose(matrix.toarray(), expected, rtol=0, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(docs=corpora, min_df=st.integers(1, 3))
def test_tfidf_rows_have_unit_norm(docs, min_df):
    """Test that every nonzero row has L2 norm one and no stored zeros."""
    try:
        model = fit_tfidf(docs, 1, 2, min_df)
    except FitError:
        assume(False)

    matrix = transform_many(model, docs)
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())

    for norm in norms:
        assert norm == 0.0 or abs(norm - 1.0) <= 1e-9
    assert np.all(matrix.data != 0)


@settings(max_examples=100, deadline=None)
@given(docs=corpora, min_df=st.integers(1, 4))
def test_raising_min_df_never_adds_terms(docs, min_df):
    """Test min_df monotonicity of the vocabulary."""
    def vocabulary(threshold):
        try:
            return set(fit_tfidf(docs, 1, 2, threshold).vocabulary)
        except FitError:
            return set()

    assert vocabulary(min_df + 1) <= vocabulary(min_df)


@given(docs=corpora)
def test_vocabulary_ignores_document_order(docs):
    """Test that vocabulary indices do not depend on document order."""
    try:
        forward = fit_tfidf(docs, 1, 1, 1)
    except FitError:
        assume(False)

    assert fit_tfidf(list(reversed(docs)), 1, 1, 1).vocabulary == forward.vocabulary


def test_dump_vocabulary(tmp_path):
    """Test the vocabulary TSV layout."""
    model = fit_tfidf([['a', 'b'], ['a', 'c']], 1, 1, min_df=1)

    path = dump_vocabulary(model, tmp_path / 'vocab.tsv')
    frame = pd.read_csv(path, sep='\t')

    assert list(frame.columns) == ['term', 'index', 'df', 'idf']
    assert list(frame['term']) == ['a', 'b', 'c']
    assert list(frame['df']) == [2, 1, 1]


def test_fit_maxabs_column_maxima():
    """Test factors with a zero column falling back to one."""
    scale = fit_maxabs([MetricVector(2, 1, 4, 1, 0), MetricVector(6, 3, 8, 2, 0)])

    assert scale.factors.tolist() == [6, 3, 8, 2, 1]


def test_fit_maxabs_needs_rows():
    """Test that zero rows cannot be fitted."""
    with pytest.raises(FitError):
        fit_maxabs([])


def test_apply_maxabs():
    """Test scaling, no clamping and the zero row."""
    scale = fit_maxabs([MetricVector(2, 1, 4, 1, 0), MetricVector(6, 3, 8, 2, 0)])

    assert apply_maxabs(scale, MetricVector(6, 3, 8, 2, 0)).tolist() == [1, 1, 1, 1, 0]
    assert apply_maxabs(scale, MetricVector(12, 0, 0, 0, 0))[0] == 2.0
    assert apply_maxabs(scale, MetricVector(0, 0, 0, 0, 0)).tolist() == [0, 0, 0, 0, 0]
    assert apply_maxabs(scale, [MetricVector(6, 3, 8, 2, 0)] * 3).shape == (3, 5)


def test_assemble_mix_layout():
    """Test that the TF-IDF block precedes the metric columns."""
    tfidf = sparse.csr_matrix(([0.5], ([0], [0])), shape=(1, 3))

    features = assemble_features(MIX, tfidf, np.array([1.0, 0, 0, 0, 0]))

    assert features.shape == (1, 8)
    assert dict(zip(features.indices.tolist(), features.data.tolist())) == {0: 0.5, 3: 1.0}


def test_assemble_metrics_only():
    """Test the five-column metrics variant."""
    assert assemble_features(METRICS, scaled_metrics=np.ones(5)).shape == (1, 5)


def test_assemble_token_variant_with_empty_document():
    """Test that a zero TF-IDF row keeps its width."""
    features = assemble_features(TOK_U, sparse.csr_matrix((1, 4)))

    assert features.shape == (1, 4)
    assert features.nnz == 0


@pytest.mark.parametrize('variant,tfidf,metrics', [
    (MIX, sparse.csr_matrix((1, 3)), None),
    (MIX, None, np.ones(5)),
    (METRICS, sparse.csr_matrix((1, 3)), np.ones(5)),
    (TOK_U, sparse.csr_matrix((1, 3)), np.ones(5)),
    ('ast', None, None),
])
def test_assemble_rejects_mismatched_blocks(variant, tfidf, metrics):
    """Test that missing or surplus blocks are assembly errors."""
    with pytest.raises(AssemblyError):
        assemble_features(variant, tfidf, metrics)
