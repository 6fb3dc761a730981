"""Ranking and thresholded metrics over scored test sets."""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from src.errors import EvaluationError


@dataclass(frozen=True)
class ScoredSet:
    """Parallel labels, scores and record ids."""
    labels: np.ndarray
    scores: np.ndarray
    ids: np.ndarray

    @classmethod
    def build(cls, labels: Sequence[int], scores: Sequence[float], ids: Optional[Sequence[int]] = None) -> 'ScoredSet':
        labels = np.asarray(labels, dtype=np.int64)
        scores = np.asarray(scores, dtype=np.float64)
        ids = np.arange(len(labels)) if ids is None else np.asarray(ids, dtype=np.int64)
        if not (len(labels) == len(scores) == len(ids)):
            raise EvaluationError(
                f"labels, scores and ids differ in length ({len(labels)}, {len(scores)}, {len(ids)})"
            )
        return cls(labels=labels, scores=scores, ids=ids)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())

    def ranking(self) -> np.ndarray:
        """Indices by descending score, ties by ascending id."""
        return np.lexsort((self.ids, -self.scores))


def average_precision(s: ScoredSet) -> float:
    """Step-wise average precision: sum of precision at each rank where recall increases, over the positives."""
    n_pos = s.n_positive
    if n_pos == 0:
        raise EvaluationError("average precision needs at least one positive")

    ranked = s.labels[s.ranking()]
    hits = np.cumsum(ranked)
    precision = hits / np.arange(1, len(ranked) + 1)
    return float(precision[ranked == 1].sum() / n_pos)


def roc_auc(s: ScoredSet) -> float:
    """Probability that a random positive outscores a random negative, ties counting one half."""
    n_pos = s.n_positive
    n_neg = len(s) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("ROC-AUC needs both positives and negatives")

    ranks = rankdata(s.scores, method='average')
    u_statistic = ranks[s.labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def thresholded_prf(s: ScoredSet, threshold: float = 0.5) -> Tuple[float, float, float]:
    """Precision, recall and F1 when predicting positive iff score >= threshold (0 for empty denominators)."""
    predicted = s.scores >= threshold
    actual = s.labels == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))

    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def budget_size(n: int, fraction: float) -> int:
    """k = max(1, floor(fraction * n))."""
    # Guard against 0.1 * 30 landing just under 3
    return max(1, int(math.floor(fraction * n + 1e-9)))


def recall_at_fraction(s: ScoredSet, fraction: float = 0.10) -> float:
    """Share of all positives found among the top fraction of the ranking."""
    if not 0.0 < fraction <= 1.0:
        raise EvaluationError(f"fraction must be in (0, 1], got {fraction}")
    n_pos = s.n_positive
    if n_pos == 0:
        raise EvaluationError("Recall@k needs at least one positive")

    k = budget_size(len(s), fraction)
    top = s.ranking()[:k]
    return float(s.labels[top].sum() / n_pos)


def evaluate_scores(s: ScoredSet, threshold: float = 0.5, fraction: float = 0.10) -> Dict[str, float]:
    """All report metrics for one scored set."""
    precision, recall, f1 = thresholded_prf(s, threshold)
    return {
        'pr_auc': average_precision(s),
        'roc_auc': roc_auc(s),
        'f1': f1,
        'precision': precision,
        'recall': recall,
        'recall_at_k': recall_at_fraction(s, fraction),
    }
