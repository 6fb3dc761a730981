"""Experiment orchestration: variant wiring, renaming protocol, timing and report rows."""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.config import Config
from src.errors import ConfigError, TriageError
from src.services.corpus import (
    CROSS_PROJECT,
    FunctionRecord,
    SplitResult,
    cross_project_split,
    load_dataset,
    split_summary,
    stratified_split,
)
from src.services.evaluation import ScoredSet, budget_size, evaluate_scores
from src.services.lexer import C_KEYWORDS, DEFAULT_PLACEHOLDER, rename_identifiers, tokenize
from src.services.metrics import MetricVector, extract_all
from src.services.model import VariantBundle, compute_class_weights, predict_proba, train_logreg
from src.services.report import ReportRow
from src.services.vectorize import (
    VARIANTS,
    apply_maxabs,
    assemble_features,
    fit_maxabs,
    fit_tfidf,
    ngram_range,
    transform_many,
    uses_metrics,
    uses_tokens,
)

logger = logging.getLogger(__name__)

RANDOM = 'random'
CROSS = 'cross'
SETTINGS = (RANDOM, CROSS)


@dataclass
class ExperimentConfig:
    """One invocation of the experiment harness."""
    dataset: Optional[Path] = None
    format: Optional[str] = None
    settings: List[str] = field(default_factory=lambda: [RANDOM])
    train_project: Optional[str] = None
    test_project: Optional[str] = None
    variants: List[str] = field(default_factory=lambda: list(VARIANTS))
    seed: int = Config.SEED
    rename_test: bool = False
    fraction: float = Config.FRACTION
    threshold: float = Config.THRESHOLD
    C: float = Config.C
    tol: float = Config.TOL
    max_iter: int = Config.MAX_ITER
    min_df: int = Config.MIN_DF
    jobs: int = Config.JOBS
    output: Optional[Path] = None
    placeholder: str = DEFAULT_PLACEHOLDER

    def validate(self) -> 'ExperimentConfig':
        """Check invariants; returns self so calls can be chained."""
        errors = []

        unknown_settings = [s for s in self.settings if s not in SETTINGS]
        if unknown_settings:
            errors.append(f"unknown setting(s): {', '.join(unknown_settings)}")
        unknown_variants = [v for v in self.variants if v not in VARIANTS]
        if unknown_variants:
            errors.append(f"unknown variant(s): {', '.join(unknown_variants)}")
        if CROSS in self.settings and not (self.train_project and self.test_project):
            errors.append("cross setting needs both train_project and test_project")
        if not 0.0 < self.fraction <= 1.0:
            errors.append(f"fraction must be in (0, 1], got {self.fraction}")
        if self.C <= 0:
            errors.append(f"C must be positive, got {self.C}")
        if self.tol <= 0:
            errors.append(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            errors.append(f"max_iter must be at least 1, got {self.max_iter}")
        if self.min_df < 1:
            errors.append(f"min_df must be at least 1, got {self.min_df}")
        if self.jobs < 1:
            errors.append(f"jobs must be at least 1, got {self.jobs}")

        if errors:
            raise ConfigError("; ".join(errors))
        return self

    @property
    def rename_keywords(self) -> frozenset:
        # Placeholder counts as a keyword so renaming is idempotent
        return C_KEYWORDS | {self.placeholder}


class FeatureCache:
    """
    Metric vectors for the whole dataset, computed once per invocation.

    The extraction time is shared by every report row of the run.
    """

    def __init__(self, records: Sequence[FunctionRecord], jobs: int = 1, keywords=C_KEYWORDS,
                 placeholder: str = DEFAULT_PLACEHOLDER):
        self.records = {r.id: r for r in records}
        self.jobs = jobs
        self.keywords = keywords
        self.placeholder = placeholder

        start = time.perf_counter()
        rows = extract_all([r.source for r in records], jobs=jobs)
        self.feat_time_s = time.perf_counter() - start
        self.metrics: Dict[int, MetricVector] = {r.id: row for r, row in zip(records, rows)}
        self._renamed_metrics: Dict[int, MetricVector] = {}
        self._renamed_sources: Dict[int, str] = {}

        logger.info(f"Extracted metrics for {len(records)} functions in {self.feat_time_s:.2f}s")

    def renamed_source(self, record_id: int) -> str:
        if record_id not in self._renamed_sources:
            self._renamed_sources[record_id] = rename_identifiers(
                self.records[record_id].source, self.keywords, self.placeholder
            )
        return self._renamed_sources[record_id]

    def renamed_metrics(self, ids: Sequence[int]) -> List[MetricVector]:
        """Metrics recomputed from renamed source; cached per id."""
        missing = [i for i in ids if i not in self._renamed_metrics]
        if missing:
            rows = extract_all([self.renamed_source(i) for i in missing], jobs=self.jobs)
            self._renamed_metrics.update(zip(missing, rows))
        return [self._renamed_metrics[i] for i in ids]


def fit_variant(
    sources: Sequence[str],
    labels: Sequence[int],
    metric_rows: Optional[Sequence[MetricVector]],
    variant: str,
    config: ExperimentConfig
) -> VariantBundle:
    """
    Fit the feature transformers and classifier of one variant.

    TF-IDF is fitted on raw, comment-retaining text; max-abs scaling on the
    training metric rows; class weights on the training labels.
    """
    tfidf = scale = None
    tfidf_block = scaled = None

    if uses_tokens(variant):
        docs = [tokenize(s) for s in sources]
        n_min, n_max = ngram_range(variant)
        tfidf = fit_tfidf(docs, n_min, n_max, config.min_df)
        tfidf_block = transform_many(tfidf, docs)

    if uses_metrics(variant):
        if metric_rows is None:
            metric_rows = extract_all(sources, jobs=config.jobs)
        scale = fit_maxabs(metric_rows)
        scaled = apply_maxabs(scale, metric_rows)

    X = assemble_features(variant, tfidf_block, scaled)
    class_weights = compute_class_weights(labels)
    model = train_logreg(
        X,
        labels,
        C=config.C,
        class_weights=class_weights,
        tol=config.tol,
        max_iter=config.max_iter,
        seed=config.seed,
    )
    return VariantBundle(variant=variant, model=model, tfidf=tfidf, scale=scale)


def score_sources(
    bundle: VariantBundle,
    sources: Sequence[str],
    metric_rows: Optional[Sequence[MetricVector]] = None,
    jobs: int = 1
) -> np.ndarray:
    """Vulnerability probabilities for raw function sources."""
    tfidf_block = scaled = None
    if bundle.tfidf is not None:
        tfidf_block = transform_many(bundle.tfidf, [tokenize(s) for s in sources])
    if bundle.scale is not None:
        if metric_rows is None:
            metric_rows = extract_all(sources, jobs=jobs)
        scaled = apply_maxabs(bundle.scale, metric_rows)
    X = assemble_features(bundle.variant, tfidf_block, scaled)
    return predict_proba(bundle.model, X)


def score_records(bundle: VariantBundle, records: Sequence[FunctionRecord], jobs: int = 1) -> List[tuple]:
    """(id, score) pairs in record order."""
    scores = score_sources(bundle, [r.source for r in records], jobs=jobs)
    return [(r.id, float(s)) for r, s in zip(records, scores)]


def triage_ranking(
    records: Sequence[FunctionRecord],
    scores: Sequence[float],
    fraction: float = 0.10,
    threshold: float = 0.5
) -> pd.DataFrame:
    """
    Functions ordered for review.

    Columns: id, project, score, rank (1-based, ties by ascending id),
    in_budget (within the top-fraction budget), flagged (score >= threshold).
    """
    frame = pd.DataFrame({
        'id': [r.id for r in records],
        'project': [r.project for r in records],
        'score': np.asarray(scores, dtype=np.float64),
    })
    frame = frame.sort_values(['score', 'id'], ascending=[False, True], kind='mergesort').reset_index(drop=True)
    frame['rank'] = np.arange(1, len(frame) + 1)
    k = budget_size(len(frame), fraction) if len(frame) else 0
    frame['in_budget'] = frame['rank'] <= k
    frame['flagged'] = frame['score'] >= threshold
    return frame


def build_split(records: Sequence[FunctionRecord], setting: str, config: ExperimentConfig) -> SplitResult:
    if setting == RANDOM:
        return stratified_split(records, Config.SPLIT_FRACTIONS, config.seed)
    return cross_project_split(records, config.train_project, config.test_project)


class ExperimentRunner:
    """Runs variants over one dataset, sharing the metric extraction pass."""

    def __init__(self, config: ExperimentConfig, records: Optional[Sequence[FunctionRecord]] = None):
        self.config = config.validate()
        if records is None:
            if config.dataset is None:
                raise ConfigError("no dataset given")
            records = load_dataset(config.dataset, config.format)
        self.records = list(records)
        self.by_id = {r.id: r for r in self.records}

        if config.jobs > 1:
            logger.warning(
                f"Running extraction with {config.jobs} workers; timings are not comparable to single-job runs"
            )
        self.cache = FeatureCache(
            self.records,
            jobs=config.jobs,
            keywords=config.rename_keywords,
            placeholder=config.placeholder,
        )

    def run_variant(self, split: SplitResult, variant: str, setting: str, renamed: bool = False) -> ReportRow:
        """Train on the split's train partition and evaluate on its test partition."""
        config = self.config
        train = [self.by_id[i] for i in split.train_ids]
        test = [self.by_id[i] for i in split.test_ids]
        train_labels = [r.label for r in train]
        if len(set(train_labels)) < 2:
            raise TriageError("training partition must contain both classes")

        train_metrics = [self.cache.metrics[r.id] for r in train]

        start = time.perf_counter()
        bundle = fit_variant([r.source for r in train], train_labels, train_metrics, variant, config)
        train_time = time.perf_counter() - start

        if renamed:
            test_sources = [self.cache.renamed_source(r.id) for r in test]
            test_metrics = self.cache.renamed_metrics([r.id for r in test])
        else:
            test_sources = [r.source for r in test]
            test_metrics = [self.cache.metrics[r.id] for r in test]

        start = time.perf_counter()
        scores = score_sources(bundle, test_sources, test_metrics)
        infer_time = time.perf_counter() - start

        scored = ScoredSet.build([r.label for r in test], scores, [r.id for r in test])
        results = evaluate_scores(scored, config.threshold, config.fraction)

        logger.info(
            f"{setting:<6} {variant:<7} {'renamed' if renamed else 'original':<8} "
            f"PR-AUC={results['pr_auc']:.3f} F1={results['f1']:.3f} R@k={results['recall_at_k']:.3f} "
            f"train={train_time:.2f}s infer={infer_time:.2f}s"
        )
        return ReportRow(
            setting=setting,
            variant=variant,
            renamed=renamed,
            **results,
            feat_time_s=self.cache.feat_time_s,
            train_time_s=train_time,
            infer_time_s=infer_time,
            n_train=len(train),
            n_test=len(test),
            n_features=bundle.model.dim,
            jobs=config.jobs,
        )

    def run(self) -> List[ReportRow]:
        """Every requested (setting, variant, rename state), in that order."""
        config = self.config
        settings = [s for s in SETTINGS if s in config.settings]
        variants = [v for v in VARIANTS if v in config.variants]
        rename_states = [False, True] if config.rename_test else [False]

        rows = []
        for setting in settings:
            if not variants:
                break
            split = build_split(self.records, setting, config)
            summary = split_summary(self.records, split)
            logger.info(
                f"{setting} split: train={summary['train']['n']} ({summary['train']['positive_rate']:.1%} positive) "
                f"val={summary['val']['n']} (unused) "
                f"test={summary['test']['n']} ({summary['test']['positive_rate']:.1%} positive)"
            )
            for variant in variants:
                for renamed in rename_states:
                    try:
                        rows.append(self.run_variant(split, variant, setting, renamed))
                    except TriageError as e:
                        raise TriageError(f"{setting}/{variant}{' (renamed)' if renamed else ''}: {e}") from e
        return rows


def run_variant(config: ExperimentConfig, split: SplitResult, variant: str,
                records: Optional[Sequence[FunctionRecord]] = None) -> ReportRow:
    """Single report row for one variant on a prepared split."""
    setting = CROSS if split.kind == CROSS_PROJECT else RANDOM
    runner = ExperimentRunner(config, records)
    return runner.run_variant(split, variant, setting, config.rename_test)


def run_experiment(config: ExperimentConfig, records: Optional[Sequence[FunctionRecord]] = None) -> List[ReportRow]:
    """All report rows for a configuration."""
    return ExperimentRunner(config, records).run()
