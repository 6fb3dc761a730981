#!/usr/bin/env python3
"""Command-line entry point for the vulnerability triage pipeline."""

import argparse
import logging
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from src.config import Config
from src.errors import TriageError
from src.exporters.report_exporter import ReportExporter
from src.services.corpus import FORMATS, corpus_statistics, load_dataset, stratified_split
from src.services.evaluation import ScoredSet, evaluate_scores
from src.services.lexer import C_KEYWORDS, DEFAULT_PLACEHOLDER, rename_identifiers, tokenize
from src.services.metrics import extract_all, metrics_frame
from src.services.model import load_model, save_model
from src.services.pipeline import (
    CROSS,
    SETTINGS,
    ExperimentConfig,
    fit_variant,
    run_experiment,
    score_sources,
    triage_ranking,
)
from src.services.report import deltas_frame, emit_report, read_report, rename_deltas
from src.services.synthetic import generate_corpus, write_corpus
from src.services.vectorize import TOK_U, TOK_UB, VARIANTS, dump_vocabulary, fit_tfidf, ngram_range
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)


def _variant_list(value: str):
    variants = [v.strip() for v in value.split(',') if v.strip()]
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown variant(s): {', '.join(unknown)}")
    return variants


def _add_dataset_args(parser):
    parser.add_argument('--dataset', type=Path, required=True, help='Devign-format JSON or JSONL file')
    parser.add_argument('--format', choices=FORMATS, help='Dataset format (default: by file extension)')


def _add_hyperparameter_args(parser):
    parser.add_argument('--seed', type=int, default=Config.SEED, help='Split and solver seed')
    parser.add_argument('--min-df', type=int, default=Config.MIN_DF, help='TF-IDF document frequency cutoff')
    parser.add_argument('--c', type=float, default=Config.C, help='Inverse regularization strength')
    parser.add_argument('--max-iter', type=int, default=Config.MAX_ITER, help='Solver iteration cap')
    parser.add_argument('--tol', type=float, default=Config.TOL, help='Relative gradient tolerance')


def _add_ranking_args(parser):
    parser.add_argument('--fraction', type=float, default=Config.FRACTION, help='Review budget for Recall@k')
    parser.add_argument('--threshold', type=float, default=Config.THRESHOLD, help='Decision threshold')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='vultriage',
        description='Lightweight vulnerability triage with code metrics and TF-IDF token features'
    )
    parser.add_argument('--log-level', default=None, help='Override VULTRIAGE_LOG_LEVEL')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='Train and evaluate variants, write the report')
    _add_dataset_args(run)
    run.add_argument('--setting', choices=list(SETTINGS) + ['both'], default='random')
    run.add_argument('--train-project', default=None, help=f'Cross setting train project (default {Config.TRAIN_PROJECT})')
    run.add_argument('--test-project', default=None, help=f'Cross setting test project (default {Config.TEST_PROJECT})')
    run.add_argument('--variants', type=_variant_list, default=list(VARIANTS), help='Comma-separated variants')
    run.add_argument('--rename-test', action='store_true', help='Also evaluate on identifier-renamed test code')
    _add_ranking_args(run)
    _add_hyperparameter_args(run)
    run.add_argument('--jobs', type=int, default=Config.JOBS, help='Metric extraction workers')
    run.add_argument('--out', type=Path, required=True, help='Report path (.csv or .json)')
    run.add_argument('--xlsx', type=Path, default=None, help='Also write an Excel workbook')

    metrics = commands.add_parser('metrics', help='Per-function metric CSV')
    _add_dataset_args(metrics)
    metrics.add_argument('--jobs', type=int, default=Config.JOBS)
    metrics.add_argument('--out', type=Path, default=None, help='Output CSV (default: stdout)')

    train = commands.add_parser('train', help='Fit one variant and save the model bundle')
    _add_dataset_args(train)
    train.add_argument('--variant', choices=VARIANTS, required=True)
    train.add_argument('--model', type=Path, required=True, help='Model bundle path (.json)')
    train.add_argument('--train-project', default=None, help='Train on every function of this project')
    _add_hyperparameter_args(train)

    score = commands.add_parser('score', help='Rank functions with a saved model bundle')
    _add_dataset_args(score)
    score.add_argument('--model', type=Path, required=True)
    score.add_argument('--out', type=Path, required=True, help='Ranking CSV')
    score.add_argument('--rename', action='store_true', help='Rename identifiers before scoring')
    _add_ranking_args(score)

    stats = commands.add_parser('stats', help='Per-project corpus statistics')
    _add_dataset_args(stats)

    vocab = commands.add_parser('vocab', help='Dump a fitted TF-IDF vocabulary as TSV')
    _add_dataset_args(vocab)
    vocab.add_argument('--variant', choices=[TOK_U, TOK_UB], default=TOK_U)
    vocab.add_argument('--min-df', type=int, default=Config.MIN_DF)
    vocab.add_argument('--out', type=Path, required=True)

    synth = commands.add_parser('synth', help='Write a synthetic Devign-style corpus')
    synth.add_argument('--n', type=int, default=200)
    synth.add_argument('--seed', type=int, default=7)
    synth.add_argument('--out', type=Path, required=True, help='Corpus path (.json or .jsonl)')

    deltas = commands.add_parser('deltas', help='Rename robustness deltas of a report')
    deltas.add_argument('--report', type=Path, required=True)

    return parser


def _hyperparameters(args) -> dict:
    return {
        'seed': args.seed,
        'min_df': args.min_df,
        'C': args.c,
        'max_iter': args.max_iter,
        'tol': args.tol,
    }


def cmd_run(args):
    settings = list(SETTINGS) if args.setting == 'both' else [args.setting]
    needs_projects = CROSS in settings
    config = ExperimentConfig(
        dataset=args.dataset,
        format=args.format,
        settings=settings,
        train_project=args.train_project or (Config.TRAIN_PROJECT if needs_projects else None),
        test_project=args.test_project or (Config.TEST_PROJECT if needs_projects else None),
        variants=args.variants,
        rename_test=args.rename_test,
        fraction=args.fraction,
        threshold=args.threshold,
        jobs=args.jobs,
        output=args.out,
        **_hyperparameters(args),
    )

    rows = run_experiment(config)
    emit_report(rows, args.out)
    if args.xlsx:
        ReportExporter(Config.OUTPUT_DIR).export_workbook(rows, args.xlsx)

    logger.info("=" * 60)
    logger.info(f"Wrote {len(rows)} report rows to {args.out}")
    logger.info("=" * 60)


def cmd_metrics(args):
    records = load_dataset(args.dataset, args.format)
    rows = extract_all([r.source for r in records], jobs=args.jobs)
    frame = metrics_frame([r.id for r in records], rows)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.out, index=False, lineterminator='\n')
        logger.info(f"Wrote metrics for {len(frame)} functions to {args.out}")
    else:
        frame.to_csv(sys.stdout, index=False, lineterminator='\n')


def cmd_train(args):
    records = load_dataset(args.dataset, args.format)
    if args.train_project:
        train = [r for r in records if r.project == args.train_project]
        if not train:
            projects = ', '.join(sorted({r.project for r in records}))
            raise TriageError(f"unknown project {args.train_project!r}; available projects: {projects}")
    else:
        split = stratified_split(records, Config.SPLIT_FRACTIONS, args.seed)
        wanted = set(split.train_ids)
        train = [r for r in records if r.id in wanted]

    config = ExperimentConfig(variants=[args.variant], **_hyperparameters(args)).validate()
    bundle = fit_variant([r.source for r in train], [r.label for r in train], None, args.variant, config)
    save_model(bundle, args.model)

    logger.info(
        f"Trained {args.variant} on {len(train)} functions: {bundle.model.dim} features, "
        f"{bundle.model.n_iter} iterations, converged={bundle.model.converged}"
    )


def cmd_score(args):
    records = load_dataset(args.dataset, args.format)
    bundle = load_model(args.model)

    sources = [r.source for r in records]
    if args.rename:
        keywords = C_KEYWORDS | {DEFAULT_PLACEHOLDER}
        sources = [rename_identifiers(s, keywords, DEFAULT_PLACEHOLDER) for s in sources]

    scores = score_sources(bundle, sources)
    ranking = triage_ranking(records, scores, args.fraction, args.threshold)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    ranking.to_csv(args.out, index=False, float_format='%.6f', lineterminator='\n')
    logger.info(f"Wrote ranking of {len(ranking)} functions to {args.out}")

    labels = [r.label for r in records]
    if len(set(labels)) == 2:
        scored = ScoredSet.build(labels, scores, [r.id for r in records])
        results = evaluate_scores(scored, args.threshold, args.fraction)
        logger.info(", ".join(f"{name}={value:.3f}" for name, value in results.items()))


def cmd_stats(args):
    records = load_dataset(args.dataset, args.format)
    print(corpus_statistics(records).to_string(index=False, float_format=lambda v: f"{v:.3f}"))


def cmd_vocab(args):
    records = load_dataset(args.dataset, args.format)
    n_min, n_max = ngram_range(args.variant)
    model = fit_tfidf([tokenize(r.source) for r in records], n_min, n_max, args.min_df)
    dump_vocabulary(model, args.out)


def cmd_synth(args):
    write_corpus(generate_corpus(n=args.n, seed=args.seed), args.out)


def cmd_deltas(args):
    deltas = rename_deltas(read_report(args.report))
    if not deltas:
        print("No renamed rows in report")
        return
    print(deltas_frame(deltas).to_string(index=False, float_format=lambda v: f"{v:+.3f}"))


COMMANDS = {
    'run': cmd_run,
    'metrics': cmd_metrics,
    'train': cmd_train,
    'score': cmd_score,
    'stats': cmd_stats,
    'vocab': cmd_vocab,
    'synth': cmd_synth,
    'deltas': cmd_deltas,
}


def main(argv=None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        setup_logging(level=args.log_level)
        Config.validate()
    except ValueError as e:
        print(f"vultriage: {e}", file=sys.stderr)
        return 1

    if args.command == 'run':
        logger.info("=" * 60)
        logger.info("Vulnerability Triage Experiment Starting")
        logger.info("=" * 60)

    try:
        COMMANDS[args.command](args)
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return 130
    except (TriageError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug("Traceback", exc_info=True)
        print(f"vultriage {args.command}: {e}", file=sys.stderr)
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
