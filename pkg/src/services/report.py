"""Experiment report rows: CSV/JSON emission, parsing and rename deltas."""

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from src.errors import DatasetFormatError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = (
    'setting', 'variant', 'renamed', 'pr_auc', 'roc_auc', 'f1', 'precision', 'recall',
    'recall_at_k', 'feat_time_s', 'train_time_s', 'infer_time_s', 'n_train', 'n_test', 'n_features',
)
REAL_COLUMNS = (
    'pr_auc', 'roc_auc', 'f1', 'precision', 'recall', 'recall_at_k',
    'feat_time_s', 'train_time_s', 'infer_time_s',
)
TIMING_COLUMNS = ('feat_time_s', 'train_time_s', 'infer_time_s')
REPORT_FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class ReportRow:
    """One (setting, variant, rename state) result."""
    setting: str
    variant: str
    renamed: bool
    pr_auc: float
    roc_auc: float
    f1: float
    precision: float
    recall: float
    recall_at_k: float
    feat_time_s: float
    train_time_s: float
    infer_time_s: float
    n_train: int
    n_test: int
    n_features: int
    jobs: int = 1

    @property
    def timings_comparable(self) -> bool:
        return self.jobs == 1


@dataclass(frozen=True)
class RenameDelta:
    """Original vs renamed-test ranking quality for one setting and variant."""
    setting: str
    variant: str
    pr_auc_orig: float
    pr_auc_renamed: float
    pr_auc_delta: float
    recall_at_k_orig: float
    recall_at_k_renamed: float
    recall_at_k_delta: float


def report_format(path, format: Optional[str] = None) -> str:
    if format:
        if format not in REPORT_FORMATS:
            raise ValueError(f"unknown report format {format!r}; expected csv or json")
        return format
    return 'json' if Path(path).suffix.lower() == '.json' else 'csv'


def rows_frame(rows: Sequence[ReportRow]) -> pd.DataFrame:
    """Report rows as a DataFrame with the CSV columns (renamed as 0/1)."""
    frame = pd.DataFrame([asdict(r) for r in rows], columns=[f.name for f in fields(ReportRow)])
    frame = frame[list(REPORT_COLUMNS)].copy()
    if not frame.empty:
        frame['renamed'] = frame['renamed'].astype(int)
        for column in REAL_COLUMNS:
            frame[column] = frame[column].astype(float)
    return frame


def emit_report(rows: Sequence[ReportRow], path, format: Optional[str] = None) -> Path:
    """
    Write report rows.

    CSV uses the fixed header and six decimals for reals; JSON is a list of
    objects with the same keys plus `jobs`.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    format = report_format(path, format)

    if format == 'csv':
        rows_frame(rows).to_csv(path, index=False, float_format='%.6f', lineterminator='\n')
    else:
        payload = []
        for row in rows:
            record = asdict(row)
            for column in REAL_COLUMNS:
                record[column] = round(float(record[column]), 6)
            payload.append(record)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2)
            f.write('\n')

    logger.info(f"Wrote {len(rows)} report rows to {path}")
    return path


def read_report(path, format: Optional[str] = None) -> List[ReportRow]:
    """Parse a report written by emit_report."""
    path = Path(path)
    format = report_format(path, format)

    try:
        if format == 'csv':
            frame = pd.read_csv(path)
            records = frame.to_dict(orient='records')
        else:
            with open(path, 'r', encoding='utf-8') as f:
                records = json.load(f)
    except (OSError, ValueError) as e:
        raise DatasetFormatError(f"cannot read report {path}: {e}") from e

    missing = [c for c in REPORT_COLUMNS if records and c not in records[0]]
    if missing:
        raise DatasetFormatError(f"report {path} is missing columns: {', '.join(missing)}")

    return [_to_row(record) for record in records]


def _to_row(record: Dict) -> ReportRow:
    return ReportRow(
        setting=str(record['setting']),
        variant=str(record['variant']),
        renamed=bool(int(record['renamed'])),
        **{column: float(record[column]) for column in REAL_COLUMNS},
        n_train=int(record['n_train']),
        n_test=int(record['n_test']),
        n_features=int(record['n_features']),
        jobs=int(record.get('jobs', 1)),
    )


def rename_deltas(rows: Sequence[ReportRow]) -> List[RenameDelta]:
    """Pair original and renamed rows; delta = renamed - original."""
    original = {(r.setting, r.variant): r for r in rows if not r.renamed}
    renamed = {(r.setting, r.variant): r for r in rows if r.renamed}

    deltas = []
    for key, orig in original.items():
        ren = renamed.get(key)
        if ren is None:
            continue
        deltas.append(RenameDelta(
            setting=orig.setting,
            variant=orig.variant,
            pr_auc_orig=orig.pr_auc,
            pr_auc_renamed=ren.pr_auc,
            pr_auc_delta=ren.pr_auc - orig.pr_auc,
            recall_at_k_orig=orig.recall_at_k,
            recall_at_k_renamed=ren.recall_at_k,
            recall_at_k_delta=ren.recall_at_k - orig.recall_at_k,
        ))
    return deltas


def deltas_frame(deltas: Sequence[RenameDelta]) -> pd.DataFrame:
    return pd.DataFrame([asdict(d) for d in deltas], columns=[f.name for f in fields(RenameDelta)])
