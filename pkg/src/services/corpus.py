"""Dataset ingestion and the split protocols."""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import DatasetEntryError, DatasetFormatError, SplitError, UnknownProjectError

logger = logging.getLogger(__name__)

JSON_ARRAY = 'json-array'
JSONL = 'jsonl'
FORMATS = (JSON_ARRAY, JSONL)

RANDOM_STRATIFIED = 'random-stratified'
CROSS_PROJECT = 'cross-project'


@dataclass(frozen=True)
class FunctionRecord:
    """One labeled function."""
    id: int
    project: str
    commit: str
    label: int
    source: str


@dataclass(frozen=True)
class SplitResult:
    """Disjoint train/val/test id lists produced by a split protocol."""
    train_ids: List[int]
    val_ids: List[int]
    test_ids: List[int]
    seed: int
    kind: str
    train_project: Optional[str] = None
    test_project: Optional[str] = None
    eligible_ids: List[int] = field(default_factory=list, repr=False)


def detect_format(path: Path) -> str:
    """Guess the dataset format from the file extension."""
    return JSONL if Path(path).suffix.lower() in ('.jsonl', '.ndjson') else JSON_ARRAY


def load_dataset(path, format: Optional[str] = None) -> List[FunctionRecord]:
    """
    Load a Devign-style dataset.

    Args:
        path: JSON array or JSON-lines file
        format: 'json-array' or 'jsonl' (default: guessed from the extension)

    Returns:
        Records in file order with ids 0..n-1
    """
    path = Path(path)
    format = format or detect_format(path)
    if format not in FORMATS:
        raise DatasetFormatError(f"unknown dataset format {format!r}; expected one of {', '.join(FORMATS)}")

    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DatasetFormatError(f"cannot read {path}: {e}") from e

    # Stray bytes are common in scraped C code
    text = raw.decode('utf-8', errors='replace')

    entries = _parse_json_array(text, path) if format == JSON_ARRAY else _parse_jsonl(text, path)
    records = [_to_record(index, entry) for index, entry in enumerate(entries)]

    logger.info(f"Loaded {len(records)} functions from {path}")
    return records


def _parse_json_array(text: str, path: Path) -> list:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, list):
        raise DatasetFormatError(f"{path}: expected a JSON array at top level, got {type(data).__name__}")
    return data


def _parse_jsonl(text: str, path: Path) -> list:
    entries = []
    # Records end at \n only; U+2028 and U+0085 may appear raw inside strings
    for line_number, line in enumerate(text.split('\n'), start=1):
        line = line.rstrip('\r')
        if not line.strip():
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"{path}:{line_number} is not valid JSON: {e}") from e
    return entries


def _to_record(index: int, entry) -> FunctionRecord:
    if not isinstance(entry, dict):
        raise DatasetEntryError(index, f"expected an object, got {type(entry).__name__}")
    if 'func' not in entry:
        raise DatasetEntryError(index, "missing field 'func'")
    if 'target' not in entry:
        raise DatasetEntryError(index, "missing field 'target'")

    source = entry['func']
    if not isinstance(source, str):
        raise DatasetEntryError(index, "field 'func' must be a string")

    return FunctionRecord(
        id=index,
        project=str(entry.get('project') or ''),
        commit=str(entry.get('commit_id') or ''),
        label=_coerce_label(index, entry['target']),
        source=source,
    )


def _coerce_label(index: int, target) -> int:
    if isinstance(target, bool):
        return int(target)
    if isinstance(target, (int, float)) and target in (0, 1):
        return int(target)
    if isinstance(target, str) and target.strip() in ('0', '1'):
        return int(target.strip())
    raise DatasetEntryError(index, f"field 'target' must be 0/1 or boolean, got {target!r}")


def _partition_sizes(n: int, fractions: Sequence[Fraction]) -> List[int]:
    """Largest-remainder allocation of n items; ties go to the earlier partition."""
    quotas = [f * n for f in fractions]
    sizes = [int(q) for q in quotas]
    leftover = n - sum(sizes)
    order = sorted(range(len(quotas)), key=lambda p: (-(quotas[p] - sizes[p]), p))
    for p in order[:leftover]:
        sizes[p] += 1
    return sizes


def _allocate_classes(class_counts: Dict[int, int], sizes: List[int]) -> Dict[int, List[int]]:
    """
    Split every class across partitions so rows sum to class counts and
    columns to partition sizes, each cell within one of its exact share.
    """
    n = sum(class_counts.values())
    classes = sorted(class_counts)
    alloc = {c: [class_counts[c] * s // n for s in sizes] for c in classes}
    row_gap = {c: class_counts[c] - sum(alloc[c]) for c in classes}
    col_gap = [s - sum(alloc[c][p] for c in classes) for p, s in enumerate(sizes)]

    cells = sorted(
        ((c, p) for c in classes for p in range(len(sizes))),
        key=lambda cp: (-((class_counts[cp[0]] * sizes[cp[1]]) % n), cp[1], cp[0]),
    )
    for c, p in cells:
        if row_gap[c] > 0 and col_gap[p] > 0:
            alloc[c][p] += 1
            row_gap[c] -= 1
            col_gap[p] -= 1

    if any(row_gap.values()) or any(col_gap):
        raise SplitError("could not allocate classes across partitions")
    return alloc


def stratified_split(
    records: Sequence[FunctionRecord],
    fractions: Tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 42
) -> SplitResult:
    """
    Stratified random train/val/test split.

    Partition sizes follow the fractions with largest-remainder rounding;
    per-class membership is drawn with a seeded shuffle.
    """
    if len(fractions) != 3:
        raise SplitError(f"expected three fractions (train, val, test), got {len(fractions)}")
    exact = [Fraction(f).limit_denominator(10 ** 6) for f in fractions]
    if any(f < 0 for f in exact) or sum(exact) != 1:
        raise SplitError(f"fractions must be non-negative and sum to 1, got {tuple(fractions)}")

    by_class: Dict[int, List[int]] = {0: [], 1: []}
    for record in records:
        by_class[record.label].append(record.id)

    missing = [c for c, ids in by_class.items() if not ids]
    if missing:
        raise SplitError(f"stratified split needs both classes; class {missing[0]} has no records")

    needed = sum(1 for f in exact if f > 0)
    for label, ids in by_class.items():
        if len(ids) < needed:
            raise SplitError(
                f"class {label} has {len(ids)} records but {needed} partitions need it"
            )

    sizes = _partition_sizes(len(records), exact)
    alloc = _allocate_classes({c: len(ids) for c, ids in by_class.items()}, sizes)

    rng = np.random.default_rng(seed)
    partitions: List[List[int]] = [[], [], []]
    for label in sorted(by_class):
        ids = sorted(by_class[label])
        shuffled = [ids[i] for i in rng.permutation(len(ids))]
        start = 0
        for p, count in enumerate(alloc[label]):
            partitions[p].extend(shuffled[start:start + count])
            start += count

    train, val, test = (sorted(p) for p in partitions)
    logger.debug(f"Stratified split sizes (seed {seed}): train={len(train)} val={len(val)} test={len(test)}")
    return SplitResult(
        train_ids=train,
        val_ids=val,
        test_ids=test,
        seed=seed,
        kind=RANDOM_STRATIFIED,
        eligible_ids=sorted(r.id for r in records),
    )


def cross_project_split(
    records: Sequence[FunctionRecord],
    train_project: str,
    test_project: str
) -> SplitResult:
    """Train on every function of one project, test on every function of another."""
    if train_project == test_project:
        raise SplitError(f"train and test project must differ, both are {train_project!r}")

    available = {r.project for r in records}
    for project in (train_project, test_project):
        if project not in available:
            raise UnknownProjectError(project, available)

    train = [r.id for r in records if r.project == train_project]
    test = [r.id for r in records if r.project == test_project]
    return SplitResult(
        train_ids=train,
        val_ids=[],
        test_ids=test,
        seed=0,
        kind=CROSS_PROJECT,
        train_project=train_project,
        test_project=test_project,
        eligible_ids=sorted(train + test),
    )


def split_summary(records: Sequence[FunctionRecord], split: SplitResult) -> Dict:
    """Sizes and positive rates of each partition."""
    labels = {r.id: r.label for r in records}
    summary = {'kind': split.kind}
    for name, ids in (('train', split.train_ids), ('val', split.val_ids), ('test', split.test_ids)):
        positives = sum(labels[i] for i in ids)
        summary[name] = {
            'n': len(ids),
            'positives': positives,
            'positive_rate': positives / len(ids) if ids else 0.0,
        }
    return summary


def corpus_statistics(records: Sequence[FunctionRecord]) -> pd.DataFrame:
    """
    Per-project function counts and positive rates.

    Returns:
        DataFrame with columns project, n_functions, n_vulnerable,
        positive_rate; projects sorted by name, followed by an 'ALL' row
    """
    columns = ['project', 'n_functions', 'n_vulnerable', 'positive_rate']
    if not records:
        return pd.DataFrame(columns=columns)

    df = pd.DataFrame({'project': [r.project for r in records], 'label': [r.label for r in records]})
    per_project = (
        df.groupby('project', sort=True)['label']
        .agg(n_functions='count', n_vulnerable='sum')
        .reset_index()
    )
    total = pd.DataFrame([{
        'project': 'ALL',
        'n_functions': len(df),
        'n_vulnerable': int(df['label'].sum()),
    }])
    stats = pd.concat([per_project, total], ignore_index=True)
    stats['positive_rate'] = stats['n_vulnerable'] / stats['n_functions']
    return stats[columns]
