"""Five cheap per-function code metrics computed on comment-stripped source."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.services.lexer import strip_comments, tokenize

logger = logging.getLogger(__name__)

DECISION_POINTS = frozenset({'if', 'for', 'while', 'case', '&&', '||', '?'})

METRIC_NAMES = ('nloc', 'ccn', 'token_count', 'max_depth', 'param_count')
CSV_COLUMNS = ('id', 'nloc', 'ccn', 'tokens', 'depth', 'params')


@dataclass(frozen=True)
class MetricVector:
    """NLOC, approximate cyclomatic complexity, token count, brace depth and parameter count."""
    nloc: int
    ccn: int
    token_count: int
    max_depth: int
    param_count: int

    def as_tuple(self) -> Tuple[int, int, int, int, int]:
        return astuple(self)


def nloc(stripped: str) -> int:
    """Number of lines holding at least one non-whitespace character."""
    return sum(1 for line in stripped.split('\n') if line.strip())


def cyclomatic_approx(stripped: str) -> int:
    """1 + lexical decision points (if/for/while/case, &&, ||, ?)."""
    return 1 + sum(1 for token in tokenize(stripped) if token in DECISION_POINTS)


def token_count(stripped: str) -> int:
    return len(tokenize(stripped))


def max_brace_depth(stripped: str) -> int:
    """Deepest {...} nesting; braces in string/char literals are skipped and depth never drops below 0."""
    depth = 0
    deepest = 0
    quote = None
    i = 0
    n = len(stripped)

    while i < n:
        c = stripped[i]
        if quote:
            if c == '\\':
                i += 2
                continue
            if c == quote or c == '\n':
                quote = None
        elif c in ('"', "'"):
            quote = c
        elif c == '{':
            depth += 1
            deepest = max(deepest, depth)
        elif c == '}':
            depth = max(depth - 1, 0)
        i += 1

    return deepest


def param_count(stripped: str) -> int:
    """
    Count parameters of the first parenthesised group.

    Top-level commas + 1; an empty group or a lone `void` counts 0.
    Commas in nested parentheses (function pointers) are ignored.
    """
    start = stripped.find('(')
    if start < 0:
        return 0

    depth = 0
    commas = 0
    end = len(stripped)
    for i in range(start + 1, len(stripped)):
        c = stripped[i]
        if c == '(':
            depth += 1
        elif c == ')':
            if depth == 0:
                end = i
                break
            depth -= 1
        elif c == ',' and depth == 0:
            commas += 1

    inner = stripped[start + 1:end].strip()
    if not inner or inner == 'void':
        return 0
    return commas + 1


def extract_metrics(source: str) -> MetricVector:
    """Strip comments, then compute all five metrics with linear scans."""
    stripped = strip_comments(source)
    return MetricVector(
        nloc=nloc(stripped),
        ccn=cyclomatic_approx(stripped),
        token_count=token_count(stripped),
        max_depth=max_brace_depth(stripped),
        param_count=param_count(stripped),
    )


def extract_all(sources: Sequence[str], jobs: int = 1) -> List[MetricVector]:
    """
    Metrics for many functions, returned in input order.

    With jobs > 1 a process pool is used; results are still collected in order.
    """
    if jobs <= 1 or len(sources) < 2:
        return [extract_metrics(s) for s in sources]

    chunksize = max(1, len(sources) // (jobs * 8))
    logger.debug(f"Extracting metrics for {len(sources)} functions with {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(extract_metrics, sources, chunksize=chunksize))


def metrics_matrix(rows: Sequence[MetricVector]) -> np.ndarray:
    """Stack metric vectors into an (n, 5) float array."""
    if not rows:
        return np.zeros((0, len(METRIC_NAMES)), dtype=np.float64)
    return np.array([row.as_tuple() for row in rows], dtype=np.float64)


def metrics_frame(ids: Sequence[int], rows: Sequence[MetricVector]) -> pd.DataFrame:
    """Per-function metrics as a DataFrame with the `metrics` CLI columns."""
    data = [(i,) + row.as_tuple() for i, row in zip(ids, rows)]
    return pd.DataFrame(data, columns=list(CSV_COLUMNS))
