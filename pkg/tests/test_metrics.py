"""Tests for the five per-function code metrics."""

from hypothesis import given, settings
from hypothesis import strategies as st

from src.services.lexer import strip_comments
from src.services.metrics import (
    CSV_COLUMNS,
    MetricVector,
    cyclomatic_approx,
    extract_all,
    extract_metrics,
    max_brace_depth,
    metrics_frame,
    metrics_matrix,
    nloc,
    param_count,
    token_count,
)

# (text, tokens, decision points)
SIMPLE_STATEMENTS = [
    ('x = 1;', 4, 0),
    ('y += x;', 4, 0),
    ('return x ? 1 : 0;', 7, 1),
    ('s = "{ if && }";', 9, 2),
]
BLOCK_HEADERS = [
    ('if (a && b) {', 7, 2),
    ('while (n--) {', 6, 1),
    ('for (i = 0; i < n; i++) {', 14, 1),
    ('if (a || b || c) {', 9, 3),
]
NOISE_LINES = ['', '   ', '// if (x) { && }', '/* while { */']


@st.composite
def c_functions(draw):
    """A small C function together with hand-counted metrics."""
    counts = {'nloc': 0, 'ccn': 1, 'tokens': 0, 'depth': 1}
    lines = []

    n_params = draw(st.integers(0, 4))
    if n_params:
        params = ', '.join(f'int p{i}' for i in range(n_params))
        param_tokens = 3 * n_params - 1
    else:
        params = draw(st.sampled_from(['', 'void']))
        param_tokens = 1 if params else 0

    def add(line, tokens=0, points=0, code=True):
        lines.append(line)
        counts['nloc'] += int(code)
        counts['tokens'] += tokens
        counts['ccn'] += points

    def block(level):
        indent = '  ' * level
        for _ in range(draw(st.integers(0, 3))):
            kind = draw(st.sampled_from(['simple', 'block', 'noise']))
            if kind == 'block' and level < 4:
                text, tokens, points = draw(st.sampled_from(BLOCK_HEADERS))
                add(indent + text, tokens, points)
                counts['depth'] = max(counts['depth'], level + 1)
                block(level + 1)
                add(indent + '}', 1)
            elif kind == 'noise':
                add(indent + draw(st.sampled_from(NOISE_LINES)), code=False)
            else:
                text, tokens, points = draw(st.sampled_from(SIMPLE_STATEMENTS))
                add(indent + text, tokens, points)

    add(f'static int f({params}) {{', 6 + param_tokens)
    block(1)
    add('}', 1)

    expected = MetricVector(
        nloc=counts['nloc'],
        ccn=counts['ccn'],
        token_count=counts['tokens'],
        max_depth=counts['depth'],
        param_count=n_params,
    )
    return '\n'.join(lines), expected


def test_worked_example(worked_example):
    """Test the seven-line example function."""
    assert extract_metrics(worked_example) == MetricVector(
        nloc=6, ccn=3, token_count=27, max_depth=2, param_count=2
    )


def test_nloc_examples():
    """Test non-blank line counting."""
    assert nloc('') == 0
    assert nloc('a\n\n  \nb') == 2


def test_cyclomatic_examples():
    """Test decision point counting."""
    assert cyclomatic_approx('x = 1;') == 1
    assert cyclomatic_approx('if (a && b) {}') == 3
    assert cyclomatic_approx('switch(x){case 1: case 2: break;}') == 3


def test_cyclomatic_ignores_substrings():
    """Test that iffy and format are not decision points."""
    assert cyclomatic_approx('iffy = format + whiley;') == 1


def test_token_count_examples():
    """Test token counting."""
    assert token_count('') == 0
    assert token_count('a+b') == 3


def test_max_brace_depth_examples():
    """Test nesting, clamping and literal braces."""
    assert max_brace_depth('{ { } }') == 2
    assert max_brace_depth('}{') == 1
    assert max_brace_depth('s="{{{";') == 0
    assert max_brace_depth("c = '{'; { }") == 1


def test_param_count_examples():
    """Test parameter counting on the first paren group."""
    assert param_count('int f(void) {}') == 0
    assert param_count('int f() {}') == 0
    assert param_count('int f(int a, int b) {}') == 2
    assert param_count('void g(int (*cb)(int,int), int n){}') == 2
    assert param_count('x = 1;') == 0


def test_param_count_unclosed_group():
    """Test that a missing ) counts to the end of input."""
    assert param_count('int f(int a, int b') == 2


@settings(max_examples=500, deadline=None)
@given(case=c_functions())
def test_metrics_match_hand_counts(case):
    """Test agreement with counts taken while generating the function."""
    source, expected = case
    assert extract_metrics(source) == expected


@settings(max_examples=500, deadline=None)
@given(case=c_functions())
def test_metrics_ignore_comments(case):
    """Test that stripping comments first changes nothing."""
    source, _ = case
    assert extract_metrics(source) == extract_metrics(strip_comments(source))


@settings(max_examples=200, deadline=None)
@given(case=c_functions(), positions=st.lists(st.integers(0, 50), max_size=5), blank=st.sampled_from(['', ' ', '\t  ']))
def test_metrics_ignore_blank_lines(case, positions, blank):
    """Test that inserting whitespace-only lines changes no metric."""
    source, expected = case
    lines = source.split('\n')
    for position in positions:
        lines.insert(min(position, len(lines)), blank)

    assert extract_metrics('\n'.join(lines)) == expected


@given(source=st.text(alphabet='ab(){};&|?\n ', min_size=1))
def test_ccn_at_least_one(source):
    """Test that complexity never drops below one."""
    assert cyclomatic_approx(source) >= 1


def test_extract_all_keeps_order_with_workers(worked_example):
    """Test that parallel extraction returns rows in input order."""
    sources = [worked_example, 'x = 1;', '', 'int g(int a) { if (a) { return 1; } }', '{ { { } } }']

    assert extract_all(sources, jobs=2) == [extract_metrics(s) for s in sources]


def test_metrics_frame(worked_example):
    """Test the metric CSV columns."""
    frame = metrics_frame([7], [extract_metrics(worked_example)])

    assert tuple(frame.columns) == CSV_COLUMNS
    assert frame.iloc[0].tolist() == [7, 6, 3, 27, 2, 2]


def test_metrics_matrix_empty():
    """Test that no rows give a (0, 5) matrix."""
    assert metrics_matrix([]).shape == (0, 5)
