"""Comment stripping, regex tokenization, n-grams and identifier renaming for C source."""

import re
from typing import Iterable, List

# Longest operators first so alternation behaves as maximal munch
MULTI_CHAR_OPERATORS = (
    '<<=', '>>=', '...',
    '->', '++', '--', '<<', '>>', '<=', '>=', '==', '!=', '&&', '||',
    '+=', '-=', '*=', '/=', '%=', '&=', '|=', '^=',
)

C_KEYWORDS = frozenset({
    'auto', 'break', 'case', 'char', 'const', 'continue', 'default', 'do',
    'double', 'else', 'enum', 'extern', 'float', 'for', 'goto', 'if',
    'int', 'long', 'register', 'return', 'short', 'signed', 'sizeof', 'static',
    'struct', 'switch', 'typedef', 'union', 'unsigned', 'void', 'volatile', 'while',
    'inline', 'restrict',
})

DEFAULT_PLACEHOLDER = 'ID'

IDENTIFIER_PATTERN = r'[A-Za-z_][A-Za-z0-9_]*'

TOKEN_RE = re.compile(
    '|'.join(re.escape(op) for op in MULTI_CHAR_OPERATORS)
    + r'|' + IDENTIFIER_PATTERN
    + r'|[0-9][0-9A-Za-z_.]*'
    + r'|\S'
)

IDENTIFIER_RE = re.compile(IDENTIFIER_PATTERN)

# Identifier runs that start a token; the tail of `0x1F` or `10UL` is not one
RENAME_RE = re.compile(r'(?<![A-Za-z0-9_])' + IDENTIFIER_PATTERN)

_CODE, _LINE_COMMENT, _BLOCK_COMMENT, _STRING, _CHAR = range(5)


def strip_comments(source: str) -> str:
    """
    Blank out // and /* */ comments.

    Comment characters become spaces, newlines inside block comments are
    kept, so the output has the same length and line structure as the
    input. Delimiters inside string and character literals are ignored.
    """
    out = list(source)
    state = _CODE
    i = 0
    n = len(source)

    while i < n:
        c = source[i]

        if state == _CODE:
            nxt = source[i + 1] if i + 1 < n else ''
            if c == '/' and nxt == '/':
                state = _LINE_COMMENT
                out[i] = out[i + 1] = ' '
                i += 2
                continue
            if c == '/' and nxt == '*':
                state = _BLOCK_COMMENT
                out[i] = out[i + 1] = ' '
                i += 2
                continue
            if c == '"':
                state = _STRING
            elif c == "'":
                state = _CHAR

        elif state == _LINE_COMMENT:
            if c == '\n':
                state = _CODE
            else:
                out[i] = ' '

        elif state == _BLOCK_COMMENT:
            if c == '*' and i + 1 < n and source[i + 1] == '/':
                out[i] = out[i + 1] = ' '
                state = _CODE
                i += 2
                continue
            if c != '\n':
                out[i] = ' '

        else:
            quote = '"' if state == _STRING else "'"
            if c == '\\':
                # Skip the escaped character
                i += 2
                continue
            if c == quote or c == '\n':
                state = _CODE

        i += 1

    return ''.join(out)


def tokenize(source: str) -> List[str]:
    """Split source into operator, identifier, number and punctuation lexemes; case is preserved."""
    return TOKEN_RE.findall(source)


def ngrams(tokens: List[str], n_min: int = 1, n_max: int = 1) -> List[str]:
    """All contiguous n-grams for n in [n_min, n_max], tokens joined by one space."""
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"invalid n-gram range ({n_min}, {n_max})")

    features = []
    for n in range(n_min, n_max + 1):
        if n == 1:
            features.extend(tokens)
            continue
        for start in range(len(tokens) - n + 1):
            features.append(' '.join(tokens[start:start + n]))
    return features


def rename_identifiers(
    source: str,
    keywords: Iterable[str] = C_KEYWORDS,
    placeholder: str = DEFAULT_PLACEHOLDER
) -> str:
    """
    Replace every identifier that is not a keyword with the placeholder.

    Plain regex substitution: identifiers inside comments and string
    literals are replaced too.
    """
    keywords = frozenset(keywords)
    return RENAME_RE.sub(lambda m: m.group(0) if m.group(0) in keywords else placeholder, source)
