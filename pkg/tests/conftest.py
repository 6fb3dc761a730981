"""Shared fixtures for the triage test suite."""

import json

import pytest

from src.services.corpus import FunctionRecord, load_dataset
from src.services.synthetic import generate_corpus, write_corpus

WORKED_EXAMPLE = (
    "int f(int a, int b) {\n"
    "  // add\n"
    "  if (a && b) {\n"
    "    return a + b;\n"
    "  }\n"
    "  return 0;\n"
    "}"
)


@pytest.fixture
def worked_example():
    """Seven-line function with one comment-only line."""
    return WORKED_EXAMPLE


@pytest.fixture
def write_json(tmp_path):
    """Write a Python object as JSON under tmp_path and return the path."""
    def _write(data, name='data.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path
    return _write


@pytest.fixture
def make_records():
    """Build FunctionRecords from (project, label) pairs."""
    def _make(pairs, source="int f(void) { return 0; }"):
        return [
            FunctionRecord(id=i, project=project, commit='', label=label, source=source)
            for i, (project, label) in enumerate(pairs)
        ]
    return _make


@pytest.fixture(scope='session')
def synthetic_path(tmp_path_factory):
    """The bundled 200-function synthetic corpus written to disk."""
    path = tmp_path_factory.mktemp('corpus') / 'synthetic.json'
    return write_corpus(generate_corpus(n=200, seed=7), path)


@pytest.fixture(scope='session')
def synthetic_records(synthetic_path):
    return load_dataset(synthetic_path)
