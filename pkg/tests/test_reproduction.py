"""
Reproduction checks on the full Devign corpus.

Skipped unless VULTRIAGE_DEVIGN points at a Devign-format file.
"""

import os

import pytest

from src.services.corpus import cross_project_split, load_dataset, stratified_split
from src.services.pipeline import CROSS, RANDOM, ExperimentConfig, run_experiment
from src.services.report import rename_deltas
from src.services.vectorize import VARIANTS

DEVIGN = os.getenv('VULTRIAGE_DEVIGN')

pytestmark = pytest.mark.skipif(not DEVIGN, reason="VULTRIAGE_DEVIGN not set")

RANDOM_PR_AUC = {'metrics': 0.638, 'tok-u': 0.634, 'tok-ub': 0.638, 'mix': 0.642}
RANDOM_RECALL_AT_K = {'metrics': 0.156, 'tok-u': 0.154, 'tok-ub': 0.158, 'mix': 0.161}
CROSS_PR_AUC = {'metrics': 0.434, 'tok-u': 0.423, 'tok-ub': 0.423, 'mix': 0.436}
RENAME_PR_AUC_DELTA = {
    RANDOM: {'metrics': -0.088, 'tok-u': -0.108, 'tok-ub': -0.111, 'mix': -0.093},
    CROSS: {'metrics': 0.028, 'tok-u': 0.021, 'tok-ub': 0.010, 'mix': 0.023},
}


@pytest.fixture(scope='module')
def records():
    return load_dataset(DEVIGN)


@pytest.fixture(scope='module')
def rows(records):
    config = ExperimentConfig(
        settings=[RANDOM, CROSS], train_project='FFmpeg', test_project='qemu', rename_test=True
    )
    return run_experiment(config, records)


def _positive_rate(records, ids):
    return sum(records[i].label for i in ids) / len(ids)


def test_random_split_counts(records):
    """Test 21,854 / 2,732 with 45.6% positives on both sides."""
    split = stratified_split(records, seed=42)

    assert abs(len(split.train_ids) - 21854) <= 2
    assert abs(len(split.test_ids) - 2732) <= 2
    assert _positive_rate(records, split.train_ids) == pytest.approx(0.456, abs=0.002)
    assert _positive_rate(records, split.test_ids) == pytest.approx(0.456, abs=0.002)


def test_cross_split_counts(records):
    """Test 9,769 FFmpeg and 17,549 QEMU functions."""
    split = cross_project_split(records, 'FFmpeg', 'qemu')

    assert abs(len(split.train_ids) - 9769) <= 2
    assert abs(len(split.test_ids) - 17549) <= 2
    assert _positive_rate(records, split.train_ids) == pytest.approx(0.510, abs=0.002)
    assert _positive_rate(records, split.test_ids) == pytest.approx(0.426, abs=0.002)


def test_random_split_quality(rows):
    """Test PR-AUC and Recall@10% of the random setting."""
    for row in rows:
        if row.setting == RANDOM and not row.renamed:
            assert row.pr_auc == pytest.approx(RANDOM_PR_AUC[row.variant], abs=0.03)
            assert row.recall_at_k == pytest.approx(RANDOM_RECALL_AT_K[row.variant], abs=0.02)


def test_cross_project_quality(rows):
    """Test PR-AUC of the FFmpeg to QEMU setting."""
    for row in rows:
        if row.setting == CROSS and not row.renamed:
            assert row.pr_auc == pytest.approx(CROSS_PR_AUC[row.variant], abs=0.03)


def test_renaming_deltas(rows):
    """Test the sign and size of the renaming PR-AUC deltas."""
    deltas = rename_deltas(rows)

    assert len(deltas) == 2 * len(VARIANTS)
    for delta in deltas:
        if delta.setting == RANDOM:
            assert delta.pr_auc_delta < 0
        else:
            assert delta.pr_auc_delta > 0
        assert abs(delta.pr_auc_delta - RENAME_PR_AUC_DELTA[delta.setting][delta.variant]) <= 0.05


def test_efficiency(rows):
    """Test order-of-magnitude timings at one job."""
    by_variant = {row.variant: row for row in rows if row.setting == RANDOM and not row.renamed}

    assert rows[0].feat_time_s <= 60
    for row in by_variant.values():
        assert row.train_time_s <= 120
        assert row.infer_time_s <= 30
    assert by_variant['tok-ub'].train_time_s > by_variant['tok-u'].train_time_s
