"""Tests for configuration and logging setup."""

import logging
from logging.handlers import RotatingFileHandler
from unittest.mock import patch

import pytest

from src.config import Config
from src.utils.logger import setup_logging


def test_default_config_is_valid():
    """Test that shipped defaults pass validation."""
    assert Config.validate() is True


def test_defaults():
    """Test the experiment defaults."""
    assert Config.SPLIT_FRACTIONS == (0.8, 0.1, 0.1)
    assert Config.MIN_DF >= 1
    assert 0 < Config.FRACTION <= 1


def test_validate_collects_every_error():
    """Test that all problems are reported together."""
    with patch.object(Config, 'FRACTION', 0.0), patch.object(Config, 'C', 0.0), \
            patch.object(Config, 'LOG_LEVEL', 'CHATTY'):
        with pytest.raises(ValueError) as exc_info:
            Config.validate()

    message = str(exc_info.value)
    assert message.startswith('Configuration errors:')
    assert 'VULTRIAGE_FRACTION' in message
    assert 'VULTRIAGE_C ' in message
    assert 'VULTRIAGE_LOG_LEVEL' in message


def test_setup_logging_handlers(tmp_path):
    """Test rotating file and console handlers."""
    root = logging.getLogger()
    saved_handlers, saved_level = root.handlers[:], root.level
    log_file = tmp_path / 'logs' / 'run.log'

    try:
        setup_logging(level='debug', log_file=log_file)
        logging.getLogger('src.test').info('hello')

        kinds = [type(h) for h in root.handlers]
        assert RotatingFileHandler in kinds
        assert logging.StreamHandler in kinds
        assert root.level == logging.DEBUG
        for handler in root.handlers:
            handler.flush()
        assert 'hello' in log_file.read_text(encoding='utf-8')
    finally:
        for handler in root.handlers:
            handler.close()
        root.handlers[:] = saved_handlers
        root.setLevel(saved_level)


def test_setup_logging_leaves_named_loggers_alone(tmp_path):
    """Test that only the root logger is reconfigured."""
    root = logging.getLogger()
    saved_handlers, saved_level = root.handlers[:], root.level
    logging.getLogger('src.services.model')

    def named_levels():
        return {
            name: item.level
            for name, item in logging.root.manager.loggerDict.items()
            if isinstance(item, logging.Logger)
        }

    before = named_levels()
    try:
        setup_logging(level='info', log_file=tmp_path / 'run.log')

        assert named_levels() == before
    finally:
        for handler in root.handlers:
            handler.close()
        root.handlers[:] = saved_handlers
        root.setLevel(saved_level)
