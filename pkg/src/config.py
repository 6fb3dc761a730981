"""Configuration management for the vulnerability triage pipeline."""

import logging
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Application configuration."""

    # Base paths
    BASE_DIR = Path(__file__).resolve().parent.parent
    OUTPUT_DIR = BASE_DIR / os.getenv('VULTRIAGE_OUTPUT_DIR', 'reports')

    # Experiment defaults
    SEED = int(os.getenv('VULTRIAGE_SEED', '42'))
    MIN_DF = int(os.getenv('VULTRIAGE_MIN_DF', '2'))
    C = float(os.getenv('VULTRIAGE_C', '1.0'))
    TOL = float(os.getenv('VULTRIAGE_TOL', '1e-4'))
    MAX_ITER = int(os.getenv('VULTRIAGE_MAX_ITER', '2000'))
    FRACTION = float(os.getenv('VULTRIAGE_FRACTION', '0.10'))
    THRESHOLD = float(os.getenv('VULTRIAGE_THRESHOLD', '0.5'))
    JOBS = int(os.getenv('VULTRIAGE_JOBS', '1'))

    # Split protocol
    SPLIT_FRACTIONS = (0.8, 0.1, 0.1)
    TRAIN_PROJECT = os.getenv('VULTRIAGE_TRAIN_PROJECT', 'FFmpeg')
    TEST_PROJECT = os.getenv('VULTRIAGE_TEST_PROJECT', 'qemu')

    # Logging settings
    LOG_LEVEL = os.getenv('VULTRIAGE_LOG_LEVEL', 'INFO')
    LOG_FILE = BASE_DIR / os.getenv('VULTRIAGE_LOG_FILE', 'logs/vultriage.log')
    LOG_DIR = LOG_FILE.parent

    @classmethod
    def validate(cls):
        """Validate configuration values."""
        errors = []

        if not 0.0 < cls.FRACTION <= 1.0:
            errors.append(f"VULTRIAGE_FRACTION must be in (0, 1], got {cls.FRACTION}")

        if not 0.0 <= cls.THRESHOLD <= 1.0:
            errors.append(f"VULTRIAGE_THRESHOLD must be in [0, 1], got {cls.THRESHOLD}")

        if cls.C <= 0:
            errors.append(f"VULTRIAGE_C must be positive, got {cls.C}")

        if cls.TOL <= 0:
            errors.append(f"VULTRIAGE_TOL must be positive, got {cls.TOL}")

        if cls.MAX_ITER < 1:
            errors.append(f"VULTRIAGE_MAX_ITER must be at least 1, got {cls.MAX_ITER}")

        if cls.MIN_DF < 1:
            errors.append(f"VULTRIAGE_MIN_DF must be at least 1, got {cls.MIN_DF}")

        if cls.JOBS < 1:
            errors.append(f"VULTRIAGE_JOBS must be at least 1, got {cls.JOBS}")

        if not isinstance(logging.getLevelName(cls.LOG_LEVEL.upper()), int):
            errors.append(f"Invalid VULTRIAGE_LOG_LEVEL: {cls.LOG_LEVEL}")

        if errors:
            raise ValueError("Configuration errors:\n" + "\n".join(f"  - {e}" for e in errors))

        return True
