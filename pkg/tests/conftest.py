import os

import numpy as np
import pytest

# Set environment variables before any sparq_bench imports: constants and the
# package logger read them at import time
os.environ.setdefault("POWERTOOLS_SERVICE_NAME", "test")
os.environ.setdefault("POWERTOOLS_LOG_LEVEL", "ERROR")
os.environ.setdefault("SPARQ_PROGRESS", "0")
os.environ.setdefault("SPARQ_WORKERS", "1")


def pytest_configure(config):
    """
    Pytest hook that runs before test collection.
    Ensures environment variables are set before any sparq_bench modules are imported.
    """
    os.environ["POWERTOOLS_SERVICE_NAME"] = "test"
    os.environ["POWERTOOLS_LOG_LEVEL"] = "ERROR"
    os.environ["SPARQ_PROGRESS"] = "0"
    os.environ["SPARQ_WORKERS"] = "1"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
