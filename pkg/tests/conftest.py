"""
Test configuration shared by all ORBBuf tests.
"""

import os
import sys

import pytest

# Add the project root to the path so tests can import the src package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from src import config
from src.multiprocessing import reset_process_stats


@pytest.fixture(autouse=True)
def builtin_defaults(monkeypatch):
    """Ignore ORBBUF_* variables and .env files of the developer machine."""
    monkeypatch.setattr(config, 'DEFAULTS', dict(config.BUILTIN_DEFAULTS))
    yield


@pytest.fixture(autouse=True)
def clean_process_state():
    """Close figures left open by a failed test and reset pool counters."""
    yield
    plt.close('all')
    reset_process_stats()
