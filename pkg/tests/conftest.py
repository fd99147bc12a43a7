"""Shared fixtures for the test suite; plain builders live in corpus.py."""

from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
