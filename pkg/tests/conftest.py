import os
import sys

import numpy as np
import pytest

# Add the repository root so that `config` and `src.*` import as in main.py
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.families import make_f_r, make_f_symmetric, make_f_three_crossing  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope='session')
def f_half():
    return make_f_r(0.5)


@pytest.fixture(scope='session')
def f_symmetric_half():
    return make_f_symmetric(0.5)


@pytest.fixture(scope='session')
def f_three():
    return make_f_three_crossing()


@pytest.fixture(autouse=True)
def _default_tolerance_scale(monkeypatch):
    monkeypatch.delenv('DVL_TOL_SCALE', raising=False)
