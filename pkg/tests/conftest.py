import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from phgsolve.settings import reset_settings  # noqa: E402

EXAMPLES = ROOT / "data" / "examples"


@pytest.fixture(autouse=True)
def _fresh_settings():
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def examples_dir():
    return EXAMPLES
