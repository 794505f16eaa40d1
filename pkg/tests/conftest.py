import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from core.config import reset_config  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    for name in ("SCK_THREADS", "SCK_SEED", "SCK_OUT_DIR", "SCK_N_MAX", "SCK_VERBOSE"):
        monkeypatch.delenv(name, raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
