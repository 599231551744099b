import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sflab.edge import edge_eigendata  # noqa: E402
from sflab.models import EdgeSymbolFamily, qwz_model  # noqa: E402

GAPPED_BUILTINS = (-3.0, -1.0, 1.0, 3.0)
ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def qwz_family(m: float) -> EdgeSymbolFamily:
    return EdgeSymbolFamily.from_model(qwz_model(m))


@lru_cache(maxsize=None)
def qwz_edge_data(m: float, N: int = 60, T: int = 200):
    return edge_eigendata(qwz_family(m), N, T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
