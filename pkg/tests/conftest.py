import random
from pathlib import Path

import pytest

from coinv.algebra.abelian import FinAbGroup

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240607)


@pytest.fixture
def z2z2() -> FinAbGroup:
    return FinAbGroup([2, 2])


@pytest.fixture
def z2z4() -> FinAbGroup:
    return FinAbGroup([2, 4])
