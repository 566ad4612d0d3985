import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mahlerkit import MahlerEquation, Polynomial  # noqa: E402
from mahlerkit.regular import LinearRepresentation  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture
def fredholm():
    """F = x + F(x^2): p = x, a = (-1, 1), f(0) = 0."""
    return MahlerEquation(2, (-1, 1), Polynomial([0, 1]), (0,))


@pytest.fixture
def thue_morse_eq():
    """F(x) = (1 - x) F(x^2), F(0) = 1."""
    return MahlerEquation(2, (-1, Polynomial([1, -1])), 0, (1,))


@pytest.fixture
def stern_rep():
    return LinearRepresentation(2, (0, 1), (((1, 1), (0, 1)), ((1, 0), (1, 1))), (1, 0))


@pytest.fixture
def thue_morse_rep():
    return LinearRepresentation(2, (0, 1), (((1, 0), (0, 1)), ((-1, 0), (1, 1))), (1, 0))


@pytest.fixture
def data_dir():
    return DATA
