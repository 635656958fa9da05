import math

import numpy as np
import pytest

from markedmzi import elements

USD_GRID = np.radians(np.linspace(22.5, 45.0, 16))
FULL_GRID = np.radians(np.linspace(0.0, 45.0, 31))
ALPHA_GRID = np.linspace(0.0, 2 * math.pi, 101)


def random_unitary(rng):
    """Random 2x2 unitary built from wave plates and phase shifters."""
    a, b, c, d = rng.uniform(0, 2 * math.pi, size=4)
    return elements.hwp(a) @ elements.phase_shifter(b) @ elements.hwp(c) @ elements.phase_shifter(d)


def random_ket(rng, n=2):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
