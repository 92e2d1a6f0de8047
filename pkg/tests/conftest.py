import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def central_differences(f, x, h=1e-3, richardson=False):
    """First three derivatives of a scalar f at x by central differences.

    With ``richardson`` the O(h²) error is cancelled using steps h and h/2.
    """
    if richardson:
        coarse = central_differences(f, x, h)
        fine = central_differences(f, x, h / 2)
        return tuple((4 * b - a) / 3 for a, b in zip(coarse, fine))
    f0 = f(x)
    fp, fm = f(x + h), f(x - h)
    fp2, fm2 = f(x + 2 * h), f(x - 2 * h)
    d1 = (fp - fm) / (2 * h)
    d2 = (fp - 2 * f0 + fm) / h**2
    d3 = (fp2 - 2 * fp + 2 * fm - fm2) / (2 * h**3)
    return f0, d1, d2, d3


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
