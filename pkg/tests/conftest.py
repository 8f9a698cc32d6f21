from __future__ import annotations

import numpy as np
import pytest

from spinlab.exact import ExactArray


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spinor(rng, dim, batch=None, q=3):
    shape = (dim,) if batch is None else (dim, batch)
    re = rng.integers(-3 * q, 3 * q + 1, size=shape).astype(object)
    im = rng.integers(-3 * q, 3 * q + 1, size=shape).astype(object)
    return ExactArray(re, im, q)
