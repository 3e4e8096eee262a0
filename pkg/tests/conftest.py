import numpy as np
import pytest

from svcongest.game import CostPolynomial, make_game
from svcongest.instances import GeneratorParams, generate


def rel_close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def random_poly(rng, d):
    coeffs = rng.uniform(0, 2, size=d + 1)
    coeffs[-1] = rng.uniform(0.1, 2)
    return CostPolynomial(tuple(coeffs))


def random_users(rng, size, lo=0.1, hi=5.0):
    return [(i, float(w)) for i, w in enumerate(rng.uniform(lo, hi, size=size))]


def random_game(seed, n=None, d=None, strategies=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 5))
    resources = int(rng.integers(2, 5))
    strategies = strategies or int(rng.integers(1, min(4, 2**resources - 1) + 1))
    return generate(
        GeneratorParams(
            n=n,
            resources=resources,
            strategies=strategies,
            strategy_size=(1, min(2, resources)),
            weight_range=(0.5, 4.0),
            degree=int(rng.integers(0, 4)) if d is None else d,
            coeff_range=(0.0, 1.0),
            seed=seed,
        )
    )


@pytest.fixture
def two_player_shared():
    """Players of weight 1 and 2 on one resource with c(x) = x^2."""
    return make_game([1, 2], [[[0]], [[0]]], [[0, 0, 1]])


@pytest.fixture
def parallel_links():
    """Two unit-weight players, two parallel links with c(x) = x."""
    return make_game([1, 1], [[[0], [1]], [[0], [1]]], [[0, 1], [0, 1]])
