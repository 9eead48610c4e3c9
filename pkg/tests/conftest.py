import numpy as np
import pytest
from hypothesis import settings

from hypick.mobius import random_blaschke, random_disc_points

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def separated_points(rng, n, radius=0.8, min_beta=0.05):
    """Random disc points with pairwise hyperbolic distance at least min_beta."""
    from hypick.mobius import beta

    while True:
        Z = random_disc_points(rng, n, radius)
        if n < 2:
            return Z
        d = np.asarray(beta(Z[:, None], Z[None, :]))
        d[np.diag_indices(n)] = np.inf
        if d.min() >= min_beta:
            return Z


def interior_instance(rng, max_degree=6):
    """(f, Z, W) with f a Blaschke product of degree d and n <= d nodes."""
    d = int(rng.integers(1, max_degree + 1))
    n = int(rng.integers(1, d + 1))
    f = random_blaschke(rng, d, 0.9)
    Z = separated_points(rng, n)
    return f, Z, np.asarray(f.value(Z))
