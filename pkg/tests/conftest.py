from fractions import Fraction

import numpy as np
import pytest

from causal_bounds.model import CausalModel


def random_pi(rng, n, alpha=1.0):
    """Observed joint with every marginal pi_x > 0."""
    while True:
        pi = rng.dirichlet(np.full(n * n, alpha)).reshape(n, n)
        if np.all(pi.sum(axis=1) > 1e-6):
            return pi


def random_mu(rng, n, k):
    return rng.dirichlet(np.ones(n * k)).reshape(n, k)


def conforming_mu(rng, pi, k):
    return pi.sum(axis=1)[:, None] * rng.dirichlet(np.ones(k), size=pi.shape[0])


def random_kernel(rng, n, k):
    # nu[z, x, u]: each (x, u) column a simplex vector over z
    return np.moveaxis(rng.dirichlet(np.ones(n), size=(n, k)), 2, 0)


def random_model(rng, n, k):
    return CausalModel(mu=random_mu(rng, n, k), nu=random_kernel(rng, n, k))


def swap_model():
    """pi = mu = diag(.5, .5); copy on the support, swap off it."""
    mu = np.diag([0.5, 0.5])
    nu = np.zeros((2, 2, 2))
    for x in range(2):
        nu[x, x, x] = 1.0
        nu[1 - x, x, 1 - x] = 1.0
    return CausalModel(mu=mu, nu=nu)


def rational_instance(rng, n, k, denom=12):
    """Conforming (pi, mu) with small-denominator rational entries."""
    cells = rng.multinomial(denom, np.ones(n * n) / (n * n)).reshape(n, n)
    while np.any(cells.sum(axis=1) == 0):
        cells = rng.multinomial(denom, np.ones(n * n) / (n * n)).reshape(n, n)
    pi = np.array([[Fraction(int(v), denom) for v in row] for row in cells], dtype=object)
    mu = np.empty((n, k), dtype=object)
    for x in range(n):
        px = sum(pi[x], Fraction(0))
        w = rng.integers(0, 4, size=k)
        if w.sum() == 0:
            w[0] = 1
        for u in range(k):
            mu[x, u] = px * Fraction(int(w[u]), int(w.sum()))
    return pi, mu


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
