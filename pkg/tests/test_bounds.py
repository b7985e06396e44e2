import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_bounds.bounds import (
    TAG_DIAGONAL,
    PinskerConstant,
    PinskerConstantWarning,
    correlation_distance,
    deviation_bound_delta,
    deviation_bound_mi,
    diagonal_bound,
    diagonal_dual_certificate,
    diagonal_functional,
    independence_excluded,
    mutual_information,
)
from causal_bounds.errors import DegenerateRow, EmptySupport, MarginalMismatch, ValidationError, ZeroMarginal
from causal_bounds.lp import solve_mu_program
from causal_bounds.model import CausalModel, honest, interventional

from conftest import conforming_mu, random_kernel, random_pi, swap_model

DIAG = np.diag([0.5, 0.5])
PROD = np.full((2, 2), 0.25)
UNIFORM3 = np.eye(3) / 3


def mi_oracle(mu):
    mu = np.asarray(mu, dtype=float)
    n, k = mu.shape
    mx = [sum(mu[x, u] for u in range(k)) for x in range(n)]
    mu_u = [sum(mu[x, u] for x in range(n)) for u in range(k)]
    total = 0.0
    for x in range(n):
        for u in range(k):
            if mu[x, u] > 0:
                total += mu[x, u] * (math.log(mu[x, u]) - math.log(mx[x]) - math.log(mu_u[u]))
    return total


def delta_oracle(mu):
    mu = np.asarray(mu, dtype=float)
    n, k = mu.shape
    mx = mu.sum(axis=1)
    mu_u = mu.sum(axis=0)
    return sum(abs(mu[x, u] - mx[x] * mu_u[u]) for x in range(n) for u in range(k))


@st.composite
def latent_joint(draw):
    n = draw(st.integers(1, 4))
    k = draw(st.integers(1, 4))
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=n * k, max_size=n * k))
    w = np.asarray(w).reshape(n, k)
    if w.sum() == 0:
        w[0, 0] = 1.0
    return w / w.sum()


class TestDiagonalBound:
    def test_perfect_uniform(self):
        rep = diagonal_bound(DIAG, [1, 1], 2)
        assert rep.value == 1.0
        assert rep.theorem == TAG_DIAGONAL
        assert rep.certificate["support_size"] == 2

    def test_singleton_support(self):
        pi = np.array([[0.3, 0.1], [0.2, 0.4]])
        rep = diagonal_bound(pi, [0.0, 2.5], 1)
        assert rep.value == pytest.approx(2.5 * 0.4)
        assert rep.certificate["witness_x"] == 1

    def test_n3_uniform(self):
        assert diagonal_bound(UNIFORM3, [1, 1, 1], 2).value == pytest.approx(1.5)

    def test_errors(self):
        with pytest.raises(EmptySupport):
            diagonal_bound(DIAG, [0, 0], 2)
        with pytest.raises(ValidationError):
            diagonal_bound(DIAG, [1, 1], 0)
        with pytest.raises(ValidationError):
            diagonal_functional([1, -1])

    def test_margin(self):
        rep = diagonal_bound(DIAG, [1, 1], 2).with_margin(1.25)
        assert rep.margin == pytest.approx(0.25)

    def test_below_lp_value(self, rng):
        # LP minimum over kernels never dips below the bound, for any conforming mu
        for _ in range(200):
            n, k = rng.integers(2, 4), rng.integers(1, 4)
            pi = random_pi(rng, n)
            ell = rng.uniform(0, 1, size=n) * (rng.uniform(size=n) < 0.8)
            if not np.any(ell > 0):
                ell[0] = 1.0
            b = diagonal_bound(pi, ell, k).value
            v = solve_mu_program(pi, conforming_mu(rng, pi, k), ell).value
            assert v >= b - 1e-9


class TestDualCertificate:
    def test_diag_mu(self):
        alpha, f = diagonal_dual_certificate(DIAG, DIAG, [1, 1])
        np.testing.assert_allclose(alpha, np.eye(2))
        assert f == pytest.approx(1.0)

    def test_product_mu(self):
        alpha, f = diagonal_dual_certificate(DIAG, PROD, [1, 1])
        np.testing.assert_allclose(alpha, 2 * np.eye(2))
        assert f == pytest.approx(2.0)

    def test_zero_weights(self, rng):
        pi = random_pi(rng, 3)
        alpha, f = diagonal_dual_certificate(pi, conforming_mu(rng, pi, 2), np.zeros(3))
        assert np.all(alpha == 0) and f == 0.0

    def test_degenerate_row(self):
        pi = np.array([[0.5, 0.5], [0.0, 0.0]])
        mu = np.array([[0.5, 0.5], [0.0, 0.0]])
        with pytest.raises(DegenerateRow):
            diagonal_dual_certificate(pi, mu, [1, 1])

    def test_sandwich(self, rng):
        # bound <= f(mu, alpha) <= LP value
        for _ in range(300):
            n, k = rng.integers(2, 5), rng.integers(1, 4)
            pi = random_pi(rng, n)
            mu = conforming_mu(rng, pi, k)
            ell = rng.uniform(0.1, 1, size=n)
            _, f = diagonal_dual_certificate(pi, mu, ell)
            assert f >= diagonal_bound(pi, ell, k).value - 1e-9
            assert f <= solve_mu_program(pi, mu, ell).value + 1e-9


class TestCorrelationDistance:
    @pytest.mark.parametrize("mu, expected", [(PROD, 0.0), (DIAG, 1.0), (np.outer([0.3, 0.7], [0.1, 0.5, 0.4]), 0.0)])
    def test_examples(self, mu, expected):
        assert correlation_distance(mu) == pytest.approx(expected, abs=1e-15)

    @settings(max_examples=200)
    @given(latent_joint())
    def test_against_oracle(self, mu):
        d = correlation_distance(mu)
        assert d == pytest.approx(delta_oracle(mu), abs=1e-12)
        assert -1e-15 <= d <= 2.0


class TestMutualInformation:
    def test_product(self):
        assert mutual_information(PROD) == 0.0

    def test_diag(self):
        assert mutual_information(DIAG) == pytest.approx(math.log(2), abs=1e-15)

    def test_mixed(self):
        mu = [[0.4, 0.1], [0.1, 0.4]]
        v = mutual_information(mu)
        assert 0 < v < math.log(2)
        assert v == pytest.approx(mi_oracle(mu), abs=1e-14)

    @settings(max_examples=200)
    @given(latent_joint())
    def test_against_oracle_and_pinsker(self, mu):
        i = mutual_information(mu)
        assert i == pytest.approx(mi_oracle(mu), abs=1e-12)
        assert correlation_distance(mu) <= math.sqrt(2 * i) + 1e-9


class TestDeviationBounds:
    def test_product_zero(self):
        pi = np.full((2, 2), 0.25)
        assert deviation_bound_delta(pi, PROD) == 0.0
        assert deviation_bound_mi(pi, PROD) == 0.0
        with pytest.warns(PinskerConstantWarning):
            assert deviation_bound_mi(pi, PROD, "paper") == 0.0

    def test_tight_hand_model(self):
        pi = np.full((2, 2), 0.25)
        assert deviation_bound_delta(pi, DIAG) == pytest.approx(2.0)
        # the swap model attains the bound against its own observed joint
        m = swap_model()
        dev = np.abs(interventional(m) - honest(DIAG)).sum()
        assert dev == pytest.approx(deviation_bound_delta(DIAG, DIAG), abs=1e-12)

    def test_pinsker_counterexample(self):
        delta = correlation_distance(DIAG)
        with pytest.warns(PinskerConstantWarning, match="not a valid upper bound"):
            stated = deviation_bound_mi(DIAG, DIAG, PinskerConstant.PAPER_STATED) * 0.5
        corrected = deviation_bound_mi(DIAG, DIAG) * 0.5
        assert stated == pytest.approx(math.sqrt(math.log(2) / 2))
        assert stated < delta
        assert corrected == pytest.approx(math.sqrt(2 * math.log(2)))
        assert corrected >= delta

    def test_corrected_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            deviation_bound_mi(DIAG, DIAG)

    def test_errors(self):
        with pytest.raises(ZeroMarginal):
            deviation_bound_delta([[1.0, 0.0], [0.0, 0.0]], [[0.5, 0.5], [0.0, 0.0]])
        with pytest.raises(MarginalMismatch):
            deviation_bound_delta(DIAG, [[0.6, 0.0], [0.0, 0.4]])

    def test_holds_on_random_models(self, rng):
        for _ in range(500):
            n, k = rng.integers(2, 4), rng.integers(1, 4)
            mu = rng.dirichlet(np.ones(n * k)).reshape(n, k)
            m = CausalModel(mu=mu, nu=random_kernel(rng, n, k))
            pi = np.einsum("xu,zxu->xz", m.mu, m.nu)
            dev = np.abs(interventional(m) - honest(pi)).sum()
            assert dev <= deviation_bound_delta(pi, mu) + 1e-9
            assert dev <= deviation_bound_mi(pi, mu) + 1e-9


class TestExclusion:
    def test_boundary(self):
        rep = independence_excluded(DIAG, 2)
        assert rep.bound.value == 1.0
        assert not rep.excluded
        assert rep.margin == 0.0

    def test_noisy_channel(self):
        rep = independence_excluded(np.array([[0.45, 0.05], [0.05, 0.45]]), 1)
        assert rep.excluded
        assert rep.bound.value == pytest.approx(1.8)
        assert rep.margin == pytest.approx(0.8)

    def test_n3(self):
        rep = independence_excluded(UNIFORM3, 2)
        assert rep.excluded and rep.bound.value == pytest.approx(1.5)

    def test_weighted(self):
        # independent zeta gives L = sum ell_x p_x <= max ell
        rep = independence_excluded(DIAG, 1, ell=[2.0, 1.0])
        assert rep.bound.value == pytest.approx(4 * 0.5)
        assert rep.margin == pytest.approx(0.0)
        assert not rep.excluded
