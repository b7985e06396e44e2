import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_bounds.bounds import TAG_DELTA, TAG_MI
from causal_bounds.errors import ValidationError
from causal_bounds.model import honest, honest_kernel, interventional, is_compatible
from causal_bounds.oracle import (
    WORKERS_ENV,
    MuMode,
    NuMode,
    SamplerConfig,
    brute_force_min_functional,
    interventional_cloud,
    lp_slices,
    sample_cloud,
    sample_compatible_model,
    sample_conforming_mu,
    substream,
)

from conftest import random_pi

DIAG = np.diag([0.5, 0.5])
NOISY = np.array([[0.45, 0.05], [0.05, 0.45]])


class TestConformingMu:
    def test_k1(self, rng):
        pi = random_pi(rng, 3)
        mu = sample_conforming_mu(pi, 1, rng)
        np.testing.assert_array_equal(mu[:, 0], pi.sum(axis=1))

    def test_determinism(self):
        pi = np.full((3, 3), 1 / 9)
        a = sample_conforming_mu(pi, 2, substream(5, 3), MuMode.VERTEX_BIASED)
        b = sample_conforming_mu(pi, 2, substream(5, 3), MuMode.VERTEX_BIASED)
        np.testing.assert_array_equal(a, b)
        c = sample_conforming_mu(pi, 2, substream(5, 4), MuMode.VERTEX_BIASED)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("mode", list(MuMode))
    def test_marginals(self, rng, mode):
        pi = random_pi(rng, 3)
        for _ in range(10_000 // 2):
            mu = sample_conforming_mu(pi, 2, rng, mode)
            assert np.max(np.abs(mu.sum(axis=1) - pi.sum(axis=1))) <= 1e-12

    def test_vertex_biased_hits_faces(self, rng):
        hits = sum(
            np.count_nonzero(sample_conforming_mu(DIAG, 2, rng, MuMode.VERTEX_BIASED)) == 2 for _ in range(500)
        )
        assert hits > 50

    def test_bad_k(self, rng):
        with pytest.raises(ValidationError):
            sample_conforming_mu(DIAG, 0, rng)


class TestCompatibleModel:
    def test_step_zero_is_honest(self, rng):
        pi = random_pi(rng, 3)
        m = sample_compatible_model(pi, 2, rng, NuMode.HONEST_PERTURBED, step=0.0)
        np.testing.assert_allclose(m.nu, honest_kernel(pi, 2), atol=1e-15)

    def test_vertex_structure(self, rng):
        for _ in range(50):
            m = sample_compatible_model(DIAG, 2, rng, NuMode.RANDOM_OBJECTIVE_VERTEX, mu=DIAG)
            for x in range(2):
                np.testing.assert_allclose(m.nu[:, x, x], np.eye(2)[x], atol=1e-12)
                off = m.nu[:, x, 1 - x]
                assert np.all(np.isclose(off, 0, atol=1e-12) | np.isclose(off, 1, atol=1e-12))

    @pytest.mark.parametrize("mode", list(NuMode))
    def test_compatible(self, rng, mode):
        worst = 0.0
        for _ in range(30):
            pi = random_pi(rng, 3)
            for _ in range(100):
                m = sample_compatible_model(pi, 2, rng, mode, mu_mode=MuMode.VERTEX_BIASED)
                worst = max(worst, is_compatible(m, pi).residual)
        assert worst <= 1e-9

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 3))
    def test_compatible_property(self, seed, n, k):
        rng = np.random.default_rng(seed)
        pi = random_pi(rng, n, alpha=0.5)
        m = sample_compatible_model(pi, k, rng, NuMode.MIXED, mu_mode=MuMode.VERTEX_BIASED)
        assert is_compatible(m, pi).residual <= 1e-9


class TestCloud:
    def test_perfect_uniform(self):
        cfg = SamplerConfig(seed=1, count=2000)
        summary, _ = interventional_cloud(DIAG, 2, cfg, functionals=[(1, 1)])
        name = "ell=(1,1)"
        assert summary.functional_min[name] >= 1.0 - 1e-9
        assert summary.functional_min[name] <= 1.0 + 1e-6
        assert not summary.violations()

    def test_k1_zero_diameter(self, rng):
        pi = random_pi(rng, 3)
        summary, raw = interventional_cloud(pi, 1, SamplerConfig(count=50), keep_raw=True)
        assert summary.diameter <= 1e-12
        for s in raw:
            np.testing.assert_allclose(s.zeta, honest(pi), atol=1e-12)

    def test_noisy_k1(self):
        summary, _ = interventional_cloud(NOISY, 1, SamplerConfig(count=100), functionals=[(1, 1)])
        assert summary.functional_min["ell=(1,1)"] == pytest.approx(1.8, abs=1e-12)
        assert summary.functional_max["ell=(1,1)"] == pytest.approx(1.8, abs=1e-12)

    def test_deviation_slack(self, rng):
        pi = random_pi(rng, 3)
        summary, _ = interventional_cloud(pi, 3, SamplerConfig(seed=3, count=500))
        assert summary.bound_slack[TAG_DELTA] >= -1e-9
        assert summary.bound_slack[TAG_MI] >= -1e-9
        assert summary.worst_residual <= 1e-9

    def test_deterministic(self):
        cfg = SamplerConfig(seed=9, count=40)
        a = sample_cloud(DIAG, 2, cfg)
        b = sample_cloud(DIAG, 2, cfg)
        for s, t in zip(a, b):
            np.testing.assert_array_equal(s.zeta, t.zeta)

    def test_parallel_matches_serial(self, monkeypatch):
        cfg = SamplerConfig(seed=4, count=30, nu_per_mu=2)
        serial = sample_cloud(DIAG, 2, cfg)
        monkeypatch.setenv(WORKERS_ENV, "3")
        parallel = sample_cloud(DIAG, 2, cfg)
        assert len(serial) == len(parallel) == 60
        for s, t in zip(serial, parallel):
            assert (s.index, s.draw) == (t.index, t.draw)
            np.testing.assert_array_equal(s.zeta, t.zeta)

    def test_config_shape_check(self):
        with pytest.raises(ValidationError):
            sample_cloud(DIAG, 2, SamplerConfig(n=3))
        with pytest.raises(ValidationError):
            SamplerConfig(count=0)


class TestBruteForce:
    def test_perfect_uniform(self):
        v = brute_force_min_functional(DIAG, 2, [1, 1], SamplerConfig(count=200))
        assert v == pytest.approx(1.0, abs=1e-6)

    def test_k1(self, rng):
        pi = random_pi(rng, 3)
        ell = rng.uniform(size=(3, 3))
        v = brute_force_min_functional(pi, 1, ell, SamplerConfig(count=5))
        assert v == pytest.approx(float(np.sum(ell * honest(pi))), abs=1e-9)

    def test_zero_functional(self, rng):
        pi = random_pi(rng, 3)
        assert brute_force_min_functional(pi, 2, np.zeros(3), SamplerConfig(count=5)) == pytest.approx(0.0, abs=1e-12)

    def test_slices_below_cloud(self, rng):
        pi = random_pi(rng, 3)
        for r in lp_slices(pi, 2, [1, 0.5, 2], SamplerConfig(seed=2, count=100, nu_per_mu=3)):
            assert r.lp_value <= r.cloud_min + 1e-6
