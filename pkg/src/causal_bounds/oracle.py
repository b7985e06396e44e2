"""Monte-Carlo sampling of models compatible with an observed joint.

The sampler is the independent check for every closed-form bound: it
draws latent joints with the observed X-marginal, then kernels from the
polytope of compatible kernels, and records the induced interventional
matrices. Sampling can only falsify a bound, never prove one.

Randomness: one master seed; sample ``i`` draws from its own substream
``SeedSequence(seed, spawn_key=(i,))`` so serial and parallel runs agree
bit for bit.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .bounds import (
    TAG_DELTA,
    TAG_DIAGONAL,
    TAG_MI,
    deviation_bound_delta,
    deviation_bound_mi,
    diagonal_bound,
    diagonal_functional,
)
from .distributions import Kind, l1_distance, require_positive_marginals, validate
from .errors import SolverFailure, ValidationError
from .lp.mu_program import constraint_system, solve_mu_program
from .lp.simplex import LinearProgram, Status, solve_lp
from .model import CausalModel, honest, honest_kernel, interventional, is_compatible

WORKERS_ENV = "CAUSAL_BOUNDS_WORKERS"
SPARSIFY = 1e-3
VERTEX_ALPHA = 0.1
_ZERO = 1e-12


class MuMode(enum.Enum):
    DIRICHLET_INTERIOR = "interior"
    VERTEX_BIASED = "vertex-biased"


class NuMode(enum.Enum):
    HONEST_PERTURBED = "honest-perturbed"
    RANDOM_OBJECTIVE_VERTEX = "random-vertex"
    MIXED = "mixed"


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    n: int | None = None
    k: int | None = None
    count: int = 1000
    mu_mode: MuMode = MuMode.VERTEX_BIASED
    nu_mode: NuMode = NuMode.MIXED
    nu_per_mu: int = 1

    def __post_init__(self):
        if self.count < 1 or self.nu_per_mu < 1:
            raise ValidationError("count and nu_per_mu must be >= 1")
        object.__setattr__(self, "mu_mode", MuMode(self.mu_mode))
        object.__setattr__(self, "nu_mode", NuMode(self.nu_mode))

    def check(self, n: int, k: int) -> None:
        if self.n is not None and self.n != n:
            raise ValidationError(f"config n={self.n} but pi has n={n}")
        if self.k is not None and self.k != k:
            raise ValidationError(f"config k={self.k} but k={k} was requested")


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_conforming_mu(pi, k: int, rng: np.random.Generator, mode: MuMode | str = MuMode.DIRICHLET_INTERIOR) -> np.ndarray:
    """Latent joint with row sums exactly ``pi_x``.

    Interior mode draws each conditional row from Dirichlet(1). Vertex-biased
    mode draws Dirichlet(0.1) and zeroes entries below ``SPARSIFY`` of the
    row, so faces of the simplex (maximally correlated ``mu``) are hit with
    positive probability.
    """
    mode = MuMode(mode)
    px = require_positive_marginals(pi)
    n = px.size
    if k < 1:
        raise ValidationError(f"latent size k must be >= 1, got {k}")
    if k == 1:
        return validate(px[:, None], Kind.LATENT_JOINT)
    if mode is MuMode.DIRICHLET_INTERIOR:
        rows = rng.dirichlet(np.ones(k), size=n)
    else:
        rows = rng.dirichlet(np.full(k, VERTEX_ALPHA), size=n)
        rows[rows < SPARSIFY] = 0.0
        rows /= rows.sum(axis=1, keepdims=True)
    return validate(px[:, None] * rows, Kind.LATENT_JOINT)


def _feasible_direction(A: np.ndarray, x0: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random direction in the null space of ``A`` that does not leave ``x >= 0`` at ``x0``.

    Coordinates at zero that the projected direction would push negative are
    pinned and the projection repeated until none remain.
    """
    N = x0.size
    g = rng.standard_normal(N)
    pinned = np.zeros(N, dtype=bool)
    while True:
        M = np.vstack([A, np.eye(N)[pinned]]) if pinned.any() else A
        basis = null_space(M)
        if basis.shape[1] == 0:
            return np.zeros(N)
        d = basis @ (basis.T @ g)
        blocking = (x0 <= _ZERO) & (d < -_ZERO) & ~pinned
        if not blocking.any():
            d[pinned] = 0.0
            return d
        pinned |= blocking


def _perturbed_kernel(pi, mu, rng, step: float | None) -> np.ndarray:
    n, k = mu.shape
    x0 = np.asarray(honest_kernel(pi, k), dtype=np.float64).ravel()
    A, _, _, _ = constraint_system(pi, mu)
    d = _feasible_direction(A, x0, rng)
    neg = d < -_ZERO
    if not neg.any():
        return x0.reshape(n, n, k)
    s_max = float(np.min(x0[neg] / -d[neg]))
    frac = rng.uniform() if step is None else float(step)
    x = np.clip(x0 + frac * s_max * d, 0.0, 1.0)
    return x.reshape(n, n, k)


def _vertex_kernel(pi, mu, rng) -> np.ndarray:
    n, k = mu.shape
    A, b, rows, cols = constraint_system(pi, mu)
    c = rng.standard_normal(A.shape[1])
    sol = solve_lp(LinearProgram(c=c, A=A, b=b, row_names=rows, col_names=cols))
    if sol.status is not Status.OPTIMAL:
        raise SolverFailure(f"random-objective kernel LP reported {sol.status.value}")
    return np.clip(sol.x, 0.0, 1.0).reshape(n, n, k)


def sample_compatible_model(
    pi,
    k: int,
    rng: np.random.Generator,
    mode: NuMode | str = NuMode.HONEST_PERTURBED,
    *,
    mu=None,
    mu_mode: MuMode | str = MuMode.DIRICHLET_INTERIOR,
    step: float | None = None,
) -> CausalModel:
    """Draw a model in ``M_pi``.

    ``step`` (honest-perturbed mode only) fixes the fraction of the maximal
    feasible step; ``step=0`` returns the honest kernel.
    """
    mode = NuMode(mode)
    pi = validate(pi, Kind.OBSERVED_JOINT)
    if mu is None:
        mu = sample_conforming_mu(pi, k, rng, mu_mode)
    mu = validate(mu, Kind.LATENT_JOINT)
    if mode is NuMode.MIXED:
        mode = NuMode.HONEST_PERTURBED if rng.uniform() < 0.5 else NuMode.RANDOM_OBJECTIVE_VERTEX
    if mode is NuMode.HONEST_PERTURBED:
        nu = _perturbed_kernel(pi, mu, rng, step)
    else:
        nu = _vertex_kernel(pi, mu, rng)
    return CausalModel(mu=mu, nu=nu)


# -- clouds -------------------------------------------------------------------

@dataclass(frozen=True)
class CloudSample:
    index: int
    draw: int
    zeta: np.ndarray
    residual: float
    delta_bound: float
    mi_bound: float


@dataclass(frozen=True)
class CloudSummary:
    count: int
    functional_min: dict[str, float]
    functional_max: dict[str, float]
    bound_slack: dict[str, float]
    worst_residual: float
    diameter: float
    bound_values: dict[str, float] = field(default_factory=dict)

    def violations(self, tol: float = 1e-9) -> dict[str, float]:
        return {name: s for name, s in self.bound_slack.items() if s < -tol}


def functional_name(ell) -> str:
    return "ell=(" + ",".join(f"{float(v):g}" for v in np.asarray(ell).ravel()) + ")"


def _sample_block(args) -> list[CloudSample]:
    pi, k, config, start, stop = args
    out = []
    for i in range(start, stop):
        rng = substream(config.seed, i)
        mu = sample_conforming_mu(pi, k, rng, config.mu_mode)
        delta_b = deviation_bound_delta(pi, mu)
        mi_b = deviation_bound_mi(pi, mu)
        for j in range(config.nu_per_mu):
            model = sample_compatible_model(pi, k, rng, config.nu_mode, mu=mu)
            zeta = interventional(model)
            res = is_compatible(model, pi).residual
            out.append(CloudSample(i, j, zeta, res, delta_b, mi_b))
    return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def sample_cloud(pi, k: int, config: SamplerConfig) -> list[CloudSample]:
    """Raw cloud in sample-index order (parallel over index blocks when enabled)."""
    pi = validate(pi, Kind.OBSERVED_JOINT)
    require_positive_marginals(pi)
    config.check(pi.shape[0], k)
    workers = min(_workers(), config.count)
    if workers <= 1:
        return _sample_block((pi, k, config, 0, config.count))
    edges = np.linspace(0, config.count, workers + 1).astype(int)
    jobs = [(pi, k, config, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        blocks = list(ex.map(_sample_block, jobs))
    return [s for block in blocks for s in block]


def summarize_cloud(pi, k: int, samples: list[CloudSample], functionals=()) -> CloudSummary:
    eta = honest(pi)
    fmin: dict[str, float] = {}
    fmax: dict[str, float] = {}
    slack: dict[str, float] = {}
    bound_values: dict[str, float] = {}
    zetas = np.stack([s.zeta for s in samples])
    diag = np.diagonal(zetas, axis1=1, axis2=2)
    for ell in functionals:
        ell = diagonal_functional(ell)
        name = functional_name(ell)
        values = diag @ ell
        fmin[name] = float(values.min())
        fmax[name] = float(values.max())
        if np.any(ell > 0):
            b = diagonal_bound(pi, ell, k).value
            key = f"{TAG_DIAGONAL}[{name}]"
            bound_values[key] = b
            slack[key] = float(values.min() - b)
    dev = np.array([l1_distance(s.zeta, eta) for s in samples])
    slack[TAG_DELTA] = float(np.min(np.array([s.delta_bound for s in samples]) - dev))
    slack[TAG_MI] = float(np.min(np.array([s.mi_bound for s in samples]) - dev))
    spread = zetas.max(axis=0) - zetas.min(axis=0)
    return CloudSummary(
        count=len(samples),
        functional_min=fmin,
        functional_max=fmax,
        bound_slack=slack,
        worst_residual=float(max(s.residual for s in samples)),
        diameter=float(spread.sum()),
        bound_values=bound_values,
    )


def interventional_cloud(pi, k: int, config: SamplerConfig, functionals=(), keep_raw: bool = False):
    """Sample, evaluate registered functionals and bounds, and summarize.

    Registered bounds: the diagonal bound of every functional with nonempty
    support, and both deviation bounds (correlation distance and corrected
    mutual information) on ``||zeta - eta||_1``. Slack is ``value - bound``
    for lower bounds and ``bound - value`` for upper bounds, minimized over
    the cloud. ``diameter`` is the sum of entrywise ranges, an upper bound
    on the L1 diameter that is zero iff all samples coincide.
    """
    samples = sample_cloud(pi, k, config)
    summary = summarize_cloud(pi, k, samples, functionals)
    return summary, (samples if keep_raw else None)


@dataclass(frozen=True)
class SliceRecord:
    index: int
    lp_value: float
    cloud_min: float


def lp_slices(pi, k: int, ell, config: SamplerConfig) -> list[SliceRecord]:
    """Per sampled ``mu``: the kernel-LP minimum of ``L`` and the minimum over that ``mu``'s sampled kernels."""
    pi = validate(pi, Kind.OBSERVED_JOINT)
    require_positive_marginals(pi)
    config.check(pi.shape[0], k)
    n = pi.shape[0]
    ell = np.asarray(ell, dtype=np.float64)
    ell_m = np.diag(ell) if ell.ndim == 1 else ell
    if ell_m.shape != (n, n):
        raise ValidationError(f"functional must be length {n} or {n}x{n}, got {ell.shape}")
    out = []
    for i in range(config.count):
        rng = substream(config.seed, i)
        mu = sample_conforming_mu(pi, k, rng, config.mu_mode)
        lp_val = solve_mu_program(pi, mu, ell_m).value
        cloud = min(
            float(np.sum(ell_m * interventional(sample_compatible_model(pi, k, rng, config.nu_mode, mu=mu))))
            for _ in range(config.nu_per_mu)
        )
        out.append(SliceRecord(i, lp_val, cloud))
    return out


def brute_force_min_functional(pi, k: int, ell, config: SamplerConfig) -> float:
    """Minimum over sampled ``mu`` of the kernel-LP value of ``L``.

    Exact in the kernel for every sampled ``mu``, so the result is an upper
    bound on the true minimum over all compatible models that tightens as
    the ``mu`` sample grows.
    """
    return min(r.lp_value for r in lp_slices(pi, k, ell, config))
