"""Observational and interventional maps of a confounded model ``(mu, nu)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import TAU_SIMPLEX, Kind, validate, require_positive_marginals
from .errors import ShapeError


@dataclass(frozen=True)
class CausalModel:
    """Joint law ``mu[x, u]`` of (X, U) and response kernel ``nu[z, x, u]``."""

    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        mu = validate(self.mu, Kind.LATENT_JOINT)
        nu = validate(self.nu, Kind.RESPONSE_KERNEL)
        n, k = mu.shape
        if nu.shape != (n, n, k):
            raise ShapeError(f"kernel shape {nu.shape} does not match mu shape {mu.shape}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    @property
    def n(self) -> int:
        return self.mu.shape[0]

    @property
    def k(self) -> int:
        return self.mu.shape[1]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def observational(m: CausalModel) -> np.ndarray:
    """``pi[x, z] = sum_u mu[x, u] nu[z, x, u]``."""
    pi = np.einsum("xu,zxu->xz", m.mu, m.nu)
    return validate(pi, Kind.OBSERVED_JOINT)


def interventional(m: CausalModel) -> np.ndarray:
    """``zeta[x, z] = sum_u mu_U[u] nu[z, x, u]``: law of Z under do(X=x)."""
    mu_u = m.mu.sum(axis=0)
    zeta = np.einsum("u,zxu->xz", mu_u, m.nu)
    return validate(zeta, Kind.CONDITIONAL)


def honest(pi) -> np.ndarray:
    """Observed conditional ``eta[x, z] = pi[x, z] / pi_x``.

    Raises :class:`ZeroMarginal` for any row with no mass.
    """
    pi = np.asarray(pi, dtype=np.float64)
    px = require_positive_marginals(pi)
    return _freeze(pi / px[:, None])


def honest_kernel(pi, k: int) -> np.ndarray:
    """Kernel that ignores U and draws Z from ``eta``; compatible with any conforming mu."""
    eta = honest(pi)
    nu = np.repeat(eta.T[:, :, None], k, axis=2)
    return _freeze(nu)


@dataclass(frozen=True)
class CompatibilityReport:
    residual: float
    marginal_residual: float
    compatible: bool


def is_compatible(m: CausalModel, pi, tol: float = TAU_SIMPLEX) -> CompatibilityReport:
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (m.n, m.n):
        raise ShapeError(f"pi shape {pi.shape} does not match model with n={m.n}")
    implied = np.einsum("xu,zxu->xz", m.mu, m.nu)
    residual = float(np.max(np.abs(pi - implied)))
    marginal_residual = float(np.max(np.abs(pi.sum(axis=1) - m.mu.sum(axis=1))))
    return CompatibilityReport(
        residual=residual,
        marginal_residual=marginal_residual,
        compatible=residual <= tol and marginal_residual <= tol,
    )


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    deviation: float


def is_independent_of_x(zeta, tol: float = TAU_SIMPLEX) -> IndependenceReport:
    """Whether every row of ``zeta`` is the same distribution (entrywise within ``tol``)."""
    zeta = np.asarray(zeta, dtype=np.float64)
    deviation = float(np.max(zeta.max(axis=0) - zeta.min(axis=0)))
    return IndependenceReport(independent=deviation <= tol, deviation=deviation)
