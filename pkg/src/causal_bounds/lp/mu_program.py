"""The LP over response kernels for a fixed latent joint ``mu``.

For a conforming ``mu`` (``mu_X == pi_X``) the kernels ``nu`` compatible
with ``pi`` form a polytope; minimizing a linear functional ``L`` of the
interventional matrix over it is the LP

    min  sum_{z,x,u} ell[x, z] mu_U[u] nu[z, x, u]
    s.t. sum_z nu[z, x, u] = 1                   (normalization, row (x, u))
         sum_u mu[x, u] nu[z, x, u] = pi[x, z]   (compatibility, row (x, z))
         nu >= 0

Variables are ordered like ``nu.ravel()`` (C order over ``z, x, u``); the
normalization rows come first, in ``(x, u)`` order, then the compatibility
rows in ``(x, z)`` order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..distributions import TAU_SIMPLEX
from ..errors import MarginalMismatch, ShapeError, SolverFailure
from .simplex import LinearProgram, LpSolution, Status, solve_lp


@dataclass(frozen=True)
class DualCertificate:
    """Equality duals: ``alpha[x, z]`` for compatibility rows, ``beta[u, x]`` for normalization."""

    alpha: np.ndarray
    beta: np.ndarray

    def violation(self, mu, ell) -> float:
        """Largest excess of ``mu[x,u] alpha[x,z] + beta[u,x]`` over ``ell[x,z] mu_U[u]``."""
        mu = np.asarray(mu, dtype=np.float64)
        ell = np.asarray(ell, dtype=np.float64)
        mu_u = mu.sum(axis=0)
        lhs = mu[:, :, None] * self.alpha.astype(float)[:, None, :] + self.beta.astype(float).T[:, :, None]
        rhs = ell[:, None, :] * mu_u[None, :, None]
        return float(max(0.0, np.max(lhs - rhs)))


@dataclass(frozen=True)
class MuProgramResult:
    value: float
    nu: np.ndarray
    certificate: DualCertificate
    solution: LpSolution


def _as_matrix(ell, n: int) -> np.ndarray:
    ell = np.asarray(ell)
    if ell.shape == (n,):
        out = np.zeros((n, n), dtype=ell.dtype)
        out[np.arange(n), np.arange(n)] = ell
        return out
    if ell.shape != (n, n):
        raise ShapeError(f"objective must be an n-vector (diagonal) or n x n matrix, got {ell.shape}")
    return ell


def _exactify(a) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = v if isinstance(v, Fraction) else Fraction(float(v)) if isinstance(v, (float, np.floating)) else Fraction(v)
    return out


def check_conforming(pi, mu, tol: float = TAU_SIMPLEX) -> None:
    pi = np.asarray(pi, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
        raise ShapeError(f"pi must be n x n, got {pi.shape}")
    if mu.ndim != 2 or mu.shape[0] != pi.shape[0]:
        raise ShapeError(f"mu must be n x k with n={pi.shape[0]}, got {mu.shape}")
    diff = np.abs(mu.sum(axis=1) - pi.sum(axis=1))
    if np.any(diff > tol):
        x = int(np.argmax(diff))
        raise MarginalMismatch(
            f"mu_X[{x}]={float(mu.sum(axis=1)[x])!r} differs from pi_X[{x}]={float(pi.sum(axis=1)[x])!r}"
        )


def constraint_system(pi, mu, *, exact: bool = False) -> tuple[np.ndarray, np.ndarray, tuple, tuple]:
    """Equality rows of the kernel polytope for ``(pi, mu)``: ``(A, b, row_names, col_names)``."""
    check_conforming(pi, mu)
    if exact:
        pi = _exactify(pi)
        mu = _exactify(mu)
    else:
        pi = np.asarray(pi, dtype=np.float64)
        mu = np.asarray(mu, dtype=np.float64)
    n, k = mu.shape
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    A = np.empty((n * k + n * n, n * n * k), dtype=object if exact else np.float64)
    A.fill(zero)
    b = np.empty(n * k + n * n, dtype=A.dtype)

    def col(z, x, u):
        return (z * n + x) * k + u

    rows = []
    for x in range(n):
        for u in range(k):
            r = x * k + u
            for z in range(n):
                A[r, col(z, x, u)] = one
            b[r] = one
            rows.append(("norm", x, u))
    for x in range(n):
        for z in range(n):
            r = n * k + x * n + z
            for u in range(k):
                A[r, col(z, x, u)] = mu[x, u]
            b[r] = pi[x, z]
            rows.append(("compat", x, z))
    cols = tuple(("nu", z, x, u) for z in range(n) for x in range(n) for u in range(k))
    return A, b, tuple(rows), cols


def build_mu_program(pi, mu, ell, *, exact: bool = False) -> LinearProgram:
    """LP in the kernel entries with objective ``ell[x, z] * mu_U[u]``.

    ``ell`` is an ``n x n`` matrix paired entrywise with ``zeta[x, z]``; an
    ``n``-vector is read as a diagonal functional.
    """
    A, b, rows, cols = constraint_system(pi, mu, exact=exact)
    mu_arr = _exactify(mu) if exact else np.asarray(mu, dtype=np.float64)
    n, k = mu_arr.shape
    ell_m = _as_matrix(_exactify(ell) if exact else np.asarray(ell, dtype=np.float64), n)
    mu_u = mu_arr.sum(axis=0)
    # c[z, x, u] = ell[x, z] * mu_U[u]
    c = (ell_m.T[:, :, None] * mu_u[None, None, :]).reshape(-1)
    return LinearProgram(c=c, A=A, b=b, row_names=rows, col_names=cols)


def certificate_from_duals(y, n: int, k: int) -> DualCertificate:
    y = np.asarray(y)
    beta = y[: n * k].reshape(n, k).T  # beta[u, x]
    alpha = y[n * k:].reshape(n, n)
    return DualCertificate(alpha=alpha, beta=beta)


def solve_mu_program(pi, mu, ell, *, exact: bool = False) -> MuProgramResult:
    """Minimum of ``L(zeta)`` over kernels compatible with ``(pi, mu)``, with its dual certificate."""
    p = build_mu_program(pi, mu, ell, exact=exact)
    sol = solve_lp(p, exact=exact)
    if sol.status is not Status.OPTIMAL:
        # feasibility (honest kernel) and boundedness (nu in a box) hold for every conforming mu
        raise SolverFailure(f"kernel LP reported {sol.status.value}; this indicates a solver bug")
    n, k = np.asarray(mu).shape
    nu = sol.x.reshape(n, n, k)
    if not exact:
        nu = nu.copy()
        nu.flags.writeable = False
    return MuProgramResult(
        value=sol.value,
        nu=nu,
        certificate=certificate_from_duals(sol.y, n, k),
        solution=sol,
    )


def dual_objective_f(pi, mu, ell, alpha) -> float:
    """Unconstrained dual objective; a lower bound on the LP value for any ``alpha``.

    ``f = sum_{x,z} pi[x,z] alpha[x,z]
          + sum_{x,u} min_z (ell[x,z] mu_U[u] - mu[x,u] alpha[x,z])``
    """
    pi = np.asarray(pi, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    n, k = mu.shape
    ell_m = _as_matrix(np.asarray(ell, dtype=np.float64), n)
    mu_u = mu.sum(axis=0)
    # inner[x, u, z]
    inner = ell_m[:, None, :] * mu_u[None, :, None] - mu[:, :, None] * alpha[:, None, :]
    return float(np.sum(pi * alpha) + inner.min(axis=2).sum())
