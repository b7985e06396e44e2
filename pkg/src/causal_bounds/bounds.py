"""Closed-form lower bounds on diagonal functionals and deviation bounds on ``zeta``.

A diagonal functional is ``L(zeta) = sum_x ell[x] * zeta[x, x]`` with
``ell >= 0``. Deviation bounds control ``||zeta - eta||_1`` for every
interventional matrix arising from a given latent joint ``mu``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .distributions import require_positive_marginals
from .errors import DegenerateRow, EmptySupport, ValidationError
from .lp.mu_program import check_conforming, dual_objective_f

TAU_MARGIN = 1e-9

TAG_DIAGONAL = "diagonal-bound"
TAG_DIAGONAL_CERT = "diagonal-dual-certificate"
TAG_DELTA = "correlation-distance-bound"
TAG_MI = "mutual-information-bound"
TAG_EXCLUSION = "independence-exclusion"


class PinskerConstant(enum.Enum):
    """Constant in the correlation-distance vs mutual-information step.

    ``CORRECTED`` uses the standard ``||p - q||_1 <= sqrt(2 KL)``.
    ``PAPER_STATED`` uses ``sqrt(KL / 2)``, which is too small: the latent
    joint ``diag(.5, .5)`` has correlation distance 1 but ``sqrt(ln 2 / 2)``
    is about 0.589.
    """

    CORRECTED = "corrected"
    PAPER_STATED = "paper"


class PinskerConstantWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BoundReport:
    value: float
    theorem: str
    certificate: dict[str, Any] = field(default_factory=dict)
    margin: float | None = None

    def with_margin(self, functional_value: float) -> "BoundReport":
        return BoundReport(self.value, self.theorem, self.certificate, functional_value - self.value)


def diagonal_functional(weights) -> np.ndarray:
    """Validate diagonal weights (nonnegative, finite, 1-D)."""
    ell = np.asarray(weights, dtype=np.float64)
    if ell.ndim != 1 or ell.size == 0:
        raise ValidationError(f"diagonal weights must be a nonempty vector, got shape {ell.shape}")
    bad = np.flatnonzero(~np.isfinite(ell) | (ell < 0))
    if bad.size:
        x = int(bad[0])
        raise ValidationError(f"diagonal weight ell[{x}]={float(ell[x])!r} must be finite and >= 0")
    ell = ell.copy()
    ell.flags.writeable = False
    return ell


def apply_diagonal(ell, zeta) -> float:
    return float(np.dot(np.asarray(ell, dtype=np.float64), np.diagonal(np.asarray(zeta, dtype=np.float64))))


def support(ell) -> np.ndarray:
    return np.flatnonzero(np.asarray(ell) > 0)


def diagonal_bound(pi, ell, k: int) -> BoundReport:
    """``(|supp L|^2 / k) * min_{x in supp L} ell[x] pi[x, x]``; holds for every ``zeta`` compatible with ``pi``."""
    if k < 1:
        raise ValidationError(f"latent size k must be >= 1, got {k}")
    pi = np.asarray(pi, dtype=np.float64)
    ell = diagonal_functional(ell)
    if ell.shape != (pi.shape[0],):
        raise ValidationError(f"need {pi.shape[0]} diagonal weights, got {ell.size}")
    supp = support(ell)
    if supp.size == 0:
        raise EmptySupport("diagonal functional has no positive weight")
    terms = ell[supp] * np.diagonal(pi)[supp]
    i = int(np.argmin(terms))
    s = int(supp.size)
    value = s * s / k * float(terms[i])
    return BoundReport(
        value=value,
        theorem=TAG_DIAGONAL,
        certificate={"support_size": s, "witness_x": int(supp[i]), "min_term": float(terms[i]), "k": k},
    )


def diagonal_dual_certificate(pi, mu, ell) -> tuple[np.ndarray, float]:
    """The explicit dual point behind :func:`diagonal_bound` for one latent joint.

    For each ``x`` in the support, ``g(x)`` is the latent value minimizing
    ``mu_U[u] / mu[x, u]`` over ``u`` with ``mu[x, u] > 0`` (lowest index on
    ties) and ``alpha[x, x] = ell[x] mu_U[g(x)] / mu[x, g(x)]``; every other
    entry of ``alpha`` is zero. Returns ``(alpha, f(mu, alpha))``.
    """
    pi = np.asarray(pi, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    ell = diagonal_functional(ell)
    check_conforming(pi, mu)
    n = mu.shape[0]
    mu_u = mu.sum(axis=0)
    alpha = np.zeros((n, n))
    for x in support(ell):
        row = mu[x]
        pos = np.flatnonzero(row > 0)
        if pos.size == 0:
            raise DegenerateRow(int(x))
        ratios = mu_u[pos] / row[pos]
        g = int(pos[np.argmin(ratios)])
        alpha[x, x] = ell[x] * mu_u[g] / row[g]
    return alpha, dual_objective_f(pi, mu, ell, alpha)


def correlation_distance(mu) -> float:
    """``||mu - mu_X (x) mu_U||_1``."""
    mu = np.asarray(mu, dtype=np.float64)
    prod = np.outer(mu.sum(axis=1), mu.sum(axis=0))
    return float(np.abs(mu - prod).sum())


def mutual_information(mu) -> float:
    """``I(X; U)`` in nats, i.e. ``KL(mu || mu_X (x) mu_U)``."""
    mu = np.asarray(mu, dtype=np.float64)
    x, u = np.nonzero(mu > 0)
    if x.size == 0:
        return 0.0
    # zero cells contribute nothing; logs taken separately so a tiny
    # product mu_X[x] * mu_U[u] cannot underflow to zero
    w = mu[x, u]
    terms = w * (np.log(w) - np.log(mu.sum(axis=1)[x]) - np.log(mu.sum(axis=0)[u]))
    return float(max(0.0, terms.sum()))


def _prepare(pi, mu) -> float:
    px = require_positive_marginals(pi)
    check_conforming(pi, mu)
    return float(px.min())


def deviation_bound_delta(pi, mu) -> float:
    """Upper bound ``delta(mu) / min_x pi_x`` on ``||zeta - eta||_1``."""
    return correlation_distance(mu) / _prepare(pi, mu)


def deviation_bound_mi(pi, mu, constant_mode: PinskerConstant | str = PinskerConstant.CORRECTED) -> float:
    mode = PinskerConstant(constant_mode)
    min_px = _prepare(pi, mu)
    info = mutual_information(mu)
    if mode is PinskerConstant.CORRECTED:
        return math.sqrt(2.0 * info) / min_px
    delta = correlation_distance(mu)
    warnings.warn(
        "sqrt(I/2) is not a valid upper bound on the correlation distance "
        f"(here delta={delta:.6g}, sqrt(I/2)={math.sqrt(info / 2):.6g}); "
        "the corrected constant sqrt(2 I) is the sound one",
        PinskerConstantWarning,
        stacklevel=2,
    )
    return math.sqrt(info / 2.0) / min_px


@dataclass(frozen=True)
class ExclusionReport:
    excluded: bool
    margin: float
    bound: BoundReport


def independence_excluded(pi, k: int, ell=None) -> ExclusionReport:
    """Whether no compatible ``zeta`` can have identical rows.

    If every row of ``zeta`` equals some ``p`` then ``L(zeta) = sum_x ell[x] p[x]
    <= max(ell)`` (exactly 1 for the default all-ones weights), so a diagonal
    bound strictly above ``max(ell)`` rules such ``zeta`` out. Boundary
    cases (within ``TAU_MARGIN``) are reported as not excluded.
    """
    pi = np.asarray(pi, dtype=np.float64)
    if ell is None:
        ell = np.ones(pi.shape[0])
    report = diagonal_bound(pi, ell, k)
    margin = report.value - float(np.max(ell))
    return ExclusionReport(excluded=margin > TAU_MARGIN, margin=margin, bound=report)

