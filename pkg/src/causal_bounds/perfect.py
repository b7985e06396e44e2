"""Interventional geometry when the observed channel is noiseless (``pi`` diagonal).

A label function ``f`` maps each observed outcome to a latent value. It
induces the maximally correlated latent joint ``mu_f[x, u] = pi_x 1{u = f(x)}``
and the polytope ``Q_f`` of conditionals with

    zeta[x, x] >= sum_{x' : f(x') = f(x)} pi_{x'}     for every x.

Every ``Q_f`` is reachable by an explicit model and the union over all
``f`` has the same convex hull as the set of compatible interventional
matrices. Candidate extreme points are ``phi_int(mu_f, nu_g)`` for
deterministic kernels ``g`` that copy ``x`` on the support of ``mu_f``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .distributions import TAU_SIMPLEX, Kind, validate
from .errors import MembershipViolated, NotPerfectChannel, NumericalFailure, TooLarge, ValidationError
from .model import CausalModel, interventional, is_compatible

MAX_CANDIDATES = 10**6
DEDUP_TOL = 1e-9
_CHUNK = 4096


def is_perfect_channel(pi, tol: float = TAU_SIMPLEX) -> bool:
    """True iff the total off-diagonal mass of ``pi`` is at most ``tol``."""
    pi = np.asarray(pi, dtype=np.float64)
    off = pi.sum() - np.trace(pi)
    return bool(off <= tol)


def _require_perfect(pi) -> np.ndarray:
    pi = validate(pi, Kind.OBSERVED_JOINT)
    if not is_perfect_channel(pi):
        off = float(pi.sum() - np.trace(pi))
        raise NotPerfectChannel(f"observed joint has off-diagonal mass {off:.3g}; a perfect channel is required")
    return pi


def _label_function(f, n: int, k: int) -> tuple[int, ...]:
    f = tuple(int(v) for v in f)
    if len(f) != n:
        raise ValidationError(f"label function needs {n} entries, got {len(f)}")
    for x, u in enumerate(f):
        if not 0 <= u < k:
            raise ValidationError(f"label f({x})={u} outside latent range 0..{k - 1}")
    return f


def group_mass(pi, f) -> np.ndarray:
    """``m[x] = sum of pi_{x'} over x' with f(x') == f(x)``."""
    px = np.asarray(pi, dtype=np.float64).sum(axis=1)
    f = np.asarray(f)
    return np.array([px[f == f[x]].sum() for x in range(len(f))])


def mu_f(pi, f, k: int) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.float64)
    n = pi.shape[0]
    f = _label_function(f, n, k)
    mu = np.zeros((n, k))
    mu[np.arange(n), f] = pi.sum(axis=1)
    return validate(mu, Kind.LATENT_JOINT)


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    slack: np.ndarray


def qf_membership(zeta, pi, f, tol: float = TAU_SIMPLEX) -> MembershipReport:
    """Test ``zeta`` against the ``n`` diagonal inequalities of ``Q_f``.

    ``slack[x] = zeta[x, x] - group_mass[x]``; membership allows slack down
    to ``-tol``.
    """
    pi = _require_perfect(pi)
    zeta = validate(zeta, Kind.CONDITIONAL)
    n = pi.shape[0]
    f = _label_function(f, n, max(f) + 1 if len(f) else 1)
    slack = np.diagonal(zeta) - group_mass(pi, f)
    return MembershipReport(member=bool(np.all(slack >= -tol)), slack=slack)


def qf_construct_model(zeta, pi, f, k: int) -> CausalModel:
    """A model ``(mu_f, nu)`` whose observational law is ``pi`` and interventional law is ``zeta``.

    On the support of ``mu_f`` the kernel copies ``x``; off the support row
    ``x`` receives ``(zeta[x] - m e_x) / (1 - m)`` with ``m`` the mass of
    ``f(x)``'s group. When one group holds all the mass, those rows carry
    zero weight and are set to the copy kernel.
    """
    pi = _require_perfect(pi)
    zeta = validate(zeta, Kind.CONDITIONAL)
    n = pi.shape[0]
    f = _label_function(f, n, k)
    report = qf_membership(zeta, pi, f)
    if not report.member:
        x = int(np.argmin(report.slack))
        raise MembershipViolated(
            f"zeta[{x},{x}] falls short of its group mass by {-report.slack[x]:.3g} for f={f}"
        )
    mu = mu_f(pi, f, k)
    mass = group_mass(pi, f)
    eye = np.eye(n)
    nu = np.empty((n, n, k))
    for x in range(n):
        m = mass[x]
        if m >= 1.0 - TAU_SIMPLEX:
            off = eye[x]
        else:
            off = np.clip((zeta[x] - m * eye[x]) / (1.0 - m), 0.0, None)
            off = off / off.sum()
        for u in range(k):
            nu[:, x, u] = eye[x] if u == f[x] else off
    model = CausalModel(mu=mu, nu=nu)
    compat = is_compatible(model, pi, 1e-9)
    err = float(np.max(np.abs(interventional(model) - zeta)))
    if not compat.compatible or err > 1e-9:
        raise NumericalFailure(
            f"reconstruction residuals too large: observational {compat.residual:.2e}, interventional {err:.2e}"
        )
    return model


@dataclass(frozen=True)
class Vertex:
    """One candidate extreme interventional matrix and the first ``(f, g)`` producing it."""

    zeta: np.ndarray
    f: tuple[int, ...]
    g: np.ndarray  # g[x, u] = z


def count_candidates(n: int, k: int) -> int:
    return k**n * n ** (n * (k - 1))


def _vertices_for_f(mu_u: np.ndarray, f: tuple[int, ...], n: int, k: int):
    """All ``(zeta, g)`` for one label function, in lexicographic ``g`` order."""
    free = [(x, u) for x in range(n) for u in range(k) if u != f[x]]
    base = np.empty((n, k), dtype=np.int64)
    for x in range(n):
        base[x, :] = x
    choices = itertools.product(range(n), repeat=len(free))
    z_range = np.arange(n)
    while True:
        block = list(itertools.islice(choices, _CHUNK))
        if not block:
            return
        g = np.broadcast_to(base, (len(block), n, k)).copy()
        if free:
            idx = np.array(block, dtype=np.int64)
            xs, us = zip(*free)
            g[:, list(xs), list(us)] = idx
        onehot = g[..., None] == z_range  # (G, x, u, z)
        zetas = np.einsum("u,gxuz->gxz", mu_u, onehot.astype(np.float64))
        yield from zip(zetas, g)


def enumerate_extreme_interventionals(pi, k: int) -> list[Vertex]:
    """Deduplicated ``phi_int(mu_f, nu_g)`` over all ``f`` and all ``g`` compatible with ``S_f``.

    Candidates are generated in lexicographic ``(f, g)`` order; the result is
    sorted by the flattened ``zeta``.
    """
    pi = _require_perfect(pi)
    n = pi.shape[0]
    if k < 1:
        raise ValidationError(f"latent size k must be >= 1, got {k}")
    total = count_candidates(n, k)
    if total > MAX_CANDIDATES:
        raise TooLarge(total, MAX_CANDIDATES)
    seen: dict[tuple, Vertex] = {}
    for f in itertools.product(range(k), repeat=n):
        mu_u = mu_f(pi, f, k).sum(axis=0)
        for zeta, g in _vertices_for_f(mu_u, f, n, k):
            key = tuple(np.round(zeta.ravel() / DEDUP_TOL).astype(np.int64))
            if key not in seen:
                z = zeta.copy()
                z.flags.writeable = False
                seen[key] = Vertex(zeta=z, f=f, g=g.copy())
    ordered = sorted(seen.values(), key=lambda v: tuple(v.zeta.ravel()))
    # rounding keys can split values straddling a grid boundary; merge neighbours
    out: list[Vertex] = []
    for v in ordered:
        if out and np.max(np.abs(out[-1].zeta - v.zeta)) <= DEDUP_TOL:
            continue
        out.append(v)
    return out


def union_membership(zeta, pi, k: int) -> tuple[int, ...] | None:
    """First label function (lexicographic) with ``zeta`` in ``Q_f``, or ``None``."""
    pi = _require_perfect(pi)
    zeta = validate(zeta, Kind.CONDITIONAL)
    n = pi.shape[0]
    if k**n > MAX_CANDIDATES:
        raise TooLarge(k**n, MAX_CANDIDATES)
    for f in itertools.product(range(k), repeat=n):
        if qf_membership(zeta, pi, f).member:
            return f
    return None


@dataclass(frozen=True)
class HullDiagnostic:
    """Random convex combinations of the enumerated extreme points and their union-membership witnesses.

    Says nothing about whether the hull equals the set of compatible
    interventional matrices; it only reports how often hull points land in
    some ``Q_f``.
    """

    samples: np.ndarray  # (count, n, n)
    witnesses: list
    fraction_in_union: float


def hull_diagnostic(pi, k: int, count: int, rng: np.random.Generator) -> HullDiagnostic:
    pi = _require_perfect(pi)
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    verts = np.stack([v.zeta for v in enumerate_extreme_interventionals(pi, k)])
    weights = rng.dirichlet(np.ones(len(verts)), size=count)
    samples = np.einsum("cv,vxz->cxz", weights, verts)
    witnesses = [union_membership(z, pi, k) for z in samples]
    inside = sum(w is not None for w in witnesses)
    return HullDiagnostic(samples=samples, witnesses=witnesses, fraction_in_union=inside / count)
