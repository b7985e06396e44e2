"""Probability containers for the three-variable confounded model.

Everything is a plain read-only ``numpy`` float64 array; :func:`validate`
is the single gate that checks the invariants of each kind. Index order is
fixed across the package:

* observed joint        ``pi[x, z]``
* latent joint          ``mu[x, u]``
* response kernel       ``nu[z, x, u]``
* conditional matrices  ``zeta[x, z]`` (also the honest ``eta[x, z]``)
"""

from __future__ import annotations

import enum
from typing import Any

import numpy as np

from .errors import MassMismatch, NegativeMass, ShapeError, ZeroMarginal

TAU_SIMPLEX = 1e-9


class Kind(enum.Enum):
    SIMPLEX_VECTOR = "simplex_vector"
    OBSERVED_JOINT = "observed_joint"
    LATENT_JOINT = "latent_joint"
    RESPONSE_KERNEL = "response_kernel"
    CONDITIONAL = "conditional"


_NDIM = {
    Kind.SIMPLEX_VECTOR: 1,
    Kind.OBSERVED_JOINT: 2,
    Kind.LATENT_JOINT: 2,
    Kind.RESPONSE_KERNEL: 3,
    Kind.CONDITIONAL: 2,
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


def validate(data: Any, kind: Kind | str, tol: float = TAU_SIMPLEX) -> np.ndarray:
    """Return ``data`` as a read-only float array if it satisfies ``kind``.

    Values are never rescaled: a container whose mass is off by more than
    ``tol`` is rejected, not renormalized.
    """
    kind = Kind(kind)
    try:
        a = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{kind.value}: not a rectangular numeric array ({exc})") from None
    if a.ndim != _NDIM[kind]:
        raise ShapeError(f"{kind.value}: expected {_NDIM[kind]} dimensions, got {a.ndim}")
    if a.size == 0 or 0 in a.shape:
        raise ShapeError(f"{kind.value}: empty container")
    if not np.all(np.isfinite(a)):
        idx = tuple(int(i) for i in np.argwhere(~np.isfinite(a))[0])
        raise ShapeError(f"{kind.value}: non-finite entry at index {idx}")
    if kind is Kind.OBSERVED_JOINT and a.shape[0] != a.shape[1]:
        raise ShapeError(f"observed_joint must be n x n, got {a.shape}")
    if kind is Kind.CONDITIONAL and a.shape[0] != a.shape[1]:
        raise ShapeError(f"conditional must be n x n, got {a.shape}")
    if kind is Kind.RESPONSE_KERNEL and a.shape[0] != a.shape[1]:
        raise ShapeError(f"response_kernel must be n x n x k, got {a.shape}")

    if np.any(a < -tol):
        idx = tuple(int(i) for i in np.argwhere(a < -tol)[0])
        raise NegativeMass(f"{kind.value}: entry {a[idx]:.3g} < 0 at index {idx}")

    if kind in (Kind.SIMPLEX_VECTOR, Kind.OBSERVED_JOINT, Kind.LATENT_JOINT):
        total = float(a.sum())
        if abs(total - 1.0) > tol:
            raise MassMismatch(f"{kind.value}: total mass {total!r} != 1")
    elif kind is Kind.CONDITIONAL:
        sums = a.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if bad.size:
            x = int(bad[0])
            raise MassMismatch(f"conditional: row x={x} sums to {float(sums[x])!r}")
    else:
        if np.any(a > 1.0 + tol):
            idx = tuple(int(i) for i in np.argwhere(a > 1.0 + tol)[0])
            raise MassMismatch(f"response_kernel: entry {a[idx]:.3g} > 1 at index {idx}")
        sums = a.sum(axis=0)
        bad = np.argwhere(np.abs(sums - 1.0) > tol)
        if bad.size:
            x, u = (int(i) for i in bad[0])
            raise MassMismatch(f"response_kernel: sum over z at (x={x}, u={u}) is {float(sums[x, u])!r}")
    if not a.flags.writeable and a.base is None:
        return a
    return _frozen(a)


def zero_marginal_rows(pi: np.ndarray) -> list[int]:
    """Outcomes ``x`` with ``pi_x == 0`` (rows that make ``eta`` undefined)."""
    return [int(x) for x in np.flatnonzero(np.asarray(pi).sum(axis=1) <= 0.0)]


def require_positive_marginals(pi: np.ndarray) -> np.ndarray:
    rows = zero_marginal_rows(pi)
    if rows:
        raise ZeroMarginal(rows[0])
    return np.asarray(pi).sum(axis=1)


def l1_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"l1_distance: shapes {a.shape} and {b.shape} differ")
    return float(np.abs(a - b).sum())


def product_distribution(a, b) -> np.ndarray:
    """Outer product ``(a x b)[i, j] = a[i] * b[j]`` of two simplex vectors."""
    a = validate(a, Kind.SIMPLEX_VECTOR)
    b = validate(b, Kind.SIMPLEX_VECTOR)
    return _frozen(np.outer(a, b))


def marginals(mu) -> tuple[np.ndarray, np.ndarray]:
    """Row sums (``mu_X``) and column sums (``mu_U``) of a latent joint."""
    mu = np.asarray(mu, dtype=np.float64)
    return _frozen(mu.sum(axis=1)), _frozen(mu.sum(axis=0))


# -- JSON ------------------------------------------------------------------

def to_json(a, kind: Kind | str) -> dict:
    kind = Kind(kind)
    a = np.asarray(a, dtype=np.float64)
    out: dict[str, Any] = {"kind": kind.value, "n": int(a.shape[0])}
    if kind is Kind.LATENT_JOINT:
        out["k"] = int(a.shape[1])
    elif kind is Kind.RESPONSE_KERNEL:
        out["k"] = int(a.shape[2])
    out["data"] = a.tolist()
    return out


def from_json(obj: dict, kind: Kind | str) -> np.ndarray:
    """Parse ``{"n": .., "k": .., "data": [...]}`` and re-validate."""
    kind = Kind(kind)
    if not isinstance(obj, dict) or "data" not in obj:
        raise ShapeError(f"{kind.value}: JSON object with a 'data' field expected")
    a = validate(obj["data"], kind)
    n = obj.get("n")
    if n is not None and int(n) != a.shape[0]:
        raise ShapeError(f"{kind.value}: declared n={n} but data has {a.shape[0]} rows")
    k = obj.get("k")
    if k is not None:
        actual = a.shape[-1] if kind in (Kind.LATENT_JOINT, Kind.RESPONSE_KERNEL) else None
        if actual is not None and int(k) != actual:
            raise ShapeError(f"{kind.value}: declared k={k} but data has {actual} latent values")
    return a
