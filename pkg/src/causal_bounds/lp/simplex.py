"""Dense revised simplex for ``min c.x  s.t.  A x = b, x >= 0``.

Two-phase method with Bland's rule (lowest-index entering column, lowest
basic index among tied leaving rows). The explicit basis inverse is
updated by Gauss-Jordan pivots; the float path refactors periodically and
once more at the end so that the reported primal and dual vectors come
from a fresh factorization of the optimal basis.

``exact=True`` runs the identical algorithm over ``fractions.Fraction``
with zero tolerances. It is meant for certifying the float path on small
instances, not for production use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import NumericalFailure

TAU_LP = 1e-8
TAU_GAP = 1e-7
PIVOT_TOL = 1e-10
OPT_TOL = 1e-10
REFACTOR_EVERY = 50


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """Standard-form LP. Row and column names are free-form tags."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    row_names: tuple = ()
    col_names: tuple = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass(frozen=True)
class LpSolution:
    status: Status
    value: float | Fraction | None = None
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    iterations: int = 0
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    gap: float = 0.0
    dual_value: float | Fraction | None = None
    dropped_rows: tuple[int, ...] = ()


class _Arith:
    exact = False
    zero = 0.0
    one = 1.0
    piv_tol = PIVOT_TOL
    opt_tol = OPT_TOL

    def array(self, a) -> np.ndarray:
        return np.array(a, dtype=np.float64)

    def eye(self, m: int) -> np.ndarray:
        return np.eye(m)

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape)

    def inv(self, M: np.ndarray) -> np.ndarray:
        return np.linalg.inv(M)

    def ties(self, ratios: np.ndarray, best) -> np.ndarray:
        return ratios <= best + 1e-12 * (1.0 + abs(best))


class _ExactArith(_Arith):
    exact = True
    zero = Fraction(0)
    one = Fraction(1)
    piv_tol = Fraction(0)
    opt_tol = Fraction(0)

    def array(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=object)
        out = np.empty(a.shape, dtype=object)
        for idx, v in np.ndenumerate(a):
            out[idx] = v if isinstance(v, Fraction) else Fraction(float(v)) if isinstance(v, (float, np.floating)) else Fraction(v)
        return out

    def eye(self, m: int) -> np.ndarray:
        out = self.zeros((m, m))
        for i in range(m):
            out[i, i] = Fraction(1)
        return out

    def zeros(self, shape) -> np.ndarray:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out

    def inv(self, M: np.ndarray) -> np.ndarray:
        m = M.shape[0]
        aug = np.concatenate([M.copy(), self.eye(m)], axis=1)
        for col in range(m):
            piv = next((r for r in range(col, m) if aug[r, col] != 0), None)
            if piv is None:
                raise NumericalFailure("singular basis in exact arithmetic")
            if piv != col:
                aug[[col, piv]] = aug[[piv, col]]
            aug[col] = aug[col] / aug[col, col]
            for r in range(m):
                if r != col and aug[r, col] != 0:
                    aug[r] = aug[r] - aug[r, col] * aug[col]
        return aug[:, m:]

    def ties(self, ratios: np.ndarray, best) -> np.ndarray:
        return ratios == best


class _Tableau:
    """Basis bookkeeping for one phase of the revised simplex."""

    def __init__(self, A, b, basis, arith: _Arith, budget: int):
        self.A = A
        self.b = b
        self.basis = list(basis)
        self.ar = arith
        self.budget = budget
        self.iterations = 0
        self._since_refactor = 0
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = self.ar.inv(B) if len(self.basis) else self.ar.zeros((0, 0))
        self.xB = self.Binv @ self.b
        self._since_refactor = 0

    def pivot(self, r: int, j: int, w: np.ndarray):
        theta = self.xB[r] / w[r]
        self.xB = self.xB - theta * w
        self.xB[r] = theta
        prow = self.Binv[r] / w[r]
        self.Binv = self.Binv - np.outer(w, prow)
        self.Binv[r] = prow
        self.basis[r] = j
        self.iterations += 1
        self._since_refactor += 1
        if not self.ar.exact and self._since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def run(self, c, allowed: np.ndarray) -> Status:
        """Iterate to optimality or unboundedness over the ``allowed`` columns."""
        ar = self.ar
        ncols = self.A.shape[1]
        while True:
            if self.iterations >= self.budget:
                raise NumericalFailure(f"simplex did not converge in {self.budget} iterations")
            y = c[self.basis] @ self.Binv if self.basis else ar.zeros(0)
            d = c - (y @ self.A if self.basis else ar.zeros(ncols))
            nonbasic = allowed.copy()
            nonbasic[self.basis] = False
            candidates = np.flatnonzero(nonbasic & (d < -ar.opt_tol))
            if candidates.size == 0:
                return Status.OPTIMAL
            j = int(candidates[0])
            w = self.Binv @ self.A[:, j]
            pos = np.flatnonzero(w > ar.piv_tol)
            if pos.size == 0:
                return Status.UNBOUNDED
            xb = self.xB[pos]
            xb = np.where(xb > 0, xb, ar.zero)
            ratios = xb / w[pos]
            best = ratios.min()
            tied = pos[ar.ties(ratios, best)]
            r = int(min(tied, key=lambda i: self.basis[i]))
            self.pivot(r, j, w)


def _max_abs(v) -> float:
    return float(max((abs(float(t)) for t in v), default=0.0))


def solve_lp(p: LinearProgram, *, exact: bool = False, max_iter: int | None = None) -> LpSolution:
    """Solve ``p``; primal ``x`` and equality duals ``y`` on success.

    A returned OPTIMAL solution has been checked against the primal
    feasibility, dual feasibility and duality-gap tolerances; if the float
    path cannot meet them :class:`NumericalFailure` is raised.
    """
    ar: _Arith = _ExactArith() if exact else _Arith()
    A0 = ar.array(p.A)
    b0 = ar.array(p.b)
    c0 = ar.array(p.c)
    if A0.ndim != 2 or b0.shape != (A0.shape[0],) or c0.shape != (A0.shape[1],):
        raise ValueError(f"inconsistent LP shapes A{A0.shape} b{b0.shape} c{c0.shape}")
    if not exact and not (np.all(np.isfinite(A0)) and np.all(np.isfinite(b0)) and np.all(np.isfinite(c0))):
        raise ValueError("LP coefficients must be finite")
    m, ncols = A0.shape
    budget = max_iter or 200 * (m + ncols) + 1000

    sign = np.array([-1 if v < 0 else 1 for v in b0], dtype=int)
    A = A0 * sign[:, None]
    b = b0 * sign

    # phase I: artificial identity basis
    A1 = np.concatenate([A, ar.eye(m)], axis=1)
    c1 = np.concatenate([ar.zeros(ncols), np.array([ar.one] * m, dtype=A1.dtype)])
    t = _Tableau(A1, b, range(ncols, ncols + m), ar, budget)
    t.run(c1, np.ones(ncols + m, dtype=bool))
    infeas = sum((t.xB[i] for i, j in enumerate(t.basis) if j >= ncols), ar.zero)
    scale = 1.0 + _max_abs(b)
    if (infeas > 0) if exact else (float(infeas) > TAU_LP * scale):
        return LpSolution(Status.INFEASIBLE, iterations=t.iterations)

    # drive artificials out of the basis or drop the redundant rows they guard
    kept = list(range(m))
    iterations = t.iterations
    while True:
        art = [r for r, j in enumerate(t.basis) if j >= ncols]
        if not art:
            break
        r = art[0]
        row = t.Binv[r] @ t.A[:, :ncols]
        basic = set(t.basis)
        mags = [(abs(row[j]), j) for j in range(ncols) if j not in basic and abs(row[j]) > ar.piv_tol]
        if mags:
            j = mags[0][1] if exact else max(mags, key=lambda v: (v[0], -v[1]))[1]
            t.pivot(r, j, t.Binv @ t.A[:, j])
            continue
        i = int(max(range(len(kept)), key=lambda q: abs(t.Binv[r, q])))
        keep_local = [q for q in range(len(kept)) if q != i]
        kept = [kept[q] for q in keep_local]
        basis = [j for q, j in enumerate(t.basis) if q != r]
        iterations = t.iterations
        t = _Tableau(t.A[keep_local], t.b[keep_local], basis, ar, budget)
        t.iterations = iterations
    iterations = t.iterations

    # phase II on the original columns
    A2 = t.A[:, :ncols]
    t2 = _Tableau(A2, t.b, t.basis, ar, budget)
    t2.iterations = iterations
    status = t2.run(c0, np.ones(ncols, dtype=bool))
    dropped = tuple(sorted(set(range(m)) - set(kept)))
    if status is Status.UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, iterations=t2.iterations, dropped_rows=dropped)

    if not exact:
        t2.refactor()
    x = ar.zeros(ncols)
    xB = t2.xB
    if not exact:
        xB = np.where(xB < 0, 0.0, xB)
    x[t2.basis] = xB
    y_kept = c0[t2.basis] @ t2.Binv if t2.basis else ar.zeros(0)
    y = ar.zeros(m)
    y[kept] = y_kept
    y = y * sign

    value = c0 @ x
    dual_value = b0 @ y
    primal_res = _max_abs(A0 @ x - b0)
    reduced = c0 - y @ A0
    dual_res = max(0.0, -min((float(v) for v in reduced), default=0.0))
    gap = abs(float(value - dual_value))
    sol = LpSolution(
        Status.OPTIMAL,
        value=value if exact else float(value),
        x=x,
        y=y,
        iterations=t2.iterations,
        primal_residual=primal_res,
        dual_residual=dual_res,
        gap=gap,
        dual_value=dual_value if exact else float(dual_value),
        dropped_rows=dropped,
    )
    if exact:
        if primal_res != 0 or dual_res != 0 or gap != 0:
            raise NumericalFailure("exact solve produced an inconsistent certificate")
    elif primal_res > TAU_LP * scale or dual_res > TAU_LP or gap > TAU_GAP:
        raise NumericalFailure(
            f"certificate out of tolerance: primal {primal_res:.2e}, dual {dual_res:.2e}, gap {gap:.2e}"
        )
    return sol
