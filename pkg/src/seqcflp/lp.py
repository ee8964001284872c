"""Dense bounded-variable primal simplex and the master-node relaxation.

The node relaxations are tiny (at most ~100 structural variables and a
few hundred cut rows), so the solver favours robustness over speed: a
two-phase dense-tableau simplex with native variable bounds, Dantzig
pricing, and a permanent switch to Bland's rule once degenerate pivots
pile up.  Identical inputs produce bitwise-identical solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cuts import CutRow

__all__ = [
    "LpStatus",
    "LpProblem",
    "LpSolution",
    "SimplexError",
    "maximize_linear",
    "solve_lp",
]

BOUND_TOL = 1e-9
ROW_TOL = 1e-7
_RC_TOL = 1e-9
_PIV_TOL = 1e-11

_AT_LB, _AT_UB, _BASIC = 0, 1, 2


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


class SimplexError(RuntimeError):
    """Unbounded problem or iteration safety limit hit."""


def maximize_linear(
    c,
    a_ub,
    b_ub,
    a_eq,
    b_eq,
    lower,
    upper,
):
    """Maximize ``c . v`` s.t. ``a_ub v <= b_ub``, ``a_eq v = b_eq``,
    ``lower <= v <= upper``.

    Returns ``(status, v, objective)``; ``v`` is a basic optimal point.
    Lower bounds must be finite (upper bounds may be +inf).
    """
    c = np.asarray(c, dtype=np.float64)
    n = c.shape[0]
    a_ub = np.zeros((0, n)) if a_ub is None else np.asarray(a_ub, dtype=np.float64)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=np.float64)
    a_eq = np.zeros((0, n)) if a_eq is None else np.asarray(a_eq, dtype=np.float64)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=np.float64)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if not np.all(np.isfinite(lower)):
        raise ValueError("lower bounds must be finite")
    if np.any(lower > upper + BOUND_TOL):
        return LpStatus.INFEASIBLE, None, None

    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq
    if m == 0:
        v = np.where(c > 0, upper, lower)
        if not np.all(np.isfinite(v[c > 0])):
            raise SimplexError("unbounded: positive objective on a free variable")
        return LpStatus.OPTIMAL, v, float(c @ v)

    a_rows = np.vstack([a_ub, a_eq]) if m_ub and m_eq else (a_ub if m_ub else a_eq)
    b = np.concatenate([b_ub, b_eq])

    # columns: structural | slacks for <= rows | artificials as needed
    cols = [a_rows, np.vstack([np.eye(m_ub), np.zeros((m_eq, m_ub))])] if m_ub else [a_rows]
    low = [lower, np.zeros(m_ub)]
    upp = [upper, np.full(m_ub, np.inf)]

    resid = b - a_rows @ lower
    basis = np.empty(m, dtype=np.intp)
    art_cols = []
    next_col = n + m_ub
    for i in range(m):
        if i < m_ub and resid[i] >= 0:
            basis[i] = n + i
        else:
            sigma = 1.0 if resid[i] >= 0 else -1.0
            col = np.zeros(m)
            col[i] = sigma
            art_cols.append(col)
            basis[i] = next_col
            next_col += 1
    n_art = len(art_cols)
    if n_art:
        cols.append(np.column_stack(art_cols))
        low.append(np.zeros(n_art))
        upp.append(np.full(n_art, np.inf))
    a_full = np.hstack(cols)
    lo = np.concatenate(low)
    hi = np.concatenate(upp)
    n_total = a_full.shape[1]

    state = np.full(n_total, _AT_LB, dtype=np.int8)
    state[basis] = _BASIC
    tableau = np.array(a_full, order="F")
    basic_vals = np.empty(m)
    for i in range(m):
        j = basis[i]
        if j < n + m_ub:  # slack
            basic_vals[i] = resid[i]
        else:  # artificial, coefficient +-1
            if a_full[i, j] < 0:
                tableau[i, :] *= -1.0
            basic_vals[i] = abs(resid[i])

    work = _Tableau(tableau, basic_vals, basis, state, lo, hi, n_total, m)

    if n_art:
        c1 = np.zeros(n_total)
        c1[n + m_ub :] = -1.0
        work.run(c1)
        if work.objective(c1) < -ROW_TOL:
            return LpStatus.INFEASIBLE, None, None
        # pin artificials at zero for phase 2
        work.hi[n + m_ub :] = 0.0
        work.lo[n + m_ub :] = 0.0

    c2 = np.zeros(n_total)
    c2[:n] = c
    work.run(c2)
    work.refine(a_full, b)
    v = work.values()[:n]
    return LpStatus.OPTIMAL, v, float(c @ v)


class _Tableau:
    """Simplex state: T = B^-1 A plus basic values and bound statuses."""

    def __init__(self, tableau, basic_vals, basis, state, lo, hi, n_total, m):
        self.t = tableau
        self.xb = basic_vals
        self.basis = basis
        self.state = state
        self.lo = lo
        self.hi = hi
        self.n_total = n_total
        self.m = m

    def values(self) -> np.ndarray:
        v = np.where(self.state == _AT_UB, self.hi, self.lo)
        v[self.basis] = self.xb
        return v

    def objective(self, c) -> float:
        return float(c @ self.values())

    def refine(self, a_full, b) -> None:
        """Recompute basic values from the original data to shed the
        rank-one-update drift accumulated over many pivots."""
        v = self.values()
        nonbasic = np.ones(self.n_total, dtype=bool)
        nonbasic[self.basis] = False
        rhs = b - a_full[:, nonbasic] @ v[nonbasic]
        try:
            self.xb = np.linalg.solve(a_full[:, self.basis], rhs)
        except np.linalg.LinAlgError:
            pass

    def run(self, c) -> None:
        degenerate = 0
        bland = False
        switch_at = 5 * (self.m + self.n_total)
        limit = 200 * (self.m + self.n_total) + 10_000
        for _ in range(limit):
            rc = c - c[self.basis] @ self.t
            movable = (self.hi - self.lo) > BOUND_TOL
            elig = movable & (
                ((self.state == _AT_LB) & (rc > _RC_TOL))
                | ((self.state == _AT_UB) & (rc < -_RC_TOL))
            )
            if not elig.any():
                return
            if bland:
                j = int(np.flatnonzero(elig)[0])
            else:
                j = int(np.argmax(np.where(elig, np.abs(rc), -np.inf)))
            step = self._step(j)
            if step is None:
                raise SimplexError("unbounded direction in simplex")
            if step < _PIV_TOL:
                degenerate += 1
                if degenerate > switch_at:
                    bland = True
        raise SimplexError("simplex iteration limit exceeded")

    def _step(self, j: int) -> float | None:
        """Move variable j off its bound; returns the step, None if unbounded."""
        sign = 1.0 if self.state[j] == _AT_LB else -1.0
        rate = -sign * self.t[:, j]
        limits = np.full(self.m, np.inf)
        down = rate < -_PIV_TOL
        up = rate > _PIV_TOL
        lo_b = self.lo[self.basis]
        hi_b = self.hi[self.basis]
        limits[down] = (self.xb[down] - lo_b[down]) / -rate[down]
        limits[up] = (hi_b[up] - self.xb[up]) / rate[up]
        np.maximum(limits, 0.0, out=limits)
        row_step = limits.min() if self.m else np.inf
        span = self.hi[j] - self.lo[j]
        if span <= row_step:
            if not np.isfinite(span):
                return None
            self.state[j] = _AT_UB if sign > 0 else _AT_LB
            self.xb += rate * span
            return float(span)
        if not np.isfinite(row_step):
            return None
        ties = np.flatnonzero(limits <= row_step + _PIV_TOL)
        r = int(ties[np.argmax(np.abs(self.t[ties, j]))])
        leaving = self.basis[r]
        self.state[leaving] = _AT_LB if rate[r] < 0 else _AT_UB
        entering_value = (self.lo[j] if sign > 0 else self.hi[j]) + sign * row_step
        self.xb += rate * row_step
        pivot = self.t[r, j]
        self.t[r, :] /= pivot
        col = self.t[:, j].copy()
        col[r] = 0.0
        self.t -= np.outer(col, self.t[r, :])
        self.t[:, j] = 0.0
        self.t[r, j] = 1.0
        self.state[j] = _BASIC
        self.basis[r] = j
        self.xb[r] = entering_value
        return float(row_step)


@dataclass(frozen=True)
class LpProblem:
    """Master-node relaxation: maximize over (x, theta) subject to the
    cut pool, the cardinality equality ``sum x = p``, and box bounds
    (node fixings pin individual coordinates)."""

    num_sites: int
    p: int
    cuts: tuple[CutRow, ...]
    lower: np.ndarray  # (num_sites + 1,), theta last
    upper: np.ndarray
    objective: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        n = self.num_sites
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.shape != (n + 1,) or upper.shape != (n + 1,):
            raise ValueError("bounds must cover the sites plus theta")
        if np.any(lower > upper):
            raise ValueError("lower bound above upper bound")
        obj = self.objective
        if obj is None:
            obj = np.zeros(n + 1)
            obj[n] = 1.0
        obj = np.asarray(obj, dtype=np.float64)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "cuts", tuple(self.cuts))

    @classmethod
    def master(
        cls,
        num_sites: int,
        p: int,
        cuts=(),
        fixed_zero=(),
        fixed_one=(),
    ) -> "LpProblem":
        lower = np.zeros(num_sites + 1)
        upper = np.ones(num_sites + 1)
        for j in fixed_zero:
            upper[j] = 0.0
        for j in fixed_one:
            lower[j] = 1.0
        return cls(num_sites, p, tuple(cuts), lower, upper)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    theta: float | None
    objective: float | None


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve a master-node relaxation; infeasibility is a status, not an
    error (node fixings can contradict the cardinality row)."""
    n = problem.num_sites
    rows = len(problem.cuts)
    a_ub = np.zeros((rows, n + 1))
    b_ub = np.zeros(rows)
    for k, cut in enumerate(problem.cuts):
        a_ub[k, :n] = -cut.coeffs
        a_ub[k, n] = 1.0
        b_ub[k] = cut.intercept
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = 1.0
    b_eq = np.array([float(problem.p)])
    status, v, obj = maximize_linear(
        problem.objective, a_ub, b_ub, a_eq, b_eq, problem.lower, problem.upper
    )
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, None, None, None)
    return LpSolution(status, v[:n], float(v[n]), obj)
