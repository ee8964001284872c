"""Follower best-response search.

Given an incumbent ``(x_hat, theta_hat)`` of the master problem, find a
follower placement whose hypograph constraint is violated.  The exact
search enumerates all r-subsets of the candidate sites with incremental
per-customer denominators; the approximate search minimizes a linear
chord over-estimator of the share and costs one sort.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations, islice
from math import comb

import numpy as np

from .model import DomainError, Instance, leader_share_max, _vector

__all__ = [
    "SeparationMode",
    "SeparationResult",
    "SeparationBudgetError",
    "exact_best_response",
    "approx_separation",
    "approx_separation_coefficients",
    "hybrid_separation",
    "DEFAULT_ENUMERATION_BUDGET",
]

#: enumeration guard: C(|J|, r) * |I| evaluations must stay below this
DEFAULT_ENUMERATION_BUDGET = 500_000_000


class SeparationMode(str, Enum):
    EXACT = "exact"
    APPROXIMATE = "approximate"


class SeparationBudgetError(RuntimeError):
    """Exact enumeration would exceed its evaluation budget."""


@dataclass(frozen=True)
class SeparationResult:
    """A follower response with exactly r open sites.

    ``value`` is the true share ``L(x_hat, y)`` in exact mode, or the
    linear bound in approximate mode (the bound over-estimates the
    share, so a violated bound certifies a violated constraint).
    """

    y: np.ndarray
    value: float
    mode: SeparationMode
    violated: bool = False

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.y > 0.5))


def exact_best_response(
    inst: Instance,
    x_hat,
    theta_hat: float | None = None,
    tol: float = 1e-6,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> SeparationResult:
    """Minimize ``L(x_hat, y)`` over all follower sets of size exactly r.

    Ties are broken toward the lexicographically smallest support.  Cost
    is O(C(|J|, r) * |I|) and guarded by ``budget``.
    """
    xv = _vector(x_hat, inst.num_sites, "x_hat")
    n, r = inst.num_sites, inst.r
    if comb(n, r) * inst.num_customers > budget:
        raise SeparationBudgetError(
            f"C({n},{r}) * {inst.num_customers} evaluations exceed budget {budget}"
        )
    num = inst.ul + inst.w @ xv
    den0 = inst.ul + inst.uf + inst.w @ xv
    # a follower site adds w_ij * (1 - x_j) to the denominator: the
    # max(x, y) form for binary y at any x in [0, 1]
    gain_by_site = (inst.w * (1.0 - xv)[None, :]).T.copy()  # (|J|, |I|)
    hnum = inst.h * num

    best_value = np.inf
    best_sites: tuple[int, ...] | None = None
    combos = combinations(range(n), r)
    chunk = max(1, 1_000_000 // max(inst.num_customers * r, 1))
    offset = 0
    while True:
        block = list(islice(combos, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.intp)
        den = den0[None, :] + gain_by_site[idx].sum(axis=1)
        if np.any(den <= 0):
            raise DomainError("zero denominator in follower enumeration")
        values = (hnum[None, :] / den).sum(axis=1)
        k = int(np.argmin(values))
        if values[k] < best_value:
            best_value = float(values[k])
            best_sites = block[k]
        offset += len(block)

    assert best_sites is not None
    y = np.zeros(n)
    y[list(best_sites)] = 1.0
    violated = theta_hat is not None and best_value < theta_hat - tol
    return SeparationResult(y, best_value, SeparationMode.EXACT, violated)


def approx_separation_coefficients(inst: Instance, x_hat):
    """Chord over-estimator constants: ``L(x_hat, y) <= alpha - beta . y``.

    Per customer the share is convex in the follower's added utility,
    which ranges between the r smallest and r largest site gains; the
    chord across that interval gives an affine bound in ``y``, valid for
    every follower set of size exactly r.
    """
    xv = _vector(x_hat, inst.num_sites, "x_hat")
    r = inst.r
    base = inst.ul + inst.w @ xv
    if np.any(base <= 0):
        raise DomainError("a customer sees zero leader utility at x_hat")
    gains = inst.w * (1.0 - xv)[None, :]
    ranked = np.sort(gains, axis=1)
    low = inst.uf + ranked[:, :r].sum(axis=1)
    high = inst.uf + ranked[:, -r:].sum(axis=1)
    spread = (base + high) * (base + low)
    alpha = float(inst.h @ (base * (base + high + low - inst.uf) / spread))
    beta = ((inst.h * base / spread)[:, None] * gains).sum(axis=0)
    return alpha, beta


def approx_separation(
    inst: Instance,
    x_hat,
    theta_hat: float | None = None,
    tol: float = 1e-6,
) -> SeparationResult:
    """Minimize the chord bound: keep the r largest ``beta`` entries.

    ``value`` is the bound ``alpha - beta . y``, an over-estimate of the
    true share of the returned response.
    """
    n = inst.num_sites
    alpha, beta = approx_separation_coefficients(inst, x_hat)
    order = np.lexsort((np.arange(n), -beta))
    chosen = np.sort(order[: inst.r])
    y = np.zeros(n)
    y[chosen] = 1.0
    value = alpha - float(beta[chosen].sum())
    violated = theta_hat is not None and value < theta_hat - tol
    return SeparationResult(y, value, SeparationMode.APPROXIMATE, violated)


def hybrid_separation(
    inst: Instance,
    x_hat,
    theta_hat: float,
    tol: float = 1e-6,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> SeparationResult:
    """Approximate separation first, exact enumeration as the fallback.

    If the chord bound already certifies a violation the approximate
    response is returned with its value recomputed as the true share;
    otherwise the exact search runs, so ``violated=False`` is only ever
    returned with an exact certificate.
    """
    guess = approx_separation(inst, x_hat, theta_hat=theta_hat, tol=tol)
    if guess.violated:
        true_value = leader_share_max(inst, x_hat, guess.y)
        return SeparationResult(guess.y, true_value, SeparationMode.APPROXIMATE, True)
    return exact_best_response(inst, x_hat, theta_hat=theta_hat, tol=tol, budget=budget)
