"""Brute-force ground truth by double enumeration.

Evaluates the certified objective ``min_y L(x, y)`` for every leader
placement of size p; the benchmark every solver in this package is
tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .model import Instance
from .separation import exact_best_response

__all__ = ["OracleBudgetError", "EnumerationResult", "solve_enumeration"]

DEFAULT_ORACLE_BUDGET = 200_000_000


class OracleBudgetError(RuntimeError):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class EnumerationResult:
    z_star: float
    x_star: np.ndarray
    x_support: tuple[int, ...]
    evaluations: int


def solve_enumeration(
    inst: Instance, budget: int = DEFAULT_ORACLE_BUDGET
) -> EnumerationResult:
    """Exact optimum with a lexicographically smallest optimal support.

    Refuses outright (never truncates) when
    ``C(|J|, p) * C(|J|, r) * |I|`` exceeds ``budget``.
    """
    n, p, r = inst.num_sites, inst.p, inst.r
    work = comb(n, p) * comb(n, r) * inst.num_customers
    if work > budget:
        raise OracleBudgetError(
            f"enumeration needs {work} share evaluations, budget is {budget}"
        )
    best_value = -np.inf
    best_sites: tuple[int, ...] | None = None
    for sites in combinations(range(n), p):
        x = np.zeros(n)
        x[list(sites)] = 1.0
        inner = exact_best_response(inst, x, budget=budget)
        if inner.value > best_value:
            best_value = inner.value
            best_sites = sites
    assert best_sites is not None
    x_star = np.zeros(n)
    x_star[list(best_sites)] = 1.0
    return EnumerationResult(float(best_value), x_star, best_sites, work)
