"""Problem data and market-share functions.

A duopoly splits customer demand according to a multinomial-logit choice
model: customer ``i`` patronizes an open facility ``j`` with probability
proportional to its exponentiated utility ``w[i, j]``.  The leader opens
``p`` facilities among the candidate sites, the follower answers with
``r``, and both may own pre-existing facilities whose aggregate utilities
enter as ``ul[i]`` / ``uf[i]``.

Everything here is a pure function of an immutable :class:`Instance`;
evaluation cost is Theta(|I| * |J|) with the per-customer denominators
computed once per call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "Instance",
    "LeaderSolution",
    "FollowerSolution",
    "leader_share_plus",
    "leader_share_max",
    "follower_share",
    "bulge_value",
    "bulge_gradient",
]


class DomainError(ValueError):
    """A market-share evaluation was requested outside its domain."""


def _frozen_f64(values, shape=None) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Instance:
    """One sequential facility-location instance.

    Parameters
    ----------
    h : (|I|,) nonnegative demand shares, summing to 1.
    w : (|I|, |J|) strictly positive exponentiated utilities.
    ul, uf : (|I|,) nonnegative utilities of pre-existing leader /
        follower facilities.
    p, r : leader / follower budgets, with ``p + r <= |J|``.
    """

    h: np.ndarray
    w: np.ndarray
    ul: np.ndarray
    uf: np.ndarray
    p: int
    r: int

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("w must be a 2-d array")
        n_i, n_j = w.shape
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "h", _frozen_f64(self.h, (n_i,)))
        object.__setattr__(self, "ul", _frozen_f64(self.ul, (n_i,)))
        object.__setattr__(self, "uf", _frozen_f64(self.uf, (n_i,)))
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "r", int(self.r))
        self._validate()

    def _validate(self):
        n_i, n_j = self.w.shape
        if n_i < 1 or n_j < 1:
            raise ValueError("instance needs at least one customer and one site")
        if np.any(self.h < 0):
            raise ValueError("demand shares h must be nonnegative")
        if abs(float(self.h.sum()) - 1.0) > 1e-9:
            raise ValueError(f"demand shares h must sum to 1 (got {self.h.sum()!r})")
        if not np.all(self.w > 0):
            raise ValueError("utilities w must be strictly positive")
        if np.any(self.ul < 0) or np.any(self.uf < 0):
            raise ValueError("pre-existing utilities must be nonnegative")
        if self.p < 1 or self.r < 1:
            raise ValueError("budgets p and r must be positive integers")
        if self.p + self.r > n_j:
            raise ValueError(
                f"p + r = {self.p + self.r} exceeds the {n_j} candidate sites"
            )

    @property
    def num_customers(self) -> int:
        return self.w.shape[0]

    @property
    def num_sites(self) -> int:
        return self.w.shape[1]


def _vector(arg, n: int, name: str) -> np.ndarray:
    """Accept a solution object or a bare array of length ``n``."""
    values = getattr(arg, "x", None)
    if values is None:
        values = getattr(arg, "y", arg)
    vec = np.asarray(values, dtype=np.float64).reshape(-1)
    if vec.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {vec.shape}")
    return vec


@dataclass(frozen=True)
class LeaderSolution:
    """Leader placement: ``x[j]`` in [0, 1], binary for actual decisions."""

    x: np.ndarray
    is_binary: bool | None = None

    def __post_init__(self):
        x = _frozen_f64(self.x)
        if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
            raise ValueError("leader variables must lie in [0, 1]")
        object.__setattr__(self, "x", x)
        binary = bool(np.all((x < 1e-9) | (x > 1 - 1e-9)))
        if self.is_binary is None:
            object.__setattr__(self, "is_binary", binary)
        elif self.is_binary and not binary:
            raise ValueError("is_binary set on a fractional vector")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.x > 0.5))


@dataclass(frozen=True)
class FollowerSolution:
    """Follower placement: a 0/1 incidence vector."""

    y: np.ndarray

    def __post_init__(self):
        y = _frozen_f64(self.y)
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("follower variables must be 0/1")
        object.__setattr__(self, "y", y)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.y > 0.5))


def _share(inst: Instance, num: np.ndarray, den: np.ndarray) -> float:
    if np.any(den <= 0):
        raise DomainError("zero denominator: no open facility and no base utility")
    return float(np.dot(inst.h, num / den))


def leader_share_plus(inst: Instance, x, y) -> float:
    """Leader's market share with additive denominators.

    ``sum_i h_i (ul_i + w_i.x) / (ul_i + uf_i + w_i.(x + y))`` -- the
    natural objective when leader and follower never co-locate.
    """
    xv = _vector(x, inst.num_sites, "x")
    yv = _vector(y, inst.num_sites, "y")
    num = inst.ul + inst.w @ xv
    den = inst.ul + inst.uf + inst.w @ (xv + yv)
    return _share(inst, num, den)


def leader_share_max(inst: Instance, x, y) -> float:
    """Leader's share with co-location collapsed: denominators use max(x, y).

    Agrees with :func:`leader_share_plus` on disjoint supports, and its
    inner minimum over follower placements agrees at every leader choice,
    which makes the follower's feasible set independent of ``x``.
    """
    xv = _vector(x, inst.num_sites, "x")
    yv = _vector(y, inst.num_sites, "y")
    num = inst.ul + inst.w @ xv
    den = inst.ul + inst.uf + inst.w @ np.maximum(xv, yv)
    return _share(inst, num, den)


def follower_share(inst: Instance, x, y) -> float:
    """Follower's market share; requires disjoint supports."""
    xv = _vector(x, inst.num_sites, "x")
    yv = _vector(y, inst.num_sites, "y")
    if np.any((xv > 0.5) & (yv > 0.5)):
        raise DomainError("leader and follower supports overlap")
    num = inst.uf + inst.w @ yv
    den = inst.ul + inst.uf + inst.w @ (xv + yv)
    return _share(inst, num, den)


def _bulge_terms(inst: Instance, xv: np.ndarray, yv: np.ndarray):
    """Per-customer numerator / denominator of the concave overestimator."""
    if not np.all((yv == 0.0) | (yv == 1.0)):
        raise DomainError("the overestimator is defined for binary y only")
    num = inst.ul + inst.w @ (-yv * xv * xv + (1.0 + yv) * xv)
    den = inst.ul + inst.uf + inst.w @ ((1.0 - yv) * xv + yv)
    return num, den


def bulge_value(inst: Instance, x, y) -> float:
    """Concave overestimator of the leader's share, exact at binary ``x``.

    For fixed binary ``y`` the quadratic numerator bulges the share
    function up just enough to make it concave in ``x`` over [0, 1]^|J|
    while agreeing with :func:`leader_share_max` at every binary point.
    """
    xv = _vector(x, inst.num_sites, "x")
    yv = _vector(y, inst.num_sites, "y")
    num, den = _bulge_terms(inst, xv, yv)
    return _share(inst, num, den)


def bulge_gradient(inst: Instance, x, y) -> np.ndarray:
    """Gradient of :func:`bulge_value` in ``x`` at ``(x, y)``."""
    xv = _vector(x, inst.num_sites, "x")
    yv = _vector(y, inst.num_sites, "y")
    num, den = _bulge_terms(inst, xv, yv)
    if np.any(den <= 0):
        raise DomainError("zero denominator: no open facility and no base utility")
    # d/dx_j of (num_i / den_i): the denominator term only moves where
    # y_j = 0, the numerator term carries the quadratic's slope.
    t_den = inst.w.T @ (inst.h * num / (den * den))
    t_num = inst.w.T @ (inst.h / den)
    return -(1.0 - yv) * t_den + (-2.0 * yv * xv + 1.0 + yv) * t_num
