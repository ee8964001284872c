"""Linear valid inequalities for the hypograph constraints.

Two families linearize ``theta <= L(x, y)`` for a fixed follower set Y:

* submodular cuts -- the share, seen as a set function of the leader's
  sites, has diminishing returns, so the classic marginal-value
  linearization anchored at any site subset S is valid;
* bulge cuts -- supporting hyperplanes of the concave overestimator
  :func:`seqcflp.model.bulge_value`.

The module also carries the tangent cuts used by the harmonic-surrogate
solver (:mod:`seqcflp.approx`) and a second-order-cone feasibility check
that cross-validates the bulge algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .model import DomainError, Instance, _vector

__all__ = [
    "CutFamily",
    "CutRow",
    "FollowerSetContext",
    "leader_share_sets",
    "submodular_cut",
    "select_submodular_anchor",
    "bulge_cut",
    "soc_certificate_check",
    "surrogate_s_cut",
    "surrogate_t_cut",
]

_TIE_TOL = 1e-12


class CutFamily(str, Enum):
    SUBMODULAR = "submodular"
    BULGE = "bulge"
    APPROX_SEP = "approx_sep"
    SURROGATE_S = "surrogate_s"
    SURROGATE_T = "surrogate_t"


@dataclass(frozen=True)
class CutRow:
    """An affine inequality with provenance.

    For the master families (submodular, bulge) the row reads
    ``theta <= intercept + coeffs . x`` and is valid for every binary x
    against the share of the follower set that generated it.  For the
    surrogate families it lower-bounds an auxiliary variable:
    ``aux >= intercept + coeffs . x``.
    """

    intercept: float
    coeffs: np.ndarray
    family: CutFamily
    follower_set: tuple[int, ...] | None = None
    anchor_set: tuple[int, ...] | None = None
    customer: int | None = None
    site: int | None = None

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.float64)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "intercept", float(self.intercept))

    def rhs(self, x) -> float:
        return self.intercept + float(self.coeffs @ np.asarray(x, dtype=np.float64))


def _site_mask(sites: Iterable[int], n: int) -> np.ndarray:
    mask = np.zeros(n)
    idx = list(sites)
    if idx:
        mask[idx] = 1.0
    return mask


class FollowerSetContext:
    """Per-(instance, follower set) tables reused by every anchor.

    Precomputes the saturated marginals rho_Y(J \\ {k}; k) once; after
    that each cut, anchor improvement step, or batched anchor scan costs
    O(|I| |J|).
    """

    def __init__(self, inst: Instance, follower_sites: Iterable[int]):
        self.inst = inst
        n = inst.num_sites
        self.follower_sites = tuple(sorted(int(j) for j in set(follower_sites)))
        self.y_mask = _site_mask(self.follower_sites, n)
        self._outside_y = 1.0 - self.y_mask
        w, h = inst.w, inst.h
        num_full = inst.ul + w.sum(axis=1)
        den_full = num_full + inst.uf
        f_full = num_full / den_full
        # dropping site k from the full set: the union loses w_k unless k
        # is also a follower site
        num_minus = num_full[:, None] - w
        den_minus = den_full[:, None] - w * self._outside_y[None, :]
        self.rho_max = h @ (f_full[:, None] - num_minus / den_minus)

    def _stats(self, s_mask: np.ndarray):
        inst = self.inst
        num = inst.ul + inst.w @ s_mask
        den = inst.ul + inst.uf + inst.w @ np.maximum(s_mask, self.y_mask)
        if np.any(den <= 0):
            raise DomainError("empty leader and follower sets with zero base utility")
        return num, den

    def lead_value(self, s_mask: np.ndarray) -> float:
        num, den = self._stats(s_mask)
        return float(self.inst.h @ (num / den))

    def _rho_add(self, s_mask: np.ndarray, num, den) -> np.ndarray:
        """Marginals rho_Y(S; k) for k outside S (other entries unusable)."""
        w, h = self.inst.w, self.inst.h
        outside_union = 1.0 - np.maximum(s_mask, self.y_mask)
        gain = (num[:, None] + w) / (den[:, None] + w * outside_union[None, :])
        return h @ (gain - (num / den)[:, None])

    def _rho_drop(self, s_mask: np.ndarray, num, den) -> np.ndarray:
        """Marginals rho_Y(S \\ {k}; k) for k inside S.

        Entries outside S are garbage (their denominators may even hit
        zero) and must be masked by the caller.
        """
        w, h = self.inst.w, self.inst.h
        with np.errstate(divide="ignore", invalid="ignore"):
            lost = (num[:, None] - w) / (den[:, None] - w * self._outside_y[None, :])
        return h @ ((num / den)[:, None] - lost)

    def cut_at(self, s_mask: np.ndarray) -> CutRow:
        num, den = self._stats(s_mask)
        value = float(self.inst.h @ (num / den))
        coeffs = np.where(s_mask > 0.5, self.rho_max, self._rho_add(s_mask, num, den))
        intercept = value - float(self.rho_max[s_mask > 0.5].sum())
        anchor = tuple(int(j) for j in np.flatnonzero(s_mask > 0.5))
        return CutRow(
            intercept,
            coeffs,
            CutFamily.SUBMODULAR,
            follower_set=self.follower_sites,
            anchor_set=anchor,
        )

    def anchor_objective(self, s_mask: np.ndarray, x_hat: np.ndarray) -> float:
        """The anchored cut's right-hand side evaluated at ``x_hat``."""
        num, den = self._stats(s_mask)
        value = float(self.inst.h @ (num / den))
        inside = s_mask > 0.5
        out = ~inside
        value -= float(self.rho_max[inside] @ (1.0 - x_hat[inside]))
        value += float(self._rho_add(s_mask, num, den)[out] @ x_hat[out])
        return value

    def greedy_anchor(self, x_hat: np.ndarray) -> np.ndarray:
        """Steepest single-site descent from {j : x_hat[j] >= 0.5}."""
        s_mask = (x_hat >= 0.5).astype(np.float64)
        slack = 1.0 - x_hat
        while True:
            num, den = self._stats(s_mask)
            inside = s_mask > 0.5
            delta = np.where(
                inside,
                -(self._rho_drop(s_mask, num, den) - self.rho_max) * slack,
                (self._rho_add(s_mask, num, den) - self.rho_max) * slack,
            )
            k = int(np.argmin(delta))
            if delta[k] >= -_TIE_TOL:
                return s_mask
            s_mask = s_mask.copy()
            s_mask[k] = 1.0 - s_mask[k]

    def anchor_objective_batch(self, masks: np.ndarray, x_hat: np.ndarray) -> np.ndarray:
        """``anchor_objective`` for every row of a (M, |J|) mask matrix."""
        inst = self.inst
        w, h = inst.w, inst.h
        n_i, n_j = w.shape
        out = np.empty(masks.shape[0])
        chunk = max(1, 2_000_000 // (n_i * n_j))
        for lo in range(0, masks.shape[0], chunk):
            part = masks[lo : lo + chunk]
            num = inst.ul[None, :] + part @ w.T
            union = np.maximum(part, self.y_mask[None, :])
            den = (inst.ul + inst.uf)[None, :] + union @ w.T
            if np.any(den <= 0):
                raise DomainError(
                    "empty leader and follower sets with zero base utility"
                )
            base = (num / den) @ h
            # gain[m, i, j]: share of customer i after adding site j to the
            # m-th anchor set; meaningful only for j outside that set
            gain = (num[:, :, None] + w[None, :, :]) / (
                den[:, :, None] + w[None, :, :] * (1.0 - union)[:, None, :]
            )
            rho_add = np.einsum("i,mij->mj", h, gain) - base[:, None]
            values = base - part @ (self.rho_max * (1.0 - x_hat))
            values += ((1.0 - part) * rho_add) @ x_hat
            out[lo : lo + chunk] = values
        return out


def leader_share_sets(inst: Instance, leader_sites, follower_sites) -> float:
    """Leader's share when both players open exact site sets."""
    ctx = FollowerSetContext(inst, follower_sites)
    return ctx.lead_value(_site_mask(leader_sites, inst.num_sites))


def submodular_cut(inst: Instance, anchor_sites, follower_sites) -> CutRow:
    """Marginal-value linearization anchored at the site subset S.

    ``theta <= L_Y(S) - sum_{k in S} rho_Y(J \\ {k}; k)(1 - x_k)
    + sum_{k not in S} rho_Y(S; k) x_k`` -- tight at x = 1_S and valid at
    every binary x against the follower set Y.
    """
    ctx = FollowerSetContext(inst, follower_sites)
    return ctx.cut_at(_site_mask(anchor_sites, inst.num_sites))


_subset_masks_cache: dict[int, np.ndarray] = {}


def _subset_masks(n: int) -> np.ndarray:
    masks = _subset_masks_cache.get(n)
    if masks is None:
        codes = np.arange(2**n, dtype=np.uint32)
        masks = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)
        _subset_masks_cache[n] = masks
    return masks


_EXHAUSTIVE_LIMIT = 12


def select_submodular_anchor(
    inst: Instance, x_hat, follower_sites, method: str = "auto"
) -> tuple[int, ...]:
    """Anchor set minimizing the cut's right-hand side at ``x_hat``.

    Binary incumbents are anchored at their own support (the exact
    minimizer).  Fractional incumbents are minimized exhaustively when
    |J| <= 12, else by greedy descent; minimizers are tied in general,
    so ties prefer anchors with large mass under ``x_hat``, then fewer
    sites.
    """
    xv = _vector(x_hat, inst.num_sites, "x_hat")
    n = inst.num_sites
    if np.all((xv < 1e-9) | (xv > 1 - 1e-9)):
        return tuple(int(j) for j in np.flatnonzero(xv > 0.5))
    ctx = FollowerSetContext(inst, follower_sites)
    if method == "greedy" or (method == "auto" and n > _EXHAUSTIVE_LIMIT):
        mask = ctx.greedy_anchor(xv)
        return tuple(int(j) for j in np.flatnonzero(mask > 0.5))
    if method not in ("auto", "exhaustive"):
        raise ValueError(f"unknown anchor method: {method!r}")
    chosen = _exhaustive_anchor_mask(ctx, xv)
    return tuple(int(j) for j in np.flatnonzero(chosen > 0.5))


def _exhaustive_anchor_mask(ctx: FollowerSetContext, x_hat: np.ndarray) -> np.ndarray:
    """Exact minimizer over all 2^|J| anchors; ties prefer the anchor
    carrying the most incumbent mass, then the smallest set."""
    masks = _subset_masks(ctx.inst.num_sites)
    values = ctx.anchor_objective_batch(masks, x_hat)
    best = values.min()
    tied = np.flatnonzero(values <= best + _TIE_TOL)
    tied_masks = masks[tied]
    mass = tied_masks @ x_hat
    size = tied_masks.sum(axis=1)
    order = np.lexsort((tied, size, -mass))
    return tied_masks[order[0]]


def bulge_cut(inst: Instance, x_hat, y_hat) -> CutRow:
    """Supporting hyperplane of the concave overestimator at ``x_hat``."""
    from .model import bulge_gradient, bulge_value

    xv = _vector(x_hat, inst.num_sites, "x_hat")
    yv = _vector(y_hat, inst.num_sites, "y_hat")
    value = bulge_value(inst, xv, yv)
    grad = bulge_gradient(inst, xv, yv)
    follower = tuple(int(j) for j in np.flatnonzero(yv > 0.5))
    return CutRow(
        value - float(grad @ xv),
        grad,
        CutFamily.BULGE,
        follower_set=follower,
        anchor_set=tuple(int(j) for j in np.flatnonzero(xv > 1e-9)),
    )


def soc_certificate_check(inst: Instance, theta: float, x, y, tol: float = 1e-9) -> bool:
    """Certify ``theta <= bulge_value(x, y)`` through cone feasibility.

    Uses the natural certificate: each customer's own share term.  The
    per-customer constraint ``theta_i <= Q_i / P_i`` is equivalent to the
    rotated second-order cone membership

        || [ 2 sqrt(w_ij) (1 - x_j) for j in supp(y);  2 sqrt(uf_i);
             P_i + theta_i - 1 ] ||_2  <=  P_i - theta_i + 1,

    which is checked explicitly; only used as a cross-validation of the
    bulge algebra, never in the solve path.
    """
    from .model import _bulge_terms

    xv = _vector(x, inst.num_sites, "x")
    yv = _vector(y, inst.num_sites, "y")
    num, den = _bulge_terms(inst, xv, yv)
    if np.any(den <= 0):
        raise DomainError("zero denominator in cone certificate")
    theta_i = num / den
    inside = yv > 0.5
    quad = 4.0 * (inst.w[:, inside] * (1.0 - xv[inside]) ** 2).sum(axis=1)
    quad = quad + 4.0 * inst.uf
    lhs = np.sqrt(quad + (den + theta_i - 1.0) ** 2)
    rhs = den - theta_i + 1.0
    if not np.all(lhs <= rhs + tol):
        return False
    return theta <= float(inst.h @ theta_i) + tol


def surrogate_s_cut(inst: Instance, customer: int, x_hat) -> CutRow:
    """Tangent of ``1 / a_i(x)`` at a binary anchor.

    Supports the auxiliary variable bounding the reciprocal of the
    anchored customer's leader utility in the harmonic-surrogate model:
    ``s_i >= (ul_i + sum_k w_ik (2 xhat_k - x_k)) / a_i(xhat)^2``.
    """
    xv = _vector(x_hat, inst.num_sites, "x_hat")
    row = inst.w[customer]
    base = float(inst.ul[customer] + row @ xv)
    if base <= 0:
        raise DomainError("anchor gives the customer zero leader utility")
    scale = base * base
    return CutRow(
        (inst.ul[customer] + 2.0 * float(row @ xv)) / scale,
        -row / scale,
        CutFamily.SURROGATE_S,
        customer=int(customer),
        anchor_set=tuple(int(j) for j in np.flatnonzero(xv > 0.5)),
    )


def surrogate_t_cut(inst: Instance, customer: int, site: int, x_hat) -> CutRow:
    """Tangent of the perspective bound on ``(1 - x_j) / a_i(x)``.

    The ratio is non-convex, but fixing ``x_j = 0`` and taking the
    perspective of the restriction recovers convexity; the returned row
    is that function's supporting hyperplane at the binary anchor.  An
    anchor with ``xhat_j = 1`` degenerates to the trivial ``t_ij >= 0``.
    """
    xv = _vector(x_hat, inst.num_sites, "x_hat")
    n = inst.num_sites
    if xv[site] > 0.5:
        return CutRow(
            0.0,
            np.zeros(n),
            CutFamily.SURROGATE_T,
            customer=int(customer),
            site=int(site),
            anchor_set=tuple(int(j) for j in np.flatnonzero(xv > 0.5)),
        )
    row = inst.w[customer]
    others = float(row @ xv) - float(row[site] * xv[site])
    base = float(inst.ul[customer]) + others
    if base <= 0:
        raise DomainError("anchor gives the customer zero leader utility off-site")
    scale = base * base
    steep = float(inst.ul[customer]) + 2.0 * others
    coeffs = -row / scale
    coeffs[site] = -steep / scale
    return CutRow(
        steep / scale,
        coeffs,
        CutFamily.SURROGATE_T,
        customer=int(customer),
        site=int(site),
        anchor_set=tuple(int(j) for j in np.flatnonzero(xv > 0.5)),
    )
