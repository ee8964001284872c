"""Seeded planar instance generation.

Customers and candidate sites are drawn on the integer lattice of a
square (side 50 by default); utilities follow the exponential
distance-decay law ``w[i, j] = exp(alpha[j] - beta * d[i, j])`` with
Euclidean distances.  Demand is uniform unless ``demand="random"``.

Reproducibility contract: all randomness comes from the splitmix64
generator below, so instances are bit-reproducible across platforms and
implementations.  The draw order is fixed: customer coordinates first
(x then y, customer by customer), then site coordinates, then -- only
for ``demand="random"`` -- one unit double per customer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import Instance

__all__ = ["SplitMix64", "GeneratorSpec", "generate_instance", "weights_from_geometry"]

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The splitmix64 mixer (Steele, Lea & Flood's finalizer).

    State advances by the 64-bit golden-ratio constant; outputs are the
    mixed state.  ``randbelow(n)`` maps the top 53 bits through integer
    arithmetic, ``(bits53 * n) >> 53``, and ``unit()`` returns
    ``bits53 / 2**53``.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        return ((self.next_u64() >> 11) * n) >> 53

    def unit(self) -> float:
        return (self.next_u64() >> 11) / 9007199254740992.0  # 2**53


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one random planar instance."""

    num_customers: int
    num_sites: int
    p: int
    r: int
    beta: float = 0.1
    alpha: tuple[float, ...] | float = 0.0
    seed: int = 0
    square_side: float = 50.0
    demand: str = "uniform"  # or "random"

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.square_side <= 0:
            raise ValueError("square_side must be positive")
        if self.demand not in ("uniform", "random"):
            raise ValueError("demand must be 'uniform' or 'random'")

    def alpha_array(self) -> np.ndarray:
        if np.isscalar(self.alpha):
            return np.full(self.num_sites, float(self.alpha))
        arr = np.asarray(self.alpha, dtype=np.float64)
        if arr.shape != (self.num_sites,):
            raise ValueError("alpha must be a scalar or one value per site")
        return arr

    @property
    def name(self) -> str:
        return f"{self.num_customers}-{self.num_sites}-{self.p}-{self.r}"


def _lattice_points(rng: SplitMix64, count: int, side: float) -> list[tuple[int, int]]:
    top = int(side) + 1  # integer coordinates 0..floor(side)
    return [(rng.randbelow(top), rng.randbelow(top)) for _ in range(count)]


def weights_from_geometry(
    alpha, beta: float, customer_xy, site_xy
) -> np.ndarray:
    """Exponentiated utilities from stored coordinates; lets beta sweeps
    rebuild w without regenerating the geometry."""
    cust = np.asarray(customer_xy, dtype=np.float64)
    site = np.asarray(site_xy, dtype=np.float64)
    dist = np.sqrt(((cust[:, None, :] - site[None, :, :]) ** 2).sum(axis=2))
    return np.exp(np.asarray(alpha, dtype=np.float64)[None, :] - beta * dist)


def generate_instance(spec: GeneratorSpec) -> tuple[Instance, dict]:
    """Draw a seeded instance; returns it with its geometry sidecar.

    No pre-existing facilities (ul = uf = 0).  Coincident lattice points
    are allowed; the model is well-defined under them.
    """
    rng = SplitMix64(spec.seed)
    customer_xy = _lattice_points(rng, spec.num_customers, spec.square_side)
    site_xy = _lattice_points(rng, spec.num_sites, spec.square_side)
    alpha = spec.alpha_array()
    w = weights_from_geometry(alpha, spec.beta, customer_xy, site_xy)
    if spec.demand == "random":
        raw = np.array([rng.unit() for _ in range(spec.num_customers)])
        h = raw / raw.sum()
    else:
        h = np.full(spec.num_customers, 1.0 / spec.num_customers)
    inst = Instance(
        h=h,
        w=w,
        ul=np.zeros(spec.num_customers),
        uf=np.zeros(spec.num_customers),
        p=spec.p,
        r=spec.r,
    )
    geometry = {
        "beta": float(spec.beta),
        "alpha": [float(a) for a in alpha],
        "customer_xy": [[int(x), int(y)] for x, y in customer_xy],
        "site_xy": [[int(x), int(y)] for x, y in site_xy],
        "seed": int(spec.seed),
        "square_side": float(spec.square_side),
        "demand": spec.demand,
    }
    return inst, geometry
