import numpy as np
import pytest

from seqcflp.model import Instance


@pytest.fixture
def t1() -> Instance:
    """Two identical sites, one customer, no incumbents."""
    return Instance(h=[1.0], w=[[1.0, 1.0]], ul=[0.0], uf=[0.0], p=1, r=1)


@pytest.fixture
def t3() -> Instance:
    """Three sites with utilities 4:2:1 and unit pre-existing utilities."""
    return Instance(h=[1.0], w=[[4.0, 2.0, 1.0]], ul=[1.0], uf=[1.0], p=1, r=1)


@pytest.fixture
def ex1() -> Instance:
    """The two-site instance whose bulge closed form is (x1 - x2^2 + 2 x2) / (x1 + 1)."""
    return Instance(h=[1.0], w=[[1.0, 1.0]], ul=[0.0], uf=[0.0], p=1, r=1)


def random_instance(
    rng: np.random.Generator,
    max_customers: int = 15,
    max_sites: int = 12,
    max_budget: int = 3,
    with_incumbents: bool = True,
) -> Instance:
    n_i = int(rng.integers(1, max_customers + 1))
    n_j = int(rng.integers(2 * max_budget, max_sites + 1))
    p = int(rng.integers(1, max_budget + 1))
    r = int(rng.integers(1, max_budget + 1))
    h = rng.random(n_i) + 0.05
    h /= h.sum()
    w = np.exp(rng.normal(0.0, 1.0, (n_i, n_j)))
    if with_incumbents:
        ul = np.where(rng.random(n_i) < 0.5, 2.0 * rng.random(n_i), 0.0)
        uf = np.where(rng.random(n_i) < 0.5, 2.0 * rng.random(n_i), 0.0)
    else:
        ul = np.zeros(n_i)
        uf = np.zeros(n_i)
    return Instance(h=h, w=w, ul=ul, uf=uf, p=p, r=r)


def random_positive_instance(
    rng: np.random.Generator, max_customers: int = 15, max_sites: int = 12
) -> Instance:
    """Random instance with strictly positive base utilities, so shares
    of empty site sets are well-defined."""
    inst = random_instance(rng, max_customers=max_customers, max_sites=max_sites)
    return Instance(
        h=inst.h,
        w=inst.w,
        ul=rng.random(inst.num_customers) + 0.05,
        uf=rng.random(inst.num_customers) + 0.05,
        p=inst.p,
        r=inst.r,
    )


def random_leader(rng: np.random.Generator, inst: Instance) -> np.ndarray:
    """A random binary placement with exactly p open sites."""
    x = np.zeros(inst.num_sites)
    x[rng.choice(inst.num_sites, size=inst.p, replace=False)] = 1.0
    return x


def share_by_sets(inst: Instance, leader_sites, follower_sites) -> float:
    """Direct set-function evaluation of the leader's share (test oracle)."""
    x = np.zeros(inst.num_sites)
    y = np.zeros(inst.num_sites)
    if len(leader_sites):
        x[list(leader_sites)] = 1.0
    if len(follower_sites):
        y[list(follower_sites)] = 1.0
    num = inst.ul + inst.w @ x
    den = inst.ul + inst.uf + inst.w @ np.maximum(x, y)
    return float(inst.h @ (num / den))
