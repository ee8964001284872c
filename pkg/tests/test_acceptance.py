"""Acceptance suite: one test per criterion, printed pass lines.

Run with ``pytest tests/test_acceptance.py -v -rP`` to see the per-
criterion summaries.  The oracle batch (criteria 1 and 6) is built once
per session.
"""

import time
from itertools import combinations

import numpy as np
import pytest

from conftest import random_instance
from seqcflp.approx import solve_approx
from seqcflp.bnc import SolverConfig, solve_exact
from seqcflp.cli import run_cli
from seqcflp.cuts import bulge_cut, submodular_cut
from seqcflp.model import Instance, bulge_value, leader_share_max, leader_share_plus
from seqcflp.oracle import solve_enumeration
from seqcflp.separation import approx_separation_coefficients, exact_best_response
from seqcflp.workbench.generate import GeneratorSpec, generate_instance

ALL_CONFIGS = [
    SolverConfig(cut_families=fam, separation=sep)
    for fam in ("sc", "bi", "scbi")
    for sep in ("exact", "hybrid")
]


def binary_masks(n: int, size: int) -> np.ndarray:
    sets = list(combinations(range(n), size))
    masks = np.zeros((len(sets), n))
    for row, sites in enumerate(sets):
        masks[row, list(sites)] = 1.0
    return masks


def all_masks_up_to(n: int, max_size: int) -> np.ndarray:
    return np.vstack([binary_masks(n, s) for s in range(max_size + 1)])


def shares_max_batch(inst: Instance, x: np.ndarray, masks: np.ndarray) -> np.ndarray:
    num = inst.ul + inst.w @ x
    den = (inst.ul + inst.uf)[None, :] + np.maximum(masks[:, None, :], x[None, None, :])[
        :, 0, :
    ] @ inst.w.T
    return (num[None, :] / den) @ inst.h


def shares_plus_batch(inst: Instance, x: np.ndarray, masks: np.ndarray) -> np.ndarray:
    num = inst.ul + inst.w @ x
    den = (inst.ul + inst.uf + inst.w @ x)[None, :] + masks @ inst.w.T
    return (num[None, :] / den) @ inst.h


def set_share(inst: Instance, x_mask: np.ndarray, y_mask: np.ndarray) -> float:
    num = inst.ul + inst.w @ x_mask
    den = inst.ul + inst.uf + inst.w @ np.maximum(x_mask, y_mask)
    return float(inst.h @ (num / den))


def anchored_rhs(inst: Instance, s_mask, y_mask, x_hat) -> float:
    """The anchored inequality's right-hand side, direct formulas only."""
    w, h = inst.w, inst.h
    num = inst.ul + w @ s_mask
    den = inst.ul + inst.uf + w @ np.maximum(s_mask, y_mask)
    value = float(h @ (num / den))
    num_full = inst.ul + w.sum(axis=1)
    den_full = num_full + inst.uf
    dropped = (num_full[:, None] - w) / (den_full[:, None] - w * (1.0 - y_mask)[None, :])
    rho_sat = h @ ((num_full / den_full)[:, None] - dropped)
    grown = (num[:, None] + w) / (
        den[:, None] + w * (1.0 - np.maximum(s_mask, y_mask))[None, :]
    )
    rho_add = h @ (grown - (num / den)[:, None])
    inside = s_mask > 0.5
    return (
        value
        - float((rho_sat * (1.0 - x_hat))[inside].sum())
        + float((rho_add * x_hat)[~inside].sum())
    )


def spearman(xs, ys) -> float:
    xr = np.argsort(np.argsort(xs)).astype(float)
    yr = np.argsort(np.argsort(ys)).astype(float)
    xc, yc = xr - xr.mean(), yr - yr.mean()
    return float((xc @ yc) / np.sqrt((xc @ xc) * (yc @ yc)))


@pytest.fixture(scope="session")
def oracle_batch():
    """200 seeded instances with |I| <= 15, |J| <= 12, p, r in {1, 2, 3}."""
    batch = []
    for idx in range(200):
        spec = GeneratorSpec(
            num_customers=5 + idx % 11,
            num_sites=7 + idx % 6,
            p=1 + idx % 3,
            r=1 + (idx // 3) % 3,
            seed=9000 + idx,
        )
        inst, _ = generate_instance(spec)
        batch.append((spec.name, inst, solve_enumeration(inst)))
    return batch


def test_criterion_01_oracle_equivalence(oracle_batch):
    start = time.monotonic()
    checked = 0
    for _, inst, truth in oracle_batch:
        for config in ALL_CONFIGS:
            report = solve_exact(inst, config)
            assert report.status == "optimal"
            assert abs(report.z_best - truth.z_star) <= 1e-6
            certified = exact_best_response(inst, report.best_x.x).value
            assert abs(certified - truth.z_star) <= 1e-6
            checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 300.0
    print(
        f"criterion 1 PASS: {len(oracle_batch)} instances x 6 configs "
        f"({checked} solves) match the enumeration oracle within 1e-6 "
        f"in {elapsed:.1f}s (< 300s)"
    )


def test_criterion_02_max_reformulation_equivalence():
    rng = np.random.default_rng(202)
    pairs = 0
    worst = 0.0
    while pairs < 500:
        inst = random_instance(rng, max_sites=10)
        n = inst.num_sites
        for _ in range(5):
            x = np.zeros(n)
            x[rng.choice(n, size=inst.p, replace=False)] = 1.0
            free = all_masks_up_to(n, inst.r)
            keep = (free * x[None, :]).sum(axis=1) == 0  # co-location free
            plus_min = shares_plus_batch(inst, x, free[keep]).min()
            max_min = shares_max_batch(inst, x, free).min()
            worst = max(worst, abs(plus_min - max_min))
            assert abs(plus_min - max_min) <= 1e-12
            pairs += 1
    print(
        f"criterion 2 PASS: {pairs} (instance, x) pairs agree between the "
        f"co-location-constrained and max-form inner minima; worst |diff| = {worst:.2e}"
    )


def test_criterion_03a_submodularity_of_share():
    rng = np.random.default_rng(303)
    quadruples = 0
    while quadruples < 10_000:
        inst = random_instance(rng, max_sites=10)
        n = inst.num_sites
        base = Instance(
            h=inst.h,
            w=inst.w,
            ul=rng.random(inst.num_customers) + 0.05,
            uf=rng.random(inst.num_customers) + 0.05,
            p=inst.p,
            r=inst.r,
        )
        for _ in range(25):
            small = rng.random(n) < 0.3
            grown = small | (rng.random(n) < 0.3)
            outside = np.flatnonzero(~grown)
            if outside.size == 0:
                continue
            k = int(rng.choice(outside))
            y = (rng.random(n) < 0.3).astype(float)
            s_mask, r_mask = small.astype(float), grown.astype(float)
            sk, rk = s_mask.copy(), r_mask.copy()
            sk[k] = rk[k] = 1.0
            gain_small = set_share(base, sk, y) - set_share(base, s_mask, y)
            gain_grown = set_share(base, rk, y) - set_share(base, r_mask, y)
            assert gain_small >= gain_grown - 1e-12
            quadruples += 1
    print(
        f"criterion 3a PASS: {quadruples} random (S, R, k, Y) quadruples "
        f"satisfy diminishing returns of the share set function"
    )


@pytest.mark.xfail(
    reason="the anchored most-violated-cut objective is NOT submodular: "
    "the usual argument silently keeps the outside-marginal sum anchored "
    "at the old set.  Deterministic witness: one customer, w=(1,1), unit "
    "base utilities, empty follower set, x_hat=(0.99,0.99), S={}, R={1}, "
    "k=0 gives gains -0.0817 < 0.  Cut validity and the binary-anchor "
    "optimum are unaffected (covered by criteria 1 and 4).",
    strict=True,
)
def test_criterion_03b_claimed_submodularity_of_anchored_objective():
    rng = np.random.default_rng(304)
    quadruples = 0
    while quadruples < 10_000:
        inst = random_instance(rng, max_sites=10)
        n = inst.num_sites
        base = Instance(
            h=inst.h,
            w=inst.w,
            ul=rng.random(inst.num_customers) + 0.05,
            uf=rng.random(inst.num_customers) + 0.05,
            p=inst.p,
            r=inst.r,
        )
        for _ in range(25):
            x_hat = rng.random(n)
            small = rng.random(n) < 0.3
            grown = small | (rng.random(n) < 0.3)
            outside = np.flatnonzero(~grown)
            if outside.size == 0:
                continue
            k = int(rng.choice(outside))
            y = (rng.random(n) < 0.3).astype(float)
            s_mask, r_mask = small.astype(float), grown.astype(float)
            sk, rk = s_mask.copy(), r_mask.copy()
            sk[k] = rk[k] = 1.0
            gain_small = anchored_rhs(base, sk, y, x_hat) - anchored_rhs(
                base, s_mask, y, x_hat
            )
            gain_grown = anchored_rhs(base, rk, y, x_hat) - anchored_rhs(
                base, r_mask, y, x_hat
            )
            assert gain_small >= gain_grown - 1e-12
            quadruples += 1


def test_criterion_04_concavity_and_cut_validity():
    rng = np.random.default_rng(404)
    checks = 0
    while checks < 10_000:
        inst = random_instance(rng, max_sites=10)
        n = inst.num_sites
        y = np.zeros(n)
        y[rng.choice(n, size=inst.r, replace=False)] = 1.0
        for _ in range(20):
            x1, x2 = rng.random(n), rng.random(n)
            lam = float(rng.random())
            mid = bulge_value(inst, lam * x1 + (1 - lam) * x2, y)
            ends = lam * bulge_value(inst, x1, y) + (1 - lam) * bulge_value(inst, x2, y)
            assert mid >= ends - 1e-9
            checks += 1

    cuts_checked = 0
    for _ in range(20):
        inst = random_instance(rng, max_sites=10)
        n = inst.num_sites
        every_x = all_masks_up_to(n, n)
        for _ in range(5):
            follower = sorted(int(j) for j in rng.choice(n, size=inst.r, replace=False))
            y = np.zeros(n)
            y[follower] = 1.0
            anchor = [j for j in range(n) if rng.random() < 0.4]
            sub = submodular_cut(inst, anchor, follower)
            bul = bulge_cut(inst, rng.random(n), y)
            for cut in (sub, bul):
                rhs = cut.intercept + every_x @ cut.coeffs
                num = inst.ul[None, :] + every_x @ inst.w.T
                den = (inst.ul + inst.uf)[None, :] + np.maximum(
                    every_x, y[None, :]
                ) @ inst.w.T
                truth = (num / den) @ inst.h
                assert np.all(rhs >= truth - 1e-9)
                cuts_checked += 1
    print(
        f"criterion 4 PASS: {checks} midpoint-concavity checks and "
        f"{cuts_checked} cuts validated against every binary placement"
    )


def test_criterion_05_chord_bound_dominates():
    rng = np.random.default_rng(505)
    pairs = 0
    worst = np.inf
    while pairs < 10_000:
        inst = random_instance(rng, max_sites=10)
        n = inst.num_sites
        responses = binary_masks(n, inst.r)
        for _ in range(5):
            x_hat = rng.random(n)
            alpha, beta = approx_separation_coefficients(inst, x_hat)
            bound = alpha - responses @ beta
            truth = shares_max_batch(inst, x_hat, responses)
            slack = bound - truth
            worst = min(worst, float(slack.min()))
            assert np.all(slack >= -1e-9)
            pairs += responses.shape[0]
    print(
        f"criterion 5 PASS: {pairs} (x_hat, y) pairs satisfy the chord "
        f"over-estimate; worst slack = {worst:.2e}"
    )


def test_criterion_06_approximation_guarantee(oracle_batch):
    gaps = []
    for _, inst, truth in oracle_batch:
        report = solve_approx(inst)
        assert report.status == "optimal"
        assert report.z_h <= truth.z_star + 1e-9
        assert report.z_h >= report.ratio_lower * truth.z_star - 1e-9
        gaps.append(1.0 - report.z_h / truth.z_star)
    median_gap = float(np.median(gaps))
    assert median_gap <= 0.10
    print(
        f"criterion 6 PASS: ratio sandwich holds on all {len(gaps)} instances; "
        f"median Obj-GAP = {100 * median_gap:.2f}% (<= 10%), "
        f"max = {100 * max(gaps):.2f}%"
    )


def test_criterion_07_cut_strength_trend():
    ladder = [(20, 13), (20, 14), (30, 13), (30, 14), (40, 13), (40, 14), (50, 13), (60, 13)]
    wins = 0
    worst_gap10 = 0.0
    for size, salt in ladder:
        spec = GeneratorSpec(size, size, 2, 2, seed=size * 1000 + salt)
        inst, _ = generate_instance(spec)
        nodes = {}
        for fam in ("sc", "bi", "scbi"):
            report = solve_exact(inst, SolverConfig(cut_families=fam, separation="exact"))
            assert report.status == "optimal"
            gap10 = report.gap_trace[10]
            assert gap10 is not None and gap10 <= 0.03
            worst_gap10 = max(worst_gap10, gap10)
            nodes[fam] = report.num_nodes
        wins += nodes["scbi"] <= nodes["sc"]
    assert wins >= 0.7 * len(ladder)
    print(
        f"criterion 7 PASS: SCBI node count <= SC on {wins}/{len(ladder)} "
        f"ladder instances (>= 70%); worst Gap_10 = {100 * worst_gap10:.2f}% (<= 3%)"
    )


def test_criterion_08_beta_sensitivity_trend():
    betas = [0.05, 0.1, 0.2, 0.3, 0.5, 0.8]
    inst, geo = generate_instance(GeneratorSpec(100, 100, 2, 2, seed=100100))
    from seqcflp.workbench.generate import weights_from_geometry

    objectives = []
    for beta in betas:
        w = weights_from_geometry(geo["alpha"], beta, geo["customer_xy"], geo["site_xy"])
        swept = Instance(h=inst.h, w=w, ul=inst.ul, uf=inst.uf, p=inst.p, r=inst.r)
        report = solve_exact(swept, SolverConfig(cut_families="scbi", separation="hybrid"))
        assert report.status == "optimal"
        objectives.append(report.z_best)
    rho = spearman(betas, objectives)
    assert rho > 0.0
    leap = objectives[betas.index(0.5)] > 0.55
    print(
        f"criterion 8 PASS: objectives {', '.join(f'{v:.4f}' for v in objectives)} "
        f"over beta {betas}; Spearman = {rho:.3f} (> 0); "
        f"share leap beyond 0.55 at beta=0.5: {'yes' if leap else 'no (reported, not gated)'}"
    )


def test_criterion_09_desk_scale_smoke():
    inst, _ = generate_instance(GeneratorSpec(40, 40, 2, 2, seed=40402))
    start = time.monotonic()
    report = solve_exact(inst, SolverConfig(cut_families="scbi", separation="hybrid"))
    elapsed = time.monotonic() - start
    assert report.status == "optimal"
    assert elapsed < 120.0
    print(
        f"criterion 9 PASS: 40-40-2-2 solved to proven optimality "
        f"(z = {report.z_best:.6f}) in {elapsed:.2f}s (< 120s)"
    )


def test_criterion_10_byte_identical_reports(tmp_path):
    gen = ["gen", "--customers", "15", "--sites", "12", "-p", "2", "-r", "2", "--seed", "55"]
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    a_dir.mkdir()
    b_dir.mkdir()
    assert run_cli(gen + ["-o", str(a_dir)]) == 0
    assert run_cli(gen + ["-o", str(b_dir)]) == 0
    inst_a, inst_b = a_dir / "15-12-2-2.json", b_dir / "15-12-2-2.json"
    assert inst_a.read_bytes() == inst_b.read_bytes()

    solve_a, solve_b = a_dir / "solve.json", b_dir / "solve.json"
    args = ["solve", str(inst_a), "--omit-timing"]
    assert run_cli(args + ["-o", str(solve_a)]) == 0
    args[1] = str(inst_b)
    assert run_cli(args + ["-o", str(solve_b)]) == 0
    assert solve_a.read_bytes() == solve_b.read_bytes()

    csv_a, csv_b = a_dir / "rep.csv", b_dir / "rep.csv"
    assert run_cli(["report", str(inst_a), "--omit-timing", "-o", str(csv_a)]) == 0
    assert run_cli(["report", str(inst_b), "--omit-timing", "-o", str(csv_b)]) == 0
    assert csv_a.read_bytes() == csv_b.read_bytes()
    print(
        "criterion 10 PASS: generated instances, solve reports, and CSV "
        "benchmarks are byte-identical across repeated runs"
    )
