import logging

import numpy as np
import pytest

from conftest import random_instance
from seqcflp.bnc import NodeState, SolverConfig, solve_exact
from seqcflp.oracle import solve_enumeration
from seqcflp.separation import exact_best_response

ALL_CONFIGS = [
    SolverConfig(cut_families=fam, separation=sep)
    for fam in ("sc", "bi", "scbi")
    for sep in ("exact", "hybrid")
]


class TestConfigAndNodeState:
    def test_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            SolverConfig(cut_families="oa")

    def test_rejects_bad_tolerance(self):
        with pytest.raises(ValueError):
            SolverConfig(tol=0.0)

    def test_approx_alias_normalizes_to_hybrid(self):
        assert SolverConfig(separation="approx").separation == "hybrid"

    def test_nodestate_fixings_disjoint(self):
        with pytest.raises(ValueError):
            NodeState(frozenset({1}), frozenset({1}), 1.0, 0)


class TestSmallInstances:
    def test_t3_all_configs(self, t3):
        for config in ALL_CONFIGS:
            report = solve_exact(t3, config)
            assert report.status == "optimal"
            assert report.z_best == pytest.approx(0.625, abs=1e-9)
            assert report.best_x.support == (0,)
            assert report.z_bound >= report.z_best - config.tol

    def test_t1_symmetric(self, t1):
        report = solve_exact(t1)
        assert report.z_best == pytest.approx(0.5, abs=1e-9)
        assert report.best_x.support in ((0,), (1,))

    def test_oracle_agreement_all_configs(self):
        rng = np.random.default_rng(101)
        for _ in range(25):
            inst = random_instance(rng)
            truth = solve_enumeration(inst)
            for config in ALL_CONFIGS:
                report = solve_exact(inst, config)
                assert report.status == "optimal"
                assert abs(report.z_best - truth.z_star) <= 1e-6
                certified = exact_best_response(inst, report.best_x.x).value
                assert abs(certified - truth.z_star) <= 1e-6

    def test_incumbent_value_is_certified(self):
        # z_best always equals the exact inner minimum of the reported x
        rng = np.random.default_rng(103)
        for _ in range(10):
            inst = random_instance(rng)
            report = solve_exact(inst)
            certified = exact_best_response(inst, report.best_x.x).value
            assert report.z_best == pytest.approx(certified, abs=1e-12)


class TestSoundness:
    def test_sound_pruning_audit(self):
        rng = np.random.default_rng(107)
        for _ in range(8):
            inst = random_instance(rng, max_sites=9)
            truth = solve_enumeration(inst)
            optimal_supports = []
            from itertools import combinations

            for sites in combinations(range(inst.num_sites), inst.p):
                x = np.zeros(inst.num_sites)
                x[list(sites)] = 1.0
                if (
                    abs(exact_best_response(inst, x).value - truth.z_star)
                    <= 1e-12
                ):
                    optimal_supports.append(set(sites))
            report = solve_exact(inst, SolverConfig(collect_node_log=True))
            for fixed_zero, fixed_one, bound in report.node_log:
                contains_optimum = any(
                    set(fixed_one) <= opt and not (set(fixed_zero) & opt)
                    for opt in optimal_supports
                )
                if contains_optimum:
                    assert bound >= truth.z_star - 1e-9

    def test_termination_counters(self):
        from math import comb

        rng = np.random.default_rng(109)
        for _ in range(10):
            inst = random_instance(rng, max_sites=8)
            report = solve_exact(inst)
            ceiling = 2**inst.num_sites * comb(inst.num_sites, inst.r)
            assert report.num_nodes <= ceiling
            assert report.num_cuts["total"] <= 2 * ceiling

    def test_node_limit_reports_residual_gap(self, t3):
        report = solve_exact(t3, SolverConfig(node_limit=0))
        assert report.status == "node_limit"
        assert report.z_bound >= 0.625 - 1e-9
        assert report.gap >= 0.0

    def test_time_limit_never_claims_optimal(self):
        rng = np.random.default_rng(113)
        inst = random_instance(rng)
        report = solve_exact(inst, SolverConfig(time_limit=0.0))
        assert report.status == "time_limit"
        assert report.gap_trace[1] is None  # no proven reference value


class TestReporting:
    def test_gap_trace_reaches_zero_on_clean_solve(self, t3):
        report = solve_exact(t3)
        assert set(report.gap_trace) == {1, 3, 10}
        assert report.gap_trace[10] == pytest.approx(0.0, abs=1e-9)

    def test_cut_counts_by_family(self, t3):
        report = solve_exact(t3, SolverConfig(cut_families="sc"))
        assert report.num_cuts["bulge"] == 0
        assert report.num_cuts["total"] == report.num_cuts["submodular"]
        report = solve_exact(t3, SolverConfig(cut_families="bi"))
        assert report.num_cuts["submodular"] == 0

    def test_progress_log_format(self, t3, caplog):
        with caplog.at_level(logging.INFO, logger="seqcflp.solver"):
            solve_exact(t3, SolverConfig(log_every=1))
        lines = [rec.getMessage() for rec in caplog.records]
        assert lines
        assert all(
            line.startswith("node=") and "bound=" in line and "cuts=" in line
            for line in lines
        )

    def test_report_dict_round_trip(self, t3):
        doc = solve_exact(t3).to_dict()
        assert doc["status"] == "optimal"
        assert doc["best_sites"] == [0]
        assert "wall_time" in doc
        assert "wall_time" not in solve_exact(t3).to_dict(omit_timing=True)

    def test_deterministic_reports(self, t3):
        a = solve_exact(t3).to_dict(omit_timing=True)
        b = solve_exact(t3).to_dict(omit_timing=True)
        assert a == b
