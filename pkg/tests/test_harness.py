import dataclasses

import numpy as np
import pytest

from csnmr import harness
from csnmr.harness import (
    SummaryRow,
    SweepConfig,
    TrialRecord,
    compare_methods,
    default_eta_grid,
    interpolate_curve,
    run_sweep,
    run_trial,
    sampled_count,
    success_probability,
    summarize,
    trial_seed,
    zeta,
)
from csnmr.nmr import NoiseSpec
from csnmr.solvers import ReconstructionResult


class TestGrids:
    @pytest.mark.parametrize("n,steps", [(2, 6), (3, 16), (4, 22)])
    def test_group_grids(self, n, steps):
        grid = default_eta_grid("A", n)
        assert len(grid) == steps
        assert grid[0] == pytest.approx(1 / steps) and grid[-1] == 1.0
        assert default_eta_grid("B", n) == grid

    def test_pauli_grid(self):
        np.testing.assert_allclose(default_eta_grid("C", 3), np.arange(1, 11) / 10)

    def test_sampled_counts(self):
        cfg = SweepConfig(case="A", n=4)
        assert [sampled_count(cfg, e) for e in cfg.eta_values[:3]] == [2, 4, 6]
        cfg = SweepConfig(case="C", n=2)
        assert sampled_count(cfg, 0.5) == 8


class TestConfig:
    def test_defaults(self):
        cfg = SweepConfig(case="B", n=3)
        assert cfg.state == "psi3" and cfg.v == 16 and cfg.trials == 100
        assert cfg.mode == "groups" and cfg.method == "ls" and cfg.d == 8

    @pytest.mark.parametrize(
        "kw",
        [
            {"case": "D"},
            {"n": 3, "state": "psi2"},
            {"eta_values": (0.5, 0.25)},
            {"eta_values": (0.0, 0.5)},
            {"trials": 0},
            {"threshold": 1.5},
            {"measurement_path": "optical"},
            {"case": "C", "measurement_path": "spectral"},
            {"n": 5},
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SweepConfig(**kw)

    def test_echo_is_flat(self):
        echo = SweepConfig(case="A", n=2).echo()
        assert all(not isinstance(v, (dict, list, tuple)) for v in echo.values())
        assert echo["solver_k_max"] == 30


class TestTrial:
    def test_full_data_psi2(self):
        r = run_trial(SweepConfig(case="A", n=2), 1.0, 0)
        assert r.fidelity >= 0.999 and r.iterations <= 30

    def test_deterministic(self):
        cfg = SweepConfig(case="A", n=3, noise=NoiseSpec("value_gaussian", 0.05))
        assert run_trial(cfg, 0.5, 7) == run_trial(cfg, 0.5, 7)

    def test_full_pauli(self):
        r = run_trial(SweepConfig(case="C", n=2), 1.0, 3)
        assert r.fidelity >= 0.9999

    def test_paired_cases(self):
        a = run_trial(SweepConfig(case="A", n=3), 0.5, 4)
        b = run_trial(SweepConfig(case="B", n=3), 0.5, 4)
        assert a.seed == b.seed

    def test_seed_independent_of_grid(self):
        assert trial_seed(0, "groups", 3, 8, 5) == trial_seed(0, "groups", 3, 8, 5)
        assert trial_seed(0, "groups", 3, 8, 5) != trial_seed(1, "groups", 3, 8, 5)
        assert trial_seed(0, "groups", 3, 8, 5) != trial_seed(0, "pauli", 3, 8, 5)
        assert 0 <= trial_seed(2**40, "pauli", 4, 200, 99) < 2**63

    def test_random_state_flag(self):
        r = run_trial(SweepConfig(case="A", n=2, state="random"), 1.0, 0)
        assert r.random_state and r.fidelity >= 0.999

    def test_spectral_path(self):
        r = run_trial(SweepConfig(case="A", n=2, measurement_path="spectral"), 1.0, 0)
        assert r.fidelity >= 0.999

    def test_zero_estimate_scored_as_zero(self, monkeypatch):
        def zero(problem, config=None):
            d = problem.d
            return ReconstructionResult(np.zeros((d, d), complex), 30, 1.0, False, 0.0)

        monkeypatch.setattr(harness, "fp_admm_solve", zero)
        r = run_trial(SweepConfig(case="A", n=2), 0.5, 0)
        assert r.fidelity == 0.0 and r.degenerate and not r.converged


class TestStatistics:
    def test_zeta(self):
        assert zeta([0.5, 0.5, 0.5]) == 0
        assert zeta([0.0, 1.0]) == 0.5

    def test_success(self):
        assert success_probability([1.0] * 5, 0.95) == 1.0
        assert success_probability([0.94, 0.96], 0.95) == 0.5

    def test_threshold_extremes(self):
        f = [0.2, 1.0, 0.999, 1.0]
        assert success_probability(f, 0.0) == 1.0
        assert success_probability(f, 1.0) == 0.5

    def test_empty(self):
        with pytest.raises(ValueError):
            zeta([])
        with pytest.raises(ValueError):
            success_probability([])

    def test_summarize_constant(self):
        recs = [TrialRecord("A", 2, 0.5, t, t, 0.8, 5, 0.1, False) for t in range(4)]
        (row,) = summarize(recs)
        assert row.zeta == 0 and row.f_avg == pytest.approx(0.8) and row.trials == 4
        assert row.error_bar == (row.f_avg, row.f_avg)

    def test_error_bar(self):
        row = SummaryRow("A", 2, 0.5, 0.9, 0.05, 1.0)
        assert row.error_bar == pytest.approx((0.85, 0.95))


class TestSweep:
    def test_order_and_summary(self):
        cfg = SweepConfig(case="A", n=2, trials=5)
        recs, rows = run_sweep(cfg)
        assert len(recs) == 30 and len(rows) == 6
        assert [(r.eta, r.trial_index) for r in recs] == sorted((r.eta, r.trial_index) for r in recs)
        assert [r.eta for r in rows] == list(cfg.eta_values)

    def test_parallel_matches_serial(self):
        cfg = SweepConfig(case="B", n=2, trials=4, noise=NoiseSpec("value_gaussian", 0.05))
        assert run_sweep(cfg, jobs=2) == run_sweep(cfg, jobs=1)

    def test_full_rate_all_exact(self):
        recs, rows = run_sweep(SweepConfig(case="A", n=2, eta_values=(1.0,), trials=10))
        assert rows[0].success_prob == 1.0 and rows[0].zeta < 1e-6


class TestCompare:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_noiseless(self, n):
        c = compare_methods(n, seed=1)
        assert c.qst_fidelity >= 0.999 and c.cs_fidelity >= 0.999
        assert c.rho_qst.shape == c.rho_cs.shape == (2**n, 2**n)
        assert len(c.sampled_groups) == c.g

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_noisy_no_worse_than_tomography(self, n):
        noise = NoiseSpec("value_gaussian", 0.02)
        pairs = [compare_methods(n, noise=noise, seed=s) for s in range(50)]
        qst = np.mean([p.qst_fidelity for p in pairs])
        cs = np.mean([p.cs_fidelity for p in pairs])
        assert cs >= qst - 0.02

    def test_unknown_n(self):
        with pytest.raises(ValueError):
            compare_methods(5)


def test_interpolate_curve():
    out = interpolate_curve([0.0, 1.0], [0.0, 2.0], [0.25, 0.5])
    np.testing.assert_allclose(out, [0.5, 1.0])
    with pytest.raises(ValueError):
        interpolate_curve([0, 1], [0, float("nan")], [0.5])


def test_records_are_frozen():
    r = run_trial(SweepConfig(case="A", n=2), 1.0, 0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        r.fidelity = 0.0
