import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from csnmr import fileio
from csnmr.harness import SweepConfig, run_sweep
from csnmr.nmr import NoiseSpec, build_scheme, measure_groups
from csnmr.qcore import random_pure_state
from csnmr.sensing import assemble_from_groups, assemble_from_paulis
from csnmr.solvers import fp_admm_solve


class TestState:
    @settings(max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_vector_round_trip_exact(self, tmp_path, n, seed):
        psi = random_pure_state(n, seed)
        fileio.write_state(tmp_path / "s.txt", psi, {"seed": seed})
        assert np.array_equal(fileio.read_state(tmp_path / "s.txt"), psi)

    def test_density_round_trip(self, tmp_path, rho3):
        fileio.write_state(tmp_path / "r.txt", rho3)
        assert np.array_equal(fileio.read_state(tmp_path / "r.txt"), rho3)

    def test_layout(self, tmp_path):
        fileio.write_state(tmp_path / "s.txt", np.array([0.6, 0.8j]), {"preset": "x"})
        lines = (tmp_path / "s.txt").read_text().splitlines()
        assert lines == ["# preset=x", "1", "0.59999999999999998 0", "0 0.80000000000000004"]

    def test_header(self, tmp_path):
        fileio.write_state(tmp_path / "s.txt", np.array([1.0, 0.0]), {"a": 1, "b": "two"})
        assert fileio.read_header(tmp_path / "s.txt") == {"a": "1", "b": "two"}

    @pytest.mark.parametrize(
        "body", ["", "x\n", "2\n1 0\n0 0\n", "1\n1 0 0\n0 0\n", "1\n1 0\n0 0 0 0\n"]
    )
    def test_malformed(self, tmp_path, body):
        (tmp_path / "bad.txt").write_text(body)
        with pytest.raises(fileio.FormatError):
            fileio.read_state(tmp_path / "bad.txt")

    def test_multiline_header_value(self, tmp_path):
        with pytest.raises(ValueError):
            fileio.write_state(tmp_path / "s.txt", np.array([1.0, 0.0]), {"a": "x\ny"})


class TestScheme:
    @pytest.mark.parametrize("n", [2, 3])
    def test_default_round_trip(self, tmp_path, n):
        s = build_scheme(n, seed=5)
        fileio.write_scheme(tmp_path / "s.txt", s)
        back = fileio.read_scheme(tmp_path / "s.txt")
        assert (back.n, back.v, back.scheme_name, back.seed) == (n, s.v, s.scheme_name, 5)
        assert np.array_equal(back.observables, s.observables)
        assert [g.provenance for g in back.groups] == [g.provenance for g in s.groups]

    def test_custom_round_trip(self, tmp_path):
        base = build_scheme(2, v=2)
        s = build_scheme(2, "custom", groups=[g.observables for g in base.groups])
        fileio.write_scheme(tmp_path / "c.txt", s)
        back = fileio.read_scheme(tmp_path / "c.txt")
        assert back.scheme_name == "custom" and np.array_equal(back.observables, s.observables)

    def test_group_count_mismatch(self, tmp_path):
        fileio.write_scheme(tmp_path / "s.txt", build_scheme(2))
        text = (tmp_path / "s.txt").read_text().replace("2 6 ", "2 7 ", 1)
        (tmp_path / "s.txt").write_text(text)
        with pytest.raises(fileio.FormatError):
            fileio.read_scheme(tmp_path / "s.txt")


class TestMeasurement:
    def test_round_trip(self, tmp_path, rho3):
        s = build_scheme(3)
        m = measure_groups(rho3, s, noise=NoiseSpec("value_gaussian", 0.05, 9))
        fileio.write_measurement(tmp_path / "m.txt", m, {"state": "psi3"})
        back = fileio.read_measurement(tmp_path / "m.txt")
        assert np.array_equal(back.values, m.values)
        assert back.noise == m.noise and back.path == "ideal"

    def test_record_layout(self, tmp_path, rho2):
        m = measure_groups(rho2, build_scheme(2))
        fileio.write_measurement(tmp_path / "m.txt", m)
        body = [ln for ln in (tmp_path / "m.txt").read_text().splitlines() if not ln.startswith("#")]
        assert body[0] == "group 0" and body[1].startswith("0 ") and body[5] == "group 1"
        assert len(body) == 6 * 5

    def test_out_of_order(self, tmp_path):
        (tmp_path / "m.txt").write_text("group 1\n0 0.5\n")
        with pytest.raises(fileio.FormatError):
            fileio.read_measurement(tmp_path / "m.txt")


class TestProblem:
    def test_groups_round_trip(self, tmp_path, rho3):
        s = build_scheme(3)
        p = assemble_from_groups(s, measure_groups(rho3, s), [1, 4, 9], seed=12)
        fileio.write_problem(tmp_path / "p.txt", p)
        back = fileio.read_problem(tmp_path / "p.txt")
        assert np.array_equal(back.a_matrix, p.a_matrix) and np.array_equal(back.y_vector, p.y_vector)
        assert back.row_meta == p.row_meta
        assert (back.mode, back.d, back.seed, back.include_trace_row) == ("groups", 8, 12, True)
        assert back.eta == p.eta

    def test_pauli_header(self, tmp_path, rho2):
        p = assemble_from_paulis(["XX", "ZI"], rho2, include_trace_row=False)
        fileio.write_problem(tmp_path / "p.txt", p)
        meta = fileio.read_header(tmp_path / "p.txt")
        assert meta["mode"] == "pauli" and meta["M"] == "2" and meta["include_trace_row"] == "False"
        assert fileio.read_problem(tmp_path / "p.txt").row_meta == ("XX", "ZI")

    def test_row_count_mismatch(self, tmp_path, rho2):
        p = assemble_from_paulis(["XX", "ZI"], rho2)
        fileio.write_problem(tmp_path / "p.txt", p)
        lines = (tmp_path / "p.txt").read_text().splitlines()
        (tmp_path / "p.txt").write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(fileio.FormatError):
            fileio.read_problem(tmp_path / "p.txt")


class TestResult:
    def test_round_trip(self, tmp_path, rho2):
        s = build_scheme(2)
        res = fp_admm_solve(assemble_from_groups(s, measure_groups(rho2, s), range(6)))
        fileio.write_result(tmp_path / "r.txt", res, {"source": "test"})
        meta, rho = fileio.read_result(tmp_path / "r.txt")
        assert np.array_equal(rho, res.rho_hat)
        assert meta["iterations"] == str(res.iterations) and meta["solver_k_max"] == "30"
        assert float(meta["final_residual"]) == res.final_residual and "wall_time" in meta

    def test_without_timing(self, tmp_path, rho2):
        s = build_scheme(2)
        res = fp_admm_solve(assemble_from_groups(s, measure_groups(rho2, s), range(6)))
        fileio.write_result(tmp_path / "r.txt", res, timing=False)
        assert "wall_time" not in fileio.read_header(tmp_path / "r.txt")


@pytest.fixture(scope="module")
def small_sweep():
    cfg = SweepConfig(case="A", n=2, trials=3, noise=NoiseSpec("value_gaussian", 0.02))
    return cfg, *run_sweep(cfg)


class TestTables:
    def test_records_round_trip(self, tmp_path, small_sweep):
        cfg, recs, _ = small_sweep
        fileio.write_records_csv(tmp_path / "r.csv", recs, cfg.echo())
        meta, back = fileio.read_records_csv(tmp_path / "r.csv")
        assert meta["case"] == "A"
        for a, b in zip(recs, back):
            assert (a.case, a.n, a.eta, a.trial_index, a.seed, a.fidelity, a.iterations, a.final_residual,
                    a.converged) == (b.case, b.n, b.eta, b.trial_index, b.seed, b.fidelity, b.iterations,
                                     b.final_residual, b.converged)

    def test_columns(self, tmp_path, small_sweep):
        cfg, recs, rows = small_sweep
        fileio.write_records_csv(tmp_path / "r.csv", recs)
        fileio.write_summary_csv(tmp_path / "s.csv", rows)
        assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(fileio.RECORD_COLUMNS)
        assert (tmp_path / "s.csv").read_text().splitlines()[0] == ",".join(fileio.SUMMARY_COLUMNS)

    def test_summary_six_digits(self, tmp_path, small_sweep):
        _, _, rows = small_sweep
        fileio.write_summary_csv(tmp_path / "s.csv", rows)
        _, table = fileio.read_summary_csv(tmp_path / "s.csv")
        for got, row in zip(table, rows):
            assert got["f_avg"] == format(row.f_avg, ".6g")
            assert float(got["zeta"]) == pytest.approx(row.zeta, rel=1e-5, abs=1e-12)

    def test_json_document(self, tmp_path, small_sweep):
        cfg, recs, rows = small_sweep
        doc = fileio.sweep_document(cfg.echo(), recs, rows)
        fileio.write_json(tmp_path / "d.json", doc)
        back = json.loads((tmp_path / "d.json").read_text())
        assert back["schema_version"] == "1"
        assert len(back["records"]) == len(recs) and len(back["summary"]) == len(rows)
        s0 = back["summary"][0]
        assert s0["f_low"] == pytest.approx(s0["f_avg"] - s0["zeta"])
        assert back["config"]["trials"] == 3

    def test_missing_columns(self, tmp_path):
        (tmp_path / "r.csv").write_text("case,n\nA,2\n")
        with pytest.raises(fileio.FormatError):
            fileio.read_records_csv(tmp_path / "r.csv")
