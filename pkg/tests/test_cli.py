import csv
import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from sysindex.bench import (BenchConfig, bench_table1, compute_metrics, evaluate_row,
                            improvement_pct)
from sysindex.cli import main, oracle_check
from sysindex.core import IndexKind, Trajectory
from sysindex.csvio import read_trajectory_csv, write_trajectory_csv
from sysindex.errors import EmptySeries, NonMonotoneTime, ParseError


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestCsv:
    def test_scalar(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,y1\n0,1,2\n0.5,1,3\n1,2,2\n")
        tr = read_trajectory_csv(p)
        assert len(tr) == 3 and tr.m_u == 1 and tr.m_y == 1

    def test_missing_y(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1\n0,1\n")
        with pytest.raises(ParseError):
            read_trajectory_csv(p)

    def test_realizations(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,y1,realization\n0,1,1,0\n1,1,1,0\n0,1,1,1\n1,1,1,1\n")
        assert read_trajectory_csv(p).breaks == (2,)

    def test_split_realization_rejected(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,y1,realization\n0,1,1,0\n0,1,1,1\n1,1,1,0\n")
        with pytest.raises(ParseError) as exc:
            read_trajectory_csv(p)
        assert exc.value.line == 4

    def test_bad_number_names_line(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,y1\n0,1,1\n1,x,1\n")
        with pytest.raises(ParseError) as exc:
            read_trajectory_csv(p)
        assert exc.value.line == 3

    def test_validation_runs(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,y1\n0,1,1\n0,1,1\n")
        with pytest.raises(NonMonotoneTime):
            read_trajectory_csv(p)

    def test_vector_columns(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,u2,y1\n0,1,2,3\n")
        tr = read_trajectory_csv(p)
        assert tr.u.tolist() == [[1, 2]]


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False)


@settings(max_examples=40, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.tuples(finite, finite, finite), min_size=1, max_size=20),
       st.floats(1e-6, 10.0))
def test_csv_round_trip(tmp_path, rows, gap):
    n = len(rows)
    t = np.cumsum(np.full(n, gap))
    data = np.array(rows)
    tr = Trajectory(t, data[:, :2], data[:, 2], breaks=(n // 2,) if n > 2 else ())
    path = write_trajectory_csv(tr, tmp_path / "rt.csv")
    back = read_trajectory_csv(path)
    assert np.array_equal(back.t, tr.t) and np.array_equal(back.u, tr.u)
    assert np.array_equal(back.y, tr.y) and back.breaks == tr.breaks


class TestMetrics:
    def test_constant(self):
        m = compute_metrics([0, 1, 2], [3.0, 3.0, 3.0], 5.0)
        assert m.aee == 2.0 and m.maee == pytest.approx(2.0)

    def test_reference_differences(self):
        assert compute_metrics([0], [7.933], 17.575).aee == pytest.approx(9.642)
        assert compute_metrics([0], [0.799], 0.750).aee == pytest.approx(0.049)

    def test_nan_prefix_skipped(self):
        m = compute_metrics([0, 1, 2], [np.nan, 1.0, 3.0], 1.0)
        assert m.aee == 2.0 and m.maee == pytest.approx(1.0)

    def test_window_end(self):
        m = compute_metrics([0, 1, 2, 3], [0, 0, 5, 5], 0.0, window_end=2.0)
        assert m.aee == 0.0

    def test_empty(self):
        with pytest.raises(EmptySeries):
            compute_metrics([0, 1], [np.nan, np.nan], 1.0)

    def test_improvement(self):
        assert improvement_pct(10.0, 2.5) == 75.0
        assert improvement_pct(0.0, 1.0) is None


def test_identity_plant_row():
    t = np.arange(0, 20, 0.01)
    u = 2.0 + np.sin(t)
    tr = Trajectory(t, u, u)
    for kind in IndexKind:
        row = evaluate_row(tr, "identity", kind, 1.0)
        assert row.ffo_terminal == pytest.approx(1.0) and row.aee_ffo == pytest.approx(0.0)
        assert row.avg_terminal == pytest.approx(1.0) and row.ks == 0.0


@pytest.fixture(scope="module")
def short_bench():
    return bench_table1(BenchConfig(t_end=12.0))


def test_bench_rows(short_bench):
    rows = short_bench.rows
    assert [(r.system, r.index) for r in rows] == [
        ("H1", "l2g"), ("H1", "ifp"), ("H2", "ifp"), ("H2", "ofp"), ("H3", "l2g"), ("H4", "ofp")]
    for r in rows:
        if r.aee_improvement_pct is not None:
            assert r.aee_improvement_pct == 100 * (r.aee_avg - r.aee_ffo) / r.aee_avg
        if r.maee_improvement_pct is not None:
            assert r.maee_improvement_pct == 100 * (r.maee_avg - r.maee_ffo) / r.maee_avg


def test_bench_outputs(short_bench, tmp_path):
    short_bench.write_json(tmp_path / "r.json")
    short_bench.write_csv(tmp_path / "r.csv")
    payload = json.loads((tmp_path / "r.json").read_text())
    assert payload["config"]["t_end"] == 12.0 and len(payload["rows"]) == 6
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["ffo_terminal"]) == payload["rows"][0]["ffo_terminal"]


class TestMain:
    def test_oracle_check(self, capsys):
        assert main(["oracle-check", "--n", "10", "--seed", "1"]) == 0
        assert "0 mismatches" in capsys.readouterr().out

    def test_oracle_check_counts(self):
        assert oracle_check(50, 8, 3) == (100, 0)

    def test_missing_input(self, tmp_path):
        assert main(["estimate", "--in", str(tmp_path / "missing.csv")]) == 2

    def test_usage_errors(self, tmp_path):
        assert main(["nonsense"]) == 1
        assert main(["estimate"]) == 1
        p = write(tmp_path / "a.csv", "t,u1,y1\n0,1,1\n1,1,2\n")
        assert main(["estimate", "--in", str(p), "--ks", "abc"]) == 1

    def test_parse_error_is_data_error(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1\n0,1\n")
        assert main(["calibrate", "--in", str(p)]) == 2

    def test_env_seed(self, monkeypatch, tmp_path):
        monkeypatch.setenv("SYSINDEX_SEED", "oops")
        assert main(["oracle-check", "--n", "1"]) == 1
        monkeypatch.setenv("SYSINDEX_SEED", "7")
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", "--system", "H4", "--t-end", "0.5", "--out", str(out_a)])
        main(["simulate", "--system", "H4", "--t-end", "0.5", "--seed", "7", "--out", str(out_b)])
        assert out_a.read_text() == out_b.read_text()

    def test_simulate_estimate_pipeline(self, tmp_path):
        traj = tmp_path / "h3.csv"
        assert main(["simulate", "--system", "H3", "--t-end", "12", "--out", str(traj)]) == 0
        series, report = tmp_path / "s.csv", tmp_path / "r.json"
        assert main(["estimate", "--in", str(traj), "--series", str(series),
                     "--report", str(report)]) == 0
        payload = json.loads(report.read_text())
        with open(series) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 12000
        for k, v in payload["terminal"].items():
            assert float(rows[-1][f"ffo_{k}"]) == v["ffo"]
            assert float(rows[-1][f"avg_{k}"]) == v["avg"]
            assert float(rows[-1][f"pf_{k}"]) == v["param_free"]
        assert payload["bounds"]["ok"]

    def test_ks_zero_is_param_free(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,y1\n0,1,2\n1,2,2\n2,1,1\n")
        rep = tmp_path / "r.json"
        assert main(["estimate", "--in", str(p), "--ks", "0", "--report", str(rep)]) == 0
        for v in json.loads(rep.read_text())["terminal"].values():
            assert v["ffo"] == v["param_free"]

    def test_estimate_with_realizations(self, tmp_path):
        p = write(tmp_path / "a.csv",
                  "t,u1,y1,realization\n0,1,2,a\n1,2,2,a\n0,1,3,b\n1,1,1,b\n")
        rep, series = tmp_path / "r.json", tmp_path / "s.csv"
        assert main(["estimate", "--in", str(p), "--ks", "0", "--report", str(rep),
                     "--series", str(series)]) == 0
        terminal = json.loads(rep.read_text())["terminal"]
        assert terminal["l2g"]["avg"] is None and terminal["l2g"]["ffo"] == 9.0
        with open(series) as fh:
            assert float(list(csv.DictReader(fh))[-1]["ffo_l2g"]) == 9.0

    def test_calibrate_report(self, tmp_path):
        p = write(tmp_path / "a.csv", "t,u1,y1\n0,1,2\n1,2,2\n")
        rep = tmp_path / "c.json"
        assert main(["calibrate", "--in", str(p), "--discrete", "--report", str(rep)]) == 0
        assert json.loads(rep.read_text())["ks"]["l2g"] == pytest.approx(1.2)
