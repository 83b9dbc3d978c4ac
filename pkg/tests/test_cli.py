import json

import numpy as np
import pytest

from ddmnet import graph_from_dict, graph_to_dict, load_graph
from ddmnet.cli import main

BENCHMARK = "fixtures/five_node_benchmark.json"


def run_cli(*argv, capsys=None):
    code = main(list(argv))
    out = capsys.readouterr() if capsys else None
    return code, out


def write_graph(tmp_path, data, name="g.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestAnalyze:
    def test_benchmark_json_report(self, tmp_path, capsys):
        out_file = tmp_path / "report.json"
        code, _ = run_cli("analyze", BENCHMARK, "--sigma", "1", "--output", str(out_file),
                          capsys=capsys)
        assert code == 0
        report = json.loads(out_file.read_text())
        assert report["command"] == "analyze"
        assert report["profile"]["out_degree"] == [3.0, 3.0, 2.0, 2.0, 2.0]
        spectral = report["routes"]["spectral"]
        assert spectral["applicable"]
        mus = [row["mu"] for row in spectral["rows"]]
        assert np.round(mus, 2).tolist() == [8.46, 8.46, 5.24, 5.24, 5.0]
        for route in ("group-inverse", "info-centrality"):
            other = [row["mu"] for row in report["routes"][route]["rows"]]
            assert np.allclose(other, mus, rtol=1e-9)
        assert report["dispersion"]["identity_residual"] < 1e-9

    def test_csv_rows(self, capsys):
        code, out = run_cli("analyze", BENCHMARK, "--format", "csv", capsys=capsys)
        assert code == 0
        lines = out.out.strip().splitlines()
        assert lines[0] == "node,mu,inv_mu,route"
        assert len(lines) == 1 + 3 * 5  # three routes, five nodes

    def test_non_normal_graph_reports_inapplicable_routes(self, tmp_path, capsys):
        path = write_graph(tmp_path, {"n": 3, "edges": [[1, 2, 1.0], [1, 3, 1.0]],
                                      "undirected": False})
        out_file = tmp_path / "r.json"
        code, _ = run_cli("analyze", path, "--output", str(out_file), capsys=capsys)
        assert code == 0  # inapplicable routes are reported, not fatal
        report = json.loads(out_file.read_text())
        for route in report["routes"].values():
            assert not route["applicable"]
            assert "reason" in route

    def test_analyze_csv_header_only_when_no_route_applies(self, tmp_path, capsys):
        path = write_graph(tmp_path, {"n": 3, "edges": [[1, 2, 1.0], [1, 3, 1.0]],
                                      "undirected": False}, name="expl.json")
        code, out = run_cli("analyze", path, "--format", "csv", capsys=capsys)
        assert code == 0
        assert out.out == "node,mu,inv_mu,route\n"

    def test_json_report_has_no_presentation_payload(self, tmp_path, capsys):
        out_file = tmp_path / "r.json"
        run_cli("analyze", BENCHMARK, "--output", str(out_file), capsys=capsys)
        report = json.loads(out_file.read_text())
        assert "csv_rows" not in report and "csv_fields" not in report and "curves" not in report

    def test_curves_between_envelopes(self, capsys):
        code, out = run_cli("analyze", BENCHMARK, "--format", "curves",
                            "--t-max", "5", "--t-step", "0.05", capsys=capsys)
        assert code == 0
        lines = out.out.strip().splitlines()
        header = lines[0].split(",")
        assert header == ["t", "var_node_1", "var_node_2", "var_node_3", "var_node_4",
                          "var_node_5", "envelope_lower", "envelope_upper"]
        assert len(lines) == 2 + 100  # t = 0, 0.05, ..., 5
        for line in lines[1:]:
            vals = [float(tok) for tok in line.split(",")]
            lower, upper = vals[-2], vals[-1]
            for v in vals[1:6]:
                assert v >= lower - 1e-9
                assert v <= upper + 1e-9


class TestCentrality:
    def test_benchmark_report(self, tmp_path, capsys):
        out_file = tmp_path / "cent.json"
        code, _ = run_cli("centrality", BENCHMARK, "--output", str(out_file), capsys=capsys)
        assert code == 0
        report = json.loads(out_file.read_text())
        rows = report["centrality"]["rows"]
        closeness = [round(r["closeness"], 2) for r in rows]
        assert closeness == [1.0, 1.0, 0.83, 0.83, 0.83]
        assert report["centrality"]["ranking"] == [1, 2, 3, 4, 5]
        pairs = {tuple(p["pair"]): p for p in report["path_oracle"]["pairs"]}
        assert len(pairs) == 10
        for p in pairs.values():
            assert p["information_paths"] == pytest.approx(p["information_matrix"], abs=1e-6)
        # orientation-blind combination deviates exactly on the two opposite-orientation pairs
        assert pairs[(3, 5)]["information_paths_orientation_blind"] == pytest.approx(6 / 7)
        assert pairs[(3, 5)]["information_matrix"] == pytest.approx(11 / 13)

    def test_arithmetic_variant_ranking(self, tmp_path, capsys):
        out_file = tmp_path / "cent.json"
        code, _ = run_cli("centrality", BENCHMARK, "--variant", "arithmetic",
                          "--output", str(out_file), capsys=capsys)
        assert code == 0
        report = json.loads(out_file.read_text())
        assert report["centrality"]["ranking"] == [1, 2, 5, 3, 4]

    def test_csv_format(self, capsys):
        code, out = run_cli("centrality", BENCHMARK, "--format", "csv", capsys=capsys)
        assert code == 0
        assert out.out.splitlines()[0] == "node,closeness,info_harmonic,info_arithmetic,rank"


class TestFamily:
    def test_complete_nine(self, tmp_path, capsys):
        out_file = tmp_path / "fam.json"
        code, _ = run_cli("family", "complete:9:1", "--sigma", "1",
                          "--output", str(out_file), capsys=capsys)
        assert code == 0
        report = json.loads(out_file.read_text())
        assert np.allclose(report["closed_form"]["mu"], 20.25)
        assert report["cross_check"]["inv_mu_spectral_gap"] < 1e-9
        for gap in report["cross_check"]["covariance_integration_gap"].values():
            assert gap < 1e-6

    def test_exploding_star_not_defined(self, tmp_path, capsys):
        out_file = tmp_path / "fam.json"
        code, _ = run_cli("family", "exploding_star:5:1", "--output", str(out_file),
                          capsys=capsys)
        assert code == 0
        report = json.loads(out_file.read_text())
        assert "reason" in report["closed_form"]
        for gap in report["cross_check"]["covariance_integration_gap"].values():
            assert gap < 1e-6

    def test_star_center_curve_coincides_with_complete(self, tmp_path, capsys):
        star_file = tmp_path / "star.csv"
        comp_file = tmp_path / "comp.csv"
        run_cli("family", "undirected_star:9:1", "--format", "curves",
                "--t-max", "3", "--t-step", "0.1", "--output", str(star_file), capsys=capsys)
        run_cli("family", "complete:9:1", "--format", "curves",
                "--t-max", "3", "--t-step", "0.1", "--output", str(comp_file), capsys=capsys)
        star = np.loadtxt(str(star_file), delimiter=",", skiprows=1)
        comp = np.loadtxt(str(comp_file), delimiter=",", skiprows=1)
        assert np.abs(star[:, 1] - comp[:, 1]).max() < 1e-9

    def test_bad_spec_exits_with_usage_error(self, capsys):
        code, _ = run_cli("family", "heptagon:9:1", capsys=capsys)
        assert code == 2


class TestSimulate:
    def test_report_passes_and_is_reproducible(self, tmp_path, capsys):
        args = ("simulate", BENCHMARK, "--t-max", "0.5", "--step", "0.01",
                "--trajectories", "3000", "--seed", "12", "--sample-times", "0.25,0.5")
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        code_a, _ = run_cli(*args, "--output", str(out_a), capsys=capsys)
        code_b, _ = run_cli(*args, "--workers", "2", "--output", str(out_b), capsys=capsys)
        assert code_a == code_b == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        report = json.loads(out_a.read_text())
        assert report["passed"]
        for entry in report["moments"]:
            assert entry["passed"], entry["failures"]

    def test_off_grid_sample_time_is_usage_error(self, capsys):
        code, _ = run_cli("simulate", BENCHMARK, "--step", "0.01",
                          "--sample-times", "0.305", capsys=capsys)
        assert code == 2

    def test_unstable_step_is_usage_error(self, capsys):
        code, _ = run_cli("simulate", BENCHMARK, "--step", "0.05",
                          "--sample-times", "0.5", "--t-max", "0.5", capsys=capsys)
        assert code == 2


class TestVerify:
    def test_benchmark_all_checks_pass(self, tmp_path, capsys):
        out_file = tmp_path / "verify.json"
        code, out = run_cli("verify", BENCHMARK, "--output", str(out_file), capsys=capsys)
        assert code == 0
        report = json.loads(out_file.read_text())
        assert report["passed"]
        statuses = {c["name"]: c["status"] for c in report["checks"]}
        assert statuses["route-spectral-vs-group-inverse"] == "PASS"
        assert statuses["ranking-certainty-vs-info-centrality"] == "PASS"
        assert statuses["path-oracle-vs-matrix-information"] == "PASS"
        assert "PASS" in out.err

    def test_exploding_star_skips_certainty_routes(self, tmp_path, capsys):
        path = write_graph(tmp_path, {"n": 4, "edges": [[1, k, 1.0] for k in (2, 3, 4)],
                                      "undirected": False})
        out_file = tmp_path / "verify.json"
        code, _ = run_cli("verify", path, "--output", str(out_file), capsys=capsys)
        assert code == 0
        report = json.loads(out_file.read_text())
        statuses = {c["name"]: c["status"] for c in report["checks"]}
        assert statuses["spectral-route"] == "SKIP"
        assert statuses["covariance-envelope-bounds"] == "SKIP"
        assert statuses["row-stochastic-propagator"] == "PASS"


class TestGraphIO:
    def test_round_trip(self, tmp_path):
        g = load_graph(BENCHMARK)
        path = tmp_path / "echo.json"
        path.write_text(json.dumps(graph_to_dict(g)))
        assert load_graph(str(path)) == g
        assert graph_from_dict(graph_to_dict(g)) == g

    def test_missing_file_is_usage_error(self, capsys):
        code, _ = run_cli("analyze", "nope.json", capsys=capsys)
        assert code == 2

    def test_malformed_weight_is_usage_error(self, tmp_path, capsys):
        path = write_graph(tmp_path, {"n": 2, "edges": [[1, 2, "x"]]})
        code, out = run_cli("analyze", path, capsys=capsys)
        assert code == 2
        assert "edge #1" in out.err

class TestReproducibility:
    def test_analyze_rerun_is_byte_identical(self, tmp_path, capsys):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        run_cli("analyze", BENCHMARK, "--output", str(out_a), capsys=capsys)
        run_cli("analyze", BENCHMARK, "--output", str(out_b), capsys=capsys)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_simulate_empty_sample_times_gives_header_only_csv(self, capsys):
        code, out = run_cli("simulate", BENCHMARK, "--step", "0.01", "--trajectories", "10",
                            "--sample-times", "", "--format", "csv", capsys=capsys)
        assert code == 0
        assert out.out == "t,node,mean,variance,se_variance,target_variance,z_variance\n"
