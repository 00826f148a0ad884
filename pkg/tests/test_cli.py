import json

import numpy as np
import pytest

from graphlowrank import (load_edge_list, load_matrix_csv,
                          num_connected_components, save_matrix_csv)
from graphlowrank.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture
def three_points_csv(tmp_path):
    path = tmp_path / "points.csv"
    save_matrix_csv(path, np.array([[0.0, 1.0, 2.0]]))
    return path


class TestGraphBuild:
    def test_collinear_demo(self, tmp_path, three_points_csv):
        out = tmp_path / "g.txt"
        code = run(["graph", "build", "--matrix", three_points_csv,
                    "--axis", "columns", "--k", 1, "--weighting", "binary",
                    "--out", out])
        assert code == 0
        g = load_edge_list(out)
        assert g.num_edges == 2
        assert (tmp_path / "g.txt.manifest.json").exists()

    def test_rerun_is_byte_identical(self, tmp_path, three_points_csv):
        outs = []
        for name in ("g1.txt", "g2.txt"):
            out = tmp_path / name
            assert run(["graph", "build", "--matrix", three_points_csv,
                        "--k", 1, "--out", out]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_spiral_graph_is_connected(self, tmp_path):
        matrix = tmp_path / "spiral.csv"
        assert run(["synth", "manifold", "--kind", "spiral2d", "--n", 500,
                    "--out", matrix]) == 0
        out = tmp_path / "spiral_graph.txt"
        assert run(["graph", "build", "--matrix", matrix, "--k", 3,
                    "--out", out]) == 0
        assert num_connected_components(load_edge_list(out)) == 1

    def test_malformed_csv_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n3.0,x\n")
        code = run(["graph", "build", "--matrix", bad, "--k", 1,
                    "--out", tmp_path / "g.txt"])
        assert code == 3


@pytest.fixture
def solve_setup(tmp_path, rng):
    Y = rng.standard_normal((12, 15))
    matrix = tmp_path / "y.csv"
    save_matrix_csv(matrix, Y)
    row_graph = tmp_path / "rows.txt"
    col_graph = tmp_path / "cols.txt"
    assert run(["graph", "build", "--matrix", matrix, "--axis", "rows",
                "--k", 3, "--out", row_graph]) == 0
    assert run(["graph", "build", "--matrix", matrix, "--axis", "columns",
                "--k", 3, "--out", col_graph]) == 0
    return matrix, row_graph, col_graph, Y


class TestSolve:
    def test_zero_gamma_returns_input(self, tmp_path, solve_setup):
        matrix, row_graph, col_graph, Y = solve_setup
        out_dir = tmp_path / "run"
        code = run(["solve", "--matrix", matrix, "--row-graph", row_graph,
                    "--col-graph", col_graph, "--algo", "frpcag",
                    "--gamma-r", 0, "--gamma-c", 0, "--out-dir", out_dir])
        assert code == 0
        X = load_matrix_csv(out_dir / "X.csv")
        assert np.allclose(X, Y)
        assert (out_dir / "trace.csv").exists()
        assert (out_dir / "report.txt").exists()
        assert (out_dir / "manifest.json").exists()

    def test_tikhonov_matches_frpcag_l2(self, tmp_path, solve_setup):
        matrix, row_graph, col_graph, _ = solve_setup
        closed = tmp_path / "closed"
        iterative = tmp_path / "iterative"
        common = ["--matrix", matrix, "--row-graph", row_graph,
                  "--col-graph", col_graph, "--gamma-r", 0.7, "--gamma-c", 0]
        assert run(["solve", *common, "--algo", "tikhonov",
                    "--out-dir", closed]) == 0
        assert run(["solve", *common, "--algo", "frpcag", "--loss", "l2",
                    "--tol", 1e-14, "--max-iters", 4000,
                    "--out-dir", iterative]) == 0
        a = load_matrix_csv(closed / "X.csv")
        b = load_matrix_csv(iterative / "X.csv")
        assert np.linalg.norm(a - b) <= 1e-4 * np.linalg.norm(a)

    def test_dimension_mismatch_is_data_error(self, tmp_path, solve_setup):
        matrix, row_graph, _, _ = solve_setup
        code = run(["solve", "--matrix", matrix, "--row-graph", row_graph,
                    "--col-graph", row_graph, "--out-dir", tmp_path / "x"])
        assert code == 3

    def test_unknown_algo_is_usage_error(self, tmp_path, solve_setup):
        matrix, row_graph, col_graph, _ = solve_setup
        with pytest.raises(SystemExit) as excinfo:
            run(["solve", "--matrix", matrix, "--row-graph", row_graph,
                 "--col-graph", col_graph, "--algo", "nuclear",
                 "--out-dir", tmp_path / "x"])
        assert excinfo.value.code == 2

    def test_hitting_iteration_cap_still_succeeds(self, tmp_path, solve_setup):
        matrix, row_graph, col_graph, _ = solve_setup
        out_dir = tmp_path / "capped"
        code = run(["solve", "--matrix", matrix, "--row-graph", row_graph,
                    "--col-graph", col_graph, "--algo", "frpcag",
                    "--gamma-r", 5, "--gamma-c", 5, "--max-iters", 2,
                    "--tol", 1e-16, "--out-dir", out_dir])
        assert code == 0
        report = (out_dir / "report.txt").read_text()
        assert "converged: false" in report
        assert "stop_reason: max_iters" in report

    def test_gfrpcag_runs(self, tmp_path, solve_setup):
        matrix, row_graph, col_graph, _ = solve_setup
        out_dir = tmp_path / "gf"
        code = run(["solve", "--matrix", matrix, "--row-graph", row_graph,
                    "--col-graph", col_graph, "--algo", "gfrpcag",
                    "--loss", "l2", "--gamma-c", 1.0, "--filter-b", 0.8,
                    "--out-dir", out_dir])
        assert code == 0
        assert (out_dir / "X.csv").exists()


class TestSynthCommands:
    def test_lowrank_outputs_and_determinism(self, tmp_path):
        args = ["synth", "lowrank", "--p", 20, "--n", 24, "--k-r", 3,
                "--k-c", 3, "--seed", 9, "--noise", "gaussian",
                "--sigma", 0.05]
        first = tmp_path / "a"
        second = tmp_path / "b"
        assert run([*args, "--out-dir", first]) == 0
        assert run([*args, "--out-dir", second]) == 0
        for name in ("ystar.csv", "y.csv", "row_graph.txt", "col_graph.txt"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_manifest_reproduces_run(self, tmp_path):
        out = tmp_path / "circle.csv"
        assert run(["synth", "manifold", "--kind", "circle2d", "--n", 64,
                    "--noise-sigma", 0.1, "--seed", 4, "--out", out]) == 0
        original = out.read_bytes()
        manifest_path = tmp_path / "circle.csv.manifest.json"
        manifest = json.loads(manifest_path.read_text())
        assert manifest["command"] == "synth manifold"
        replay = tmp_path / "replay.csv"
        manifest["params"]["out"] = str(replay)
        config = tmp_path / "config.json"
        config.write_text(json.dumps(manifest))
        assert run(["synth", "manifold", "--config", config]) == 0
        assert replay.read_bytes() == original

    def test_circle_radius(self, tmp_path):
        out = tmp_path / "circle.csv"
        assert run(["synth", "manifold", "--kind", "circle2d", "--n", 32,
                    "--out", out]) == 0
        values = load_matrix_csv(out)
        assert np.abs(np.linalg.norm(values, axis=0) - 1.0).max() <= 1e-12


class TestDiagnose:
    def test_pipeline_synth_solve_diagnose_bound_holds(self, tmp_path):
        synth_dir = tmp_path / "data"
        assert run(["synth", "lowrank", "--p", 40, "--n", 40, "--k-r", 4,
                    "--k-c", 4, "--seed", 21, "--noise", "gaussian",
                    "--sigma", 0.05, "--out-dir", synth_dir]) == 0
        # the bound assumes gamma_r = gamma / lambda_{k_r+1} and likewise
        # for the columns, so derive the solver weights from the spectra
        import graphlowrank as glr
        row_basis = glr.eigendecompose(
            glr.laplacian(glr.load_edge_list(synth_dir / "row_graph.txt")))
        col_basis = glr.eigendecompose(
            glr.laplacian(glr.load_edge_list(synth_dir / "col_graph.txt")))
        gamma = 1.0
        gamma_r = gamma / row_basis.eigenvalues[4]
        gamma_c = gamma / col_basis.eigenvalues[4]
        solve_dir = tmp_path / "solve"
        assert run(["solve", "--matrix", synth_dir / "y.csv",
                    "--row-graph", synth_dir / "row_graph.txt",
                    "--col-graph", synth_dir / "col_graph.txt",
                    "--algo", "frpcag", "--loss", "l1",
                    "--gamma-r", gamma_r, "--gamma-c", gamma_c,
                    "--tol", 1e-10, "--max-iters", 3000,
                    "--out-dir", solve_dir]) == 0
        diag_dir = tmp_path / "diag"
        assert run(["diagnose", "--matrix", solve_dir / "X.csv",
                    "--row-graph", synth_dir / "row_graph.txt",
                    "--col-graph", synth_dir / "col_graph.txt",
                    "--k", 4, "--ystar", synth_dir / "ystar.csv",
                    "--noisy", synth_dir / "y.csv", "--gamma", gamma,
                    "--loss", "l1", "--out-dir", diag_dir]) == 0
        text = (diag_dir / "diagnostics.txt").read_text()
        assert "bound_holds: true" in text
        for name in ("alignment_rows.txt", "alignment_columns.txt",
                     "gamma_rows_db.csv", "singular_values.csv",
                     "coherence_right.csv", "manifest.json"):
            assert (diag_dir / name).exists()


class TestSpectra:
    def test_eigenvalue_export(self, tmp_path, three_points_csv):
        graph_file = tmp_path / "g.txt"
        assert run(["graph", "build", "--matrix", three_points_csv, "--k", 1,
                    "--out", graph_file]) == 0
        out = tmp_path / "spectrum.csv"
        assert run(["spectra", "--graph", graph_file, "--out", out]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "index,eigenvalue"
        assert len(lines) == 4

    def test_filter_curve_export(self, tmp_path):
        out = tmp_path / "curve.csv"
        assert run(["spectra", "--filter-b", 0.4, "--filter-gamma", 1.0,
                    "--out", out]) == 0
        assert out.read_text().splitlines()[0] == "x,g(x),f(x)"

    def test_missing_mode_is_usage_error(self, tmp_path):
        assert run(["spectra", "--out", tmp_path / "x.csv"]) == 2
