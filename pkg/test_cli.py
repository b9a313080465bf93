import csv
import json

import pytest

from cli import build_parser, run
from tree_model import format_tree, theta_star


def _report(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def figcover_file(tmp_path):
    path = tmp_path / "figcover.txt"
    path.write_text(format_tree(theta_star(7, 4)), encoding="utf-8")
    return path


class TestBuild:
    def test_line_metric(self, tmp_path):
        report_path = tmp_path / "build.json"
        assert run(["build", "--input", "line_64", "--h", "4", "--report", str(report_path)]) == 0
        report = _report(report_path)
        assert report["schema"] == 1
        assert report["command"] == "build"
        assert report["plan"]["regime"] == "low"
        assert report["metrics"]["depth"] <= 4
        assert report["metrics"]["load"] <= 12
        assert all(check["holds"] for check in report["bound_checks"])
        assert "timing" not in report or report["timing"] is None

    def test_points_file_and_tree_output(self, tmp_path):
        points = tmp_path / "pts.txt"
        points.write_text("points 2\n0 0\n1 0\n2 1\n0 3\n4 4\n5 0\n", encoding="utf-8")
        out = tmp_path / "tree.txt"
        report_path = tmp_path / "r.json"
        assert run(["build", "--input", str(points), "--h", "2", "--out", str(out),
                    "--report", str(report_path)]) == 0
        assert out.read_text(encoding="utf-8").startswith("root ")
        assert _report(report_path)["metrics"]["n"] == 6

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["build", "--input", "line_40", "--h", "9"]
        assert run(args + ["--report", str(a)]) == 0
        assert run(args + ["--report", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_timing_flag(self, tmp_path):
        report_path = tmp_path / "t.json"
        assert run(["build", "--input", "line_10", "--h", "3", "--timing", "--report", str(report_path)]) == 0
        assert _report(report_path)["timing"] >= 0

    def test_zero_depth_is_input_error(self, tmp_path):
        assert run(["build", "--input", "line_5", "--h", "0", "--report", str(tmp_path / "x.json")]) == 2

    def test_invalid_matrix(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("matrix 3\n0 1 10\n1 0 1\n10 1 0\n", encoding="utf-8")
        assert run(["build", "--input", str(bad), "--h", "1"]) == 2

    def test_usage_errors(self):
        assert run([]) == 2
        assert run(["nonsense"]) == 2
        assert run(["build", "--input", "line_5"]) == 2


class TestTreeCommands:
    def test_metrics(self, tmp_path, figcover_file):
        report_path = tmp_path / "m.json"
        assert run(["metrics", "--input", str(figcover_file), "--metric", "line_7",
                    "--report", str(report_path)]) == 0
        metrics = _report(report_path)["metrics"]
        assert metrics["depth"] == 1
        assert metrics["max_covering"] == 2
        assert metrics["weight"] == 12
        assert metrics["load"] == 3

    def test_metrics_with_order(self, tmp_path, figcover_file):
        report_path = tmp_path / "m.json"
        assert run(["metrics", "--input", str(figcover_file), "--metric", "line_7", "--order", "0",
                    "--report", str(report_path)]) == 0

    def test_deepen(self, tmp_path, figcover_file):
        report_path = tmp_path / "d.json"
        out = tmp_path / "deep.txt"
        assert run(["normalize", "--input", str(figcover_file), "--metric", "line_7", "--mode", "deepen",
                    "--out", str(out), "--report", str(report_path)]) == 0
        report = _report(report_path)
        assert report["metrics"]["depth"] == 2
        assert report["metrics"]["max_covering"] == 2
        assert out.read_text(encoding="utf-8").splitlines()[0] == "root 2"

    def test_binary(self, tmp_path, figcover_file):
        report_path = tmp_path / "b.json"
        assert run(["normalize", "--input", str(figcover_file), "--metric", "line_7", "--mode", "binary",
                    "--report", str(report_path)]) == 0
        assert _report(report_path)["metrics"]["max_arity"] <= 2

    def test_missing_tree_file(self, tmp_path):
        assert run(["metrics", "--input", str(tmp_path / "none.txt"), "--metric", "line_7"]) == 2

    def test_sllt(self, tmp_path):
        report_path = tmp_path / "s.json"
        assert run(["sllt", "--input", "line_20", "--h", "3", "--theta", "0.5",
                    "--report", str(report_path)]) == 0
        report = _report(report_path)
        assert report["command"] == "sllt"
        assert report["extra"]["breakpoints"]

    def test_sllt_with_root(self, tmp_path):
        report_path = tmp_path / "s.json"
        out = tmp_path / "s.txt"
        assert run(["sllt", "--input", "line_47", "--h", "3", "--theta", "4", "--root", "8",
                    "--out", str(out), "--report", str(report_path)]) == 0
        report = _report(report_path)
        assert report["metrics"]["depth"] <= 5
        assert report["extra"]["source_metrics"]["depth"] <= 3
        depth_check = next(c for c in report["bound_checks"] if c["name"].startswith("sllt-depth"))
        assert depth_check["rhs"] == 5
        assert out.read_text(encoding="utf-8").splitlines()[0] == "root 8"

    def test_build_with_root(self, tmp_path):
        out = tmp_path / "b.txt"
        report_path = tmp_path / "b.json"
        assert run(["build", "--input", "line_74", "--h", "4", "--root", "6", "--out", str(out),
                    "--report", str(report_path)]) == 0
        assert out.read_text(encoding="utf-8").splitlines()[0] == "root 6"
        assert _report(report_path)["metrics"]["depth"] <= 4

    def test_nan_matrix_is_input_error(self, tmp_path):
        bad = tmp_path / "nan.txt"
        bad.write_text("matrix 3\n0 nan 1\nnan 0 1\n1 1 0\n", encoding="utf-8")
        assert run(["build", "--input", str(bad), "--h", "1"]) == 2


class TestOracleCommands:
    def test_weight(self, tmp_path):
        report_path = tmp_path / "o.json"
        assert run(["oracle", "--n", "5", "--h", "1", "--stat", "weight", "--report", str(report_path)]) == 0
        assert _report(report_path)["extra"]["value"] == 6

    def test_hamming(self, tmp_path):
        report_path = tmp_path / "h.json"
        assert run(["oracle", "--n", "7", "--h", "2", "--stat", "hamming", "--report", str(report_path)]) == 0
        extra = _report(report_path)["extra"]
        assert (extra["value"], extra["r"], extra["remainder"]) == (5, 1, 1)

    def test_cap_exceeded(self, tmp_path):
        assert run(["oracle", "--n", "9", "--h", "3", "--report", str(tmp_path / "c.json")]) == 2

    def test_hardgraph(self, tmp_path):
        report_path = tmp_path / "g.json"
        assert run(["hardgraph", "--n", "5", "--report", str(report_path)]) == 0
        extra = _report(report_path)["extra"]
        assert extra["spanning_trees"] == 21
        assert extra["min_product"] == 3

    def test_tradeoff(self, tmp_path):
        out = tmp_path / "t.csv"
        assert run(["tradeoff", "--n", "7", "--out", str(out), "--report", str(tmp_path / "t.json")]) == 0
        with open(out, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert [int(r["h"]) for r in rows] == list(range(1, 7))

    @pytest.mark.slow
    def test_selftest(self, tmp_path):
        report_path = tmp_path / "self.json"
        assert run(["selftest", "--report", str(report_path)]) == 0
        assert all(check["holds"] for check in _report(report_path)["bound_checks"])


def test_parser_defaults():
    args = build_parser().parse_args(["sllt", "--input", "line_5", "--h", "2"])
    assert args.theta == 0.5
    assert args.root is None
