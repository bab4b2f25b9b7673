import csv
import io
import json

import pytest

from toricq.cli import main

SIMPLEX = {"dim": 2, "facets": [
    {"normal": [1, 0], "offset": 0},
    {"normal": [0, 1], "offset": 0},
    {"normal": [-1, -1], "offset": 2}]}

BAD_TRIANGLE = {"dim": 2, "facets": [
    {"normal": [1, 0], "offset": 0},
    {"normal": [0, 1], "offset": 0},
    {"normal": [-1, -2], "offset": 2}]}

SEGMENT = {"dim": 1, "facets": [
    {"normal": [1], "offset": "1/2"},
    {"normal": [-1], "offset": "3/2"}]}

UNIT_SEGMENT = {"dim": 1, "facets": [
    {"normal": [1], "offset": 0},
    {"normal": [-1], "offset": 1}]}

SQUARE = {"dim": 2, "facets": [
    {"normal": [1, 0], "offset": "1/2"},
    {"normal": [0, 1], "offset": "1/2"},
    {"normal": [-1, 0], "offset": "3/2"},
    {"normal": [0, -1], "offset": "3/2"}]}


def write(tmp_path, data, name="poly.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SIMPLEX),
                                 "--command", "validate"])
        assert code == 0
        assert "verdict,ok" in out

    def test_bad_vertex_named(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, BAD_TRIANGLE),
                                 "--command", "validate", "--format", "json"])
        assert code == 1
        payload = json.loads(out)
        assert payload["verdict"] == "not delzant"
        assert any(v == ["0", "1"] for v, _ in payload["violations"])

    def test_missing_key(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps({"dim": 2}))
        code, _ = run(capsys, ["--input", str(path), "--command", "validate"])
        assert code == 2

    def test_unparseable_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        code, _ = run(capsys, ["--input", str(path), "--command", "validate"])
        assert code == 2


class TestPoints:
    def test_segment_basis(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SEGMENT),
                                 "--command", "points"])
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["index", "m", "H"]
        assert [r[1] for r in rows[1:]] == ["0", "1"]


class TestNorms:
    def test_segment_rows_and_limits(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SEGMENT),
                                 "--command", "norms", "--p", "1",
                                 "--s-grid", "10,100", "--tol", "1e-8"])
        assert code == 0
        rows = rows_of(out)[1:]
        data = [r for r in rows if r[1] != "inf"]
        limits = [r for r in rows if r[1] == "inf"]
        assert len(data) == 4 and len(limits) == 2
        for r in limits:
            assert float(r[5]) == pytest.approx(2.3025, abs=2e-4)
            assert r[6] == "True"

    def test_json_mirrors_csv(self, tmp_path, capsys):
        base = ["--input", write(tmp_path, SEGMENT), "--command", "norms",
                "--p", "1", "--s-grid", "10,20", "--m", "0"]
        _, out_csv = run(capsys, base + ["--format", "csv"])
        _, out_json = run(capsys, base + ["--format", "json"])
        payload = json.loads(out_json)
        assert rows_of(out_csv) == [payload["columns"]] + payload["rows"]

    def test_unknown_m(self, tmp_path, capsys):
        code, _ = run(capsys, ["--input", write(tmp_path, SEGMENT),
                               "--command", "norms", "--m", "7"])
        assert code == 2


class TestFlow:
    def test_distances_decrease(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SQUARE),
                                 "--command", "flow", "--p", "1",
                                 "--s-grid", "1,10,100"])
        assert code == 0
        rows = rows_of(out)[1:]
        dists = [float(r[2]) for r in rows]
        gaps = [float(r[3]) for r in rows]
        assert dists == sorted(dists, reverse=True)
        assert gaps == sorted(gaps, reverse=True)

    def test_vertical_limit_when_p_equals_n(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SQUARE),
                                 "--command", "flow", "--p", "2",
                                 "--s-grid", "1,10,100"])
        assert code == 0
        dists = [float(r[2]) for r in rows_of(out)[1:]]
        assert dists == sorted(dists, reverse=True)

    def test_exterior_point_marked(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SQUARE),
                                 "--command", "flow", "--point", "9,9"])
        assert code == 0
        assert "error: point not interior" in out


class TestReduce:
    def test_simplex_levels(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SIMPLEX),
                                 "--command", "reduce", "--p", "1"])
        assert code == 0
        rows = rows_of(out)[1:]
        assert [r[1] for r in rows[:-1]] == ["3", "2", "1"]
        assert rows[-1] == ["total", "6", "ok"]

    def test_square_levels(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, SQUARE),
                                 "--command", "reduce", "--p", "1"])
        assert code == 0
        rows = rows_of(out)[1:]
        assert [r[1] for r in rows[:-1]] == ["2", "2"]

    def test_alpha_family(self, tmp_path, capsys):
        code, out = run(capsys, ["--command", "reduce", "--alpha", "2"])
        assert code == 0
        row = rows_of(out)[1]
        assert row[1] == "worse"
        assert float(row[2]) == pytest.approx(2.0 / 3.0, abs=1e-6)
        assert float(row[3]) == pytest.approx(1.0 / 3.0, abs=1e-6)


class TestCurvature:
    def test_unit_segment(self, tmp_path, capsys):
        code, out = run(capsys, ["--input", write(tmp_path, UNIT_SEGMENT),
                                 "--command", "curvature", "--point", "0.5"])
        assert code == 0
        assert float(rows_of(out)[1][1]) == pytest.approx(2.0, abs=1e-6)

    def test_boundary_point_usage_error(self, tmp_path, capsys):
        code, _ = run(capsys, ["--input", write(tmp_path, UNIT_SEGMENT),
                               "--command", "curvature", "--point", "5.0"])
        assert code == 2


class TestContracts:
    def test_bad_s_grid(self, tmp_path, capsys):
        code, _ = run(capsys, ["--input", write(tmp_path, SEGMENT),
                               "--command", "norms", "--s-grid", "10,5"])
        assert code == 2

    def test_nonpositive_tol(self, tmp_path, capsys):
        code, _ = run(capsys, ["--input", write(tmp_path, SEGMENT),
                               "--command", "norms", "--tol", "0"])
        assert code == 2

    def test_missing_input(self, capsys):
        code, _ = run(capsys, ["--command", "points"])
        assert code == 2

    def test_frame_change_preserves_counts(self, tmp_path, capsys):
        base = ["--input", write(tmp_path, SIMPLEX), "--command", "points"]
        _, out0 = run(capsys, base)
        _, out1 = run(capsys, base + ["--B", "1,1;0,1"])
        assert len(rows_of(out0)) == len(rows_of(out1))

    def test_norms_deterministic(self, tmp_path, capsys):
        argv = ["--input", write(tmp_path, SEGMENT), "--command", "norms",
                "--p", "1", "--s-grid", "10,20"]
        _, out1 = run(capsys, argv)
        _, out2 = run(capsys, argv)
        assert out1 == out2

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "report.csv"
        code, out = run(capsys, ["--input", write(tmp_path, SEGMENT),
                                 "--command", "points", "--out", str(target)])
        assert code == 0
        assert out == ""
        assert target.read_text().startswith("index,m,H")
