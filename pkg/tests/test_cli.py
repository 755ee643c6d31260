import csv
import io
import json
import subprocess
import sys

import pytest

from cverasure.cli import main, parse_grid, UsageError
from cverasure.decoupling import c_standard


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


GOLDEN_CAPACITY = """\
# cverasure 0.1.0 command=capacity nbar=1 p=0,0.25,0.5 seed=0 tol=1e-08
p,nbar,q_standard,q_ea,c_ea_classical,q_dv_d2,q_dv_ea_d2
0,1,2,2,4,1,1
0.25,1,1,1.5,3,0.5,0.75
0.5,1,0,1,2,0,0.5
"""


class TestGrid:
    def test_ranges(self):
        assert parse_grid("0:0.5:0.05")[-1] == 0.5
        assert len(parse_grid("0:1:0.1")) == 11
        assert parse_grid("1,2:3:0.5") == [1.0, 2.0, 2.5, 3.0]

    @pytest.mark.parametrize("bad", ["", "a", "1:0:0.1", "0:1:0", "0:1", "nan"])
    def test_errors(self, bad):
        with pytest.raises(UsageError):
            parse_grid(bad)


class TestCapacity:
    def test_golden(self, capsys):
        # q at nbar = 1: g(1) = 2 bits, qubit references use log2 2 = 1
        code, out, _ = run(["capacity", "--p", "0,0.25,0.5", "--nbar", "1"], capsys)
        assert code == 0
        assert out == GOLDEN_CAPACITY

    def test_row_count(self, capsys):
        code, out, _ = run(["capacity", "--p", "0:1:0.1", "--nbar", "1"], capsys)
        header, rows = table(out)
        assert code == 0 and len(rows) == 11
        assert rows[0][header.index("q_standard")] == 2.0

    @pytest.mark.parametrize("argv", [
        ["capacity", "--p", "", "--nbar", "1"],
        ["capacity", "--p", "1.5", "--nbar", "1"],
        ["capacity", "--p", "0.1", "--nbar", "0"],
        ["capacity", "--p", "0.1"],
        ["verify", "bogus"],
        ["fidelity", "--N", "0", "--nbar", "1"],
        ["fidelity", "--N", "2.5", "--nbar", "1"],
        ["constant", "--p", "0.1", "--q", "optm"],
        ["capacity", "--p", "0.1", "--nbar", "1", "--seed", "-1"],
    ])
    def test_usage_errors(self, argv, capsys):
        code, _, err = run(argv, capsys)
        assert code == 2
        assert "error" in err


class TestRate:
    def test_rate_below_capacity(self, capsys):
        for assisted in ("standard", "ea"):
            code, out, _ = run(["rate", "--p", "0:0.9:0.1", "--nbar", "1,10", "--assisted", assisted], capsys)
            header, rows = table(out)
            assert code == 0 and len(rows) == 20
            r, c = header.index("rate"), header.index("capacity")
            assert all(row[r] <= row[c] + 1e-12 for row in rows)

    def test_constant_matches_rate(self, capsys):
        _, out, _ = run(["rate", "--p", "0.2", "--nbar", "10"], capsys)
        header, rows = table(out)
        q = rows[0][header.index("q_optm")]
        assert rows[0][header.index("c_q_optm")] == pytest.approx(c_standard(0.2, q), rel=1e-11)
        _, out, _ = run(["constant", "--p", "0.2", "--q", "0.3,optm", "--nbar", "10"], capsys)
        h2, r2 = table(out)
        assert h2 == ["p", "c_standard_q0.3", "c_standard_qoptm", "c_ea_q0.3", "c_ea_qoptm"]
        assert r2[0][2] == pytest.approx(rows[0][header.index("c_q_optm")], rel=1e-11)
        assert r2[0][1] == pytest.approx(c_standard(0.2, 0.3), rel=1e-11)

    def test_json(self, capsys):
        code, out, _ = run(["rate", "--p", "0.1", "--nbar", "10", "--format", "json"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["meta"]["command"] == "rate"
        assert doc["columns"][:4] == ["nbar", "p", "q_optm", "rate"]
        assert len(doc["rows"]) == 1


class TestOtherTables:
    def test_pstar(self, capsys):
        _, out, _ = run(["pstar", "--nbar", "0.5,10"], capsys)
        header, rows = table(out)
        assert header == ["nbar", "p_star_standard", "p_star_ea"]
        assert rows[0][1] < rows[1][1] < 0.5 < rows[0][2] < rows[1][2] < 1.0

    def test_submult(self, capsys):
        _, out, _ = run(["submult", "--x", "0.1:0.9:0.2", "--m-plus", "0,1"], capsys)
        header, rows = table(out)
        assert header == ["x", "exponent_m0", "exponent_m1", "h2"]
        assert all(r[2] >= r[1] for r in rows)

    def test_fidelity(self, capsys):
        _, out, _ = run(["fidelity", "--N", "1,5", "--nbar", "1"], capsys)
        header, rows = table(out)
        assert header == ["nbar", "fid_N1", "fid_N5"]
        assert rows[0][1] == pytest.approx(1.0, abs=1e-3)
        assert 0.9 < rows[0][2] < 1.0

    def test_out_and_plot(self, tmp_path, capsys):
        csv_path, svg_path = tmp_path / "c.csv", tmp_path / "c.svg"
        code, out, _ = run(["capacity", "--p", "0:1:0.25", "--nbar", "2", "--out", str(csv_path),
                            "--plot", str(svg_path)], capsys)
        assert code == 0 and out == ""
        assert csv_path.read_text().startswith("# cverasure")
        assert svg_path.read_text().lstrip().startswith("<?xml")


class TestPlot:
    def test_series(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        a.write_text("# meta\nx,y,label\n1,2,u\n2,3,v\n")
        code, _, _ = run(["plot", str(a), str(tmp_path / "a.svg")], capsys)
        svg = (tmp_path / "a.svg").read_text()
        assert code == 0
        assert "<!-- y -->" in svg and "<!-- label -->" not in svg

    def test_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        a.write_text("x,y,z\n1,2,5\n2,3,4\n")
        for name in ("one.svg", "two.svg"):
            run(["plot", str(a), str(tmp_path / name), "--title", "t"], capsys)
        assert (tmp_path / "one.svg").read_bytes() == (tmp_path / "two.svg").read_bytes()

    @pytest.mark.parametrize("body", ["", "x,y\n", "x\n1\n2\n"])
    def test_empty(self, tmp_path, capsys, body):
        a = tmp_path / "e.csv"
        a.write_text(body)
        code, _, _ = run(["plot", str(a), str(tmp_path / "e.svg")], capsys)
        assert code == 2

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["plot", str(tmp_path / "nope.csv"), str(tmp_path / "e.svg")], capsys)
        assert code == 2


class TestVerify:
    def test_pass_json(self, capsys):
        code, out, _ = run(["verify", "haar", "--samples", "2000", "--seed", "5"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["passed"] and doc["seed"] == 5
        assert {"quantity", "estimate", "stderr", "reference_value", "sigma_distance",
                "samples", "seed", "passed"} <= set(doc["records"][0])

    def test_console_script(self):
        res = subprocess.run([sys.executable, "-m", "cverasure.cli", "--version"],
                             capture_output=True, text=True)
        assert res.returncode == 0 and "0.1.0" in res.stdout
