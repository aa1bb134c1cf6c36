import csv
import io
import math
import subprocess
import sys

import pytest

from fracheat import cli
from fracheat.report import COLUMNS, Entry, Report, fmt


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 1e-300, 2.0 ** 0.5):
        assert float(fmt(v)) == v
    assert fmt(True) == "true" and fmt(3) == "3"
    assert fmt(math.inf) == "inf" and fmt(-math.inf) == "-inf" and fmt(math.nan) == "nan"


def test_entry_kinds():
    assert Entry("c", {}, 1.05, 1.0, 0.1, "abs").passed
    assert not Entry("c", {}, 1.2, 1.0, 0.1, "rel").passed
    assert Entry("c", {}, 0.5, 1.0, 0.0, "max").passed
    assert not Entry("c", {}, 0.5, 1.0, 0.0, "min").passed
    assert Entry("c", {}, math.inf, math.inf, 0.0, "abs").passed
    assert not Entry("c", {}, math.nan, 0.0, 1.0, "abs").passed
    with pytest.raises(ValueError):
        Entry("c", {}, 0.0, 0.0, 0.0, "other")


def test_csv_layout_is_sorted_and_deterministic():
    rep = Report()
    rep.add("b.check", 1.0, 1.0, 0.0, alpha=0.5)
    rep.add("a.check", 0.1, 0.0, 1.0, "max", n=1, alpha=0.25)
    text = rep.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == COLUMNS
    assert [r[0] for r in rows[1:]] == ["a.check", "b.check"]
    assert rows[1][1] == '{"alpha":0.25,"kind":"max","n":1}'
    assert rows[1][2] == "0.10000000000000001" and rows[1][5] == "true"
    again = Report(list(reversed(rep.entries)))
    assert again.to_csv() == text
    assert rep.summary() == "2/2 checks passed"


def test_kernel_prints_single_value(capsys):
    assert cli.main(["kernel", "--n", "1", "--alpha", "1", "--x", "0", "--t", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1 / math.sqrt(4 * math.pi), rel=1e-15)
    assert cli.main(["kernel", "--n", "1", "--alpha", "1", "--x", "0", "--t", "-1"]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_kernel_grid_csv(capsys):
    assert cli.main(["kernel", "--n", "2", "--alpha", "0.5", "--x", "0,0;1,0", "--t", "0.5,1"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["x1", "x2", "t", "value"] and len(rows) == 5


def test_potential_command(capsys):
    assert cli.main(["potential", "--field", "exact(alpha=1,lambda=0.5)", "--alpha", "1", "--x", "0",
                     "--t", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.25, rel=1e-10)


def test_verify_exact_suite(tmp_path, capsys):
    out = tmp_path / "exact.csv"
    assert cli.main(["verify", "--suite", "exact", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert tuple(rows[0]) == COLUMNS and all(r[5] == "true" for r in rows[1:])
    assert "checks passed" in capsys.readouterr().err


def test_verify_failure_exits_one(capsys):
    # an impossible tolerance makes the exact suite fail
    assert cli.main(["verify", "--suite", "exact", "--tol", "1e-30"]) == 1


@pytest.mark.parametrize("argv", [
    ["kernel", "--n", "1", "--alpha", "1", "--x", "0", "--t", "1", "--bogus", "2"],
    ["kernel", "--n", "1", "--alpha", "1", "--x", "0"],
    ["kernel", "--n", "1", "--alpha", "1", "--x", "0", "--t", "1", "--format", "svg"],
    ["kernel", "--n", "1", "--alpha", "1", "--x", "0", "--t", "1", "--format", "pdf", "--out", "a.csv"],
    ["verify", "--suite", "nosuch"],
    ["potential", "--field", "nosuch(1)", "--alpha", "1", "--x", "0", "--t", "1"],
    ["regions", "--n", "1", "--p", "1", "--lambda-grid", "2:1:0.1"],
    [],
])
def test_usage_errors_exit_two(argv, capsys):
    assert cli.main(argv) == 2
    assert capsys.readouterr().err.startswith("fracheat: error:")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# kernel at the origin\nn = 1\nalpha=1\nx=0\n")
    assert cli.main(["kernel", "--config", str(cfg), "--t", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1 / math.sqrt(4 * math.pi))
    # flags on the command line win over the file
    assert cli.main(["kernel", "--config", str(cfg), "--t", "2", "--alpha", "2"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(2 / math.sqrt(8 * math.pi))
    cfg.write_text("colour=red\n")
    assert cli.main(["kernel", "--config", str(cfg)]) == 2


def test_svg_output_is_deterministic(tmp_path):
    paths = []
    for k in range(2):
        out = tmp_path / f"run{k}" / "limits.csv"
        out.parent.mkdir()
        assert cli.main(["limits", "--mode", "time", "--format", "svg", "--out", str(out)]) == 0
        paths.append(out)
    svgs = [p.with_suffix(".svg").read_bytes() for p in paths]
    assert svgs[0] == svgs[1] and svgs[0].startswith(b"<?xml")
    assert paths[0].read_text() == paths[1].read_text()


def test_regions_exact_curve(capsys):
    assert cli.main(["regions", "--n", "1", "--p", "1", "--lambda-grid", "1:2:0.5"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows == [["lambda", "alpha_critical"], ["1", "0"], ["1.5", "0.5"], ["2", "0.75"]]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "fracheat", "kernel", "--n", "1", "--alpha", "1", "--x", "0",
                          "--t", "-1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0"
