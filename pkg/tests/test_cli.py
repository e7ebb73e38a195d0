import io
import xml.etree.ElementTree as ET

import numpy as np

from thirdbvp import cli
from thirdbvp.examples import example_path

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def test_solve_writes_csv(tmp_path):
    path = tmp_path / "sol.csv"
    code, out, _ = run("solve", example_path(1), "--n", 16, "--out", path)
    assert code == cli.EXIT_OK
    assert "K = " in out and "converged = true" in out
    lines = path.read_text().splitlines()
    assert lines[0] == "t,u,y,z,phi" and len(lines) == 18
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data[0, 1] == 0.0 and data[0, 2] == -1.0 and data[-1, 2] == np.sin(1.0)


def test_csv_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run("solve", example_path(3), "--n", 32, "--method", "simpson", "--out", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()
    # .17g round-trips every double
    row = a.read_text().splitlines()[5].split(",")
    assert all(float(v) == float(format(float(v), ".17g")) for v in row)


def test_input_errors(tmp_path):
    assert run("solve", tmp_path / "missing.prob")[0] == cli.EXIT_INPUT
    bad = tmp_path / "bad.prob"
    bad.write_text('f = "u +"\nc1 = 0\nc2 = 0\nc3 = 0\n')
    code, _, err = run("solve", bad)
    assert code == cli.EXIT_INPUT and "line 1" in err
    assert run("solve", example_path(4), "--n", 63, "--method", "simpson")[0] == cli.EXIT_INPUT
    assert run("solve", example_path(4), "--out", tmp_path / "no" / "dir" / "x.csv")[0] == cli.EXIT_INPUT
    assert run("frobnicate")[0] == cli.EXIT_INPUT


def test_not_converged_exit(tmp_path):
    code, out, _ = run("solve", example_path(1), "--n", 16, "--max-iter", 2, "--out", tmp_path / "p.csv")
    assert code == cli.EXIT_NOT_CONVERGED
    assert "converged = false" in out
    assert (tmp_path / "p.csv").exists()


def test_non_finite_exit(tmp_path):
    path = tmp_path / "log.prob"
    path.write_text('f = "log(u - 1)"\nc1 = 0\nc2 = 0\nc3 = 0\n')
    assert run("solve", path)[0] == cli.EXIT_NOT_CONVERGED


def test_study_markdown_reproduces_example1_column():
    code, out, _ = run("study", example_path(1), "--n", 8, 16, 32)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split("|")[1:-1] == [" N ", " K ", " Error_trap ", " Order ", " Error_Simp ", " Order "]
    assert "| 8 | 7 | 9.9235e-04 |" in lines[2]
    assert "2.0045" in lines[3]


def test_study_csv_and_file(tmp_path):
    path = tmp_path / "study.csv"
    code, _, _ = run("study", example_path(2), "--n", 8, 16, "--method", "trap", "--format", "csv", "--out", path)
    assert code == 0
    rows = path.read_text().splitlines()
    assert rows[0] == "N,K_trap,Error_trap,Order_trap"
    assert len(rows) == 3


def test_study_single_row_and_reference_note():
    code, out, _ = run("study", example_path(4), "--n", 16, "--method", "trap")
    assert code == 0
    assert "note: no exact solution" in out
    assert run("study", example_path(1), "--n", 8, 24)[0] == cli.EXIT_INPUT


def test_check_exit_codes(tmp_path):
    code, out, _ = run("check", example_path(2))
    assert code == cli.EXIT_OK and "q = L0/12 + L1/8 + L2/2 = 0.5" in out
    code, out, _ = run("check", example_path(4), "--samples", 8)
    assert code == cli.EXIT_OK and "sup|f|" in out
    assert run("check", example_path(1))[0] == cli.EXIT_INPUT
    strong = tmp_path / "strong.prob"
    strong.write_text('f = "20*u"\nc1 = 0\nc2 = 0\nc3 = 0\nM = 1\nL0 = 20\nL1 = 0\nL2 = 0\n')
    assert run("check", strong)[0] == cli.EXIT_HYPOTHESIS
    nom = tmp_path / "nom.prob"
    nom.write_text('f = "u"\nc1 = 0\nc2 = 0\nc3 = 0\n')
    assert run("check", nom, "--samples", 4)[0] == cli.EXIT_INPUT


def test_plot_example4(tmp_path):
    path = tmp_path / "ex4.svg"
    code, out, _ = run("plot", example_path(4), "--n", 64, "--svg", path)
    assert code == 0 and "K = 15" in out
    root = ET.parse(path).getroot()
    assert root.tag == SVG_NS + "svg"
    poly = root.find(SVG_NS + "polyline")
    pts = np.array([[float(v) for v in p.split(",")] for p in poly.get("points").split()])
    assert len(pts) == 65
    assert np.all(np.diff(pts[:, 0]) > 0)
    # screen y grows downward: the solution rises from 0, so y decreases
    assert np.all(np.diff(pts[:, 1]) <= 1e-9)


def test_solution_svg_constant_curve():
    text = cli.solution_svg(np.linspace(0, 1, 5), np.zeros(5))
    ET.fromstring(text.split("\n", 1)[1])
