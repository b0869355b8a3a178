import csv
import io
import json
import subprocess
import sys

import pytest

from qortho import cli

COLUMNS = ["identity_id", "param_json", "lhs", "rhs", "residual", "terms_used", "converged", "pass"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_example(capsys):
    code, out, _ = run(["eval", "--family", "qHermite_H", "--n", "3", "--q", "0.5", "--x", "1.0"], capsys)
    assert code == 0
    assert float(out) == -1.5


def test_verify_sumaBH_example(capsys):
    code, out, _ = run(["verify", "--identity", "sumaBH", "--n-max", "6", "--m-max", "6", "--q", "0.5",
                        "--seed", "7"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["pass"] == "true" for r in rows)


def test_verify_pm_trivial_example(capsys):
    code, out, _ = run(["verify", "--identity", "PM", "--q", "1", "--rho", "0"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(float(r["residual"]) == 0 for r in rows)


def test_report_columns_and_line_endings(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, err = run(["verify", "--identity", "HH", "--n-max", "2", "--q", "1/2", "--out", str(out)], capsys)
    assert code == 0 and "failed" in err
    data = out.read_bytes()
    assert b"\r\n" not in data
    header = data.decode("utf-8").splitlines()[0]
    assert header.split(",") == COLUMNS


def test_json_report(capsys):
    code, out, _ = run(["verify", "--identity", "products", "--q", "0.3", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert set(rows[0]) == set(COLUMNS)
    assert all(r["pass"] is True for r in rows)


def test_reports_are_deterministic(capsys):
    argv = ["verify", "--identity", "PM", "--q", "0.5", "--points", "3", "--seed", "3"]
    first = run(argv, capsys)[1]
    assert first == run(argv, capsys)[1]
    assert first != run(argv[:-1] + ["4"], capsys)[1]


def test_rows_sorted(capsys):
    _, out, _ = run(["verify", "--identity", "rescale", "--q", "0.3", "--n-max", "2"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    keys = [(r["identity_id"], r["param_json"]) for r in rows]
    assert keys == sorted(keys)


@pytest.mark.parametrize("argv", [
    ["verify", "--identity", "nope"],
    ["eval", "--family", "nope", "--n", "2", "--x", "0.1"],
    ["eval", "--family", "ASC_P", "--n", "2", "--x", "0.1"],
    ["kernel", "--kind", "PM", "-p", "x=0.1"],
    ["kernel", "--kind", "PM", "-p", "x=0.1", "-p", "y=0.2", "-p", "rho=2", "--q", "0.5"],
    ["density", "--kind", "fCN", "--q", "0.5"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval", "--family", "qHermite_H", "--n", "2", "--x", "abc"])
    assert exc.value.code == 2


def test_unwritable_output(capsys, tmp_path):
    target = tmp_path / "missing" / "r.csv"
    code, _, err = run(["verify", "--identity", "HH", "--n-max", "1", "--q", "1/2", "--out", str(target)], capsys)
    assert code == 2 and "cannot write" in err


def test_failure_exit_1(capsys, monkeypatch):
    # a one-term cap cannot converge the Poisson-Mehler series
    monkeypatch.setenv("QORTHO_MAX_TERMS", "1")
    code, out, _ = run(["verify", "--identity", "PM", "--q", "0.5", "--rho", "0.5", "--points", "2"], capsys)
    assert code == 1
    assert "false" in out


def test_max_terms_flag_overrides_env(capsys, monkeypatch):
    monkeypatch.setenv("QORTHO_MAX_TERMS", "1")
    code, _, _ = run(["verify", "--identity", "PM", "--q", "0.5", "--rho", "0.5", "--points", "2",
                      "--max-terms", "500"], capsys)
    assert code == 0


def test_coeffs_exact(capsys):
    code, out, _ = run(["coeffs", "--family", "qHermite_H", "--n", "3", "--q", "1/2"], capsys)
    assert code == 0
    assert [r["coefficient"] for r in csv.DictReader(io.StringIO(out))] == ["0", "-5/2", "0", "1"]
    code, out, err = run(["coeffs", "--identity", "HH", "--n", "2", "--m", "3", "--q", "1/2"], capsys)
    assert [r["coefficient"] for r in csv.DictReader(io.StringIO(out))] == ["0", "21/8", "0", "21/8", "0", "1"]
    assert "basis" in err


def test_other_commands(capsys):
    code, out, _ = run(["table", "--family", "Cheb_T", "--n-max", "2", "--points", "3"], capsys)
    assert code == 0 and out.splitlines()[0] == "x,P0,P1,P2"
    code, out, _ = run(["kernel", "--kind", "PM", "-p", "x=0.3", "-p", "y=0.2", "-p", "rho=0.5", "--q", "0.5"],
                       capsys)
    assert code == 0 and ",true" in out
    code, out, _ = run(["density", "--kind", "fN", "--q", "0.5", "--x", "0.3"], capsys)
    assert abs(float(out.splitlines()[1].split(",")[1]) - 0.35765180874711766) < 1e-14
    code, out, _ = run(["quadrature", "--family", "qHermite_H", "--n-max", "2", "--q", "0.5"], capsys)
    assert code == 0
    code, out, _ = run(["ks", "-p", "rho12=0.3", "-p", "rho13=0.4", "-p", "rho23=-0.35", "-p", "x1=0.4",
                        "-p", "x2=-0.8", "-p", "x3=1.1", "--q", "0.5"], capsys)
    vals = [float(r["value"]) for r in csv.DictReader(io.StringIO(out))]
    assert len(vals) == 3 and max(vals) - min(vals) < 1e-10


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qortho.cli", "eval", "--family", "Cheb_U", "--n", "2", "--x", "0.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and float(proc.stdout) == 0.0
