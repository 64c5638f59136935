import csv
import io
import json
import os

import pytest

from nlsprofile import cli
from nlsprofile.cli import EXIT_DOMAIN, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solve_outputs(tmp_path):
    prof, traj, summ = tmp_path / "p.csv", tmp_path / "t.csv", tmp_path / "s.json"
    rc = main(["solve", "--d", "3", "--p", "3", "--r", "2.1", "--tol", "1e-10",
               "--profile", str(prof), "--trajectory", str(traj), "--summary", str(summ)])
    assert rc == EXIT_OK
    assert prof.read_text().splitlines()[0] == "zeta,U_R,S,P,Psi"
    assert traj.read_text().splitlines()[0] == "xi,U_bar,S_bar,dU,dS"
    s = json.loads(summ.read_text())
    assert s["termination"] == "converged_to_origin"
    assert s["residual"] <= 1e-6
    assert s["decay_rate_U"] == pytest.approx(-2.1, rel=0.02)
    assert s["barrier_events"] == []


def test_solve_physical(tmp_path):
    out = tmp_path / "phys.csv"
    rc = main(["solve", "--physical", "1", "0.5", "--physical-out", str(out),
               "--summary", str(tmp_path / "s.json")])
    assert rc == EXIT_OK
    rows = read_csv(out)
    assert list(rows[0]) == ["x", "rho", "psi"]
    assert all(float(r["rho"]) > 0 for r in rows)


def test_solve_domain_errors(tmp_path, capsys):
    assert main(["solve", "--p", "1", "--summary", str(tmp_path / "s")]) == EXIT_DOMAIN
    assert "error" in capsys.readouterr().err
    assert main(["solve", "--r", "2.5", "--summary", str(tmp_path / "s")]) == EXIT_DOMAIN
    assert main(["solve", "--physical", "1", "2", "--summary", str(tmp_path / "s")]) == EXIT_DOMAIN


def test_solve_numeric_failure(tmp_path):
    # degenerate tuple forced through: the seeded data runs into the singular point
    rc = main(["solve", "--r", "2.5", "--any-regime", "--summary", str(tmp_path / "s")])
    assert rc in (EXIT_OK, EXIT_NUMERIC)


def test_io_error(tmp_path):
    missing = tmp_path / "nope" / "x.csv"
    assert main(["coeffs", "--out", str(missing)]) == EXIT_IO


def test_coeffs(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["coeffs", "--n-max", "10", "--out", str(out)]) == EXIT_OK
    rows = read_csv(out)
    assert list(rows[0]) == ["n", "kind", "value", "p_bar"]
    assert len(rows) == 12
    assert float(rows[0]["value"]) == 1.0 and rows[0]["kind"] == "S"
    assert float(rows[1]["value"]) == pytest.approx(-11 / 15, rel=1e-15)


def test_coeffs_odd_n_max(tmp_path):
    assert main(["coeffs", "--n-max", "7", "--out", str(tmp_path / "c")]) == EXIT_DOMAIN


def test_sweep(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    out = tmp_path / "sw.csv"
    assert main(["sweep", "--d", "3", "--p", "3", "--r", "1.4:3.0:0.1", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == cli.SWEEP_COLUMNS
    assert len(rows) == 17
    by_r = {round(float(r["r"]), 10): r for r in rows}
    assert by_r[2.5]["regime"] == "degenerate"
    for r in (2.1, 2.2, 2.3, 2.4):
        row = by_r[r]
        assert row["regime"] == "strict"
        assert row["termination"] == "converged_to_origin"
        assert row["in_barrier"] == "True"
    assert by_r[2.8]["regime"] == "violated" and by_r[2.8]["below_minus_one"] == "True"
    assert by_r[1.4]["r_window"] == "False" and by_r[1.4]["termination"] == ""
    assert all(r["error"] == "" for r in rows)


def test_sweep_violated_tuple():
    row = cli.sweep_row(1, 3.0, 2.1, 40, 1e-10, -4.0)
    assert row["regime"] == "violated"
    assert row["below_minus_one"] is True


def test_sweep_records_failures():
    row = cli.sweep_row(3, 0.5, 2.1, 40, 1e-10, -4.0)
    assert row["error"].startswith("ValueError")


def test_sweep_deterministic_and_complete(tmp_path):
    outs = []
    for workers in ("1", "3"):
        out = tmp_path / f"sw{workers}.csv"
        main(["sweep", "--d", "2,3", "--p", "3,5", "--r", "2.1,2.3", "--workers", workers,
              "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0].decode().strip().splitlines()) == 1 + 8


def test_solve_deterministic_modulo_metadata(tmp_path):
    runs = []
    for k in range(2):
        args = ["solve", "--trajectory", str(tmp_path / f"t{k}.csv"),
                "--summary", str(tmp_path / f"s{k}.json")]
        assert main(args) == EXIT_OK
        s = json.loads((tmp_path / f"s{k}.json").read_text())
        s.pop("metadata")
        runs.append((s, (tmp_path / f"t{k}.csv").read_bytes()))
    assert runs[0] == runs[1]


def test_energy(tmp_path):
    out, sweep = tmp_path / "e.json", tmp_path / "e.csv"
    for _ in range(2):
        rc = main(["energy", "--d", "3", "--p", "3.333333333333", "--r", "2.1",
                   "--out", str(out), "--sweep-csv", str(sweep)])
        assert rc == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["sign"] in ("negative", "positive", "indeterminate")
    assert rep["tail_bound"] > 0
    rows = read_csv(sweep)
    assert len(rows) == 2 and rows[0]["sign"] == rep["sign"]


def test_energy_not_integrable(tmp_path):
    assert main(["energy", "--d", "3", "--p", "9", "--r", "1.2",
                 "--out", str(tmp_path / "e")]) == EXIT_DOMAIN


def test_validate(tmp_path):
    out = tmp_path / "v.json"
    assert main(["validate", "--out", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["passed"]
    assert all(c["passed"] for c in rep["checks"])


def test_plotdata(tmp_path):
    out, traj = tmp_path / "f.csv", tmp_path / "t.csv"
    assert main(["plotdata", "--nu", "5", "--ns", "4", "--out", str(out),
                 "--trajectory", str(traj)]) == EXIT_OK
    rows = read_csv(out)
    assert list(rows[0]) == ["U_bar", "S_bar", "dU", "dS"]
    assert len(rows) == 5 * 4 - 1  # (-1, 0) is the singular point
    assert read_csv(traj)


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn_max = 6\nr = 2.3\n")
    out = tmp_path / "c.csv"
    assert main(["--config", str(cfg), "coeffs", "--out", str(out)]) == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 8
    assert float(rows[1]["value"]) == pytest.approx(-1.3 / 1.5)
    assert main(["--config", str(cfg), "coeffs", "--n-max", "4", "--out", str(out)]) == EXIT_OK
    assert len(read_csv(out)) == 6


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    assert main(["--config", str(cfg), "coeffs"]) == EXIT_DOMAIN


def test_parse_range():
    assert cli.parse_range("1:2:0.5") == [1.0, 1.5, 2.0]
    assert cli.parse_range("2.1,2.2") == [2.1, 2.2]
    assert len(cli.parse_range("1.4:3.0:0.1")) == 17


def test_csv_format():
    text = cli.csv_text(["a", "b"], [(0.1, "x,y")])
    assert text == 'a,b\r\n0.10000000000000001,"x,y"\r\n'


def test_write_atomic(tmp_path, capsys):
    path = tmp_path / "f.txt"
    path.write_text("old")
    cli.write_atomic(str(path), "new")
    assert path.read_text() == "new"
    assert os.listdir(tmp_path) == ["f.txt"]
    cli.write_atomic("-", "to stdout")
    assert "to stdout" in capsys.readouterr().out


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "nlsprofile", "coeffs", "--n-max", "2"],
                         capture_output=True, text=True, check=True)
    assert next(csv.reader(io.StringIO(res.stdout))) == ["n", "kind", "value", "p_bar"]
