import csv
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from intertwine import UsageError
from intertwine.cli import main, parse_sweep


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_cowboy(capsys):
    code, out, _ = run(capsys, "verify", "--check", "cowboy", "--s", "0.5", "--B", "1", "--mu", "1")
    assert code == 0
    header, row = out.splitlines()
    assert header.startswith("check,param:s") and row.startswith("COWBOY,0.5,1.0,1.0,")
    assert row.split(",")[-2] == "true"


def test_verify_unknown(capsys):
    code, _, err = run(capsys, "verify", "--check", "nosuch")
    assert code == 2 and "EUCLID_INTERTWINE" in err


def test_verify_euclid_json(capsys):
    code, out, _ = run(capsys, "verify", "--check", "euclid_intertwine", "--n", "2", "--s", "0.5",
                       "--z", "0,0", "--y", "1", "--json")
    assert code == 0
    assert '"rhs": 1.0' in out


def test_verify_fail_exit_code(capsys):
    code, _, _ = run(capsys, "verify", "--check", "cowboy", "--s", "0.5", "--B", "1", "--mu", "1",
                     "--tol", "1e-30")
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["verify", "--check", "cowboy", "--s", "0.5", "--B", "1"],
    ["verify", "--check", "cowboy", "--s", "abc", "--B", "1", "--mu", "1"],
    ["verify"],
    ["frobnicate"],
    [],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# cowboy at the anchor\ns=0.5 B=1\nmu=7\n")
    code, out, _ = run(capsys, "verify", "--check", "cowboy", "--config", str(cfg), "--mu", "1")
    assert code == 0 and "COWBOY,0.5,1.0,1.0," in out


def test_config_family(capsys, tmp_path):
    cfg = tmp_path / "h.cfg"
    cfg.write_text("family=heisenberg n=1\nz=0,0 sigma=0\n")
    code, out, _ = run(capsys, "eval", "--kernel", "ghc", "--config", str(cfg), "--t", "1")
    assert code == 0 and out.strip() == "0.0625"


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nokey\n")
    assert run(capsys, "eval", "--kernel", "ghc", "--config", str(bad))[0] == 2
    assert run(capsys, "eval", "--kernel", "ghc", "--config", str(tmp_path / "missing"))[0] == 2


@pytest.mark.parametrize("argv,expected", [
    (["--kernel", "ghc", "--m", "2", "--k", "1", "--z", "0,0", "--sigma", "0", "--t", "1"], 0.0625),
    (["--kernel", "gamma_ratio", "--m", "2", "--k", "1", "--s", "0.5"], 0.547109903806619),
    (["--kernel", "const_c", "--m", "2", "--k", "1", "--s", "0.5"], 0.121396986752919),
    (["--kernel", "fundsol", "--m", "2", "--k", "1", "--s", "0.5", "--z", "0,0", "--sigma", "0",
      "--y", "1", "--sign", "-"], 0.0211413448745208),
    (["--kernel", "euclid_fundsol", "--n", "2", "--s", "0.5", "--z", "0,0", "--y", "1"], 0.0795774715459477),
])
def test_eval(capsys, argv, expected):
    code, out, _ = run(capsys, "eval", *argv)
    assert code == 0
    assert float(out) == pytest.approx(expected, rel=1e-14)
    assert out.strip() == format(float(out), ".15g")


@pytest.mark.parametrize("argv", [
    ["--kernel", "nosuch"],
    ["--kernel", "ghc", "--m", "2", "--k", "1"],
    ["--kernel", "ghc", "--m", "3", "--k", "1", "--z", "0,0,0", "--sigma", "0", "--t", "1"],
    ["--kernel", "euclid_fundsol", "--n", "2", "--s", "0.5", "--z", "0,0", "--y", "0"],
])
def test_eval_errors(capsys, argv):
    assert run(capsys, "eval", *argv)[0] == 2


def test_table_cowboy(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, _, _ = run(capsys, "table", "--check", "cowboy", "--sweep", "s=0.1:0.9:0.2", "--B", "1",
                     "--mu", "1", "--out", str(out))
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][:2] == ["check", "param:s"] and len(rows) == 6
    assert [r[1] for r in rows[1:]] == ["0.1", "0.3", "0.5", "0.7", "0.9"]
    assert all(r[-2] == "true" for r in rows[1:])


def test_table_product_parallel(capsys, tmp_path):
    out = tmp_path / "p.csv"
    code, _, _ = run(capsys, "table", "--check", "cowboy", "--sweep", "s=0.2:0.6:0.2",
                     "--sweep", "B=1:4:1", "--mu", "1", "--out", str(out), "--jobs", "2")
    assert code == 0
    rows = list(csv.reader(out.open()))[1:]
    assert len(rows) == 12
    assert [(r[1], r[2]) for r in rows[:5]] == [("0.2", "1.0"), ("0.2", "2.0"), ("0.2", "3.0"),
                                                ("0.2", "4.0"), ("0.4", "1.0")]


@pytest.mark.parametrize("sweep", ["s=0.9:0.1:0.2", "s=0.1:0.9", "s=0.1:0.9:0", "z=0:1:1", "s=a:b:c"])
def test_table_bad_sweeps(capsys, tmp_path, sweep):
    code, _, _ = run(capsys, "table", "--check", "cowboy", "--sweep", sweep, "--B", "1", "--mu", "1",
                     "--out", str(tmp_path / "x.csv"))
    assert code == 2


def test_table_unwritable(capsys, tmp_path):
    code, _, _ = run(capsys, "table", "--check", "cowboy", "--sweep", "s=0.1:0.3:0.2", "--B", "1",
                     "--mu", "1", "--out", str(tmp_path / "no" / "such" / "dir.csv"))
    assert code == 2


@given(start=st.floats(-5, 5), step=st.floats(0.01, 2), count=st.integers(1, 40))
def test_sweep_count(start, step, count):
    stop = start + (count - 1) * step
    key, vals = parse_sweep(f"s={start!r}:{stop!r}:{step!r}")
    assert key == "s" and len(vals) == count
    assert vals[0] == round(start, 12)


def test_sweep_rejects_empty():
    with pytest.raises(UsageError):
        parse_sweep("s=1:0:0.1")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "intertwine", "eval", "--kernel", "gamma_ratio",
                          "--m", "2", "--k", "1", "--s", "0.5"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.54710990380662"
