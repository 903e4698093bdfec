import json
import os
import subprocess
import sys

import pytest

from u3vol.cli import TABLE_FIELDS, main

HEADER = "p,n,E0,E1,NOp,idx_Gamma_A,idx_B,idx_A,vol_num,vol_den,method,caveats"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_csv_header_and_first_row(capsys):
    code, out, _ = run(capsys, "table", "--primes", "3", "--n-max", "1", "--format", "csv")
    assert code == 0
    assert out == HEADER + "\n" + "3,1,3,4,27,4,28,112,1,28,Both,\n"
    assert HEADER.split(",") == TABLE_FIELDS


def test_table_json_two_primes(capsys):
    code, out, _ = run(capsys, "table", "--primes", "3,5", "--n-max", "2", "--format", "json", "--samples", "50")
    assert code == 0
    recs = json.loads(out)
    assert [(r["p"], r["n"]) for r in recs] == [(3, 1), (3, 2), (5, 1), (5, 2)]
    assert [(r["vol_num"], r["vol_den"]) for r in recs] == [(1, 28), (1, 756), (1, 126), (1, 15750)]
    assert all(r["method"] == "Both" for r in recs)


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--primes", "3", "--n-max", "2", "--samples", "50")
    assert code == 0
    lines = out.splitlines()
    passes = [ln for ln in lines if ln.startswith("PASS")]
    assert len(passes) >= 20
    assert not any(ln.startswith("FAIL") for ln in lines)
    assert lines[-1] == f"{len(passes)}/{len(passes)} checks passed"


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "--primes", "3", "--n-max", "1", "--format", "json", "--samples", "20")
    assert code == 0
    recs = json.loads(out)
    assert {r["verdict"] for r in recs} == {"PASS"}
    assert {"check", "p", "n", "anchor", "verdict", "evidence"} == set(recs[0])


def test_p2_is_usage_error(capsys):
    code, _, err = run(capsys, "verify", "--primes", "2")
    assert code == 2
    assert "odd residue characteristic" in err


@pytest.mark.parametrize("argv", [
    ["verify", "--frobnicate"],
    ["table", "--primes", "9"],
    ["table", "--primes", "7"],
    ["table", "--primes", "x"],
    ["table", "--n-max", "0"],
    ["table", "--format", "xml"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_module_entry_point():
    env = dict(os.environ, OMP_NUM_THREADS="1")
    res = subprocess.run(
        [sys.executable, "-m", "u3vol", "table", "--n-max", "1", "--format", "csv"],
        capture_output=True, text=True, env=env, timeout=60,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "3,1,3,4,27,4,28,112,1,28,Both,"
