from __future__ import annotations

import csv
import math
import subprocess
import sys
from pathlib import Path

import pytest

from mdvrp.cli import BENCH_ALGOS, BENCH_COLUMNS, main


def run(*args) -> int:
    return main([str(a) for a in args])


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.mdvrp", tmp_path / "b.mdvrp"
    for out in (a, b):
        assert run("gen", "--seed", 1, "--clients", 5, "--depots", 2, "--k", 3, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("algo", ["brute", "lp-round", "tree-split", "tour-split"])
def test_solve_then_verify(tmp_path, algo, capsys):
    inst = tmp_path / "x.mdvrp"
    sol = tmp_path / "x.sol"
    run("gen", "--seed", 4, "--clients", 6, "--depots", 2, "--k", 3, "--out", inst)
    assert run("solve", inst, "--algo", algo, "--seed", 3, "--out", sol) == 0
    assert run("verify", inst, sol) == 0
    assert "feasible" in capsys.readouterr().out


def test_certify_ledger(tmp_path, capsys):
    inst = tmp_path / "x.mdvrp"
    run("gen", "--seed", 4, "--clients", 6, "--depots", 2, "--k", 3, "--out", inst)
    capsys.readouterr()
    assert run("solve", inst, "--certify", "--out", tmp_path / "s") == 0
    lines = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert lines["holds_total"] == "1" and float(lines["total"]) > 0


def test_verify_detects_violation(tmp_path):
    inst = tmp_path / "x.mdvrp"
    run("gen", "--seed", 4, "--clients", 3, "--depots", 1, "--k", 3, "--out", inst)
    bad = tmp_path / "bad.sol"
    bad.write_text("d0: c0 c1\ncost 0\n")
    assert run("verify", inst, bad) == 1
    bad.write_text("d0: nope\ncost 0\n")
    assert run("verify", inst, bad) == 1
    assert run("verify", inst, tmp_path / "missing.sol") == 2


def test_usage_errors(tmp_path):
    assert run("solve", "--frobnicate") == 2
    assert run("lp-bound", tmp_path / "missing.mdvrp") == 2
    assert run("bench", "--suite", tmp_path / "nowhere") == 2
    assert run() == 2


def test_lp_bound(tmp_path, capsys):
    inst = tmp_path / "x.mdvrp"
    inst.write_text("mdvrp 1\nk 3\nmode coords\ndepots 1\nd 0 0\nclients 1\nc 3 4\n")
    capsys.readouterr()
    assert run("lp-bound", inst) == 0
    out = capsys.readouterr().out.split()
    assert out[0] == "opt_lp" and float(out[1]) == pytest.approx(10.0)
    assert out[2] == "delta" and float(out[3]) == pytest.approx(0.0)


def test_bench_table(tmp_path):
    suite = tmp_path / "suite"
    suite.mkdir()
    for s in range(20):
        run("gen", "--seed", s, "--clients", 5, "--depots", 2, "--k", 3,
            "--out", suite / f"i{s:02d}.mdvrp")
    out = tmp_path / "bench.tsv"
    assert run("bench", "--suite", suite, "--seeds", "0,1", "--out", out) == 0
    rows = list(csv.reader(out.open(), delimiter="\t"))
    assert tuple(rows[0]) == BENCH_COLUMNS
    assert len(rows) - 1 == 20 * len(BENCH_ALGOS)
    assert all(math.isfinite(float(r[BENCH_COLUMNS.index("ratio_to_lp")])) for r in rows[1:])


def test_module_entry_point(tmp_path):
    inst = tmp_path / "x.mdvrp"
    run("gen", "--seed", 2, "--clients", 4, "--depots", 1, "--k", 3, "--out", inst)
    res = subprocess.run([sys.executable, "-m", "mdvrp", "solve", str(inst), "--algo", "tree-split"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("# algo tree-split")
