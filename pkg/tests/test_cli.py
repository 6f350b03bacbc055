import json
import subprocess
import sys

import pytest


def poag(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "poag", *map(str, args)], capture_output=True, text=True,
                          cwd=cwd, timeout=600)


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    for name in ("revealing-errors", "man-tldr"):
        assert poag("example", name, "--emit", d / f"{name}.json").returncode == 0
    (d / "tldr.json").write_text(json.dumps({"player": "A", "constant": "tldr"}))
    (d / "man.json").write_text(json.dumps({"player": "A", "constant": "man"}))
    return d


def test_help_shows_defaults():
    out = poag("experiment", "product-select", "--help").stdout
    assert "30000" in out and "0..4" in out
    assert poag("--help").returncode == 0


def test_solve_text_and_json(files):
    res = poag("solve", "--game", files / "revealing-errors.json")
    assert res.returncode == 0 and "optimal value 0.5" in res.stdout
    doc = json.loads(poag("solve", "--game", files / "revealing-errors.json", "--json").stdout)
    assert doc["value"] == pytest.approx(0.5)


def test_input_errors_exit_two(files, tmp_path):
    res = poag("solve", "--game", tmp_path / "missing.json")
    assert res.returncode == 2 and "not found" in res.stderr
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert poag("solve", "--game", bad).returncode == 2
    assert poag("solve", "--bogus").returncode == 2


def test_budget_overrun_exits_two(tmp_path):
    poag("example", "cuda-versions", "--n", "3", "--emit", tmp_path / "cuda.json")
    res = poag("solve", "--game", tmp_path / "cuda.json", "--budget", "5")
    assert res.returncode == 2 and "budget" in res.stderr


def test_audit_expect_clean(files):
    game = files / "man-tldr.json"
    dirty = poag("audit", "--game", game, "--assistant-policy", files / "tldr.json", "--expect-clean")
    assert dirty.returncode == 1 and "interferes" in dirty.stdout
    clean = poag("audit", "--game", game, "--assistant-policy", files / "man.json", "--expect-clean")
    assert clean.returncode == 0, clean.stderr


def test_belief_after_tldr_hint(files):
    res = poag("belief", "--game", files / "man-tldr.json", "--assistant-policy", files / "tldr.json",
               "--history", '[["1", "1"]]', "--json")
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["state"]["0,s_a"] == pytest.approx(0.5) and doc["state"]["0,s_b"] == pytest.approx(0.5)


def test_boltzmann_subcommand(files):
    res = poag("boltzmann", "--game", files / "man-tldr.json", "--assistant-policy", files / "man.json",
               "--beta", "1", "--json")
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["rules"]


def test_analyze_reports_threshold():
    res = poag("analyze", "boltzmann", "--beta-max", "2", "--steps", "5")
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "beta,eu_with,eu_without" and len(lines) == 6
    assert [float(x) for x in lines[1].split(",")] == pytest.approx([0.0, 2.0, 2.0])
    assert "0.7736" in res.stderr


def test_product_sweep_is_deterministic(tmp_path):
    args = ["experiment", "product-select", "--d", "3", "--k-sweep", "0..1", "--beta-sweep", "1,inf",
            "--trials", "500", "--seed", "5"]
    a, b = poag(*args, "--out", tmp_path / "a.csv"), poag(*args)
    assert a.returncode == 0 and b.returncode == 0
    assert (tmp_path / "a.csv").read_text() == b.stdout
    assert len(b.stdout.strip().splitlines()) == 5
