import json
import math
import time
from pathlib import Path

import pytest

from modekit.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_report(out):
    return dict(line.split(",", 1) for line in out.splitlines())


def test_estimate_single_row(tmp_path, capsys):
    f = tmp_path / "one.csv"
    f.write_text("1.7\n")
    code, out, _ = run(capsys, "estimate", str(f), "--no-ellipsoid")
    assert code == 0
    assert float(parse_report(out)["theta"]) == pytest.approx(1.7)


def test_estimate_fixture(capsys):
    # normal100.csv: 100 draws of default_rng(20240611).normal()
    code, out, _ = run(capsys, "estimate", str(DATA / "normal100.csv"))
    rep = parse_report(out)
    assert code == 0
    assert abs(float(rep["theta"])) < 0.5
    assert abs(float(rep["mu"]) - 0.399) < 0.15
    assert {"P", "Q", "b", "a", "c_alpha"} <= set(rep)


def test_estimate_nonrecursive_flavor(capsys):
    code, out, _ = run(capsys, "estimate", str(DATA / "normal100.csv"), "--flavor", "nonrecursive")
    assert code == 0 and parse_report(out)["flavor"] == "nonrecursive"


def test_estimate_empty_file(tmp_path, capsys):
    f = tmp_path / "empty.csv"
    f.write_text("")
    code, _, err = run(capsys, "estimate", str(f))
    assert code == 2 and "no observations" in err


def test_estimate_malformed_row(tmp_path, capsys):
    f = tmp_path / "bad.csv"
    f.write_text("1.0\nabc\n")
    code, _, err = run(capsys, "estimate", str(f))
    assert code == 2 and "row 2" in err


def test_estimate_two_columns_with_ellipsoid(tmp_path, capsys):
    f = tmp_path / "two.csv"
    f.write_text("0,1\n1,0\n0.5,0.5\n")
    code, _, err = run(capsys, "estimate", str(f), "--ellipsoid")
    assert code == 3 and "--ellipsoid" in err
    code, out, _ = run(capsys, "estimate", str(f))
    assert code == 0 and "theta[1]" in out


def test_unknown_flag(capsys):
    assert run(capsys, "table2", "--bogus")[0] == 2
    assert run(capsys, "simulate")[0] == 2  # --seed is required


def test_simulate_deterministic(capsys):
    args = ("simulate", "--seed", "42", "--sigmas", "1", "--replications", "10")
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second
    header = first.splitlines()[0].split(",")
    assert header[-2:] == ["p", "p_star"]


def test_simulate_smoke_speed(capsys):
    start = time.perf_counter()
    code, out, _ = run(capsys, "simulate", "--seed", "1", "--sigmas", "1", "--replications", "50")
    assert code == 0 and len(out.splitlines()) == 2
    assert time.perf_counter() - start < 5


def test_table2_single_sigma(capsys):
    code, out, _ = run(capsys, "table2", "--sigmas", "1")
    values = [float(v) for v in out.splitlines()[1].split(",")]
    assert code == 0
    assert values[1:] == pytest.approx([3.227, 3.858, 0.399, 0.255, 0.279], abs=0.002)


def test_table2_axis_scales_with_n(capsys):
    b = {n: float(run(capsys, "table2", "--sigmas", "1", "--n", str(n))[1].splitlines()[1].split(",")[1])
         for n in (100, 200, 10_000)}
    # b is proportional to (n h^3)^(-1/2) and n^(4/7) / log(n)^3 bottoms out near n = 190,
    # so doubling n from 100 widens the interval slightly before it starts to shrink
    nh3 = lambda n: n ** (4 / 7) / math.log(n) ** 3
    assert b[200] / b[100] == pytest.approx(math.sqrt(nh3(100) / nh3(200)), rel=1e-5)
    assert b[10_000] < b[100]


def test_table2_pretty(capsys):
    code, out, _ = run(capsys, "table2", "--sigmas", "1,2", "--pretty")
    lines = out.splitlines()
    assert code == 0 and "," not in out and len({len(l) for l in lines}) == 1


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sigmas": [1.0, 2.0], "n": 200}))
    rows = run(capsys, "table2", "--config", str(cfg))[1].splitlines()
    assert len(rows) == 3
    flag = run(capsys, "table2", "--config", str(cfg), "--sigmas", "1")[1]
    direct = run(capsys, "table2", "--sigmas", "1", "--n", "200")[1]
    assert flag == direct
    cfg.write_text(json.dumps({"colour": 1}))
    assert run(capsys, "table2", "--config", str(cfg))[0] == 2


def test_exact_quantile_option(capsys):
    rounded = run(capsys, "table2", "--sigmas", "1")[1]
    exact = run(capsys, "table2", "--sigmas", "1", "--c-alpha-decimals", "none")[1]
    assert rounded != exact
