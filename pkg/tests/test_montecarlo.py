import math

import numpy as np
import pytest

from modekit.montecarlo import (
    DEFAULT_SIGMAS,
    SimulationConfig,
    draw_normal,
    format_csv,
    gaussian_truth,
    replication_rng,
    run_replication,
    run_table1,
    run_table2,
)


def test_gaussian_truth():
    assert gaussian_truth(1.0) == pytest.approx((0.0, 0.398942, -0.398942), abs=1e-6)
    assert gaussian_truth(0.3)[1] == pytest.approx(1.329808, abs=1e-6)
    assert gaussian_truth(2.5)[1] == pytest.approx(0.159577, abs=1e-6)
    with pytest.raises(ValueError):
        gaussian_truth(0.0)


def test_streams_are_reproducible_and_distinct():
    a = draw_normal(replication_rng(5, 1.0, 3), 1.0, 10)
    b = draw_normal(replication_rng(5, 1.0, 3), 1.0, 10)
    c = draw_normal(replication_rng(5, 1.0, 4), 1.0, 10)
    d = draw_normal(replication_rng(5, 1.5, 3), 1.0, 10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_inverse_cdf_draws_look_normal():
    x = draw_normal(replication_rng(0, 2.0, 0), 2.0, 20000)
    assert abs(x.mean()) < 0.05 and abs(x.std() - 2.0) < 0.05


def test_replication_is_bit_reproducible():
    cfg = SimulationConfig()
    run = lambda: run_replication(1.0, 100, cfg.schedules, replication_rng(9, 1.0, 0), cfg.c_alpha)
    assert run() == run()


def test_single_replication_row_equals_record():
    cfg = SimulationConfig(sigmas=(0.7,), replications=1, seed=3)
    row = run_table1(cfg)[0]
    rec = run_replication(0.7, 100, cfg.schedules, replication_rng(3, 0.7, 0), cfg.c_alpha)
    assert (row.mean_theta, row.mean_mu, row.b, row.a_star) == (rec.theta, rec.mu, rec.b, rec.a_star)
    assert row.p == float(rec.covered) and row.p_star == float(rec.covered_star)


def test_parallel_equals_sequential():
    base = dict(sigmas=(0.5, 2.0), replications=12, seed=17)
    seq = format_csv(run_table1(SimulationConfig(**base)))
    par = format_csv(run_table1(SimulationConfig(**base, threads=2)))
    assert seq == par


def test_table1_rows_are_sane():
    rows = run_table1(SimulationConfig(sigmas=(1.0,), replications=20, seed=1))
    r = rows[0]
    assert 0 <= r.p <= 1 and 0 <= r.p_star <= 1
    assert r.a < r.a_star


def test_table2_is_seed_invariant_and_ordered():
    a = run_table2(SimulationConfig(seed=1))
    b = run_table2(SimulationConfig(seed=99))
    assert a == b
    assert [r.sigma for r in a] == list(DEFAULT_SIGMAS)
    for r in a:
        assert r.b < r.b_star and r.a < r.a_star


def test_c_alpha_rounding():
    assert SimulationConfig().c_alpha == 5.99
    assert SimulationConfig(c_alpha_decimals=None).c_alpha == pytest.approx(-2 * math.log(0.05))


@pytest.mark.parametrize(
    "kw", [dict(n=1), dict(replications=0), dict(alpha=1.0), dict(sigmas=(0.0,)), dict(h="bad")]
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SimulationConfig(**kw)


def test_csv_format():
    text = format_csv(run_table2(SimulationConfig(sigmas=(1.0,))))
    header, line = text.splitlines()
    assert header == "sigma,b,b_star,mu,a,a_star"
    assert line.startswith("1,3.22")
