import math

import pytest
from hypothesis import given, strategies as st

from phonesim.config import (ConfigError, SystemConfig, dbm_to_watt, load_system_config,
                             nearest_square_rows, parse_config_text)


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    cfg = load_system_config(path)
    assert cfg == SystemConfig()
    assert (cfg.n_users, cfg.n_rf, cfg.bandwidth, cfg.pa_efficiency, cfg.p_max_dbm) == (
        5, 5, 200e3, 0.38, 33.0)
    assert (cfg.p_one_rf, cfg.p_shifter, cfg.p_cod, cfg.l_tr) == (12.9, 0.088, 1e-10, 12.8e9)
    assert (cfg.n_rays, cfg.kappa, cfg.n_aod, cfg.delta_err) == (20, 2, 64, 0.1)
    assert (cfg.beta_power, cfg.beta_t, cfg.beta_shifter, cfg.beta_rf, cfg.beta_bb) == (
        0.9, 188, 1800, 7800, 6800)


def test_override_and_comments(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("# chains\nn_tx = 140   # divisible by 14\nn_rf = 14\n\n")
    cfg = load_system_config(path)
    assert cfg.n_rf == 14 and cfg.n_tx == 140
    assert cfg.n_users == 5


def test_divisibility_rejected():
    with pytest.raises(ConfigError) as err:
        SystemConfig(n_tx=10, n_rf=4).validate()
    assert err.value.key == "n_rf"


@pytest.mark.parametrize("text, key, line", [
    ("n_tx = 100\nbogus = 1\n", "bogus", 2),
    ("n_tx = ten\n", "n_tx", 1),
    ("\n\nn_rf 5\n", "n_rf 5", 3),
    ("include_computation_power = maybe", "include_computation_power", 1),
])
def test_parse_errors_carry_line_and_key(text, key, line):
    with pytest.raises(ConfigError) as err:
        parse_config_text(text)
    assert err.value.key == key and err.value.line == line


@pytest.mark.parametrize("kwargs", [
    dict(n_users=6), dict(pa_efficiency=1.5), dict(delta_err=1.0), dict(step_interval=0.0),
    dict(p_fix=0.0), dict(kappa=1), dict(omp_target="mmse"), dict(array_rows=3),
])
def test_invariant_violations(kwargs):
    with pytest.raises(ConfigError):
        SystemConfig(**kwargs).validate()


def test_units():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert SystemConfig().p_max == pytest.approx(1.99526, rel=1e-5)
    assert SystemConfig().noise_power == pytest.approx(10 ** (-20.4) * 200e3)


def test_calibration_is_frozen():
    base = SystemConfig().calibrated()
    moved = SystemConfig(n_users=2, n_rf=5).calibrated()
    assert base.snr == pytest.approx(1e4)
    assert base.gain != moved.gain
    assert moved.snr == pytest.approx(1e4)


@given(st.integers(1, 5000))
def test_nearest_square_rows(n):
    r = nearest_square_rows(n)
    assert n % r == 0 and r <= math.isqrt(n)
    assert all(n % d for d in range(r + 1, math.isqrt(n) + 1))
