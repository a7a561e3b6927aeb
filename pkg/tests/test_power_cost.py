from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from phonesim import power_cost as pc
from phonesim.config import ConfigError, SystemConfig
from phonesim.system_model import HybridPrecoder, Structure

from conftest import crandn


def _partial(cfg, rng, scale=1.0):
    return HybridPrecoder(Structure.PARTIAL, rng.uniform(-np.pi, np.pi, (cfg.n_rf, cfg.subarray_size)),
                          scale * crandn(rng, cfg.n_rf, cfg.n_users))


def test_pa_power_reference_value():
    cfg = SystemConfig()
    b = np.zeros((cfg.n_tx, cfg.n_users), dtype=complex)
    b[0, 0] = 1.0
    assert pc.pa_power(b, cfg) == pytest.approx(2.6316, abs=1e-4)
    assert pc.pa_power(np.zeros_like(b), cfg) == 0.0


def test_pa_power_partial_identity(cfg):
    p = _partial(cfg, np.random.default_rng(0))
    expected = cfg.subarray_size * np.sum(np.abs(p.b_bb) ** 2) / cfg.pa_efficiency
    assert pc.pa_power(p, cfg) == pytest.approx(expected, rel=1e-12)


@given(st.floats(0.01, 100), st.integers(0, 1000))
def test_pa_power_quadratic(c, seed):
    cfg = SystemConfig(n_tx=12, n_rf=3, n_users=2)
    p = _partial(cfg, np.random.default_rng(seed))
    scaled = HybridPrecoder(p.structure, p.rf_phases, c * p.b_bb)
    assert pc.pa_power(scaled, cfg) == pytest.approx(c * c * pc.pa_power(p, cfg), rel=1e-12)


def test_rf_chain_power():
    assert pc.rf_chain_power(SystemConfig()) == pytest.approx(64.5)
    assert pc.rf_chain_power(SystemConfig(n_tx=140, n_rf=14)) == pytest.approx(180.6)
    assert pc.rf_chain_power(replace(SystemConfig(), n_rf=0)) == 0.0


def test_channel_estimation_reference():
    cfg = replace(SystemConfig(n_tx=64, n_rf=4), avg_snr=1e4)
    assert pc.channel_estimation_power(cfg) == pytest.approx(14.0175, abs=1e-4)
    gains = [pc.training_gain(s, cfg) for s in range(1, 7)]
    assert sum(1 / g for g in gains) == pytest.approx(0.984375)


def test_channel_estimation_scaling():
    cfg = replace(SystemConfig(), avg_snr=1e4)
    double = replace(cfg, n_users=10, n_rf=10)
    assert pc.channel_estimation_power(double) == pytest.approx(2 * pc.channel_estimation_power(cfg), rel=1e-14)
    assert pc.channel_estimation_power(replace(cfg, avg_snr=1e300)) < 1e-290


def test_channel_estimation_rejects():
    with pytest.raises(ConfigError):
        pc.channel_estimation_power(replace(SystemConfig(), n_aod=48))
    with pytest.raises(ConfigError):
        # delta >= 1 is rejected by validate(); the check guards unvalidated configs
        pc.channel_estimation_power(replace(SystemConfig(), delta_err=2.0, n_aod=2))


def test_computation_components():
    cfg = SystemConfig(n_tx=64, n_rf=4).calibrated()
    comp = pc.computation_power(replace(cfg, n_rf=5), 1e7, Structure.PARTIAL, 0.0)
    assert comp["p_cd"] == pytest.approx(1e-3)
    assert comp["p_lp_bb"] == pytest.approx(7.8125e-3)
    assert comp["p_lp_rf"] == pytest.approx(5.632)
    assert comp["p_complex"] == 0.0
    with pytest.raises(ValueError):
        pc.computation_power(cfg, -1.0, Structure.PARTIAL, 0.0)


def test_complexities():
    cfg = SystemConfig()
    assert pc.phone_complexity(cfg) == pytest.approx(100 ** 3 + 5 ** 3.5)
    assert pc.omp_complexity(cfg) == 5 * 20 * 100 * 5


def _oracle_total(cfg, p, rate, structure, theta):
    shifters = cfg.n_tx if structure is Structure.PARTIAL else cfg.n_tx * cfg.n_rf
    b = p.matrix()
    parts = [
        np.sum(np.abs(b) ** 2) / cfg.pa_efficiency,
        cfg.n_rf * cfg.p_one_rf,
        pc.channel_estimation_power(cfg),
        cfg.p_cod * rate,
        2 * rate * cfg.n_rf / (cfg.bits_per_symbol * cfg.l_tr),
        shifters * cfg.p_shifter,
        theta * cfg.c_cmplx / cfg.l_tr,
        cfg.p_fix,
    ]
    return sum(parts)


@given(st.integers(0, 10_000), st.floats(0, 1e8), st.sampled_from(list(Structure)))
def test_total_power_component_sum(seed, rate, structure):
    cfg = SystemConfig(n_tx=20, n_rf=4, n_users=3).calibrated()
    p = _partial(cfg, np.random.default_rng(seed))
    pb = pc.total_power(cfg, p, rate, structure, 1e6)
    assert pb.p_total == pytest.approx(_oracle_total(cfg, p, rate, structure, 1e6), rel=1e-12)
    assert pb.p_total == pytest.approx(pb.communication + pb.computation + pb.p_fix, rel=1e-14)


def test_precoder_invariant_components(cfg):
    rng = np.random.default_rng(1)
    a = pc.total_power(cfg, _partial(cfg, rng), 1e6)
    b = pc.total_power(cfg, _partial(cfg, rng, scale=0.1), 1e6)
    for name in ("p_ce", "p_rf", "p_lp_rf", "p_complex", "p_fix"):
        assert getattr(a, name) == getattr(b, name)


def test_zero_precoder_floor(cfg):
    cfg = replace(cfg, avg_snr=1e300)
    p = HybridPrecoder(Structure.PARTIAL, np.zeros((cfg.n_rf, cfg.subarray_size)),
                       np.zeros((cfg.n_rf, cfg.n_users), dtype=complex))
    pb = pc.total_power(cfg, p, 0.0, complexity=0.0)
    assert pb.p_total == pytest.approx(cfg.n_rf * cfg.p_one_rf + cfg.n_tx * cfg.p_shifter + cfg.p_fix)


def test_full_minus_partial(cfg):
    p = _partial(cfg, np.random.default_rng(4))
    full = pc.total_power(cfg, p, 3e6, Structure.FULL)
    part = pc.total_power(cfg, p, 3e6, Structure.PARTIAL)
    assert full.p_total - part.p_total == pytest.approx((cfg.n_rf - 1) * cfg.n_tx * cfg.p_shifter)


def test_ablation_zeroes_computation(cfg):
    off = replace(cfg, include_computation_power=False)
    pb = pc.total_power(off, _partial(off, np.random.default_rng(0)), 5e6)
    assert pb.computation == 0.0
    assert pc.rate_power_slope(off) == 0.0


def test_energy_efficiency():
    pb = pc.PowerBreakdown(0, 0, 0, 0, 0, 0, 0, 100.0)
    assert pc.energy_efficiency(1e7, pb) == pytest.approx(1e5)
    assert pc.energy_efficiency(0.0, pb) == 0.0


@given(st.floats(1e3, 1e9), st.floats(1.0, 1e3), st.floats(1e-3, 1e3))
def test_ee_decreasing_in_power(rate, p, extra):
    lo = pc.PowerBreakdown(0, 0, 0, 0, 0, 0, 0, p)
    hi = pc.PowerBreakdown(0, 0, 0, 0, 0, 0, 0, p + extra)
    assert pc.energy_efficiency(rate, hi) < pc.energy_efficiency(rate, lo)


def test_hardware_cost_reference():
    cfg = replace(SystemConfig(), n_tx=64)
    pb = pc.PowerBreakdown(0, 0, 0, 0, 0, 0, 0, 1.0)
    cost = pc.cost_breakdown(cfg, pb, Structure.PARTIAL)
    assert cost.c_hardware == pytest.approx(173_032)
    assert cost.c_power == pytest.approx(0.9)
    assert pc.cost_efficiency(cfg, 0.0, pb, Structure.PARTIAL) == 0.0


def test_cost_decoupled_without_power_price(cfg):
    cfg = replace(cfg, beta_power=0.0)
    a = pc.PowerBreakdown(1, 0, 0, 0, 0, 0, 0, 1.0)
    b = pc.PowerBreakdown(50, 0, 0, 0, 0, 0, 0, 1.0)
    assert pc.cost_efficiency(cfg, 1e6, a, Structure.FULL) == pc.cost_efficiency(cfg, 1e6, b, Structure.FULL)
