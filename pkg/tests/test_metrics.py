import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thzsim.metrics import (
    RateConfig,
    avg_snr,
    cdf_at,
    db,
    dbm_to_watt,
    empirical_cdf,
    mrc_rate,
    nmse,
    rate_imperfect_csi,
    rate_perfect_csi,
    rate_svd,
    sinr_imperfect_csi,
)


def _cfg(n_sub=4):
    return RateConfig.from_table(n_sub, bandwidth=4e8)


def test_rate_config():
    cfg = RateConfig.from_table(18)
    assert cfg.total_power == pytest.approx(0.01)
    assert cfg.data_power * 18 == pytest.approx(cfg.total_power)
    assert cfg.pilot_power(400) == pytest.approx(2.5e-5)
    with pytest.raises(ValueError):
        RateConfig(0.0, 1e8, 1e-20, 4)


def test_nmse_examples(rng):
    h = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
    assert nmse(h, h) == 0.0
    assert nmse(h, np.zeros_like(h)) == pytest.approx(1.0)
    assert nmse(h, 2 * h) == pytest.approx(1.0)
    hm = h.reshape(3, 4, 2)
    assert nmse(hm, 0.5 * hm) == pytest.approx(0.25)
    h[1] = 0
    with pytest.raises(ValueError):
        nmse(h, h)


@given(st.floats(-3, 3).filter(lambda d: abs(d) > 1e-6))
def test_nmse_scale(delta):
    h = np.exp(1j * np.arange(12.0)).reshape(2, 6)
    assert nmse(h, (1 + delta) * h) == pytest.approx(delta ** 2, rel=1e-9)


def test_avg_snr():
    p_n = 1e8 * dbm_to_watt(-174)
    snr = avg_snr(1e-9, 0.01 / 400, p_n)
    # 2.5e-14 W over 3.98e-13 W
    assert snr == pytest.approx(0.0628, rel=2e-3)
    assert db(snr) == pytest.approx(-12.02, abs=0.01)
    assert db(avg_snr(1e-9, 0.02 / 400, p_n)) - db(snr) == pytest.approx(3.0103, abs=1e-4)
    assert db(snr) - db(avg_snr(1e-9, 0.01 / 400, 2 * p_n)) == pytest.approx(3.0103, abs=1e-4)
    with pytest.raises(ValueError):
        avg_snr(0.0, 1.0, 1.0)


def test_rate_perfect_examples():
    cfg = _cfg(1)
    f = np.array([[1.0, 0.0]])
    assert rate_perfect_csi(np.zeros((1, 2)), f, cfg) == 0.0
    amp = math.sqrt(cfg.noise_power / cfg.data_power)
    assert rate_perfect_csi(np.array([[amp, 0.0]]), f, cfg) == pytest.approx(cfg.delta_b)


def test_rates_additive_over_subcarriers(rng):
    cfg = _cfg(4)
    h = 1e-6 * (rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5)))
    total = mrc_rate(h, cfg)
    assert total == pytest.approx(mrc_rate(h[:2], cfg) + mrc_rate(h[2:], cfg))
    assert total >= 0


def test_imperfect_csi_limits(rng):
    cfg = _cfg(4)
    h = 1e-6 * (rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5)))
    assert rate_imperfect_csi(h, np.zeros(4), cfg) == pytest.approx(mrc_rate(h, cfg))
    s2 = 3e-13
    re = np.broadcast_to(s2 * np.eye(5), (4, 5, 5))
    sinr = sinr_imperfect_csi(h, re, cfg)
    want = cfg.data_power * np.sum(np.abs(h) ** 2, axis=1) / (cfg.noise_power + cfg.data_power * s2)
    np.testing.assert_allclose(sinr, want, rtol=1e-12)
    # a PSD error covariance only lowers the rate
    x = rng.standard_normal((4, 5, 5)) + 1j * rng.standard_normal((4, 5, 5))
    psd = 1e-13 * x @ x.conj().transpose(0, 2, 1)
    assert rate_imperfect_csi(h, psd, cfg) <= mrc_rate(h, cfg)
    with pytest.raises(ValueError):
        sinr_imperfect_csi(np.zeros((1, 3)), np.zeros(1), cfg)


def test_rate_svd():
    cfg = _cfg(2)
    sv = np.array([[2e-6], [1e-6]])
    p = np.full((2, 1), cfg.data_power)
    h = np.array([[2e-6, 0.0], [1e-6, 0.0]])
    assert rate_svd(sv, p, cfg) == pytest.approx(mrc_rate(h, cfg))
    assert rate_svd(sv, np.zeros_like(sv), cfg) == 0.0


def test_empirical_cdf():
    x, p = empirical_cdf([3.0])
    assert x.tolist() == [3.0] and p.tolist() == [1.0]
    assert cdf_at([3.0], 2.999) == 0.0 and cdf_at([3.0], 3.0) == 1.0
    x, p = empirical_cdf([2.0, 1.0, 2.0, 4.0])
    assert x.tolist() == [1.0, 2.0, 2.0, 4.0]
    assert p.tolist() == [0.25, 0.75, 0.75, 1.0]
    with pytest.raises(ValueError):
        empirical_cdf([])
