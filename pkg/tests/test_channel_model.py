import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thzsim.array_model import SPEED_OF_LIGHT, ArrayGeometry, Direction, ElementPattern, upa_response
from thzsim.channel_model import (
    Medium,
    OfdmGrid,
    Path,
    PhysicalGain,
    StatConfig,
    StatisticalGain,
    UserArray,
    los_attenuation,
    los_subcarriers,
    nlos_attenuation,
    reflection_coefficient,
    sample_random_channel,
    synth_channel,
)

FC = 300e9


def _gamma_oracle(fc, incidence, n_t, rough):
    # independent extended-precision evaluation of the Fresnel/Kirchhoff product
    mp.mp.dps = 40
    ci = mp.cos(incidence)
    ct = mp.cos(mp.asin(mp.sin(incidence) / n_t))
    fres = (ci - n_t * ct) / (ci + n_t * ct)
    r = mp.exp(-8 * mp.pi ** 2 * fc ** 2 * rough ** 2 * ci ** 2 / mp.mpf(SPEED_OF_LIGHT) ** 2)
    return complex(fres * r)


def test_ofdm_grid():
    g = OfdmGrid.from_delay_spread(40e9, 5e-9)
    assert g.n_subcarriers == 400
    assert g.spacing == pytest.approx(100e6)
    f = g.freqs
    np.testing.assert_allclose(f, -f[::-1])
    assert np.max(np.abs(f)) < 20e9
    with pytest.raises(ValueError):
        OfdmGrid(0, 1e9)


def test_los_subcarriers_table_scale():
    assert los_subcarriers(ArrayGeometry.half_wavelength(100, 100, FC), 40e9) == 18


def test_los_attenuation():
    assert los_attenuation(0.0, FC, 15.0, 0.0033) == pytest.approx(5.175e-6, abs=1e-9)
    free = los_attenuation(1e9, FC, 15.0, 0.0)
    assert free == pytest.approx(SPEED_OF_LIGHT / (4 * math.pi * (FC + 1e9) * 15.0), rel=1e-14)
    assert los_attenuation(0.0, FC, 30.0, 0.0) == pytest.approx(free * (FC + 1e9) / FC / 2, rel=1e-14)
    with pytest.raises(ValueError):
        los_attenuation(0.0, FC, 0.0, 0.0)


def test_reflection_coefficient_examples():
    med = Medium(n_t=1.0, sigma_rough=0.0)
    assert abs(reflection_coefficient(0.0, FC, 0.3, med)) < 1e-15
    med = Medium(n_t=2.0, sigma_rough=0.0)
    assert reflection_coefficient(0.0, FC, 0.0, med) == pytest.approx((1 - 2) / (1 + 2))
    table = Medium()
    got = reflection_coefficient(0.0, FC, 0.0, table)
    want = _gamma_oracle(FC, 0.0, mp.mpc(2.24, -0.025), 0.088e-3)
    assert got == pytest.approx(want, abs=1e-12)
    # regression value of |Gamma| for the default medium at normal incidence
    assert abs(got) == pytest.approx(abs(want), abs=1e-12)


@settings(max_examples=40)
@given(st.floats(-1.5, 1.5))
def test_reflection_continuous_in_incidence(phi):
    med = Medium()
    a = reflection_coefficient(0.0, FC, phi, med)
    b = reflection_coefficient(0.0, FC, phi + 1e-7, med)
    assert abs(a - b) < 1e-5
    assert a == pytest.approx(_gamma_oracle(FC, phi, mp.mpc(2.24, -0.025), 0.088e-3), abs=1e-12)


def test_nlos_attenuation_composition():
    med = Medium()
    got = nlos_attenuation(0.0, FC, 15.0, math.pi / 4, med)
    want = abs(reflection_coefficient(0.0, FC, math.pi / 4, med)) * los_attenuation(0.0, FC, 15.0, med.k_abs)
    assert got == pytest.approx(want, rel=1e-14)
    rough = Medium(sigma_rough=1e-2)
    assert nlos_attenuation(0.0, FC, 15.0, 0.1, rough) < 1e-100


def test_single_boresight_los_path():
    geom = ArrayGeometry.half_wavelength(4, 4, FC)
    grid = OfdmGrid(8, 40e9)
    path = Path(StatisticalGain(0.3 - 0.1j), 50e-9, Direction(0.0, 0.0))
    h = synth_channel([path], grid, geom).h
    want = (0.3 - 0.1j) * np.exp(-2j * np.pi * grid.freqs * 50e-9)
    np.testing.assert_allclose(h, np.repeat(want[:, None], 16, axis=1), atol=1e-15)


def test_brute_force_per_antenna():
    geom = ArrayGeometry.half_wavelength(2, 2, FC)
    grid = OfdmGrid(2, 40e9)
    paths = [Path(StatisticalGain(1 + 0.5j), 51e-9, Direction(0.4, 0.9)),
             Path(StatisticalGain(-0.2j), 53e-9, Direction(-2.0, -0.3))]
    h = synth_channel(paths, grid, geom).h
    want = np.zeros((2, 4), complex)
    for s, f in enumerate(grid.freqs):
        for p in paths:
            th, ph = p.direction.polar, p.direction.azimuth
            for n in range(2):
                for m in range(2):
                    tau = geom.spacing * (n * math.sin(th) * math.cos(ph) + m * math.sin(th) * math.sin(ph)) / SPEED_OF_LIGHT
                    want[s, n * 2 + m] += p.gain.beta * np.exp(-2j * np.pi * f * p.toa) * np.exp(-2j * np.pi * (FC + f) * tau)
    np.testing.assert_allclose(h, want, atol=1e-14)


def test_linearity_and_zero_path(rng):
    geom = ArrayGeometry.half_wavelength(4, 3, FC)
    grid = OfdmGrid(6, 40e9)
    ps = sample_random_channel(StatConfig(n_paths=3, sigma_beta2=1.0), rng)
    full = synth_channel(ps, grid, geom).h
    parts = synth_channel(ps[:1], grid, geom).h + synth_channel(ps[1:], grid, geom).h
    np.testing.assert_allclose(full, parts, rtol=1e-12, atol=1e-14)
    zeroed = [Path(StatisticalGain(0.0), ps[0].toa, ps[0].direction)] + ps[1:]
    np.testing.assert_allclose(synth_channel(zeroed, grid, geom).h, synth_channel(ps[1:], grid, geom).h,
                               atol=1e-14)


@given(st.floats(40e-9, 60e-9), st.floats(40e-9, 60e-9))
def test_norm_invariant_to_toa(t1, t2):
    geom = ArrayGeometry.half_wavelength(3, 3, FC)
    grid = OfdmGrid(5, 40e9)
    d = Direction(0.5, 0.5)
    h1 = synth_channel([Path(StatisticalGain(1.0), t1, d)], grid, geom).h
    h2 = synth_channel([Path(StatisticalGain(1.0), t2, d)], grid, geom).h
    np.testing.assert_allclose(np.linalg.norm(h1, axis=1), np.linalg.norm(h2, axis=1), rtol=1e-12)


def test_physical_los_phase_and_element_gain():
    geom = ArrayGeometry.half_wavelength(2, 2, FC)
    grid = OfdmGrid(3, 40e9)
    d = Direction(0.0, 0.0)
    path = Path(PhysicalGain(15.0), 15.0 / SPEED_OF_LIGHT, d)
    h = synth_channel([path], grid, geom, pattern=ElementPattern()).h
    alpha = los_attenuation(grid.freqs, FC, 15.0, Medium().k_abs)
    want = alpha * 10 ** 2.5 * np.exp(-2j * np.pi * (FC + grid.freqs) * 50e-9)
    np.testing.assert_allclose(h[:, 0], want, rtol=1e-9)


def test_multi_antenna_channel_shape():
    geom = ArrayGeometry.half_wavelength(3, 2, FC)
    grid = OfdmGrid(4, 40e9)
    d = Direction(0.3, 0.2)
    path = Path(StatisticalGain(1.0), 50e-9, d, aod=0.4)
    real = synth_channel([path], grid, geom, user=UserArray(2))
    assert real.multi_antenna and real.h.shape == (4, 6, 2)
    a = upa_response(geom, d, grid.freqs)
    au = UserArray(2).response(FC, 0.4, grid.freqs)
    coef = np.exp(-2j * np.pi * grid.freqs * 50e-9)
    np.testing.assert_allclose(real.h, coef[:, None, None] * a[:, :, None] * au.conj()[:, None, :])


def test_sampler_determinism_and_ranges():
    cfg = StatConfig(n_paths=5)
    a = sample_random_channel(cfg, np.random.default_rng(3))
    b = sample_random_channel(cfg, np.random.default_rng(3))
    assert a == b
    many = [p for i in range(400) for p in sample_random_channel(cfg, np.random.default_rng(i))]
    toas = np.array([p.toa for p in many])
    assert toas.min() >= 50e-9 and toas.max() <= 55e-9


def test_sampler_gain_variance():
    rng = np.random.default_rng(5)
    cfg = StatConfig(n_paths=1)
    b = np.array([sample_random_channel(cfg, rng)[0].gain.beta for _ in range(100000)])
    assert np.mean(np.abs(b) ** 2) == pytest.approx(1e-9, rel=0.03)
