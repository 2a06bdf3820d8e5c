import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thzsim.array_model import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    Direction,
    ElementPattern,
    SpatialFrequency,
    VirtualPartition,
    angles_to_spatial,
    axis_responses,
    delay_across_array,
    dirichlet,
    element_amplitude,
    element_gain_db,
    fraunhofer_distance,
    spatial_to_angles,
    spherical_response,
    ula_response,
    upa_response,
)

FC = 300e9
angles = st.tuples(st.floats(-math.pi, math.pi), st.floats(-math.pi / 2, math.pi / 2))


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(0, 4, 1e-3, FC)
    with pytest.raises(ValueError):
        ArrayGeometry(4, 4, 0.0, FC)
    with pytest.raises(ValueError):
        ArrayGeometry(4, 4, 1e-3, -1.0)
    g = ArrayGeometry.half_wavelength(4, 4, FC)
    assert abs(g.spacing - SPEED_OF_LIGHT / (2 * FC)) / g.spacing < 1e-12


def test_direction_range():
    with pytest.raises(ValueError):
        Direction(4.0, 0.0)
    with pytest.raises(ValueError):
        Direction(0.0, 2.0)


def test_partition_must_divide():
    g = ArrayGeometry.half_wavelength(10, 10, FC)
    with pytest.raises(ValueError):
        VirtualPartition(3, 2).check(g)
    p = VirtualPartition(5, 2)
    assert (p.sub_rows(g), p.sub_cols(g), p.n_ttd) == (2, 5, 9)


def test_dirichlet_values():
    assert dirichlet(7, 0.0) == 1.0
    assert abs(dirichlet(2, math.pi)) < 1e-15
    assert dirichlet(10, 0.1481) == pytest.approx(0.9117, abs=1e-3)
    # limit at 2 pi k: (-1)^(k (N - 1))
    assert dirichlet(4, 2 * math.pi) == -1.0
    assert dirichlet(5, 2 * math.pi) == 1.0
    with pytest.raises(ValueError):
        dirichlet(0, 1.0)


@given(st.integers(1, 200), st.floats(-50, 50))
def test_dirichlet_bounded(n, x):
    assert abs(dirichlet(n, x)) <= 1 + 1e-12


def test_delay_across_array():
    g = ArrayGeometry(4, 4, 0.5e-3, FC)
    d = Direction(0.3, 0.7)
    assert delay_across_array(g, d, 0, 0) == 0.0
    assert delay_across_array(g, Direction(1.0, 0.0), 3, 2) == 0.0
    assert delay_across_array(g, Direction(0.0, math.pi / 2), 1, 0) == pytest.approx(1.6667e-12, abs=1e-16)
    with pytest.raises(IndexError):
        delay_across_array(g, d, 4, 0)


def test_upa_response_examples():
    g = ArrayGeometry.half_wavelength(2, 2, FC)
    a = upa_response(g, Direction(0.0, math.pi / 2))
    # index n*M + m; n is the x index
    np.testing.assert_allclose(np.angle(a[[0, 1]]), [0, 0], atol=1e-12)
    np.testing.assert_allclose(np.abs(np.angle(a[[2, 3]])), [math.pi, math.pi], atol=1e-12)
    ones = upa_response(g, Direction(0.4, 0.0), 1e10)
    np.testing.assert_allclose(ones, 1.0)


@settings(max_examples=50)
@given(angles, st.floats(-2e10, 2e10), st.integers(1, 9), st.integers(1, 9))
def test_upa_is_kron_of_axes(ang, f, n, m):
    g = ArrayGeometry.half_wavelength(n, m, FC)
    d = Direction(*ang)
    a = upa_response(g, d, f)
    ax, ay = axis_responses(g, d, f)
    np.testing.assert_allclose(a, np.kron(ax, ay), atol=1e-12)
    # vec(a_y a_x^T) column-major gives the same vector
    np.testing.assert_allclose(a, np.outer(ay, ax).reshape(-1, order="F"), atol=1e-12)
    np.testing.assert_allclose(np.abs(a), 1.0, rtol=1e-12)


def test_upa_batched_over_frequency(geom16):
    d = Direction(0.2, -0.5)
    f = np.linspace(-2e10, 2e10, 5)
    batch = upa_response(geom16, d, f)
    assert batch.shape == (5, 256)
    for i, fi in enumerate(f):
        np.testing.assert_allclose(batch[i], upa_response(geom16, d, fi))


def test_ula_examples():
    d = SPEED_OF_LIGHT / (2 * FC)
    np.testing.assert_allclose(ula_response(4, d, FC, 0.0), 1.0)
    np.testing.assert_allclose(ula_response(1, d, FC, 0.9), [1.0])
    np.testing.assert_allclose(ula_response(2, d, FC, math.pi / 2), [1.0, -1.0], atol=1e-12)


def test_spherical_reference_phase_and_far_field(geom16):
    d = Direction(0.7, 0.4)
    dist, f = 3.0, 5e9
    a = spherical_response(geom16, d, dist, f)
    ref = -2 * math.pi * (FC + f) * dist / SPEED_OF_LIGHT
    assert abs(np.angle(a[0] * np.exp(-1j * ref))) < 1e-9
    far = 1e6
    sph = spherical_response(geom16, d, far, f)
    plane = upa_response(geom16, d, f) * np.exp(-2j * math.pi * (FC + f) * far / SPEED_OF_LIGHT)
    assert np.max(np.abs(np.angle(sph * plane.conj()))) < 1e-3


def test_fraunhofer_distance():
    g = ArrayGeometry.half_wavelength(100, 100, FC)
    assert fraunhofer_distance(g) == pytest.approx(99 ** 2 * 1e-3, rel=1e-12)
    assert fraunhofer_distance(g) == pytest.approx(9.801, abs=1e-9)


def test_spatial_frequency_examples():
    sf = angles_to_spatial(Direction(math.pi / 4, math.pi / 4))
    assert (sf.wx, sf.wy) == (pytest.approx(0.25), pytest.approx(0.25))
    sf0 = angles_to_spatial(Direction(1.0, 0.0))
    assert (sf0.wx, sf0.wy) == (0.0, 0.0)
    d = spatial_to_angles(SpatialFrequency(0.25, 0.25))
    assert (d.azimuth, d.polar) == (pytest.approx(math.pi / 4), pytest.approx(math.pi / 4))
    with pytest.raises(ValueError):
        spatial_to_angles(SpatialFrequency(0.4, 0.4))


@given(st.floats(0, 0.499), st.floats(-math.pi, math.pi))
def test_spatial_round_trip(r, ang):
    sf = SpatialFrequency(r * math.cos(ang), r * math.sin(ang))
    back = angles_to_spatial(spatial_to_angles(sf))
    assert abs(back.wx - sf.wx) < 1e-12 and abs(back.wy - sf.wy) < 1e-12


def test_element_gain_examples():
    pat = ElementPattern()
    assert element_gain_db(pat, Direction(0.0, 0.0)) == pytest.approx(50.0)
    assert element_gain_db(pat, Direction(math.radians(65), 0.0)) == pytest.approx(38.0)
    assert element_gain_db(pat, Direction(math.pi, 0.0)) == pytest.approx(20.0)
    assert element_amplitude(None, Direction(1.0, 1.0)) == 1.0
    assert element_amplitude(pat, Direction(0.0, 0.0)) == pytest.approx(10 ** 2.5)


@given(angles)
def test_element_gain_range(ang):
    g = element_gain_db(ElementPattern(), Direction(*ang))
    assert 20.0 - 1e-9 <= g <= 50.0 + 1e-9
