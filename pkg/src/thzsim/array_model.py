"""Array geometry, wideband response vectors and the 3GPP element pattern.

Vector ordering follows ``kron(a_x, a_y)``: antenna ``(n, m)`` sits at flat
index ``n * M + m``, i.e. the column-major vec of the ``M x N`` matrix
``a_y a_x^T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Rounded value; the reference fixtures (d/c, Fraunhofer distance, path loss)
# are all stated with c = 3e8.
SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class ArrayGeometry:
    """``rows x cols`` planar array in the xy-plane (``cols == 1`` is a ULA)."""

    rows: int
    cols: int
    spacing: float
    carrier: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"array dimensions must be positive, got {self.rows}x{self.cols}")
        if not self.spacing > 0:
            raise ValueError(f"antenna spacing must be positive, got {self.spacing}")
        if not self.carrier > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.carrier}")

    @classmethod
    def half_wavelength(cls, rows: int, cols: int, carrier: float) -> "ArrayGeometry":
        return cls(rows, cols, SPEED_OF_LIGHT / (2.0 * carrier), carrier)

    @property
    def n_antennas(self) -> int:
        return self.rows * self.cols

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier


@dataclass(frozen=True)
class Direction:
    """Direction of arrival: azimuth in [-pi, pi], polar angle in [-pi/2, pi/2]."""

    azimuth: float
    polar: float

    def __post_init__(self):
        tol = 1e-12
        if abs(self.azimuth) > math.pi + tol:
            raise ValueError(f"azimuth {self.azimuth} outside [-pi, pi]")
        if abs(self.polar) > math.pi / 2 + tol:
            raise ValueError(f"polar angle {self.polar} outside [-pi/2, pi/2]")

    def delays(self, spacing: float) -> tuple[float, float]:
        """Per-element delays (dx, dy) along the two array axes, in seconds."""
        s = math.sin(self.polar)
        return (spacing * s * math.cos(self.azimuth) / SPEED_OF_LIGHT,
                spacing * s * math.sin(self.azimuth) / SPEED_OF_LIGHT)


@dataclass(frozen=True)
class SpatialFrequency:
    wx: float
    wy: float


@dataclass(frozen=True)
class VirtualPartition:
    """Split of the array into ``n_sb x m_sb`` equally sized virtual subarrays."""

    n_sb: int
    m_sb: int

    def __post_init__(self):
        if self.n_sb < 1 or self.m_sb < 1:
            raise ValueError("subarray counts must be positive")

    def check(self, geom: ArrayGeometry) -> None:
        if geom.rows % self.n_sb or geom.cols % self.m_sb:
            raise ValueError(
                f"partition {self.n_sb}x{self.m_sb} does not divide array {geom.rows}x{geom.cols}")

    def sub_rows(self, geom: ArrayGeometry) -> int:
        self.check(geom)
        return geom.rows // self.n_sb

    def sub_cols(self, geom: ArrayGeometry) -> int:
        self.check(geom)
        return geom.cols // self.m_sb

    @property
    def n_ttd(self) -> int:
        # the (1, 1) subarray is the delay reference
        return self.n_sb * self.m_sb - 1


@dataclass(frozen=True)
class ElementPattern:
    """3GPP-style directional element pattern (all values in dB / degrees).

    ``polar_offset_deg`` maps the polar angle (0 = array normal) onto the
    pattern's vertical angle so that boresight lands on the 90 degree peak.
    """

    max_gain_db: float = 50.0
    phi_3db: float = 65.0
    theta_3db: float = 65.0
    fbr_db: float = 30.0
    sla_v_db: float = 30.0
    polar_offset_deg: float = 90.0


def dirichlet(n: int, x):
    """Dirichlet sinc ``sin(n x / 2) / (n sin(x / 2))``, finite everywhere."""
    if n < 1:
        raise ValueError("order must be >= 1")
    x = np.asarray(x, dtype=float)
    half = np.sin(x / 2.0)
    singular = np.abs(half) < 1e-9
    safe = np.where(singular, 1.0, half)
    out = np.sin(n * x / 2.0) / (n * safe)
    if np.any(singular):
        # near x = 2 pi k the ratio tends to (-1)^(k (n - 1))
        k = np.rint(x / (2.0 * np.pi))
        out = np.where(singular, np.where((k * (n - 1)) % 2 == 0, 1.0, -1.0), out)
    return out if out.ndim else float(out)


def delay_across_array(geom: ArrayGeometry, direction: Direction, n: int, m: int) -> float:
    if not (0 <= n < geom.rows and 0 <= m < geom.cols):
        raise IndexError(f"antenna ({n}, {m}) outside {geom.rows}x{geom.cols} array")
    dx, dy = direction.delays(geom.spacing)
    return n * dx + m * dy


def _axis_phase(count: int, delay: float, carrier: float, f):
    f = np.asarray(f, dtype=float)
    idx = np.arange(count)
    return np.exp(-2j * np.pi * (carrier + f)[..., None] * idx * delay)


def axis_responses(geom: ArrayGeometry, direction: Direction, f=0.0):
    """Return ``(a_x, a_y)``; a leading axis is added when ``f`` is an array."""
    dx, dy = direction.delays(geom.spacing)
    return (_axis_phase(geom.rows, dx, geom.carrier, f),
            _axis_phase(geom.cols, dy, geom.carrier, f))


def kron_vec(ax, ay):
    """Batched ``kron(ax, ay)`` over any leading axes."""
    return (ax[..., :, None] * ay[..., None, :]).reshape(*ax.shape[:-1], -1)


def upa_response(geom: ArrayGeometry, direction: Direction, f=0.0):
    """Wideband plane-wave response; shape ``(N*M,)`` or ``f.shape + (N*M,)``."""
    ax, ay = axis_responses(geom, direction, f)
    return kron_vec(ax, ay)


def ula_response(n_ant: int, spacing: float, carrier: float, angle: float, f=0.0):
    if n_ant < 1:
        raise ValueError("ULA needs at least one antenna")
    delay = spacing * math.sin(angle) / SPEED_OF_LIGHT
    return _axis_phase(n_ant, delay, carrier, f)


def spherical_response(geom: ArrayGeometry, direction: Direction, distance: float, f=0.0):
    """Near-field response for a source ``distance`` metres from antenna (0, 0).

    Unlike :func:`upa_response` the phase carries the full propagation delay,
    so entry (0, 0) is ``exp(-j 2 pi (fc + f) distance / c)``. The source is
    placed on the side for which the far-field limit equals
    ``exp(-j 2 pi (fc + f) distance / c) * upa_response(...)``; with the
    delay sign used by :func:`upa_response` that is ``(-x, -y, z)``.
    """
    if not distance > 0:
        raise ValueError("distance must be positive")
    phi, theta = direction.azimuth, direction.polar
    x = -distance * math.cos(phi) * math.sin(theta)
    y = -distance * math.sin(phi) * math.sin(theta)
    z = distance * math.cos(theta)
    n = np.arange(geom.rows)[:, None] * geom.spacing
    m = np.arange(geom.cols)[None, :] * geom.spacing
    dist = np.sqrt((x - n) ** 2 + (y - m) ** 2 + z ** 2).reshape(-1)
    f = np.asarray(f, dtype=float)
    return np.exp(-2j * np.pi * (geom.carrier + f)[..., None] * dist / SPEED_OF_LIGHT)


def fraunhofer_distance(geom: ArrayGeometry) -> float:
    """``2 D_max^2 / lambda`` with ``D_max`` the array diagonal."""
    dmax2 = ((geom.rows - 1) ** 2 + (geom.cols - 1) ** 2) * geom.spacing ** 2
    return 2.0 * dmax2 / geom.wavelength


def angles_to_spatial(direction: Direction) -> SpatialFrequency:
    s = 0.5 * math.sin(direction.polar)
    return SpatialFrequency(s * math.cos(direction.azimuth), s * math.sin(direction.azimuth))


def spatial_to_angles(sf: SpatialFrequency) -> Direction:
    r2 = sf.wx ** 2 + sf.wy ** 2
    if r2 > 0.25 + 1e-15:
        raise ValueError(f"spatial frequency ({sf.wx}, {sf.wy}) outside the visible disk")
    return Direction(math.atan2(sf.wy, sf.wx), math.asin(min(1.0, 2.0 * math.sqrt(r2))))


def element_gain_db(pattern: ElementPattern, direction: Direction) -> float:
    phi = math.degrees(direction.azimuth)
    theta = math.degrees(direction.polar) + pattern.polar_offset_deg
    horiz = -min(12.0 * (phi / pattern.phi_3db) ** 2, pattern.fbr_db)
    vert = -min(12.0 * ((theta - 90.0) / pattern.theta_3db) ** 2, pattern.sla_v_db)
    return pattern.max_gain_db - min(-horiz - vert, pattern.fbr_db)


def element_amplitude(pattern: ElementPattern | None, direction: Direction) -> float:
    """Amplitude factor ``sqrt(Lambda)``; ``None`` means an isotropic element."""
    if pattern is None:
        return 1.0
    return 10.0 ** (element_gain_db(pattern, direction) / 20.0)
