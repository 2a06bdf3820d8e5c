"""THz path attenuation, OFDM grid and per-subcarrier channel synthesis."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .array_model import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    Direction,
    ElementPattern,
    element_amplitude,
    upa_response,
    ula_response,
)


@dataclass(frozen=True)
class OfdmGrid:
    n_subcarriers: int
    bandwidth: float

    def __post_init__(self):
        if self.n_subcarriers < 1 or not self.bandwidth > 0:
            raise ValueError("OFDM grid needs S >= 1 and B > 0")

    @classmethod
    def from_delay_spread(cls, bandwidth: float, delay_spread: float) -> "OfdmGrid":
        """Pick ``S = B / B_c`` with coherence bandwidth ``B_c = 1 / (2 D_s)``."""
        return cls(int(round(bandwidth * 2.0 * delay_spread)), bandwidth)

    @property
    def spacing(self) -> float:
        return self.bandwidth / self.n_subcarriers

    @property
    def freqs(self) -> np.ndarray:
        s = np.arange(self.n_subcarriers)
        return (s - (self.n_subcarriers - 1) / 2.0) * self.spacing


def los_subcarriers(geom: ArrayGeometry, bandwidth: float) -> int:
    """Subcarrier count for a LoS link whose delay spread is the array's diagonal delay."""
    diag = geom.spacing * math.hypot(geom.rows - 1, geom.cols - 1) / SPEED_OF_LIGHT
    return max(1, int(bandwidth * 2.0 * diag))


@dataclass(frozen=True)
class Medium:
    k_abs: float = 0.0033
    n_t: complex = 2.24 - 0.025j
    sigma_rough: float = 0.088e-3


def los_attenuation(f, carrier: float, distance: float, k_abs: float):
    """Free-space spreading times molecular absorption, amplitude scale."""
    if not distance > 0:
        raise ValueError("distance must be positive")
    fa = carrier + np.asarray(f, dtype=float)
    if np.any(fa <= 0):
        raise ValueError("absolute frequency must be positive")
    return SPEED_OF_LIGHT / (4.0 * np.pi * fa * distance) * math.exp(-0.5 * k_abs * distance)


def reflection_coefficient(f, carrier: float, incidence: float, medium: Medium):
    cos_i = math.cos(incidence)
    # principal branch; Im(n_t) is small so the branch cut is never approached
    cos_t = np.cos(np.arcsin(complex(math.sin(incidence)) / medium.n_t))
    fresnel = (cos_i - medium.n_t * cos_t) / (cos_i + medium.n_t * cos_t)
    fa = carrier + np.asarray(f, dtype=float)
    rough = np.exp(-8.0 * np.pi ** 2 * fa ** 2 * medium.sigma_rough ** 2 * cos_i ** 2
                   / SPEED_OF_LIGHT ** 2)
    return fresnel * rough


def nlos_attenuation(f, carrier: float, distance: float, incidence: float, medium: Medium):
    return (np.abs(reflection_coefficient(f, carrier, incidence, medium))
            * los_attenuation(f, carrier, distance, medium.k_abs))


@dataclass(frozen=True)
class StatisticalGain:
    """Frequency-flat complex path gain."""

    beta: complex


@dataclass(frozen=True)
class PhysicalGain:
    """Attenuation from distance (and reflection when ``incidence`` is given)."""

    distance: float
    incidence: float | None = None

    @property
    def is_los(self) -> bool:
        return self.incidence is None


@dataclass(frozen=True)
class Path:
    gain: StatisticalGain | PhysicalGain
    toa: float
    direction: Direction
    aod: float = 0.0

    def __post_init__(self):
        if self.toa < 0:
            raise ValueError("time of arrival must be non-negative")

    def complex_gain(self, freqs, carrier: float, medium: Medium = Medium()) -> np.ndarray:
        """``beta_l(f_s)`` (no delay phase, no element gain)."""
        freqs = np.asarray(freqs, dtype=float)
        if isinstance(self.gain, StatisticalGain):
            return np.full(freqs.shape, complex(self.gain.beta))
        if self.gain.is_los:
            amp = los_attenuation(freqs, carrier, self.gain.distance, medium.k_abs)
        else:
            amp = nlos_attenuation(freqs, carrier, self.gain.distance, self.gain.incidence, medium)
        return amp * np.exp(-2j * np.pi * carrier * self.toa)


@dataclass(frozen=True)
class UserArray:
    """Half-wavelength ULA at the user unless ``spacing`` is given."""

    n_antennas: int
    spacing: float | None = None

    def response(self, carrier: float, angle: float, f=0.0):
        d = self.spacing if self.spacing is not None else SPEED_OF_LIGHT / (2.0 * carrier)
        return ula_response(self.n_antennas, d, carrier, angle, f)


@dataclass
class ChannelRealization:
    """``h`` has shape ``(S, N_B)`` or ``(S, N_B, N_U)`` for a multi-antenna user."""

    freqs: np.ndarray
    h: np.ndarray
    paths: list[Path] = field(default_factory=list)

    @property
    def multi_antenna(self) -> bool:
        return self.h.ndim == 3


def path_coefficients(paths, freqs, geom: ArrayGeometry, pattern: ElementPattern | None = None,
                      medium: Medium = Medium()) -> np.ndarray:
    """Effective per-subcarrier path weights ``beta_l(f) sqrt(Lambda_l) exp(-j 2 pi f tau_l)``.

    Returns shape ``(S, L)``.
    """
    freqs = np.asarray(freqs, dtype=float)
    cols = [p.complex_gain(freqs, geom.carrier, medium)
            * element_amplitude(pattern, p.direction)
            * np.exp(-2j * np.pi * freqs * p.toa) for p in paths]
    return np.stack(cols, axis=-1) if cols else np.zeros((freqs.size, 0), complex)


def synth_channel(paths, grid: OfdmGrid, geom: ArrayGeometry,
                  pattern: ElementPattern | None = None, user: UserArray | None = None,
                  medium: Medium = Medium()) -> ChannelRealization:
    if not paths:
        raise ValueError("need at least one path")
    freqs = grid.freqs
    coeff = path_coefficients(paths, freqs, geom, pattern, medium)
    shape = (freqs.size, geom.n_antennas) + ((user.n_antennas,) if user else ())
    h = np.zeros(shape, dtype=complex)
    for l, p in enumerate(paths):
        a_bs = upa_response(geom, p.direction, freqs)
        if user is None:
            h += coeff[:, l, None] * a_bs
        else:
            a_u = user.response(geom.carrier, p.aod, freqs)
            h += coeff[:, l, None, None] * a_bs[:, :, None] * a_u.conj()[:, None, :]
    return ChannelRealization(freqs, h, list(paths))


@dataclass(frozen=True)
class StatConfig:
    """Random-channel recipe. ``physical=False`` draws CN(0, sigma_beta2) gains."""

    n_paths: int = 3
    physical: bool = False
    include_los: bool = False
    sigma_beta2: float = 1e-9
    distance: float = 15.0
    toa_los: float = 50e-9
    toa_range: tuple[float, float] = (50e-9, 55e-9)
    multi_antenna: bool = False


def sample_random_channel(cfg: StatConfig, rng: np.random.Generator) -> list[Path]:
    if cfg.n_paths < 1 and not cfg.include_los:
        raise ValueError("need at least one path")
    paths = []
    if cfg.include_los:
        direction = Direction(rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi / 2, np.pi / 2))
        aod = rng.uniform(-np.pi / 2, np.pi / 2) if cfg.multi_antenna else 0.0
        toa = cfg.distance / SPEED_OF_LIGHT if cfg.physical else cfg.toa_los
        gain = PhysicalGain(cfg.distance) if cfg.physical else _cn_gain(cfg, rng)
        paths.append(Path(gain, toa, direction, aod))
    for _ in range(cfg.n_paths):
        direction = Direction(rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi / 2, np.pi / 2))
        toa = rng.uniform(*cfg.toa_range)
        aod = rng.uniform(-np.pi / 2, np.pi / 2) if cfg.multi_antenna else 0.0
        if cfg.physical:
            gain = PhysicalGain(cfg.distance, rng.uniform(-np.pi / 2, np.pi / 2))
        else:
            gain = _cn_gain(cfg, rng)
        paths.append(Path(gain, toa, direction, aod))
    return paths


def _cn_gain(cfg: StatConfig, rng: np.random.Generator) -> StatisticalGain:
    re, im = rng.standard_normal(2)
    return StatisticalGain(complex(re, im) * math.sqrt(cfg.sigma_beta2 / 2.0))
