"""NMSE, SNR bookkeeping, achievable rates and empirical CDFs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db(x):
    return 10.0 * np.log10(x)


def from_db(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


@dataclass(frozen=True)
class RateConfig:
    """Power budget ``P_t`` (W), subcarrier spacing ``delta_b`` (Hz), noise density (W/Hz)."""

    total_power: float
    delta_b: float
    noise_density: float
    n_subcarriers: int

    def __post_init__(self):
        if not self.total_power > 0:
            raise ValueError("total power must be positive")
        if self.n_subcarriers < 1 or not self.delta_b > 0 or not self.noise_density > 0:
            raise ValueError("need S >= 1 and positive spacing and noise density")

    @classmethod
    def from_table(cls, n_subcarriers: int, bandwidth: float = 40e9, power_dbm: float = 10.0,
                   noise_dbm_hz: float = -174.0) -> "RateConfig":
        return cls(dbm_to_watt(power_dbm), bandwidth / n_subcarriers,
                   dbm_to_watt(noise_dbm_hz), n_subcarriers)

    @property
    def data_power(self) -> float:
        """Per-subcarrier power ``P_d = P_t / S``."""
        return self.total_power / self.n_subcarriers

    def pilot_power(self, n_pilot_subcarriers: int | None = None) -> float:
        return self.total_power / (n_pilot_subcarriers or self.n_subcarriers)

    @property
    def noise_power(self) -> float:
        """``P_n = delta_b sigma^2``."""
        return self.delta_b * self.noise_density


def nmse(h, h_hat) -> float:
    """Subcarrier-averaged ``||h - h_hat||^2 / ||h||^2``; matrices are compared via vec."""
    h = np.asarray(h)
    h_hat = np.asarray(h_hat)
    if h.shape != h_hat.shape:
        raise ValueError(f"shape mismatch {h.shape} vs {h_hat.shape}")
    h = h.reshape(h.shape[0], -1)
    h_hat = h_hat.reshape(h.shape)
    den = np.sum(np.abs(h) ** 2, axis=1)
    if np.any(den == 0):
        raise ValueError("true channel has zero norm on some subcarrier")
    return float(np.mean(np.sum(np.abs(h - h_hat) ** 2, axis=1) / den))


def avg_snr(sigma_beta2: float, pilot_power: float, noise_power: float) -> float:
    if min(sigma_beta2, pilot_power, noise_power) <= 0:
        raise ValueError("SNR inputs must be positive")
    return sigma_beta2 * pilot_power / noise_power


def _spectral_sum(snr, delta_b):
    # per-realization sum over subcarriers, then mean over realizations
    snr = np.atleast_2d(snr)
    return float(np.mean(np.sum(delta_b * np.log2(1.0 + snr), axis=-1)))


def rate_perfect_csi(h, combiner, cfg: RateConfig) -> float:
    """``sum_s delta_b log2(1 + P_d |f[s]^H h[s]|^2 / P_n)`` averaged over realizations.

    ``h`` and ``combiner`` have shape (S, N_B) or (R, S, N_B) for R realizations.
    """
    gain = np.abs(np.sum(np.conj(combiner) * h, axis=-1)) ** 2
    return _spectral_sum(cfg.data_power * gain / cfg.noise_power, cfg.delta_b)


def mrc_rate(h, cfg: RateConfig) -> float:
    """Perfect-CSI rate of per-subcarrier maximum-ratio combining (``|f^H h|^2 = ||h||^2``)."""
    gain = np.sum(np.abs(h) ** 2, axis=-1)
    return _spectral_sum(cfg.data_power * gain / cfg.noise_power, cfg.delta_b)


def sinr_imperfect_csi(h_hat, error_quad, cfg: RateConfig) -> np.ndarray:
    """``P_d ||h_hat||^2 / (P_n + P_d h_hat^H R_e h_hat / ||h_hat||^2)``.

    ``error_quad`` is ``h_hat[s]^H R_e[s] h_hat[s]`` per subcarrier (see
    ``ErrorCovariance.quadratic_form``) or a full stack of ``R_e`` matrices.
    """
    h_hat = np.asarray(h_hat)
    norm2 = np.sum(np.abs(h_hat) ** 2, axis=-1)
    if np.any(norm2 == 0):
        raise ValueError("estimated channel has zero norm")
    quad = np.asarray(error_quad)
    if quad.ndim == h_hat.ndim + 1:
        quad = np.real(np.einsum("...i,...ij,...j->...", h_hat.conj(), quad, h_hat))
    pd = cfg.data_power
    return pd * norm2 / (cfg.noise_power + pd * quad / norm2)


def rate_imperfect_csi(h_hat, error_quad, cfg: RateConfig) -> float:
    return _spectral_sum(sinr_imperfect_csi(h_hat, error_quad, cfg), cfg.delta_b)


def rate_svd(singular_values, powers, cfg: RateConfig) -> float:
    """``sum_{s,n} delta_b log2(1 + p_{n,s} sigma_n^2 / P_n)``; arrays shaped (S, k) or (R, S, k)."""
    sv = np.asarray(singular_values, dtype=float)
    p = np.asarray(powers, dtype=float)
    snr = p * sv ** 2 / cfg.noise_power
    per_real = np.sum(cfg.delta_b * np.log2(1.0 + snr), axis=(-2, -1))
    return float(np.mean(per_real))


def empirical_cdf(samples):
    """Sorted values and right-continuous probabilities ``P(X <= v)``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    # for repeated values report the probability after the last copy
    p = np.searchsorted(x, x, side="right") / x.size
    return x, p


def cdf_at(samples, value: float) -> float:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    return float(np.count_nonzero(x <= value) / x.size)


def to_db_safe(x: float) -> float:
    return -math.inf if x <= 0 else 10.0 * math.log10(x)
