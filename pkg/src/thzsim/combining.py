"""Narrowband and TTD wideband combiners, hybrid MRC/SVD designs, waterfilling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array_model import (
    ArrayGeometry,
    Direction,
    VirtualPartition,
    axis_responses,
    dirichlet,
    kron_vec,
    upa_response,
)


def normalized_array_gain(beam, geom: ArrayGeometry, direction: Direction, f=0.0):
    """``|w^H a(phi, theta, f)|^2 / N_B`` for a unit-norm combiner ``w``.

    Equals ``|f^H a|^2 / N_B^2`` for the unnormalised constant-modulus beam
    ``f = sqrt(N_B) w``. ``beam`` may carry a leading subcarrier axis matching ``f``.
    """
    a = upa_response(geom, direction, f)
    return np.abs(np.sum(np.conj(beam) * a, axis=-1)) ** 2 / geom.n_antennas


def narrowband_gain_closed_form(geom: ArrayGeometry, direction: Direction, f=0.0):
    dx, dy = direction.delays(geom.spacing)
    f = np.asarray(f, dtype=float)
    return (dirichlet(geom.rows, 2 * np.pi * f * dx) ** 2
            * dirichlet(geom.cols, 2 * np.pi * f * dy) ** 2)


def ttd_gain_closed_form(geom: ArrayGeometry, direction: Direction,
                         partition: VirtualPartition, f=0.0):
    dx, dy = direction.delays(geom.spacing)
    f = np.asarray(f, dtype=float)
    return (dirichlet(partition.sub_rows(geom), 2 * np.pi * f * dx) ** 2
            * dirichlet(partition.sub_cols(geom), 2 * np.pi * f * dy) ** 2)


def subarray_size_rule(carrier: float, bandwidth: float, n_max: int | None = None) -> int:
    """Largest square subarray side with ``side - 1 < sqrt(2) fc / B``."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    bound = math.sqrt(2.0) * carrier / bandwidth
    side = math.ceil(bound)  # side - 1 < bound  <=>  side < bound + 1
    if side - 1 >= bound:
        side -= 1
    return side if n_max is None else min(side, n_max)


def auto_partition(geom: ArrayGeometry, bandwidth: float) -> VirtualPartition:
    """Coarsest partition whose subarrays satisfy the size rule and divide the array."""
    def largest_divisor(n, cap):
        return max(k for k in range(1, min(n, cap) + 1) if n % k == 0)

    side = subarray_size_rule(geom.carrier, bandwidth)
    return VirtualPartition(geom.rows // largest_divisor(geom.rows, side),
                            geom.cols // largest_divisor(geom.cols, side))


def narrowband_combiner(geom: ArrayGeometry, direction: Direction) -> np.ndarray:
    return upa_response(geom, direction, 0.0) / math.sqrt(geom.n_antennas)


def digital_combiner(geom: ArrayGeometry, direction: Direction, f) -> np.ndarray:
    return upa_response(geom, direction, f) / math.sqrt(geom.n_antennas)


@dataclass(frozen=True)
class TtdCombiner:
    """Phase-shifter beam toward ``direction`` with one ideal delay per virtual subarray."""

    geom: ArrayGeometry
    direction: Direction
    partition: VirtualPartition

    @property
    def delays(self) -> np.ndarray:
        """Subarray delays ``Delta_{mn}``, shape ``(n_sb, m_sb)``."""
        dx, dy = self.direction.delays(self.geom.spacing)
        nt, mt = self.partition.sub_rows(self.geom), self.partition.sub_cols(self.geom)
        n = np.arange(self.partition.n_sb)[:, None]
        m = np.arange(self.partition.m_sb)[None, :]
        return n * nt * dx + m * mt * dy

    @property
    def n_ttd(self) -> int:
        return self.partition.n_ttd

    def column(self, f=0.0) -> np.ndarray:
        """Unit-norm RF combiner ``vec(A(0) . T[s]) / sqrt(N_B)`` at frequency ``f``."""
        geom = self.geom
        ax, ay = axis_responses(geom, self.direction, 0.0)
        phased = kron_vec(ax, ay)
        f = np.asarray(f, dtype=float)
        ttd = np.exp(-2j * np.pi * f[..., None, None] * self.delays)
        # expand each subarray's factor over its rows x cols block
        ttd = np.repeat(np.repeat(ttd, self.partition.sub_rows(geom), axis=-2),
                        self.partition.sub_cols(geom), axis=-1)
        return phased * ttd.reshape(*f.shape, -1) / math.sqrt(geom.n_antennas)


def build_ttd_combiner(geom: ArrayGeometry, direction: Direction,
                       partition: VirtualPartition) -> TtdCombiner:
    partition.check(geom)
    return TtdCombiner(geom, direction, partition)


@dataclass
class HybridCombiner:
    """Per-subcarrier ``F_RF[s]`` (S, N_B, N_RF) and ``F_BB[s]`` (S, N_RF, N_RF)."""

    f_rf: np.ndarray
    f_bb: np.ndarray

    @property
    def n_rf(self) -> int:
        return self.f_rf.shape[-1]

    def effective(self) -> np.ndarray:
        """Combined column ``F_RF F_BB 1`` per subcarrier, shape (S, N_B)."""
        return np.einsum("sbr,srk->sb", self.f_rf, self.f_bb)

    def output(self, h: np.ndarray) -> np.ndarray:
        """Scalar combiner output ``(F_RF F_BB 1)^H h[s]`` per subcarrier."""
        return np.einsum("sb,sb->s", self.effective().conj(), h)


def rf_beams(geom: ArrayGeometry, directions, freqs, partition: VirtualPartition | None,
             scheme: str = "proposed") -> np.ndarray:
    """Stack of unit-norm RF beams, shape ``(S, N_B, len(directions))``.

    ``scheme`` is ``proposed`` (TTD), ``narrowband`` (frequency-flat) or
    ``digital`` (exact per-subcarrier response).
    """
    freqs = np.asarray(freqs, dtype=float)
    cols = []
    for d in directions:
        if scheme == "proposed":
            cols.append(build_ttd_combiner(geom, d, partition).column(freqs))
        elif scheme == "narrowband":
            cols.append(np.broadcast_to(narrowband_combiner(geom, d), (freqs.size, geom.n_antennas)))
        elif scheme == "digital":
            cols.append(digital_combiner(geom, d, freqs))
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    return np.stack(cols, axis=-1)


def multipath_mrc(geom: ArrayGeometry, freqs, directions, coeffs,
                  partition: VirtualPartition | None, n_rf: int | None = None,
                  scheme: str = "proposed") -> HybridCombiner:
    """Hybrid maximum-ratio combiner from (estimated) path directions and weights.

    ``coeffs`` holds the per-subcarrier path weights, shape ``(S, L)``. One RF
    beam points at each path; the baseband weights ``w[s]`` make
    ``F_RF[s] w[s]`` the unit-norm projection of the model channel
    ``sum_l coeffs[s, l] a_l(f_s)`` onto the beam span. This absorbs the
    residual phase each TTD beam leaves on its own path. Only the supplied
    paths enter, never the true channel.
    """
    coeffs = np.asarray(coeffs)
    n_paths = len(directions)
    if n_rf is not None and n_rf < n_paths:
        raise ValueError(f"{n_paths} paths need at least as many RF chains, got {n_rf}")
    freqs = np.asarray(freqs, dtype=float)
    h_model = np.zeros((freqs.size, geom.n_antennas), complex)
    for l, d in enumerate(directions):
        h_model += coeffs[:, l, None] * upa_response(geom, d, freqs)
    f_rf = rf_beams(geom, directions, freqs, partition, scheme)
    # least-squares fit of h_model in the beam span: w = (F^H F)^+ F^H h
    w = _batched_lstsq(f_rf, h_model)
    norm = np.linalg.norm(np.einsum("sbr,sr->sb", f_rf, w), axis=1)
    if np.any(norm == 0):
        raise ValueError("model channel is orthogonal to every RF beam")
    f_bb = np.zeros((freqs.size, n_paths, n_paths), complex)
    idx = np.arange(n_paths)
    f_bb[:, idx, idx] = w / norm[:, None]
    return HybridCombiner(f_rf, f_bb)


def _batched_lstsq(a, b):
    pinv = np.linalg.pinv(a, rcond=1e-10)
    return np.einsum("srb,sb->sr", pinv, b)


def hybrid_svd_design(h: np.ndarray, freqs, geom: ArrayGeometry, paths, n_rf: int,
                      partition: VirtualPartition | None, scheme: str = "proposed",
                      path_power=None) -> np.ndarray:
    """Effective per-stream singular values of ``F^H H[s] B[s]``, shape ``(S, k)``.

    ``digital`` uses the SVD of ``H[s]``. The hybrid schemes point one RF beam
    at each of the ``n_rf`` strongest paths, whiten the beams'
    Gram matrix in baseband, and take the SVD of the effective channel.
    Zero singular values (rank deficiency) are dropped.
    """
    h = np.asarray(h)
    n_streams = min(n_rf, h.shape[1], h.shape[2])
    if scheme == "digital":
        sv = np.linalg.svd(h, compute_uv=False)[:, :n_streams]
    else:
        order = np.arange(len(paths))
        if path_power is not None:
            order = np.argsort(-np.asarray(path_power), kind="stable")
        chosen = [paths[i].direction for i in order[:n_rf]]
        f_rf = rf_beams(geom, chosen, freqs, partition, scheme)
        gram = np.einsum("sbi,sbj->sij", f_rf.conj(), f_rf)
        w, v = np.linalg.eigh(gram)
        inv_sqrt = np.einsum("sij,sj,skj->sik", v, 1.0 / np.sqrt(np.maximum(w, 1e-300)), v.conj())
        eff = np.einsum("sij,sbj,sbu->siu", inv_sqrt, f_rf.conj(), h)
        sv = np.linalg.svd(eff, compute_uv=False)[:, :n_streams]
    tol = 1e-10 * max(sv.max(initial=0.0), 1e-300)
    keep = np.any(sv > tol, axis=0)
    return sv[:, keep]


def waterfilling(singular_values, noise: float, total_power: float) -> np.ndarray:
    """Powers ``max(0, mu - noise / sigma^2)`` summing to ``total_power``.

    Sorted-floor solution: with floors ``b_1 <= b_2 <= ...`` the active set is
    the largest prefix ``k`` whose level ``(P + sum_{i<=k} b_i) / k`` exceeds
    ``b_k``. Works for any array shape.
    """
    sv = np.asarray(singular_values, dtype=float)
    if total_power < 0:
        raise ValueError("power budget must be non-negative")
    g = sv ** 2
    active = g > 0
    if not np.any(active):
        raise ValueError("all singular values are zero")
    p = np.zeros(g.shape)
    if total_power == 0:
        return p
    floor = np.full(g.shape, np.inf)
    floor[active] = noise / g[active]
    flat = floor.ravel()
    order = np.argsort(flat[np.isfinite(flat)], kind="stable")
    finite_idx = np.flatnonzero(np.isfinite(flat))[order]
    b = flat[finite_idx]
    levels = (total_power + np.cumsum(b)) / np.arange(1, b.size + 1)
    valid = np.flatnonzero(levels > b)
    k = int(valid[-1]) + 1 if valid.size else 1  # k = 1 is always feasible for P > 0
    mu = levels[k - 1]
    on = finite_idx[:k]
    alloc = np.maximum(mu - flat[on], 0.0)
    # mu - b cancels badly when the floors dwarf the budget; restore the sum
    used = alloc.sum()
    alloc = alloc * (total_power / used) if used > 0 else np.full(k, total_power / k)
    p.ravel()[on] = alloc
    return p
