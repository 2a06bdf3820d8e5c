"""Pilot training, LS baseline, wideband dictionaries, OMP/GSOMP solvers and the CRLB.

Sensing matrices are handled through small operator classes so that the
``N_beam x G`` products never have to be formed for large dictionaries: the
greedy step only needs ``Phi_s^H r`` and a handful of selected columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .array_model import SPEED_OF_LIGHT, ArrayGeometry


# ---------------------------------------------------------------- training


@dataclass
class TrainingEnsemble:
    """RF pilot beams ``w_rf`` (N_B, N_beam) and block-diagonal whitening ``w_bb``.

    The pilot combiner is frequency-flat, so one ``combiner`` serves every
    subcarrier.
    """

    w_rf: np.ndarray
    w_bb: np.ndarray
    n_rf: int
    pilot_power: float

    @property
    def n_beam(self) -> int:
        return self.w_rf.shape[1]

    @property
    def n_slot(self) -> int:
        return self.n_beam // self.n_rf

    @property
    def combiner(self) -> np.ndarray:
        return self.w_rf @ self.w_bb

    def slot(self, t: int) -> np.ndarray:
        return self.combiner[:, t * self.n_rf:(t + 1) * self.n_rf]

    def sensing(self) -> np.ndarray:
        """``Q = sqrt(P_p) W^H``, shape (N_beam, N_B)."""
        return math.sqrt(self.pilot_power) * self.combiner.conj().T

    def measure(self, h: np.ndarray, noise_var: float, rng: np.random.Generator) -> np.ndarray:
        """Noisy pilot observations for ``h`` of shape (S, N_B), stacked over slots.

        Slot ``t`` sees its own antenna noise ``n_t[s]``, so the stacked
        measurement is ``sqrt(P_p) W^H h[s] + [W_1^H n_1[s]; ...; W_T^H n_T[s]]``.
        """
        h = np.atleast_2d(h)
        w = self.combiner
        clean = math.sqrt(self.pilot_power) * h @ w.conj()
        return clean + self.slot_noise(h.shape[0], noise_var, rng)

    def slot_noise(self, n_sub: int, noise_var: float, rng: np.random.Generator) -> np.ndarray:
        """Effective noise ``W_t^H n_t[s]`` for every slot, shape (n_sub, N_beam)."""
        n_bs = self.w_rf.shape[0]
        noise = complex_normal(rng, (n_sub, self.n_slot, n_bs), noise_var)
        w = self.combiner.reshape(n_bs, self.n_slot, self.n_rf)
        return np.einsum("stb,btr->str", noise, w.conj()).reshape(n_sub, self.n_beam)


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(var / 2.0)


def build_training(n_bs: int, n_rf: int, n_slot: int, pilot_power: float,
                   rng: np.random.Generator, max_cond: float = 1e12) -> TrainingEnsemble:
    """Random +-1/sqrt(N_B) RF beams with per-slot Cholesky whitening."""
    n_beam = n_rf * n_slot
    w_rf = np.empty((n_bs, n_beam), complex)
    w_bb = np.zeros((n_beam, n_beam), complex)
    for t in range(n_slot):
        while True:
            block = rng.choice([-1.0, 1.0], size=(n_bs, n_rf)) / math.sqrt(n_bs)
            gram = block.T @ block
            if np.linalg.cond(gram) < max_cond:
                break
        upper = np.linalg.cholesky(gram).conj().T  # gram = D^H D
        sl = slice(t * n_rf, (t + 1) * n_rf)
        w_rf[:, sl] = block
        w_bb[sl, sl] = np.linalg.inv(upper)
    return TrainingEnsemble(w_rf, w_bb, n_rf, pilot_power)


def dft_training(n_bs: int, pilot_power: float, n_rf: int = 1) -> TrainingEnsemble:
    """Full training with a unitary DFT pilot matrix, so ``Q^H Q = P_p I``."""
    k = np.arange(n_bs)
    u = np.exp(-2j * np.pi * np.outer(k, k) / n_bs) / math.sqrt(n_bs)
    return TrainingEnsemble(u, np.eye(n_bs, dtype=complex), n_rf, pilot_power)


def pilot_slots(n_bs: int, n_rf: int, fraction: float) -> int:
    """Number of slots giving ``N_beam ~ fraction * N_B`` (rounded down to whole slots)."""
    return max(1, int(math.floor(fraction * n_bs / n_rf + 1e-9)))


def ls_estimate(ybar: np.ndarray, ensemble: TrainingEnsemble) -> np.ndarray:
    q = ensemble.sensing()
    if q.shape[0] < q.shape[1]:
        raise ValueError(f"LS needs N_beam >= N_B, got {q.shape[0]} < {q.shape[1]}")
    return np.atleast_2d(ybar) @ np.linalg.pinv(q, rcond=1e-10).T


def ls_mse(n_bs: int, pilot_power: float, noise_var: float) -> float:
    return noise_var * n_bs / pilot_power


# -------------------------------------------------------------- dictionary


def grid_points(size: int) -> np.ndarray:
    """Symmetric spatial-frequency grid ``q / size`` for ``q = -(size-1)/2 .. (size-1)/2``."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"grid size must be a positive odd integer, got {size}")
    half = (size - 1) // 2
    return np.arange(-half, half + 1) / size


def _axis_dictionary(count, omegas, freqs, carrier, spacing):
    # phase 2 pi (1 + f/fc) (2 d / lambda) n w; the scale is 1 for half-wavelength arrays
    scale = 2.0 * spacing * carrier / SPEED_OF_LIGHT
    freqs = np.asarray(freqs, dtype=float)
    n = np.arange(count)[:, None]
    return np.exp(-2j * np.pi * (1.0 + freqs / carrier)[:, None, None] * scale * n * omegas[None, :])


@dataclass
class WidebandDictionary:
    """Per-subcarrier dictionaries ``A[s] = Ax[s] kron Ay[s]`` on odd spatial-frequency grids.

    Column ``q * Gy + p`` is the array response at ``(wx[q], wy[p])``. Pass
    all-zero ``freqs`` for the frequency-flat (narrowband) dictionary.
    """

    geom: ArrayGeometry
    freqs: np.ndarray
    gx: int
    gy: int
    ax: np.ndarray = field(init=False, repr=False)
    ay: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        self.wx = grid_points(self.gx)
        self.wy = grid_points(self.gy)
        g = self.geom
        self.ax = _axis_dictionary(g.rows, self.wx, self.freqs, g.carrier, g.spacing)
        self.ay = _axis_dictionary(g.cols, self.wy, self.freqs, g.carrier, g.spacing)

    @property
    def size(self) -> int:
        return self.gx * self.gy

    @property
    def n_rows(self) -> int:
        return self.geom.n_antennas

    def spatial(self, index: int) -> tuple[float, float]:
        q, p = divmod(int(index), self.gy)
        return float(self.wx[q]), float(self.wy[p])

    def index_of(self, q: int, p: int) -> int:
        return q * self.gy + p

    def nearest(self, wx: float, wy: float) -> int:
        q = int(np.argmin(np.abs(self.wx - wx)))
        p = int(np.argmin(np.abs(self.wy - wy)))
        return self.index_of(q, p)

    def matrix(self, s: int) -> np.ndarray:
        return np.kron(self.ax[s], self.ay[s])

    def columns(self, idx, subs=None) -> np.ndarray:
        """Selected columns for subcarriers ``subs``: shape (len(subs), N_B, len(idx))."""
        subs = np.arange(self.freqs.size) if subs is None else np.asarray(subs)
        q, p = np.divmod(np.asarray(idx, dtype=int), self.gy)
        ax = self.ax[subs][:, :, q]
        ay = self.ay[subs][:, :, p]
        return (ax[:, :, None, :] * ay[:, None, :, :]).reshape(len(subs), self.n_rows, len(q))

    def adjoint(self, v: np.ndarray, subs=None) -> np.ndarray:
        """``A[s]^H v[s]`` for ``v`` of shape (len(subs), N_B [, K]) -> (len(subs), G [, K])."""
        subs = np.arange(self.freqs.size) if subs is None else np.asarray(subs)
        n_s = len(subs)
        rows, cols = self.geom.rows, self.geom.cols
        extra = v.shape[2:]
        k = int(np.prod(extra)) if extra else 1
        # (S, N, M, K) -> (S, K, N, M) so the two axis products are batched matmuls
        vm = v.reshape(n_s, rows, cols, k).transpose(0, 3, 1, 2)
        axh = np.swapaxes(self.ax[subs], 1, 2).conj()[:, None]   # (S, 1, Gx, N)
        ayc = self.ay[subs].conj()[:, None]                       # (S, 1, M, Gy)
        out = (axh @ vm @ ayc).reshape(n_s, k, self.size)
        if extra:
            return np.moveaxis(out, 1, -1).reshape(n_s, self.size, *extra)
        return out[:, 0]


@dataclass
class UserDictionary:
    """ULA dictionary over the grid ``p / G_u`` (half-wavelength unless ``spacing`` given)."""

    n_antennas: int
    carrier: float
    freqs: np.ndarray
    size: int
    spacing: float | None = None

    def __post_init__(self):
        self.freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        self.w = grid_points(self.size)
        d = self.spacing if self.spacing is not None else SPEED_OF_LIGHT / (2 * self.carrier)
        self.a = _axis_dictionary(self.n_antennas, self.w, self.freqs, self.carrier, d)


# ---------------------------------------------------------- sensing operators


def _sensed_norms(q, dictionary: WidebandDictionary, subs, chunk: int = 64) -> np.ndarray:
    """``||q a_g[s]||`` for every atom, shape (len(subs), G).

    ``(q a)_m = conj(a^H conj(q_m))``, so the norms come from adjoint products
    with the conjugated rows of ``q``, ``chunk`` rows at a time.
    """
    subs = np.asarray(subs)
    out = np.zeros((len(subs), dictionary.size))
    for start in range(0, q.shape[0], chunk):
        rows = q[start:start + chunk].conj().T  # (N_B, k)
        v = np.broadcast_to(rows, (len(subs),) + rows.shape)
        out += np.sum(np.abs(dictionary.adjoint(v, subs)) ** 2, axis=-1)
    return np.sqrt(out)


class DenseSensing:
    """Explicit stack of sensing matrices ``Phi_s``, shape (S, N_meas, G)."""

    def __init__(self, mats):
        self.mats = np.asarray(mats)
        if self.mats.ndim == 2:
            self.mats = self.mats[None]

    @property
    def n_sub(self):
        return self.mats.shape[0]

    @property
    def n_cols(self):
        return self.mats.shape[2]

    @property
    def n_rows(self):
        return self.mats.shape[1]

    def subset(self, subs):
        return DenseSensing(self.mats[np.asarray(subs)])

    def adjoint(self, r):
        return np.einsum("smg,sm->sg", self.mats.conj(), r)

    def columns(self, idx):
        return self.mats[:, :, np.asarray(idx, dtype=int)]

    def matrix(self, s):
        return self.mats[s]

    def column_norms(self):
        return np.linalg.norm(self.mats, axis=1)


class DictionarySensing:
    """``Phi_s = sqrt(P_p) W^H A[s]`` without forming it."""

    def __init__(self, ensemble: TrainingEnsemble, dictionary: WidebandDictionary, subs=None):
        self.ensemble = ensemble
        self.dictionary = dictionary
        self.subs = np.arange(dictionary.freqs.size) if subs is None else np.asarray(subs)
        self._q = ensemble.sensing()
        self._norms = None

    @property
    def n_sub(self):
        return self.subs.size

    @property
    def n_cols(self):
        return self.dictionary.size

    @property
    def n_rows(self):
        return self._q.shape[0]

    def subset(self, subs):
        out = DictionarySensing(self.ensemble, self.dictionary, self.subs[np.asarray(subs)])
        if self._norms is not None:
            out._norms = self._norms[np.asarray(subs)]
        return out

    def adjoint(self, r):
        return self.dictionary.adjoint(r @ self._q.conj(), self.subs)

    def columns(self, idx):
        return np.einsum("mb,sbk->smk", self._q, self.dictionary.columns(idx, self.subs))

    def matrix(self, s):
        return self._q @ self.dictionary.matrix(self.subs[s])

    def column_norms(self):
        if self._norms is None:
            self._norms = _sensed_norms(self._q, self.dictionary, self.subs)
        return self._norms


class MultiAntennaDictionary:
    """Joint dictionary ``conj(A_u[s]) kron A_B[s]``; column ``gu * G + g``."""

    def __init__(self, bs: WidebandDictionary, user: UserDictionary):
        self.bs = bs
        self.user = user

    @property
    def size(self):
        return self.bs.size * self.user.size

    def split(self, idx):
        gu, g = np.divmod(np.asarray(idx, dtype=int), self.bs.size)
        return g, gu

    def columns(self, idx, subs=None):
        subs = np.arange(self.bs.freqs.size) if subs is None else np.asarray(subs)
        g, gu = self.split(idx)
        a_b = self.bs.columns(g, subs)
        a_u = self.user.a[subs][:, :, gu].conj()
        return (a_u[:, :, None, :] * a_b[:, None, :, :]).reshape(len(subs), -1, len(g))

    def matrix(self, s):
        return np.kron(self.user.a[s].conj(), self.bs.matrix(s))


class MultiAntennaSensing:
    """``Phi_s = sqrt(P_p) (V^T kron W^H) (conj(A_u[s]) kron A_B[s])`` as an operator.

    Measurements are ``vec(Y[s])`` (column-major), length ``N_beam * N_beam_u``.
    """

    def __init__(self, ensemble: TrainingEnsemble, v: np.ndarray,
                 dictionary: MultiAntennaDictionary, subs=None):
        self.ensemble = ensemble
        self.v = np.asarray(v)
        self.dictionary = dictionary
        self.subs = np.arange(dictionary.bs.freqs.size) if subs is None else np.asarray(subs)
        self._q = ensemble.sensing()
        # C[s] = V^T conj(A_u[s]), shape (S, N_beam_u, G_u)
        self._c = np.einsum("ui,suk->sik", self.v, dictionary.user.a[self.subs].conj())
        self._norms = None

    @property
    def n_sub(self):
        return self.subs.size

    @property
    def n_cols(self):
        return self.dictionary.size

    @property
    def n_rows(self):
        return self._q.shape[0] * self.v.shape[1]

    def subset(self, subs):
        out = MultiAntennaSensing(self.ensemble, self.v, self.dictionary, self.subs[np.asarray(subs)])
        if self._norms is not None:
            out._norms = self._norms[np.asarray(subs)]
        return out

    def adjoint(self, r):
        nb, nu = self._q.shape[0], self.v.shape[1]
        rm = r.reshape(len(self.subs), nu, nb).transpose(0, 2, 1)  # column-major vec
        back = np.einsum("mb,smi->sbi", self._q.conj(), rm)
        ah_r = self.dictionary.bs.adjoint(back, self.subs)  # (S, G, N_beam_u)
        out = np.einsum("sgi,sik->skg", ah_r, self._c.conj())
        return out.reshape(len(self.subs), -1)

    def columns(self, idx):
        g, gu = self.dictionary.split(idx)
        a = np.einsum("mb,sbk->smk", self._q, self.dictionary.bs.columns(g, self.subs))
        c = self._c[:, :, gu]
        return (c[:, :, None, :] * a[:, None, :, :]).reshape(len(self.subs), -1, len(g))

    def matrix(self, s):
        full = np.kron(self.v.T, self._q)
        return full @ self.dictionary.matrix(self.subs[s])

    def column_norms(self):
        # the column is c_gu kron (q a_g), so its norm factorises
        if self._norms is None:
            bs = _sensed_norms(self._q, self.dictionary.bs, self.subs)
            user = np.linalg.norm(self._c, axis=1)
            self._norms = (user[:, :, None] * bs[:, None, :]).reshape(len(self.subs), -1)
        return self._norms


def as_sensing(phi):
    if hasattr(phi, "adjoint") and hasattr(phi, "columns"):
        return phi
    return DenseSensing(np.asarray(phi))


# ------------------------------------------------------------------ solvers


@dataclass
class EstimateResult:
    """Common support, per-subcarrier gains ``gains[s]`` on that support, diagnostics."""

    support: list[int]
    gains: np.ndarray
    residual_trace: list[float]
    cap_hit: bool = False
    channels: np.ndarray | None = None

    @property
    def n_iter(self) -> int:
        return len(self.support)

    def reconstruct(self, dictionary, subs=None) -> np.ndarray:
        """``h_hat[s] = A_s(I) beta_hat[s]``; shape (S, rows)."""
        if not self.support:
            n = dictionary.columns([0], subs).shape[1]
            return np.zeros((self.gains.shape[0], n), complex)
        cols = dictionary.columns(self.support, subs)
        return np.einsum("snk,sk->sn", cols, self.gains)


def _project_out(cols, y):
    """Residual ``(I - P) y`` and LS coefficients for stacked ``cols`` (S, m, k)."""
    pinv = np.linalg.pinv(cols, rcond=1e-10)
    coef = np.einsum("skm,sm->sk", pinv, y)
    return y - np.einsum("smk,sk->sm", cols, coef), coef


def _solve_on_support(sensing, ys, support):
    if not support:
        return np.zeros((ys.shape[0], 0), complex)
    _, coef = _project_out(sensing.columns(support), ys)
    return coef


def _greedy(ys, sensing, eps, max_atoms, normalize=True, exclude_selected=True):
    """Shared greedy loop; returns (support, residual_trace, cap_hit)."""
    weight = None
    if normalize:
        norms = sensing.column_norms()
        weight = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    residual = ys.copy()
    mse = float(np.mean(np.sum(np.abs(ys) ** 2, axis=1)))
    trace = [mse]
    support: list[int] = []
    last_change = None
    while mse > eps and len(support) < max_atoms:
        corr = np.abs(sensing.adjoint(residual))
        score = np.sum(corr * weight if normalize else corr, axis=0)
        if exclude_selected and support:
            score[support] = -np.inf
        g = int(np.argmax(score))  # first maximum: lowest index wins ties
        support.append(g)
        new_res, _ = _project_out(sensing.columns(support), ys)
        mse = float(np.mean(np.sum(np.abs(new_res - residual) ** 2, axis=1)))
        trace.append(mse)
        residual = new_res
        last_change = mse
    cap_hit = mse > eps and len(support) >= max_atoms
    # The atom whose own residual change fell to eps or below carries no more
    # than the noise floor; it is not kept.
    if support and last_change is not None and last_change <= eps:
        support.pop()
    return support, trace, cap_hit


def omp(y, phi, eps: float, max_atoms: int | None = None, normalize: bool = True) -> EstimateResult:
    """Single-vector OMP on ``y`` (N_meas,) with sensing matrix/operator ``phi``.

    Loops while the squared change between successive residuals exceeds
    ``eps`` (the first test uses ``||y||^2``). See :func:`gsomp` for ``normalize``.
    """
    if not eps > 0:
        raise ValueError("threshold must be positive")
    sensing = as_sensing(phi)
    if sensing.n_sub != 1:
        raise ValueError("omp takes a single sensing matrix; use gsomp for several")
    ys = np.asarray(y).reshape(1, -1)
    cap = sensing.n_rows if max_atoms is None else min(max_atoms, sensing.n_rows)
    support, trace, cap_hit = _greedy(ys, sensing, eps, cap, normalize)
    return EstimateResult(support, _solve_on_support(sensing, ys, support), trace, cap_hit)


def gsomp(ys, phis, eps: float, max_atoms: int | None = None,
          detect_subs=None, prune_below: float | None = None,
          normalize: bool = True) -> EstimateResult:
    """Generalised simultaneous OMP over the subcarriers stacked in ``ys`` (S, N_meas).

    The atom score is ``sum_s |Phi_s(g)^H r[s]| / ||Phi_s(g)||``, or the raw
    correlation sum with ``normalize=False``. Random training leaves the
    sensed column norms uneven (about +-10 % at N_B = 256), enough for the raw
    score to prefer a wrong neighbour even without noise. The loop runs while the
    subcarrier-averaged squared residual change exceeds ``eps``. When
    ``detect_subs`` is given only those rows drive support detection and the
    gains are still solved on every subcarrier. ``prune_below`` drops atoms
    whose average captured power ``|beta_g|^2 ||Phi_s(g)||^2`` is below it.
    """
    if not eps > 0:
        raise ValueError("threshold must be positive")
    sensing = as_sensing(phis)
    ys = np.atleast_2d(np.asarray(ys))
    if ys.shape[0] != sensing.n_sub:
        raise ValueError(f"{ys.shape[0]} measurement vectors for {sensing.n_sub} sensing matrices")
    cap = sensing.n_rows if max_atoms is None else min(max_atoms, sensing.n_rows)
    if detect_subs is None:
        support, trace, cap_hit = _greedy(ys, sensing, eps, cap, normalize)
    else:
        detect_subs = np.asarray(detect_subs, dtype=int)
        if detect_subs.size == 0:
            raise ValueError("detection subset is empty")
        support, trace, cap_hit = _greedy(ys[detect_subs], sensing.subset(detect_subs), eps, cap,
                                          normalize)
    gains = _solve_on_support(sensing, ys, support)
    if prune_below is not None and support:
        power = np.mean(np.abs(gains) ** 2
                        * np.sum(np.abs(sensing.columns(support)) ** 2, axis=1), axis=0)
        support = [g for g, p in zip(support, power) if p > prune_below]
        gains = _solve_on_support(sensing, ys, support)
    return EstimateResult(support, gains, trace, cap_hit)


def gsomp_ss(ys, phis, eps: float, stride: int = 50, offset: int = 0,
             max_atoms: int | None = None, normalize: bool = True) -> EstimateResult:
    """GSOMP with support detection on every ``stride``-th subcarrier only."""
    n_sub = np.atleast_2d(ys).shape[0]
    subs = detection_subset(n_sub, stride, offset)
    return gsomp(ys, phis, eps, max_atoms=max_atoms, detect_subs=subs, normalize=normalize)


def detection_subset(n_sub: int, stride: int, offset: int = 0) -> np.ndarray:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    subs = np.arange(offset, n_sub, stride)
    if subs.size == 0:
        raise ValueError("detection subset is empty")
    return subs


def default_threshold(n_beam: int, noise_var: float) -> float:
    """Expected effective-noise energy ``N_beam sigma^2``."""
    return n_beam * noise_var


def adaptive_threshold(noise_var: float, n_sub: int, n_atoms: int,
                       false_alarm: float = 0.05) -> float:
    """Residual-change level a pure-noise atom exceeds with probability ~``false_alarm``.

    With white noise the energy one atom captures on a subcarrier is
    ``sigma^2 Exp(1)``; averaged over ``n_sub`` subcarriers it is
    Gamma(n_sub)/n_sub. The level is the ``1 - false_alarm / n_atoms`` quantile
    (union bound over the dictionary).
    """
    q = stats.gamma.ppf(1.0 - false_alarm / n_atoms, a=n_sub)
    return noise_var * q / n_sub


# ---------------------------------------------------------------- bounds


@dataclass
class ErrorCovariance:
    """Low-rank ``R_e[s] = A_s(I) F_s^{-1} A_s(I)^H`` kept in factored form."""

    basis: np.ndarray  # (S, N, k)
    core: np.ndarray   # (S, k, k)

    def matrix(self, s: int) -> np.ndarray:
        b = self.basis[s]
        return b @ self.core[s] @ b.conj().T

    def trace(self) -> np.ndarray:
        gram = np.einsum("snk,snj->skj", self.basis.conj(), self.basis)
        return np.real(np.einsum("skj,sjk->s", self.core, gram))

    def quadratic_form(self, h: np.ndarray) -> np.ndarray:
        """``h[s]^H R_e[s] h[s]`` per subcarrier."""
        u = np.einsum("snk,sn->sk", self.basis.conj(), h)
        return np.real(np.einsum("sk,skj,sj->s", u.conj(), self.core, u))


def error_covariance(support, sensing, dictionary, noise_var: float, subs=None) -> ErrorCovariance:
    sensing = as_sensing(sensing)
    phi_i = sensing.columns(support)
    fisher = np.einsum("smk,smj->skj", phi_i.conj(), phi_i) / noise_var
    s_max = np.linalg.svd(phi_i, compute_uv=False)
    if np.any(s_max[:, -1] <= 1e-10 * s_max[:, 0]):
        raise np.linalg.LinAlgError("restricted sensing matrix is rank deficient")
    return ErrorCovariance(dictionary.columns(support, subs), np.linalg.inv(fisher))


def crlb_mse(support, sensing, dictionary, noise_var: float, subs=None) -> np.ndarray:
    """Per-subcarrier lower bound ``tr{A_s(I) F^{-1} A_s(I)^H}`` on the channel MSE."""
    return error_covariance(support, sensing, dictionary, noise_var, subs).trace()


def total_coherence(phi: np.ndarray) -> float:
    phi = np.asarray(phi)
    norms = np.linalg.norm(phi, axis=0)
    if np.any(norms == 0):
        raise ValueError("sensing matrix has a zero column")
    g = np.abs(phi.conj().T @ phi) / np.outer(norms, norms)
    return float(g.sum() - np.trace(g))
