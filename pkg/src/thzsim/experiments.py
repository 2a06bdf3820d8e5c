"""Monte-Carlo scenarios behind the ``thzsim`` subcommands.

Each scenario returns a :class:`Table`; trial ``t`` draws from
``default_rng(seed + t)`` so results do not depend on the worker count.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .array_model import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    Direction,
    ElementPattern,
    SpatialFrequency,
    VirtualPartition,
    angles_to_spatial,
    element_amplitude,
    fraunhofer_distance,
    spatial_to_angles,
    spherical_response,
    upa_response,
)
from .channel_model import (
    Medium,
    OfdmGrid,
    Path,
    PhysicalGain,
    StatisticalGain,
    UserArray,
    los_attenuation,
    los_subcarriers,
    path_coefficients,
    synth_channel,
)
from .combining import (
    auto_partition,
    build_ttd_combiner,
    digital_combiner,
    hybrid_svd_design,
    multipath_mrc,
    narrowband_combiner,
    normalized_array_gain,
    waterfilling,
)
from .config import ExperimentConfig
from .estimation import (
    DictionarySensing,
    MultiAntennaDictionary,
    MultiAntennaSensing,
    UserDictionary,
    WidebandDictionary,
    adaptive_threshold,
    build_training,
    crlb_mse,
    default_threshold,
    detection_subset,
    error_covariance,
    gsomp,
    ls_mse,
    omp,
    pilot_slots,
)
from .metrics import (
    RateConfig,
    empirical_cdf,
    mrc_rate,
    nmse,
    rate_imperfect_csi,
    rate_perfect_csi,
    rate_svd,
)


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: list[tuple[str, str]] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def select(self, **where) -> list[tuple]:
        idx = {k: self.columns.index(k) for k in where}
        return [r for r in self.rows if all(r[i] == where[k] for k, i in idx.items())]


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    for k, v in table.meta:
        buf.write(f"# {k} = {v}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


# ----------------------------------------------------------------- helpers


def _geometry(cfg: ExperimentConfig) -> ArrayGeometry:
    return ArrayGeometry.half_wavelength(cfg.rows, cfg.cols, cfg.carrier)


def _partition(cfg: ExperimentConfig, geom: ArrayGeometry) -> VirtualPartition:
    if cfg.n_sb or cfg.m_sb:
        part = VirtualPartition(cfg.n_sb or 1, cfg.m_sb or 1)
        part.check(geom)
        return part
    return auto_partition(geom, cfg.bandwidth)


def _grid(cfg: ExperimentConfig, default: int | None = None) -> OfdmGrid:
    if cfg.subcarriers:
        return OfdmGrid(cfg.subcarriers, cfg.bandwidth)
    if default is not None:
        return OfdmGrid(default, cfg.bandwidth)
    return OfdmGrid.from_delay_spread(cfg.bandwidth, cfg.delay_spread)


def _pattern(cfg: ExperimentConfig) -> ElementPattern | None:
    return ElementPattern(polar_offset_deg=cfg.polar_offset_deg) if cfg.element_gain else None


def _random_direction(rng) -> Direction:
    return Direction(rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi / 2, np.pi / 2))


def _map(fn, n: int, workers: int):
    if workers <= 1:
        return [fn(t) for t in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def _threshold(cfg: ExperimentConfig, noise: float, n_sub: int, n_atoms: int, n_meas: int) -> float:
    if cfg.threshold_rule == "nbeam":
        return default_threshold(n_meas, noise)
    return adaptive_threshold(noise, n_sub, n_atoms, cfg.false_alarm)


def _meta(cfg: ExperimentConfig, extra=()) -> list[tuple[str, str]]:
    return ([("thzsim", __version__), ("subcommand", cfg.scenario)]
            + cfg.metadata() + list(extra))


def sample_on_grid(rng, gx: int, gy: int, n_paths: int, min_sep: int, max_tries: int = 10000):
    """Distinct grid cells inside the visible disk, pairwise Chebyshev distance >= ``min_sep``."""
    half_x, half_y = (gx - 1) // 2, (gy - 1) // 2
    cells: list[tuple[int, int]] = []
    for _ in range(max_tries):
        q = int(rng.integers(-half_x, half_x + 1))
        p = int(rng.integers(-half_y, half_y + 1))
        # strictly inside the disk so the polar angle stays below pi/2
        if (q / gx) ** 2 + (p / gy) ** 2 >= 0.25 * (1 - 1e-9):
            continue
        if all(max(abs(q - a), abs(p - b)) >= max(min_sep, 1) for a, b in cells):
            cells.append((q, p))
            if len(cells) == n_paths:
                return cells
    raise RuntimeError(f"could not place {n_paths} paths with separation {min_sep}")


def _path_directions(cfg, rng, gx, gy):
    """Returns (directions, grid cells or None)."""
    if cfg.on_grid:
        cells = sample_on_grid(rng, gx, gy, cfg.paths, cfg.min_separation)
        dirs = [spatial_to_angles(SpatialFrequency(q / gx, p / gy)) for q, p in cells]
        return dirs, cells
    return [_random_direction(rng) for _ in range(cfg.paths)], None


def _unit_gains(rng, n):
    return [complex(*rng.standard_normal(2)) / math.sqrt(2.0) for _ in range(n)]


# -------------------------------------------------------------------- gain


def run_gain(cfg: ExperimentConfig) -> Table:
    geom = _geometry(cfg)
    grid = _grid(cfg)
    part = _partition(cfg, geom)
    d = Direction(cfg.azimuth, cfg.polar)
    f = grid.freqs
    beams = {
        "narrowband": np.broadcast_to(narrowband_combiner(geom, d), (f.size, geom.n_antennas)),
        "proposed": build_ttd_combiner(geom, d, part).column(f),
        "digital": digital_combiner(geom, d, f),
    }
    table = Table(["scheme", "subcarrier", "freq_hz", "gain"],
                  meta=_meta(cfg, [("subcarriers_used", str(grid.n_subcarriers)),
                                   ("partition", f"{part.n_sb}x{part.m_sb}")]))
    for name, beam in beams.items():
        g = normalized_array_gain(beam, geom, d, f)
        table.rows.extend((name, s, float(f[s]), float(g[s])) for s in range(f.size))
    return table


# ---------------------------------------------------------------- cdf-dict


def run_cdf_dict(cfg: ExperimentConfig) -> Table:
    geom = _geometry(cfg)
    grid = _grid(cfg)
    s = cfg.subcarrier_index if cfg.subcarrier_index >= 0 else grid.n_subcarriers // 2
    if s >= grid.n_subcarriers:
        raise ValueError(f"subcarrier_index {s} outside 0..{grid.n_subcarriers - 1}")
    f = grid.freqs[s]
    gx, gy = cfg.oversampling * cfg.rows + 1, cfg.oversampling * cfg.cols + 1
    dic = WidebandDictionary(geom, np.array([f]), gx, gy)

    def trial(t):
        rng = np.random.default_rng(cfg.seed + t)
        d = _random_direction(rng)
        sf = angles_to_spatial(d)
        g = dic.nearest(sf.wx, sf.wy)
        wx, wy = dic.spatial(g)
        col = dic.columns([g])[0, :, 0] / math.sqrt(geom.n_antennas)
        gain = float(normalized_array_gain(col, geom, d, f))
        return gain, abs(sf.wx - wx), abs(sf.wy - wy)

    res = np.array(_map(trial, cfg.trials, cfg.workers))
    table = Table(["quantity", "value", "cdf"],
                  meta=_meta(cfg, [("subcarrier_used", str(s)), ("grid", f"{gx}x{gy}")]))
    for name, col in (("gain", 0), ("quant_error_x", 1), ("quant_error_y", 2)):
        x, p = empirical_cdf(res[:, col])
        table.rows.extend((name, float(a), float(b)) for a, b in zip(x, p))
    return table


# -------------------------------------------------------------------- nmse


@dataclass
class NmseTrial:
    values: dict  # (snr index, estimator) -> linear NMSE
    cap_hits: int = 0


def _nmse_single(cfg: ExperimentConfig, t: int) -> NmseTrial:
    geom = _geometry(cfg)
    grid = _grid(cfg)
    freqs = grid.freqs
    n_sub = freqs.size
    rate = RateConfig.from_table(n_sub, cfg.bandwidth, cfg.power_dbm, cfg.noise_dbm_hz)
    p_p, p_n = rate.pilot_power(), rate.noise_power
    gx, gy = cfg.oversampling * cfg.rows + 1, cfg.oversampling * cfg.cols + 1
    rng = np.random.default_rng(cfg.seed + t)

    dirs, cells = _path_directions(cfg, rng, gx, gy)
    gains = _unit_gains(rng, cfg.paths)
    toas = rng.uniform(50e-9, 55e-9, cfg.paths)
    paths = [Path(StatisticalGain(b), tau, d) for b, tau, d in zip(gains, toas, dirs)]
    h_unit = synth_channel(paths, grid, geom).h
    ens = build_training(geom.n_antennas, cfg.n_rf,
                         pilot_slots(geom.n_antennas, cfg.n_rf, cfg.training_fraction), p_p, rng)

    wide = WidebandDictionary(geom, freqs, gx, gy)
    sens = DictionarySensing(ens, wide)
    if cells is not None:
        support = [wide.index_of(q + (gx - 1) // 2, p + (gy - 1) // 2) for q, p in cells]
    else:
        sfs = [angles_to_spatial(d) for d in dirs]
        support = sorted({wide.nearest(sf.wx, sf.wy) for sf in sfs})
    n_atoms = wide.size
    cap = min(ens.n_beam, cfg.atoms_per_path * cfg.paths)
    need = set(cfg.estimators)
    nb = None
    if "nbomp" in need:
        nb = DictionarySensing(ens, WidebandDictionary(geom, np.zeros(n_sub), gx, gy))

    out, hits = {}, 0
    for k, snr_db in enumerate(cfg.snr_db):
        sigma_b2 = 10 ** (snr_db / 10) * p_n / p_p
        h = h_unit * math.sqrt(sigma_b2)
        noise_rng = np.random.default_rng([cfg.seed + t, k + 1])
        y = ens.measure(h, p_n, noise_rng)
        eps_all = _threshold(cfg, p_n, n_sub, n_atoms, ens.n_beam)
        eps_one = _threshold(cfg, p_n, 1, n_atoms, ens.n_beam)
        prune = p_n if cfg.prune else None
        norms = np.sum(np.abs(h) ** 2, axis=1)
        for est in cfg.estimators:
            if est == "ls":
                val = float(np.mean(ls_mse(geom.n_antennas, p_p, p_n) / norms))
            elif est == "crlb":
                val = float(np.mean(crlb_mse(support, sens, wide, p_n) / norms))
            elif est in ("gsomp", "gsomp-ss"):
                det = None
                eps = eps_all
                if est == "gsomp-ss":
                    det = detection_subset(n_sub, cfg.stride)
                    eps = _threshold(cfg, p_n, det.size, n_atoms, ens.n_beam)
                r = gsomp(y, sens, eps, max_atoms=cap, detect_subs=det, prune_below=prune,
                          normalize=cfg.normalize_score)
                hits += r.cap_hit
                val = nmse(h, r.reconstruct(wide))
            else:  # per-subcarrier OMP, wideband or frequency-flat dictionary
                op = sens if est == "omp" else nb
                h_hat = np.empty_like(h)
                for s in range(n_sub):
                    sub = op.subset([s])
                    r = omp(y[s], sub, eps_one, max_atoms=cap, normalize=cfg.normalize_score)
                    hits += r.cap_hit
                    h_hat[s] = r.reconstruct(op.dictionary, [s])[0] if r.support else 0.0
                val = nmse(h, h_hat)
            out[(k, est)] = val
    return NmseTrial(out, hits)


def _nmse_multi(cfg: ExperimentConfig, t: int) -> NmseTrial:
    geom = _geometry(cfg)
    grid = _grid(cfg)
    freqs = grid.freqs
    n_sub = freqs.size
    n_u = cfg.user_antennas
    rate = RateConfig.from_table(n_sub, cfg.bandwidth, cfg.power_dbm, cfg.noise_dbm_hz)
    p_p, p_n = rate.pilot_power(), rate.noise_power
    gx, gy = cfg.oversampling * cfg.rows + 1, cfg.oversampling * cfg.cols + 1
    gu = cfg.user_oversampling * n_u + 1
    rng = np.random.default_rng(cfg.seed + t)

    dirs, cells = _path_directions(cfg, rng, gx, gy)
    if cfg.on_grid:
        half = (gu - 1) // 2
        # distinct user-grid cells strictly inside [-1/2, 1/2]
        pu = rng.choice(np.arange(-half, half + 1), size=cfg.paths, replace=cfg.paths > gu)
        aods = [math.asin(2.0 * p / gu) for p in pu]
    else:
        pu = None
        aods = list(rng.uniform(-np.pi / 2, np.pi / 2, cfg.paths))
    gains = _unit_gains(rng, cfg.paths)
    toas = rng.uniform(50e-9, 55e-9, cfg.paths)
    paths = [Path(StatisticalGain(b), tau, d, a) for b, tau, d, a in zip(gains, toas, dirs, aods)]
    h_unit = synth_channel(paths, grid, geom, user=UserArray(n_u)).h  # (S, N_B, N_U)
    ens = build_training(geom.n_antennas, cfg.n_rf,
                         pilot_slots(geom.n_antennas, cfg.n_rf, cfg.training_fraction), p_p, rng)
    v = rng.choice([-1.0, 1.0], size=(n_u, n_u)) / math.sqrt(n_u)

    def dictionary(f):
        return MultiAntennaDictionary(WidebandDictionary(geom, f, gx, gy),
                                      UserDictionary(n_u, geom.carrier, f, gu))

    wide = dictionary(freqs)
    sens = MultiAntennaSensing(ens, v, wide)
    if cells is not None and pu is not None:
        g_bs = [wide.bs.index_of(q + (gx - 1) // 2, p + (gy - 1) // 2) for q, p in cells]
        support = [int(u + (gu - 1) // 2) * wide.bs.size + g for u, g in zip(pu, g_bs)]
    else:
        support = None
    n_atoms = wide.size
    n_meas = sens.n_rows
    cap = min(n_meas, cfg.atoms_per_path * cfg.paths)
    nb = MultiAntennaSensing(ens, v, dictionary(np.zeros(n_sub))) if "nbomp" in cfg.estimators else None
    q = ens.sensing()

    out, hits = {}, 0
    for k, snr_db in enumerate(cfg.snr_db):
        sigma_b2 = 10 ** (snr_db / 10) * p_n / p_p
        hmat = h_unit * math.sqrt(sigma_b2)
        h = hmat.transpose(0, 2, 1).reshape(n_sub, -1)  # column-major vec(H[s])
        noise_rng = np.random.default_rng([cfg.seed + t, k + 1])
        ymat = np.einsum("mb,sbu,ui->smi", q, hmat, v)
        # every (user beam, BS slot) pair is its own time slot with fresh noise
        noise = ens.slot_noise(n_sub * n_u, p_n, noise_rng).reshape(n_sub, n_u, ens.n_beam)
        ymat = ymat + noise.transpose(0, 2, 1)
        y = ymat.transpose(0, 2, 1).reshape(n_sub, -1)
        eps_all = _threshold(cfg, p_n, n_sub, n_atoms, n_meas)
        eps_one = _threshold(cfg, p_n, 1, n_atoms, n_meas)
        norms = np.sum(np.abs(h) ** 2, axis=1)
        for est in cfg.estimators:
            if est == "ls":
                val = float(np.mean(ls_mse(geom.n_antennas * n_u, p_p, p_n) / norms))
            elif est == "crlb":
                if support is None:
                    continue
                val = float(np.mean(crlb_mse(support, sens, wide, p_n) / norms))
            elif est in ("gsomp", "gsomp-ss"):
                det, eps = None, eps_all
                if est == "gsomp-ss":
                    det = detection_subset(n_sub, cfg.stride)
                    eps = _threshold(cfg, p_n, det.size, n_atoms, n_meas)
                r = gsomp(y, sens, eps, max_atoms=cap, detect_subs=det, normalize=cfg.normalize_score)
                hits += r.cap_hit
                val = nmse(h, r.reconstruct(wide))
            else:
                op = sens if est == "omp" else nb
                h_hat = np.zeros_like(h)
                for s in range(n_sub):
                    r = omp(y[s], op.subset([s]), eps_one, max_atoms=cap, normalize=cfg.normalize_score)
                    hits += r.cap_hit
                    if r.support:
                        h_hat[s] = r.reconstruct(op.dictionary, [s])[0]
                val = nmse(h, h_hat)
            out[(k, est)] = val
    return NmseTrial(out, hits)


def _run_nmse_common(cfg: ExperimentConfig, trial_fn) -> Table:
    trials = _map(lambda t: trial_fn(cfg, t), cfg.trials, cfg.workers)
    hits = sum(tr.cap_hits for tr in trials)
    grid = _grid(cfg)
    table = Table(["snr_db", "estimator", "nmse_db", "nmse"],
                  meta=_meta(cfg, [("subcarriers_used", str(grid.n_subcarriers)),
                                   ("iteration_cap_hits", str(hits))]))
    for k, snr in enumerate(cfg.snr_db):
        for est in cfg.estimators:
            vals = [tr.values[(k, est)] for tr in trials if (k, est) in tr.values]
            if not vals:
                continue
            m = float(np.mean(vals))
            table.rows.append((float(snr), est, 10 * math.log10(m) if m > 0 else -math.inf, m))
    return table


def run_nmse(cfg: ExperimentConfig) -> Table:
    return _run_nmse_common(cfg, _nmse_single)


def run_nmse_mu(cfg: ExperimentConfig) -> Table:
    return _run_nmse_common(cfg, _nmse_multi)


# ---------------------------------------------------------------- rate-los


def los_channel(geom, direction, freqs, distance, pattern, medium=Medium()):
    path = Path(PhysicalGain(distance), distance / SPEED_OF_LIGHT, direction)
    coeff = path_coefficients([path], freqs, geom, pattern, medium)[:, 0]
    return coeff[:, None] * upa_response(geom, direction, freqs)


def run_rate_los(cfg: ExperimentConfig) -> Table:
    geom = _geometry(cfg)
    grid = _grid(cfg, default=los_subcarriers(geom, cfg.bandwidth))
    part = _partition(cfg, geom)
    pattern = _pattern(cfg)
    rate = RateConfig.from_table(grid.n_subcarriers, cfg.bandwidth, cfg.power_dbm, cfg.noise_dbm_hz)
    f = grid.freqs
    medium = Medium()

    def trial(t):
        rng = np.random.default_rng(cfg.seed + t)
        d = _random_direction(rng)
        h = los_channel(geom, d, f, cfg.distance, pattern, medium)
        return {
            "digital": rate_perfect_csi(h, digital_combiner(geom, d, f), rate),
            "proposed": rate_perfect_csi(h, build_ttd_combiner(geom, d, part).column(f), rate),
            "narrowband": rate_perfect_csi(h, narrowband_combiner(geom, d)[None], rate),
        }

    res = _map(trial, cfg.trials, cfg.workers)
    table = Table(["scheme", "rate_gbps"],
                  meta=_meta(cfg, [("subcarriers_used", str(grid.n_subcarriers)),
                                   ("partition", f"{part.n_sb}x{part.m_sb}")]))
    for name in ("digital", "proposed", "narrowband"):
        table.rows.append((name, float(np.mean([r[name] for r in res])) / 1e9))
    return table


# --------------------------------------------------------------- rate-icsi


def _physical_paths(cfg, rng, multi=False):
    out = []
    for _ in range(cfg.paths):
        d = _random_direction(rng)
        toa = rng.uniform(50e-9, 55e-9)
        inc = rng.uniform(-np.pi / 2, np.pi / 2)
        aod = rng.uniform(-np.pi / 2, np.pi / 2) if multi else 0.0
        out.append(Path(PhysicalGain(cfg.distance, inc), toa, d, aod))
    return out


def run_rate_icsi(cfg: ExperimentConfig) -> Table:
    geom = _geometry(cfg)
    grid = _grid(cfg)
    part = _partition(cfg, geom)
    pattern = _pattern(cfg)
    f = grid.freqs
    n_sub = f.size
    gx, gy = cfg.oversampling * cfg.rows + 1, cfg.oversampling * cfg.cols + 1
    wide = WidebandDictionary(geom, f, gx, gy)
    n_rf = max(cfg.n_rf, cfg.paths)

    def trial(t):
        rng = np.random.default_rng(cfg.seed + t)
        paths = _physical_paths(cfg, rng)
        h = synth_channel(paths, grid, geom, pattern).h
        coeffs = path_coefficients(paths, f, geom, pattern)
        ens = build_training(geom.n_antennas, cfg.n_rf,
                             pilot_slots(geom.n_antennas, cfg.n_rf, cfg.training_fraction),
                             1.0, rng)
        hyb = multipath_mrc(geom, f, [p.direction for p in paths], coeffs, part, n_rf)
        # unit pilot power; y / sqrt(P_p) sees noise variance P_n / P_p instead
        sens = DictionarySensing(ens, wide)
        out = {}
        for k, pdbm in enumerate(cfg.power_dbm_sweep):
            rate = RateConfig.from_table(n_sub, cfg.bandwidth, pdbm, cfg.noise_dbm_hz)
            var = rate.noise_power / rate.pilot_power()
            y = ens.measure(h, var, np.random.default_rng([cfg.seed + t, k + 1]))
            eps = _threshold(cfg, var, n_sub, wide.size, ens.n_beam)
            r = gsomp(y, sens, eps, max_atoms=min(ens.n_beam, cfg.atoms_per_path * cfg.paths),
                      normalize=cfg.normalize_score)
            out[(k, "perfect-digital")] = mrc_rate(h, rate)
            out[(k, "perfect-proposed")] = rate_perfect_csi(h, hyb.effective(), rate)
            if r.support:
                h_hat = r.reconstruct(wide)
                cov = error_covariance(r.support, sens, wide, var)
                out[(k, "imperfect-gsomp")] = rate_imperfect_csi(h_hat, cov.quadratic_form(h_hat), rate)
            else:
                out[(k, "imperfect-gsomp")] = 0.0
        return out

    res = _map(trial, cfg.trials, cfg.workers)
    table = Table(["power_dbm", "scheme", "rate_gbps"],
                  meta=_meta(cfg, [("subcarriers_used", str(n_sub)),
                                   ("partition", f"{part.n_sb}x{part.m_sb}")]))
    for k, pdbm in enumerate(cfg.power_dbm_sweep):
        for name in ("perfect-digital", "perfect-proposed", "imperfect-gsomp"):
            table.rows.append((float(pdbm), name, float(np.mean([r[(k, name)] for r in res])) / 1e9))
    return table


# ---------------------------------------------------------------- rate-svd


def run_rate_svd(cfg: ExperimentConfig) -> Table:
    geom = _geometry(cfg)
    grid = _grid(cfg)
    part = _partition(cfg, geom)
    pattern = _pattern(cfg)
    f = grid.freqs
    user = UserArray(cfg.user_antennas)
    schemes = ("digital", "proposed", "narrowband")

    def trial(t):
        rng = np.random.default_rng(cfg.seed + t)
        paths = _physical_paths(cfg, rng, multi=True)
        h = synth_channel(paths, grid, geom, pattern, user).h
        power = np.mean(np.abs(path_coefficients(paths, f, geom, pattern)) ** 2, axis=0)
        sv = {s: hybrid_svd_design(h, f, geom, paths, cfg.n_rf, part, s, power) for s in schemes}
        out = {}
        for k, pdbm in enumerate(cfg.power_dbm_sweep):
            rate = RateConfig.from_table(f.size, cfg.bandwidth, pdbm, cfg.noise_dbm_hz)
            for s in schemes:
                p = waterfilling(sv[s], rate.noise_power, rate.total_power)
                out[(k, s)] = rate_svd(sv[s], p, rate)
        return out

    res = _map(trial, cfg.trials, cfg.workers)
    table = Table(["power_dbm", "scheme", "rate_gbps"],
                  meta=_meta(cfg, [("subcarriers_used", str(f.size)),
                                   ("partition", f"{part.n_sb}x{part.m_sb}")]))
    for k, pdbm in enumerate(cfg.power_dbm_sweep):
        for s in schemes:
            table.rows.append((float(pdbm), s, float(np.mean([r[(k, s)] for r in res])) / 1e9))
    return table


# --------------------------------------------------------------- nearfield


def run_nearfield(cfg: ExperimentConfig) -> Table:
    geom = _geometry(cfg)
    grid = _grid(cfg, default=los_subcarriers(geom, cfg.bandwidth))
    part = _partition(cfg, geom)
    pattern = _pattern(cfg)
    f = grid.freqs
    d_f = fraunhofer_distance(geom)
    rate = RateConfig.from_table(f.size, cfg.bandwidth, cfg.power_dbm, cfg.noise_dbm_hz)
    k_abs = Medium().k_abs

    def trial(t):
        rng = np.random.default_rng(cfg.seed + t)
        d = _random_direction(rng)
        w = build_ttd_combiner(geom, d, part).column(f)
        amp = element_amplitude(pattern, d)
        out = {}
        for i, factor in enumerate(cfg.distance_factors):
            dist = factor * d_f
            alpha = los_attenuation(f, geom.carrier, dist, k_abs) * amp
            delay = np.exp(-2j * np.pi * (geom.carrier + f) * dist / SPEED_OF_LIGHT)
            plane = (alpha * delay)[:, None] * upa_response(geom, d, f)
            sph = alpha[:, None] * spherical_response(geom, d, dist, f)
            out[(i, "plane")] = rate_perfect_csi(plane, w, rate)
            out[(i, "spherical")] = rate_perfect_csi(sph, w, rate)
        return out

    res = _map(trial, cfg.trials, cfg.workers)
    table = Table(["distance_factor", "distance_m", "model", "rate_gbps"],
                  meta=_meta(cfg, [("fraunhofer_m", f"{d_f:.9g}"),
                                   ("subcarriers_used", str(f.size)),
                                   ("partition", f"{part.n_sb}x{part.m_sb}")]))
    for i, factor in enumerate(cfg.distance_factors):
        for model in ("plane", "spherical"):
            table.rows.append((float(factor), float(factor * d_f), model,
                               float(np.mean([r[(i, model)] for r in res])) / 1e9))
    return table


RUNNERS = {
    "gain": run_gain,
    "cdf-dict": run_cdf_dict,
    "nmse": run_nmse,
    "nmse-mu": run_nmse_mu,
    "rate-los": run_rate_los,
    "rate-icsi": run_rate_icsi,
    "rate-svd": run_rate_svd,
    "nearfield": run_nearfield,
}


def run(cfg: ExperimentConfig) -> Table:
    return RUNNERS[cfg.scenario](cfg.validate())
