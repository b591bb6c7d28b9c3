"""Drop-based Monte Carlo generator for indoor time-clustered channels.

Each drop draws a number of time clusters from a zero-truncated Poisson law and
a number of MPCs per cluster from a mixture of a point mass at one and a
shifted geometric law, both moment-matched to the published ensemble means.
Delays live on the sounder's sample grid so that the MPC detector and the MTI
clustering recover the generated structure exactly.  Powers decay
exponentially across and within clusters; the decay constants are found by
bisection on a common scale factor so the ensemble mean RMS delay spread hits
its target.

Randomness is organised in blocks of ``DROPS_PER_STREAM`` drops.  Block ``k``
of a run seeded with ``seed`` uses its own ``SeedSequence(seed, spawn_key=(0, k))``
stream, so the blocks can be generated in any order or in parallel and still
concatenate to the same ensemble.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .pathloss import (
    BANDS_GHZ,
    ChannelTargets,
    CIParams,
    Condition,
    Mode,
    channel_targets,
    ci_path_loss,
    lookup_params,
)
from .pdp import DEFAULT_MTI_NS, EnsembleSummary, PowerDelayProfile, summarize

__all__ = [
    "CalibrationError",
    "CalibratedDecay",
    "Calibration",
    "SynthesisConfig",
    "DropTruth",
    "DropBatch",
    "MPCMixture",
    "BASE_DECAY",
    "DEFAULT_SEED",
    "DROPS_PER_STREAM",
    "RESOLUTION_NS",
    "ztp_rate",
    "mpc_mixture",
    "sample_num_clusters",
    "sample_mpcs_per_cluster",
    "sample_structure",
    "assign_powers",
    "build_pdp",
    "generate_batch",
    "generate_drop",
    "simulate_ensemble",
    "calibrate_decay",
]

log = logging.getLogger(__name__)

DEFAULT_SEED = 20210601
DROPS_PER_STREAM = 1024
DISTANCE_RANGE_M = (3.9, 40.0)

# inverse of the sounder RF null-to-null bandwidth
RESOLUTION_NS = {28.0: 2.5, 73.0: 2.5, 142.0: 2.0}

_SIM_STREAM = 0
_CAL_STREAM = 1
_DB_PER_NEPER = 10.0 / math.log(10.0)


class CalibrationError(RuntimeError):
    """The target mean delay spread cannot be reached."""


@dataclass(frozen=True)
class CalibratedDecay:
    cluster_decay_ns: float
    intra_decay_ns: float
    void_mean_ns: float

    def __post_init__(self):
        if not (self.cluster_decay_ns > 0 and self.intra_decay_ns > 0 and self.void_mean_ns > 0):
            raise ValueError("decay constants must be positive")

    def scaled(self, k: float) -> "CalibratedDecay":
        return CalibratedDecay(self.cluster_decay_ns * k, self.intra_decay_ns * k, self.void_mean_ns * k)


BASE_DECAY = CalibratedDecay(cluster_decay_ns=8.0, intra_decay_ns=4.0, void_mean_ns=8.0)
"""Shape of the decay constants; calibration only rescales it."""


@dataclass(frozen=True)
class SynthesisConfig:
    band: float
    condition: Condition
    mode: Mode
    decay: Optional[CalibratedDecay] = None
    mti_ns: float = DEFAULT_MTI_NS
    resolution_ns: Optional[float] = None
    seed: int = DEFAULT_SEED
    snr_margin_db: float = 10.0
    tx_power_dbm: float = 0.0
    targets: Optional[ChannelTargets] = None

    def __post_init__(self):
        band = float(self.band)
        if band not in BANDS_GHZ:
            raise ValueError(f"band must be one of {BANDS_GHZ}, got {self.band}")
        object.__setattr__(self, "band", band)
        object.__setattr__(self, "condition", Condition.parse(self.condition))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.resolution_ns is None:
            object.__setattr__(self, "resolution_ns", RESOLUTION_NS[band])
        if not self.resolution_ns > 0:
            raise ValueError("resolution_ns must be positive")
        if not self.mti_ns > 0:
            raise ValueError("mti_ns must be positive")
        if self.targets is None:
            object.__setattr__(self, "targets", channel_targets(band, self.condition, self.mode))
        if self.intra_bins[0] > self.intra_bins[1]:
            raise ValueError("MTI is too short to hold two resolvable MPCs in one cluster")

    @property
    def ci(self) -> CIParams:
        return lookup_params(self.band, self.condition, self.mode, "CI", "single")

    @property
    def intra_bins(self) -> Tuple[int, int]:
        """Allowed intra-cluster MPC spacings, in samples: (resolution, MTI]."""
        return 2, int(math.floor(self.mti_ns / self.resolution_ns + 1e-9))

    @property
    def key(self) -> str:
        return f"{self.band:g}.{self.condition.value}.{self.mode.value}"


# ---------------------------------------------------------------------------
# count distributions


@lru_cache(maxsize=None)
def ztp_rate(mu_nc: float) -> float:
    """Poisson rate whose zero-truncated mean equals ``mu_nc``."""
    if not mu_nc > 1:
        raise ValueError(f"zero-truncated Poisson mean must exceed 1, got {mu_nc}")
    return brentq(lambda lam: lam / -math.expm1(-lam) - mu_nc, 1e-12, mu_nc, xtol=1e-14, rtol=1e-14)


def sample_num_clusters(rng: np.random.Generator, mu_nc: float, size=None):
    """Zero-truncated Poisson draw(s) with mean ``mu_nc``; zeros are redrawn."""
    lam = ztp_rate(mu_nc)
    out = rng.poisson(lam, 1 if size is None else size)
    zeros = np.flatnonzero(out == 0)
    while zeros.size:
        out[zeros] = rng.poisson(lam, zeros.size)
        zeros = zeros[out[zeros] == 0]
    return int(out[0]) if size is None else out


@dataclass(frozen=True)
class MPCMixture:
    """P(1) = p_delta; otherwise 1 + Geometric (support 1, 2, ...) with the given mean."""

    p_delta: float
    geometric_mean: float
    sigma_matched: bool

    @property
    def mean(self) -> float:
        return 1.0 + (1.0 - self.p_delta) * self.geometric_mean

    @property
    def std(self) -> float:
        a = self.mean - 1.0
        return math.sqrt(max(a * (2.0 * self.geometric_mean - 1.0) - a * a, 0.0))


@lru_cache(maxsize=None)
def mpc_mixture(mu_mpc: float, sigma_mpc: Optional[float] = None) -> MPCMixture:
    """Moment-match the delta/geometric mixture to (mu, sigma).

    When sigma is not reachable the mean is kept exact and the geometric mean
    is clamped to the closest feasible value.
    """
    if not mu_mpc >= 1:
        raise ValueError(f"mean MPCs per cluster must be at least 1, got {mu_mpc}")
    a = mu_mpc - 1.0
    if a == 0:
        return MPCMixture(1.0, 1.0, sigma_mpc in (None, 0.0))
    # Var = a (2m - 1) - a^2 with m the geometric mean and 1 - p = a / m
    m = (sigma_mpc**2 + a * a + a) / (2.0 * a) if sigma_mpc is not None else 0.0
    m_feasible = max(m, a, 1.0)
    matched = sigma_mpc is not None and m_feasible == m
    return MPCMixture(1.0 - a / m_feasible, m_feasible, matched)


def sample_mpcs_per_cluster(rng: np.random.Generator, mu_mpc: float, sigma_mpc: Optional[float] = None, size=None):
    """Draw MPC counts from the delta/geometric mixture; always >= 1."""
    mix = mpc_mixture(mu_mpc, sigma_mpc)
    n = 1 if size is None else size
    delta = rng.random(n) < mix.p_delta
    tail = 1 + rng.geometric(1.0 / mix.geometric_mean, n)
    out = np.where(delta, 1, tail)
    return int(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# drop containers


@dataclass(frozen=True)
class DropTruth:
    """Ground-truth structure of one drop.  Powers are None until assigned."""

    num_clusters: int
    mpcs_per_cluster: Tuple[int, ...]
    delays_ns: np.ndarray
    powers_dbm: Optional[np.ndarray] = None
    rms_ds_ns: Optional[float] = None
    shadow_db: float = 0.0
    d3d_m: Optional[float] = None
    path_loss_db: Optional[float] = None

    @property
    def cluster_onsets_ns(self) -> np.ndarray:
        starts = np.cumsum((0,) + self.mpcs_per_cluster[:-1])
        return self.delays_ns[starts]

    def to_dict(self) -> dict:
        return {
            "num_clusters": self.num_clusters,
            "mpcs_per_cluster": list(self.mpcs_per_cluster),
            "delays_ns": [float(x) for x in self.delays_ns],
            "powers_dbm": None if self.powers_dbm is None else [float(x) for x in self.powers_dbm],
            "rms_ds_ns": self.rms_ds_ns,
            "shadow_db": self.shadow_db,
            "d3d_m": self.d3d_m,
            "path_loss_db": self.path_loss_db,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DropTruth":
        powers = data.get("powers_dbm")
        return cls(
            num_clusters=int(data["num_clusters"]),
            mpcs_per_cluster=tuple(int(k) for k in data["mpcs_per_cluster"]),
            delays_ns=np.asarray(data["delays_ns"], dtype=float),
            powers_dbm=None if powers is None else np.asarray(powers, dtype=float),
            rms_ds_ns=data.get("rms_ds_ns"),
            shadow_db=float(data.get("shadow_db", 0.0)),
            d3d_m=data.get("d3d_m"),
            path_loss_db=data.get("path_loss_db"),
        )


@dataclass
class _Draws:
    """Decay-independent randomness of a batch, reusable across calibration probes."""

    cluster_counts: np.ndarray  # (drops,)
    mpc_counts: np.ndarray  # (clusters,)
    intra_bins: np.ndarray  # (taps,) spacing to previous MPC; 0 on cluster-first taps
    void_unit: np.ndarray  # (clusters,) unit exponentials
    shadow_unit: np.ndarray  # (drops,) standard normals
    distance_m: np.ndarray  # (drops,)


@dataclass
class DropBatch:
    """Vectorised ground truth of many drops (flat, drop-ordered arrays)."""

    cluster_counts: np.ndarray
    mpc_counts: np.ndarray
    delays_ns: np.ndarray
    powers_dbm: np.ndarray
    rms_ds_ns: np.ndarray
    shadow_db: np.ndarray
    d3d_m: np.ndarray
    path_loss_db: np.ndarray
    _tap_offsets: np.ndarray = field(init=False, repr=False)
    _cluster_offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._cluster_offsets = np.concatenate(([0], np.cumsum(self.cluster_counts)))
        taps_per_drop = np.add.reduceat(self.mpc_counts, self._cluster_offsets[:-1]) if len(self) else np.zeros(0, int)
        self._tap_offsets = np.concatenate(([0], np.cumsum(taps_per_drop)))

    def __len__(self):
        return self.cluster_counts.size

    def drop(self, i: int) -> DropTruth:
        c0, c1 = self._cluster_offsets[i], self._cluster_offsets[i + 1]
        t0, t1 = self._tap_offsets[i], self._tap_offsets[i + 1]
        return DropTruth(
            num_clusters=int(self.cluster_counts[i]),
            mpcs_per_cluster=tuple(int(k) for k in self.mpc_counts[c0:c1]),
            delays_ns=self.delays_ns[t0:t1].copy(),
            powers_dbm=self.powers_dbm[t0:t1].copy(),
            rms_ds_ns=float(self.rms_ds_ns[i]),
            shadow_db=float(self.shadow_db[i]),
            d3d_m=float(self.d3d_m[i]),
            path_loss_db=float(self.path_loss_db[i]),
        )

    def summary(self) -> EnsembleSummary:
        return summarize(self.rms_ds_ns, self.cluster_counts, self.mpc_counts)

    @classmethod
    def concatenate(cls, batches) -> "DropBatch":
        names = ("cluster_counts", "mpc_counts", "delays_ns", "powers_dbm", "rms_ds_ns", "shadow_db", "d3d_m", "path_loss_db")
        return cls(**{k: np.concatenate([getattr(b, k) for b in batches]) for k in names})

    def take(self, n: int) -> "DropBatch":
        """First ``n`` drops."""
        c, t = self._cluster_offsets[n], self._tap_offsets[n]
        return DropBatch(
            self.cluster_counts[:n], self.mpc_counts[:c], self.delays_ns[:t], self.powers_dbm[:t],
            self.rms_ds_ns[:n], self.shadow_db[:n], self.d3d_m[:n], self.path_loss_db[:n],
        )


# ---------------------------------------------------------------------------
# batch machinery


def _segment_cumsum(values: np.ndarray, starts: np.ndarray, owner: np.ndarray) -> np.ndarray:
    """Inclusive cumulative sum restarting at every segment start."""
    cs = np.cumsum(values)
    base = cs[starts] - values[starts]
    return cs - base[owner]


def _draw(rng: np.random.Generator, config: SynthesisConfig, n: int, d3d_m=None) -> _Draws:
    t = config.targets
    if t.mu_nc == 1.0:
        clusters = np.ones(n, dtype=np.int64)
    else:
        clusters = sample_num_clusters(rng, t.mu_nc, n).astype(np.int64)
    mpcs = sample_mpcs_per_cluster(rng, t.mu_mpc, t.sigma_mpc, int(clusters.sum())).astype(np.int64)
    taps = int(mpcs.sum())
    lo, hi = config.intra_bins
    intra = rng.integers(lo, hi + 1, taps)
    intra[np.cumsum(mpcs) - mpcs] = 0
    voids = rng.standard_exponential(clusters.sum())
    shadow = rng.standard_normal(n)
    if d3d_m is None:
        lo_d, hi_d = np.log(DISTANCE_RANGE_M)
        dist = np.exp(rng.uniform(lo_d, hi_d, n))
    else:
        dist = np.full(n, float(d3d_m))
    return _Draws(clusters, mpcs, intra, voids, shadow, dist)


def _layout(draws: _Draws, config: SynthesisConfig, decay: CalibratedDecay):
    """Integer sample positions of every tap, plus cluster onsets and offsets."""
    n = draws.cluster_counts.size
    res, mti = config.resolution_ns, config.mti_ns
    mpcs = draws.mpc_counts
    num_clusters = mpcs.size

    cluster_drop = np.repeat(np.arange(n), draws.cluster_counts)
    drop_first_cluster = np.cumsum(draws.cluster_counts) - draws.cluster_counts
    tap_cluster = np.repeat(np.arange(num_clusters), mpcs)
    cluster_first_tap = np.cumsum(mpcs) - mpcs

    within = _segment_cumsum(draws.intra_bins, cluster_first_tap, tap_cluster)
    span = within[cluster_first_tap + mpcs - 1]

    # void spacing in samples, strictly longer than the MTI
    gap = np.floor((mti + decay.void_mean_ns * draws.void_unit) / res).astype(np.int64) + 1
    step = np.empty(num_clusters, dtype=np.int64)
    step[1:] = span[:-1] + gap[1:]
    step[drop_first_cluster] = 0
    onset = _segment_cumsum(step, drop_first_cluster, cluster_drop)
    return onset, within, tap_cluster, cluster_drop


def _check_structure(bins: np.ndarray, tap_cluster: np.ndarray, config: SynthesisConfig):
    res, mti = config.resolution_ns, config.mti_ns
    gaps = np.diff(bins) * res
    same_cluster = tap_cluster[1:] == tap_cluster[:-1]
    new_cluster = ~same_cluster
    first_in_drop = np.zeros(bins.size, bool)
    # taps that start a drop have onset 0; their preceding "gap" belongs to another drop
    first_in_drop[1:] = bins[1:] == 0
    across = new_cluster & ~first_in_drop[1:]
    if np.any(gaps[same_cluster] <= res) or np.any(gaps[same_cluster] > mti + 1e-9):
        raise RuntimeError("generated intra-cluster spacing violates (resolution, MTI]")
    if np.any(gaps[across] <= mti):
        raise RuntimeError("generated inter-cluster void does not exceed the MTI")


def _realize(draws: _Draws, config: SynthesisConfig, decay: CalibratedDecay, check: bool = True) -> DropBatch:
    n = draws.cluster_counts.size
    res = config.resolution_ns
    onset, within, tap_cluster, cluster_drop = _layout(draws, config, decay)
    bins = onset[tap_cluster] + within
    tap_drop = cluster_drop[tap_cluster]
    if check:
        _check_structure(bins, tap_cluster, config)

    delays = bins * res
    # natural-log relative power; 0 at the first tap of every drop
    ln_rel = -(onset[tap_cluster] * res / decay.cluster_decay_ns + within * res / decay.intra_decay_ns)
    first_tap = np.concatenate(([0], np.cumsum(np.bincount(tap_drop, minlength=n))[:-1]))
    ln_total = np.logaddexp.reduceat(ln_rel, first_tap)

    ci = config.ci
    shadow = ci.sigma_db * draws.shadow_unit
    pl = ci_path_loss(ci, config.band, draws.distance_m, shadow)
    rx_dbm = config.tx_power_dbm - np.asarray(pl)
    powers = _DB_PER_NEPER * (ln_rel - ln_total[tap_drop]) + rx_dbm[tap_drop]

    w = np.exp(ln_rel)
    sw = np.bincount(tap_drop, w, minlength=n)
    mean = np.bincount(tap_drop, w * delays, minlength=n) / sw
    var = np.bincount(tap_drop, w * (delays - mean[tap_drop]) ** 2, minlength=n) / sw
    ds = np.sqrt(np.maximum(var, 0.0))
    return DropBatch(
        draws.cluster_counts, draws.mpc_counts, delays.astype(float), powers,
        ds, shadow, draws.distance_m, np.asarray(pl, dtype=float),
    )


def _require_decay(config: SynthesisConfig) -> CalibratedDecay:
    if config.decay is None:
        raise CalibrationError(f"no calibrated decay for {config.key}; run calibrate_decay first")
    return config.decay


def generate_batch(rng: np.random.Generator, config: SynthesisConfig, n: int, d3d_m=None) -> DropBatch:
    """Generate ``n`` drops from one random stream.  ``d3d_m=None`` draws
    log-uniform distances over the measured 3.9-40 m range."""
    if d3d_m is not None and d3d_m < 1.0:
        raise ValueError("distance must be at least 1 m")
    return _realize(_draw(rng, config, n, d3d_m), config, _require_decay(config))


# ---------------------------------------------------------------------------
# single-drop operations


def sample_structure(rng: np.random.Generator, config: SynthesisConfig) -> DropTruth:
    """Cluster and MPC delays of one drop (no powers)."""
    draws = _draw(rng, config, 1)
    onset, within, tap_cluster, _ = _layout(draws, config, _require_decay(config))
    delays = (onset[tap_cluster] + within) * config.resolution_ns
    return DropTruth(int(draws.cluster_counts[0]), tuple(int(k) for k in draws.mpc_counts), delays.astype(float))


def assign_powers(truth: DropTruth, decay: CalibratedDecay, total_power_dbm: float = 0.0) -> DropTruth:
    """Exponential inter/intra-cluster power profile normalised to ``total_power_dbm``."""
    onsets = np.repeat(truth.cluster_onsets_ns, truth.mpcs_per_cluster)
    ln_rel = -(onsets / decay.cluster_decay_ns + (truth.delays_ns - onsets) / decay.intra_decay_ns)
    ln_rel -= np.logaddexp.reduce(ln_rel)
    powers = _DB_PER_NEPER * ln_rel + total_power_dbm
    w = np.exp(ln_rel - ln_rel.max())
    mean = np.dot(w, truth.delays_ns) / w.sum()
    ds = math.sqrt(max(np.dot(w, (truth.delays_ns - mean) ** 2) / w.sum(), 0.0))
    return replace(truth, powers_dbm=powers, rms_ds_ns=ds)


def build_pdp(truth: DropTruth, resolution_ns: float, snr_margin_db: float = 10.0) -> PowerDelayProfile:
    """Sample a drop onto its delay grid with a flat noise floor
    ``snr_margin_db`` below the weakest MPC.  Trailing noise-only samples make
    up more than half of the trace."""
    if truth.powers_dbm is None:
        raise ValueError("drop has no powers assigned")
    bins = np.rint(truth.delays_ns / resolution_ns).astype(np.int64)
    length = 2 * (int(bins[-1]) + 1) + 8
    floor = float(truth.powers_dbm.min()) - snr_margin_db
    powers = np.full(length, floor)
    powers[bins] = _DB_PER_NEPER * np.logaddexp(truth.powers_dbm / _DB_PER_NEPER, floor / _DB_PER_NEPER)
    return PowerDelayProfile(np.arange(length) * resolution_ns, powers, resolution_ns)


def generate_drop(rng: np.random.Generator, config: SynthesisConfig, d3d_m: float):
    """One drop at distance ``d3d_m``: (PDP, ground truth, path loss in dB)."""
    truth = generate_batch(rng, config, 1, d3d_m).drop(0)
    return build_pdp(truth, config.resolution_ns, config.snr_margin_db), truth, truth.path_loss_db


# ---------------------------------------------------------------------------
# ensembles


def _stream(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def _block(args):
    config, seed, stream, block, d3d_m = args
    return generate_batch(_stream(seed, stream, block), config, DROPS_PER_STREAM, d3d_m)


def simulate_ensemble(
    config: SynthesisConfig,
    n_drops: int,
    seed: Optional[int] = None,
    d3d_m: Optional[float] = None,
    workers: int = 1,
) -> DropBatch:
    """Generate ``n_drops`` drops.  Drop ``i`` always comes from block
    ``i // DROPS_PER_STREAM``, so the result is independent of ``workers``."""
    if n_drops < 1:
        raise ValueError("n_drops must be at least 1")
    seed = config.seed if seed is None else seed
    blocks = -(-n_drops // DROPS_PER_STREAM)
    jobs = [(config, seed, _SIM_STREAM, k, d3d_m) for k in range(blocks)]
    if workers > 1 and blocks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block, jobs))
    else:
        parts = [_block(j) for j in jobs]
    return DropBatch.concatenate(parts).take(n_drops)


# ---------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class Calibration:
    band: float
    condition: Condition
    mode: Mode
    decay: CalibratedDecay
    scale: float
    target_mu_ds_ns: float
    achieved_mu_ds_ns: float
    n_drops: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "band_ghz": self.band,
            "condition": self.condition.value,
            "mode": self.mode.value,
            "cluster_decay_ns": self.decay.cluster_decay_ns,
            "intra_decay_ns": self.decay.intra_decay_ns,
            "void_mean_ns": self.decay.void_mean_ns,
            "scale": self.scale,
            "target_mu_ds_ns": self.target_mu_ds_ns,
            "achieved_mu_ds_ns": self.achieved_mu_ds_ns,
            "n_drops": self.n_drops,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Calibration":
        return cls(
            band=float(data["band_ghz"]),
            condition=Condition.parse(data["condition"]),
            mode=Mode.parse(data["mode"]),
            decay=CalibratedDecay(data["cluster_decay_ns"], data["intra_decay_ns"], data["void_mean_ns"]),
            scale=float(data["scale"]),
            target_mu_ds_ns=float(data["target_mu_ds_ns"]),
            achieved_mu_ds_ns=float(data["achieved_mu_ds_ns"]),
            n_drops=int(data["n_drops"]),
            seed=int(data["seed"]),
        )


def calibrate_decay(
    band,
    condition,
    mode,
    target_mu_ds: Optional[float] = None,
    *,
    n_drops: int = 10_000,
    seed: int = DEFAULT_SEED,
    tol: float = 0.03,
    base: CalibratedDecay = BASE_DECAY,
    scale_bracket: Tuple[float, float] = (1e-3, 1e3),
    config: Optional[SynthesisConfig] = None,
) -> Calibration:
    """Find the scale of ``base`` whose ensemble mean RMS DS hits the target.

    The same ``n_drops`` random draws are re-used for every probe, so the mean
    delay spread is a deterministic, nearly continuous function of the scale
    and plain bisection on log-scale converges.
    """
    if config is None:
        config = SynthesisConfig(band, condition, mode, seed=seed)
    if target_mu_ds is None:
        target_mu_ds = config.targets.mu_ds_ns
    if not target_mu_ds > 0:
        raise CalibrationError(f"target mean delay spread must be positive, got {target_mu_ds}")

    rng = _stream(seed, _CAL_STREAM, 0)
    draws = _draw(rng, config, n_drops, d3d_m=10.0)

    def mean_ds(scale: float) -> float:
        return math.fsum(_realize(draws, config, base.scaled(scale), check=False).rms_ds_ns) / n_drops

    lo, hi = (math.log(s) for s in scale_bracket)
    f_lo, f_hi = mean_ds(math.exp(lo)), mean_ds(math.exp(hi))
    if not f_lo <= target_mu_ds <= f_hi:
        raise CalibrationError(
            f"{config.key}: target mean DS {target_mu_ds:.3f} ns outside reachable range "
            f"[{f_lo:.3f}, {f_hi:.3f}] ns for scales {scale_bracket}"
        )
    best = (abs(f_hi - target_mu_ds), math.exp(hi), f_hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = mean_ds(math.exp(mid))
        best = min(best, (abs(f_mid - target_mu_ds), math.exp(mid), f_mid))
        if f_mid < target_mu_ds:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    _, scale, achieved = best
    if abs(achieved - target_mu_ds) > tol * target_mu_ds:
        raise CalibrationError(
            f"{config.key}: best mean DS {achieved:.3f} ns misses target {target_mu_ds:.3f} ns by more than {tol:.0%}"
        )
    log.debug("calibrated %s: scale %.6g, mean DS %.4f ns", config.key, scale, achieved)
    return Calibration(config.band, config.condition, config.mode, base.scaled(scale), scale, target_mu_ds, achieved, n_drops, seed)
