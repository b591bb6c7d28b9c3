"""Power delay profile processing: MPC detection, time clustering and statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "PowerDelayProfile",
    "MultipathComponent",
    "TimeCluster",
    "ChannelStats",
    "EnsembleSummary",
    "DirectionalPDP",
    "estimate_noise_floor",
    "detect_mpcs",
    "rms_delay_spread",
    "partition_clusters",
    "channel_stats",
    "synthesize_omni",
    "ensemble_summary",
    "summarize",
    "db_to_lin",
    "lin_to_db",
]

DEFAULT_MTI_NS = 6.0
DEFAULT_THRESHOLD_DB = 5.0
DEFAULT_TAIL_FRACTION = 0.2

_LN10_OVER_10 = math.log(10.0) / 10.0


def db_to_lin(x):
    return np.power(10.0, np.asarray(x, dtype=float) / 10.0)


def lin_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PowerDelayProfile:
    """Uniformly sampled received power versus excess delay.

    ``resolution_ns`` is the sounder's time resolution (inverse RF bandwidth).
    The sample spacing normally equals it but may be finer for oversampled
    traces.  Powers may be ``-inf`` for empty bins.
    """

    delays_ns: np.ndarray
    powers_dbm: np.ndarray
    resolution_ns: float
    noise_floor_dbm: Optional[float] = None

    def __post_init__(self):
        delays = np.array(self.delays_ns, dtype=float)
        powers = np.array(self.powers_dbm, dtype=float)
        if delays.ndim != 1 or delays.shape != powers.shape:
            raise ValueError("delays and powers must be 1-D arrays of equal length")
        if not self.resolution_ns > 0:
            raise ValueError("resolution_ns must be positive")
        if delays.size > 1:
            steps = np.diff(delays)
            if np.any(steps <= 0):
                raise ValueError("delays must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-9):
                raise ValueError("delays must be uniformly spaced")
        if np.any(np.isnan(powers)) or np.any(powers == np.inf):
            raise ValueError("powers must be finite or -inf")
        delays.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "delays_ns", delays)
        object.__setattr__(self, "powers_dbm", powers)

    def __len__(self):
        return self.delays_ns.size

    @property
    def spacing_ns(self) -> float:
        if self.delays_ns.size < 2:
            return self.resolution_ns
        return float(self.delays_ns[1] - self.delays_ns[0])

    def with_noise_floor(self, floor_dbm: float) -> "PowerDelayProfile":
        return replace(self, noise_floor_dbm=float(floor_dbm))


@dataclass(frozen=True)
class MultipathComponent:
    delay_ns: float
    power_dbm: float


@dataclass(frozen=True)
class TimeCluster:
    mpcs: Tuple[MultipathComponent, ...]

    def __post_init__(self):
        if not self.mpcs:
            raise ValueError("a time cluster needs at least one MPC")

    def __len__(self):
        return len(self.mpcs)

    @property
    def delays_ns(self) -> List[float]:
        return [m.delay_ns for m in self.mpcs]


@dataclass(frozen=True)
class ChannelStats:
    rms_ds_ns: float
    num_clusters: int
    mpcs_per_cluster: Tuple[int, ...]

    @property
    def num_mpcs(self) -> int:
        return sum(self.mpcs_per_cluster)


def estimate_noise_floor(pdp: PowerDelayProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """Mean linear power of the trailing ``tail_fraction`` of samples, in dBm."""
    if len(pdp) == 0:
        raise ValueError("cannot estimate the noise floor of an empty PDP")
    if not 0 < tail_fraction <= 0.5:
        raise ValueError("tail_fraction must lie in (0, 0.5]")
    k = max(1, math.ceil(tail_fraction * len(pdp)))
    tail = pdp.powers_dbm[-k:]
    # averaged in the log domain so very weak traces do not underflow
    return float((logsumexp(tail * _LN10_OVER_10) - math.log(k)) / _LN10_OVER_10)


def detect_mpcs(
    pdp: PowerDelayProfile,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    noise_floor_dbm: Optional[float] = None,
) -> List[MultipathComponent]:
    """Peaks at least ``threshold_db`` above the mean noise floor.

    A sample is a candidate when it rises strictly above its left neighbour and
    is not below its right one.  Candidates closer than one time resolution to
    a stronger retained peak are dropped.  Returned MPCs are sorted by delay.
    """
    if threshold_db <= 0:
        raise ValueError("threshold_db must be positive")
    if len(pdp) == 0:
        return []
    if noise_floor_dbm is None:
        noise_floor_dbm = pdp.noise_floor_dbm
    if noise_floor_dbm is None:
        noise_floor_dbm = estimate_noise_floor(pdp)
    p = pdp.powers_dbm
    padded = np.concatenate(([-np.inf], p, [-np.inf]))
    is_peak = (padded[1:-1] > padded[:-2]) & (padded[1:-1] >= padded[2:])
    is_peak &= p >= noise_floor_dbm + threshold_db
    idx = np.flatnonzero(is_peak)
    if idx.size == 0:
        return []

    delays = pdp.delays_ns
    kept: List[int] = []
    # strongest first; ties resolved toward the earlier delay
    for i in idx[np.lexsort((idx, -p[idx]))]:
        if all(abs(delays[i] - delays[j]) > pdp.resolution_ns for j in kept):
            kept.append(int(i))
    kept.sort()
    return [MultipathComponent(float(delays[i]), float(p[i])) for i in kept]


def rms_delay_spread(mpcs: Sequence[MultipathComponent]) -> float:
    """Power-weighted standard deviation of MPC delays, in ns."""
    if len(mpcs) == 0:
        raise ValueError("RMS delay spread of an empty MPC list is undefined")
    tau = np.array([m.delay_ns for m in mpcs], dtype=float)
    pdb = np.array([m.power_dbm for m in mpcs], dtype=float)
    w = db_to_lin(pdb - pdb.max())
    mean = np.dot(w, tau) / w.sum()
    var = np.dot(w, (tau - mean) ** 2) / w.sum()
    return float(math.sqrt(max(var, 0.0)))


def partition_clusters(mpcs: Sequence[MultipathComponent], mti_ns: float = DEFAULT_MTI_NS) -> List[TimeCluster]:
    """Split delay-sorted MPCs wherever the gap to the previous MPC exceeds the MTI."""
    if mti_ns <= 0:
        raise ValueError("mti_ns must be positive")
    clusters: List[TimeCluster] = []
    current: List[MultipathComponent] = []
    for m in mpcs:
        if current and m.delay_ns < current[-1].delay_ns:
            raise ValueError("MPCs must be sorted by delay")
        if current and m.delay_ns - current[-1].delay_ns > mti_ns:
            clusters.append(TimeCluster(tuple(current)))
            current = []
        current.append(m)
    if current:
        clusters.append(TimeCluster(tuple(current)))
    return clusters


def channel_stats(
    pdp: PowerDelayProfile,
    mti_ns: float = DEFAULT_MTI_NS,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> Optional[ChannelStats]:
    """Detect, cluster and summarize one PDP.  Returns None when nothing is detected."""
    mpcs = detect_mpcs(pdp, threshold_db)
    if not mpcs:
        return None
    clusters = partition_clusters(mpcs, mti_ns)
    return ChannelStats(rms_delay_spread(mpcs), len(clusters), tuple(len(c) for c in clusters))


@dataclass(frozen=True)
class DirectionalPDP:
    """A PDP measured at one TX/RX pointing combination."""

    azimuth_deg: float
    elevation_deg: float
    gt_dbi: float
    gr_dbi: float
    pdp: PowerDelayProfile


def _first_arrival(pdp: PowerDelayProfile, threshold_db: float) -> float:
    mpcs = detect_mpcs(pdp, threshold_db)
    return mpcs[0].delay_ns if mpcs else float(pdp.delays_ns[0])


def synthesize_omni(
    directional: Sequence[DirectionalPDP],
    align: str = "absolute",
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> PowerDelayProfile:
    """Approximate omnidirectional PDP from gain-stripped directional PDPs.

    Each trace has its TX and RX antenna gains removed and its linear power is
    summed per delay bin.  A pointing direction that appears more than once
    contributes only its first trace.  With ``align="first_arrival"`` every
    trace is shifted so its first detected MPC sits at zero delay.

    Paths seen by several adjacent beams are not de-duplicated, so the result
    over-counts power where beams overlap.
    """
    if not directional:
        raise ValueError("at least one directional PDP is required")
    if align not in ("absolute", "first_arrival"):
        raise ValueError(f"unknown alignment {align!r}")
    resolution = directional[0].pdp.resolution_ns
    spacing = directional[0].pdp.spacing_ns
    for d in directional:
        if not math.isclose(d.pdp.resolution_ns, resolution, rel_tol=1e-9):
            raise ValueError("all directional PDPs must share one time resolution")
        if len(d.pdp) > 1 and not math.isclose(d.pdp.spacing_ns, spacing, rel_tol=1e-6):
            raise ValueError("all directional PDPs must share one sample spacing")

    seen = set()
    traces = []
    for d in directional:
        key = (float(d.azimuth_deg) % 360.0, float(d.elevation_deg))
        if key in seen:
            continue
        seen.add(key)
        shift = _first_arrival(d.pdp, threshold_db) if align == "first_arrival" else 0.0
        bins = np.rint((d.pdp.delays_ns - shift) / spacing).astype(np.int64)
        traces.append((bins, d.pdp.powers_dbm - d.gt_dbi - d.gr_dbi))

    lo = min(int(b[0]) for b, _ in traces)
    hi = max(int(b[-1]) for b, _ in traces)
    total = np.zeros(hi - lo + 1)
    for bins, pdb in traces:
        np.add.at(total, bins - lo, db_to_lin(pdb))
    delays = (np.arange(lo, hi + 1) * spacing).astype(float)
    return PowerDelayProfile(delays, lin_to_db(total), resolution)


@dataclass(frozen=True)
class EnsembleSummary:
    """Ensemble statistics over drops; DS fields are None when every drop is absent."""

    num_drops: int
    num_absent: int
    min_ds_ns: Optional[float]
    max_ds_ns: Optional[float]
    mean_ds_ns: Optional[float]
    std_ds_ns: Optional[float]
    p90_ds_ns: Optional[float]
    mean_nc: Optional[float]
    std_nc: Optional[float]
    min_nc: Optional[int]
    max_nc: Optional[int]
    p90_nc: Optional[float]
    mean_mpc: Optional[float]
    std_mpc: Optional[float]
    min_mpc: Optional[int]
    max_mpc: Optional[int]
    p90_mpc: Optional[float]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_std(x: np.ndarray) -> Tuple[float, float]:
    # fsum is exactly rounded, so the result does not depend on drop order
    mean = math.fsum(x) / x.size
    return mean, math.sqrt(math.fsum((x - mean) ** 2) / x.size)


def summarize(ds_ns, num_clusters, mpcs_per_cluster, num_absent: int = 0) -> EnsembleSummary:
    """Ensemble summary from flat arrays of per-drop DS, per-drop cluster counts
    and pooled per-cluster MPC counts."""
    ds = np.asarray(ds_ns, dtype=float)
    nc = np.asarray(num_clusters, dtype=float)
    mpc = np.asarray(mpcs_per_cluster, dtype=float)
    n = ds.size + num_absent
    if n == 0:
        raise ValueError("cannot summarize an empty ensemble")
    if ds.size == 0:
        return EnsembleSummary(n, num_absent, *([None] * 15))
    mean_ds, std_ds = _mean_std(ds)
    mean_nc, std_nc = _mean_std(nc)
    mean_mpc, std_mpc = _mean_std(mpc)
    return EnsembleSummary(
        num_drops=n,
        num_absent=num_absent,
        min_ds_ns=float(ds.min()),
        max_ds_ns=float(ds.max()),
        mean_ds_ns=mean_ds,
        std_ds_ns=std_ds,
        p90_ds_ns=float(np.percentile(ds, 90)),
        mean_nc=mean_nc,
        std_nc=std_nc,
        min_nc=int(nc.min()),
        max_nc=int(nc.max()),
        p90_nc=float(np.percentile(nc, 90)),
        mean_mpc=mean_mpc,
        std_mpc=std_mpc,
        min_mpc=int(mpc.min()),
        max_mpc=int(mpc.max()),
        p90_mpc=float(np.percentile(mpc, 90)),
    )


def ensemble_summary(stats: Iterable[Optional[ChannelStats]]) -> EnsembleSummary:
    """Summarize per-drop stats.  ``None`` entries count as absent drops.

    MPC-per-cluster statistics pool every cluster of every drop.
    """
    stats = list(stats)
    if not stats:
        raise ValueError("cannot summarize an empty ensemble")
    present = [s for s in stats if s is not None]
    return summarize(
        [s.rms_ds_ns for s in present],
        [s.num_clusters for s in present],
        [k for s in present for k in s.mpcs_per_cluster],
        num_absent=len(stats) - len(present),
    )
