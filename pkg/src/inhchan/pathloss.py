"""Close-in (CI) and frequency-weighted (CIF) path loss models for indoor office links.

All models are referenced to a 1 m free space distance.  Frequencies are in GHz,
distances in meters and losses in dB.  Shadow fading is always an explicit
argument so that mean and stochastic evaluations share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

__all__ = [
    "Condition",
    "Mode",
    "CIParams",
    "CIFParams",
    "MeasurementRecord",
    "ChannelTargets",
    "ThreeGPPReference",
    "NotAvailableError",
    "BANDS_GHZ",
    "fspl_1m",
    "ci_path_loss",
    "cif_path_loss",
    "measured_path_loss",
    "lookup_params",
    "channel_targets",
    "three_gpp_reference",
    "excess_loss",
]

BANDS_GHZ = (28.0, 73.0, 142.0)
"""Canonical measurement bands."""

REFERENCE_FREQUENCY_GHZ = 81.0
"""Weighted average frequency used by the published multi-band CIF fits."""


class NotAvailableError(LookupError):
    """Requested table cell does not exist."""


class Condition(str, Enum):
    LOS = "LOS"
    NLOS_BEST = "NLOS_Best"
    NLOS = "NLOS"

    @classmethod
    def parse(cls, value: Union[str, "Condition"]) -> "Condition":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_")
        for member in cls:
            if member.value.upper() == key:
                return member
        raise ValueError(f"unknown link condition {value!r}")


class Mode(str, Enum):
    DIRECTIONAL = "Directional"
    OMNI = "Omnidirectional"

    @classmethod
    def parse(cls, value: Union[str, "Mode"]) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("directional", "dir", "d"):
            return cls.DIRECTIONAL
        if key in ("omnidirectional", "omni", "o"):
            return cls.OMNI
        raise ValueError(f"unknown antenna mode {value!r}")


@dataclass(frozen=True)
class CIParams:
    n: float
    sigma_db: float = 0.0

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"path loss exponent must be positive, got {self.n}")
        if not self.sigma_db >= 0:
            raise ValueError(f"shadow std must be non-negative, got {self.sigma_db}")


@dataclass(frozen=True)
class CIFParams:
    n: float
    b: float
    f0_ghz: float
    sigma_db: float = 0.0

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"path loss exponent must be positive, got {self.n}")
        if not self.f0_ghz > 0:
            raise ValueError(f"reference frequency must be positive, got {self.f0_ghz}")
        if not self.sigma_db >= 0:
            raise ValueError(f"shadow std must be non-negative, got {self.sigma_db}")


@dataclass(frozen=True)
class MeasurementRecord:
    """One TX-RX link observation."""

    f_ghz: float
    d3d_m: float
    pt_dbm: float
    gt_dbi: float
    gr_dbi: float
    pr_dbm: float
    gsym_db: float = 0.0
    condition: Condition = Condition.LOS
    mode: Mode = Mode.OMNI

    def __post_init__(self):
        values = (self.f_ghz, self.d3d_m, self.pt_dbm, self.gt_dbi, self.gr_dbi, self.pr_dbm, self.gsym_db)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("measurement fields must be finite")
        if self.f_ghz <= 0:
            raise ValueError(f"frequency must be positive, got {self.f_ghz}")
        if self.d3d_m < 1.0:
            raise ValueError(f"distance {self.d3d_m} m is inside the 1 m reference distance")
        object.__setattr__(self, "condition", Condition.parse(self.condition))
        object.__setattr__(self, "mode", Mode.parse(self.mode))


@dataclass(frozen=True)
class ChannelTargets:
    """Published multipath statistics for one (band, condition, mode) cell."""

    min_ds_ns: float
    max_ds_ns: float
    mu_ds_ns: float
    mu_nc: float
    sigma_nc: float
    mu_mpc: float
    sigma_mpc: float


@dataclass(frozen=True)
class ThreeGPPReference:
    condition: Condition
    n: float
    sigma_db: float
    mu_ds_ns: dict
    num_clusters: int
    mpcs_per_cluster: int


def fspl_1m(f_ghz):
    """Free space path loss at 1 m, in dB, for a carrier frequency in GHz."""
    f = np.asarray(f_ghz, dtype=float)
    if np.any(~(f > 0)):
        raise ValueError("frequency must be positive")
    out = 32.4 + 20.0 * np.log10(f)
    return float(out) if out.ndim == 0 else out


def _check_distance(d3d_m):
    d = np.asarray(d3d_m, dtype=float)
    if np.any(~(d >= 1.0)):
        raise ValueError("distance must be at least the 1 m reference distance")
    return d


def _scalar_or_array(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def ci_path_loss(params: CIParams, f_ghz, d3d_m, shadow_db=0.0):
    """Close-in path loss: FSPL(f, 1 m) + 10 n log10(d) + shadow."""
    d = _check_distance(d3d_m)
    return _scalar_or_array(fspl_1m(f_ghz) + 10.0 * params.n * np.log10(d) + shadow_db)


def cif_path_loss(params: CIFParams, f_ghz, d3d_m, shadow_db=0.0):
    """CI path loss with a PLE that varies linearly with (f - f0) / f0."""
    d = _check_distance(d3d_m)
    f = np.asarray(f_ghz, dtype=float)
    ple = params.n * (1.0 + params.b * (f - params.f0_ghz) / params.f0_ghz)
    return _scalar_or_array(fspl_1m(f) + 10.0 * ple * np.log10(d) + shadow_db)


def measured_path_loss(record: MeasurementRecord) -> float:
    """Path loss of a measured link with antenna and processing gains removed."""
    r = record
    return r.pt_dbm + r.gt_dbi + r.gr_dbi - r.pr_dbm + r.gsym_db


def excess_loss(n: float, d3d_m) -> float:
    """Mean loss beyond the 1 m reference: 10 n log10(d)."""
    return _scalar_or_array(10.0 * n * np.log10(_check_distance(d3d_m)))


# ---------------------------------------------------------------------------
# Published parameter tables (printed precision, no re-derivation).
# Per-band tuples are ordered as BANDS_GHZ.

_L, _B, _N = Condition.LOS, Condition.NLOS_BEST, Condition.NLOS
_D, _O = Mode.DIRECTIONAL, Mode.OMNI

_SINGLE_CI = {
    (_D, _L): ((1.90, 3.38), (1.63, 3.06), (2.05, 2.89)),
    (_D, _B): ((2.75, 7.00), (3.30, 8.76), (3.21, 6.03)),
    (_D, _N): ((4.39, 7.30), (5.51, 8.94), (4.60, 13.80)),
    (_O, _L): ((1.17, 2.72), (1.36, 2.30), (1.74, 3.62)),
    (_O, _N): ((2.37, 7.22), (2.81, 8.71), (2.83, 6.07)),
}

_MULTI_CI = {
    (_D, _L): (1.86, 3.45),
    (_D, _B): (3.07, 7.67),
    (_D, _N): (5.02, 13.97),
    (_O, _L): (1.42, 3.71),
    (_O, _N): (2.66, 7.82),
}

# (n, b, sigma)
_MULTI_CIF = {
    (_D, _L): (1.86, 0.07, 3.45),
    (_D, _B): (3.07, 0.05, 7.67),
    (_D, _N): (5.02, 0.03, 13.85),
    (_O, _L): (1.42, 0.29, 2.94),
    (_O, _N): (2.66, 0.11, 7.53),
}

# per band: (min_ds, max_ds, mu_ds, mu_nc, sigma_nc, mu_mpc, sigma_mpc)
_STATS = {
    (_D, _L): (
        (0.87, 5.50, 3.85, 1.41, 0.85, 2.45, 2.19),
        (0.76, 5.34, 3.53, 1.32, 0.96, 2.53, 2.27),
        (0.69, 11.94, 2.71, 1.25, 0.94, 2.11, 1.43),
    ),
    (_D, _B): (
        (0.92, 44.49, 10.23, 1.65, 0.78, 2.56, 1.54),
        (3.74, 31.37, 7.39, 1.48, 0.89, 2.44, 2.18),
        (0.60, 10.76, 5.65, 1.16, 0.69, 1.98, 2.26),
    ),
    (_D, _N): (
        (0.57, 198.55, 17.64, 3.41, 1.96, 3.16, 4.56),
        (0.51, 141.97, 12.50, 2.60, 1.70, 2.80, 5.20),
        (0.28, 92.45, 8.86, 2.39, 1.48, 1.18, 2.21),
    ),
    (_O, _L): (
        (0.70, 134.40, 10.80, 4.60, 1.94, 4.70, 3.65),
        (0.60, 101.90, 6.24, 2.76, 2.32, 3.43, 2.86),
        (0.71, 11.94, 3.00, 1.90, 1.30, 2.40, 2.20),
    ),
    (_O, _N): (
        (0.60, 198.50, 17.10, 5.40, 1.96, 6.40, 4.58),
        (0.50, 142.00, 12.30, 3.20, 1.70, 3.20, 5.20),
        (0.60, 60.87, 9.20, 2.80, 1.65, 2.20, 2.47),
    ),
}

_THREE_GPP = {
    _L: ThreeGPPReference(_L, 1.73, 3.00, {28.0: 20.40, 73.0: 20.21}, 15, 20),
    _N: ThreeGPPReference(_N, 3.19, 8.29, {28.0: 27.40, 73.0: 21.52}, 19, 20),
}


def _band_index(band) -> int:
    f = float(band)
    try:
        return BANDS_GHZ.index(f)
    except ValueError:
        raise NotAvailableError(f"{band} GHz is not a tabulated band; expected one of {BANDS_GHZ}") from None


def _cell_key(condition, mode):
    key = (Mode.parse(mode), Condition.parse(condition))
    if key not in _SINGLE_CI:
        raise NotAvailableError(f"no {key[1].value} entry for {key[0].value} antennas")
    return key


def lookup_params(band, condition, mode, model: str = "CI", scope: str = "single"):
    """Return the published CI or CIF parameters for a table cell.

    ``band`` is ignored for multi-band fits.  CIF parameters exist only as
    multi-band fits, and NLOS_Best only for directional antennas.
    """
    key = _cell_key(condition, mode)
    model = model.upper()
    scope = scope.lower().replace("_", "-")
    if model == "CI" and scope == "single":
        n, sigma = _SINGLE_CI[key][_band_index(band)]
        return CIParams(n, sigma)
    if model == "CI" and scope == "multi":
        n, sigma = _MULTI_CI[key]
        return CIParams(n, sigma)
    if model == "CIF" and scope == "multi":
        n, b, sigma = _MULTI_CIF[key]
        return CIFParams(n, b, REFERENCE_FREQUENCY_GHZ, sigma)
    if model == "CIF" and scope == "single":
        raise NotAvailableError("CIF parameters are only published as multi-band fits")
    raise ValueError(f"unknown model/scope combination {model!r}/{scope!r}")


def channel_targets(band, condition, mode) -> ChannelTargets:
    """Published delay spread, cluster and MPC statistics for one cell."""
    key = _cell_key(condition, mode)
    return ChannelTargets(*_STATS[key][_band_index(band)])


def three_gpp_reference(condition) -> ThreeGPPReference:
    condition = Condition.parse(condition)
    if condition not in _THREE_GPP:
        raise NotAvailableError(f"3GPP InH-Office has no {condition.value} column")
    return _THREE_GPP[condition]


def table_cells():
    """Yield every (mode, condition) cell in the published tables."""
    return list(_SINGLE_CI)
