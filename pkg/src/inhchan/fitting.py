"""Least-squares fits of CI and CIF path loss parameters to measured links."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .pathloss import CIFParams, CIParams, MeasurementRecord, fspl_1m, measured_path_loss

__all__ = ["FitError", "FitResult", "weighted_center_frequency", "fit_ci", "fit_cif"]


class FitError(ValueError):
    """The records do not identify the requested model."""


@dataclass(frozen=True)
class FitResult:
    params: Union[CIParams, CIFParams]
    residuals_db: np.ndarray
    rmse_db: float

    def to_dict(self) -> dict:
        p = self.params
        out = {"model": "CIF" if isinstance(p, CIFParams) else "CI", "n": p.n, "sigma_db": p.sigma_db}
        if isinstance(p, CIFParams):
            out["b"] = p.b
            out["f0_ghz"] = p.f0_ghz
        out["rmse_db"] = self.rmse_db
        out["num_records"] = int(self.residuals_db.size)
        return out


def weighted_center_frequency(records: Sequence[MeasurementRecord]) -> float:
    """Record-count weighted average of the distinct measurement frequencies."""
    if not records:
        raise ValueError("cannot weight an empty record list")
    counts = Counter(r.f_ghz for r in records)
    total = sum(counts.values())
    return math.fsum(f * k for f, k in counts.items()) / total


def _design(records):
    if len(records) < 2:
        raise FitError("at least two records are required")
    f = np.array([r.f_ghz for r in records], dtype=float)
    d = np.array([r.d3d_m for r in records], dtype=float)
    if np.any(d < 1.0):
        raise FitError("all distances must be at least 1 m")
    pl = np.array([measured_path_loss(r) for r in records], dtype=float)
    # loss in excess of the 1 m free space anchor, and the log-distance regressor
    return f, pl - fspl_1m(f), 10.0 * np.log10(d)


def _rms(x: np.ndarray) -> float:
    return math.sqrt(math.fsum(x * x) / x.size)


def fit_ci(records: Sequence[MeasurementRecord]) -> FitResult:
    """MMSE fit of the single-parameter CI model.

    The PLE is the through-the-origin regression slope of excess loss on
    ``10 log10(d)``; sigma is the divide-by-N RMS of the residuals.
    """
    _, excess, x = _design(records)
    sxx = math.fsum(x * x)
    if sxx == 0.0:
        raise FitError("degenerate design: every record is at the 1 m reference distance")
    n = math.fsum(excess * x) / sxx
    if n <= 0:
        raise FitError(f"fitted path loss exponent is not positive ({n:.4g})")
    residuals = excess - n * x
    rmse = _rms(residuals)
    return FitResult(CIParams(n, rmse), residuals, rmse)


def fit_cif(records: Sequence[MeasurementRecord]) -> FitResult:
    """Fit the CIF model with f0 fixed at the weighted center frequency.

    Solves the linear problem ``excess = a x + c x (f - f0) / f0`` and maps
    back to ``n = a``, ``b = c / a``.
    """
    f, excess, x = _design(records)
    if np.unique(f).size < 2:
        raise FitError("CIF needs records from at least two frequency bands")
    f0 = weighted_center_frequency(records)
    design = np.column_stack([x, x * (f - f0) / f0])
    if np.linalg.matrix_rank(design) < 2:
        raise FitError("degenerate design: frequency slope is not identifiable")
    (a, c), *_ = np.linalg.lstsq(design, excess, rcond=None)
    if abs(a) < 1e-9 or a <= 0:
        raise FitError(f"ill-conditioned fit: PLE at f0 is {a:.4g}")
    residuals = excess - design @ np.array([a, c])
    rmse = _rms(residuals)
    return FitResult(CIFParams(float(a), float(c / a), f0, rmse), residuals, rmse)
