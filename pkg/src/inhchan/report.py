"""Side-by-side comparison of the omnidirectional office statistics with 3GPP InH-Office."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

from .pathloss import BANDS_GHZ, Condition, Mode, NotAvailableError, channel_targets, lookup_params, three_gpp_reference
from .pdp import EnsembleSummary

# (key, label) in table order
METRICS = (
    ("ci_n", "single-band CI n"),
    ("ci_sigma_db", "single-band CI sigma [dB]"),
    ("multi_ci_n", "multi-band CI n"),
    ("multi_ci_sigma_db", "multi-band CI sigma [dB]"),
    ("cif_n", "multi-band CIF n"),
    ("cif_b", "multi-band CIF b"),
    ("cif_sigma_db", "multi-band CIF sigma [dB]"),
    ("min_ds_ns", "min DS [ns]"),
    ("max_ds_ns", "max DS [ns]"),
    ("mu_ds_ns", "mean DS [ns]"),
    ("mu_nc", "mean clusters"),
    ("sigma_nc", "std clusters"),
    ("mu_mpc", "mean MPC/cluster"),
    ("sigma_mpc", "std MPC/cluster"),
)
METRIC_KEYS = tuple(k for k, _ in METRICS)


@dataclass(frozen=True)
class ComparisonRow:
    source: str  # "NYU" | "3GPP" | "simulated" | "delta"
    band_ghz: float
    values: Dict[str, Optional[float]]

    def to_dict(self) -> dict:
        return {"source": self.source, "band_ghz": self.band_ghz, **self.values}


@dataclass(frozen=True)
class ComparisonReport:
    condition: Condition
    rows: List[ComparisonRow]

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "mode": Mode.OMNI.value,
            "delta": "NYU - 3GPP",
            "rows": [r.to_dict() for r in self.rows],
        }

    def row(self, source: str, band: float) -> ComparisonRow:
        for r in self.rows:
            if r.source == source and r.band_ghz == float(band):
                return r
        raise KeyError((source, band))


def _nyu(band: float, condition: Condition) -> Dict[str, Optional[float]]:
    ci = lookup_params(band, condition, Mode.OMNI, "CI", "single")
    multi = lookup_params(band, condition, Mode.OMNI, "CI", "multi")
    cif = lookup_params(band, condition, Mode.OMNI, "CIF", "multi")
    t = channel_targets(band, condition, Mode.OMNI)
    return {
        "ci_n": ci.n,
        "ci_sigma_db": ci.sigma_db,
        "multi_ci_n": multi.n,
        "multi_ci_sigma_db": multi.sigma_db,
        "cif_n": cif.n,
        "cif_b": cif.b,
        "cif_sigma_db": cif.sigma_db,
        "min_ds_ns": t.min_ds_ns,
        "max_ds_ns": t.max_ds_ns,
        "mu_ds_ns": t.mu_ds_ns,
        "mu_nc": t.mu_nc,
        "sigma_nc": t.sigma_nc,
        "mu_mpc": t.mu_mpc,
        "sigma_mpc": t.sigma_mpc,
    }


def _three_gpp(band: float, condition: Condition) -> Dict[str, Optional[float]]:
    values: Dict[str, Optional[float]] = dict.fromkeys(METRIC_KEYS)
    ref = three_gpp_reference(condition)
    if band not in ref.mu_ds_ns:
        return values
    values.update(
        multi_ci_n=ref.n,
        multi_ci_sigma_db=ref.sigma_db,
        mu_ds_ns=ref.mu_ds_ns[band],
        mu_nc=float(ref.num_clusters),
        mu_mpc=float(ref.mpcs_per_cluster),
    )
    return values


def _simulated(summary: EnsembleSummary, ci_fit: Optional[dict]) -> Dict[str, Optional[float]]:
    values: Dict[str, Optional[float]] = dict.fromkeys(METRIC_KEYS)
    if ci_fit is not None:
        values.update(ci_n=ci_fit["n"], ci_sigma_db=ci_fit["sigma_db"])
    values.update(
        min_ds_ns=summary.min_ds_ns,
        max_ds_ns=summary.max_ds_ns,
        mu_ds_ns=summary.mean_ds_ns,
        mu_nc=summary.mean_nc,
        sigma_nc=summary.std_nc,
        mu_mpc=summary.mean_mpc,
        sigma_mpc=summary.std_mpc,
    )
    return values


def _delta(a: Dict, b: Dict) -> Dict[str, Optional[float]]:
    return {k: (None if a[k] is None or b[k] is None else round(a[k] - b[k], 10)) for k in METRIC_KEYS}


def build_comparison(condition, simulated: Optional[Dict[float, tuple]] = None) -> ComparisonReport:
    """Rows for every band: NYU, 3GPP, NYU - 3GPP and, when given, simulated.

    ``simulated`` maps band to ``(EnsembleSummary, ci_fit_dict_or_None)``.
    """
    condition = Condition.parse(condition)
    if condition is Condition.NLOS_BEST:
        raise NotAvailableError("the 3GPP comparison exists only for LOS and NLOS")
    rows: List[ComparisonRow] = []
    for band in BANDS_GHZ:
        nyu, gpp = _nyu(band, condition), _three_gpp(band, condition)
        rows.append(ComparisonRow("NYU", band, nyu))
        rows.append(ComparisonRow("3GPP", band, gpp))
        rows.append(ComparisonRow("delta", band, _delta(nyu, gpp)))
        if simulated and band in simulated:
            rows.append(ComparisonRow("simulated", band, _simulated(*simulated[band])))
    return ComparisonReport(condition, rows)


def _cell(x: Optional[float]) -> str:
    return "N/A" if x is None else f"{x:.2f}"


def render_text(report: ComparisonReport) -> str:
    """Fixed-width ASCII table: one line per metric, one column per (source, band)."""
    sources = ["NYU", "3GPP", "delta"]
    if any(r.source == "simulated" for r in report.rows):
        sources.append("simulated")
    columns = [(s, b) for s in sources for b in BANDS_GHZ]
    headers = [f"{s}_{b:g}GHz" for s, b in columns]
    label_w = max(len(label) for _, label in METRICS)
    col_w = max(10, max(len(h) for h in headers))
    lines = [
        f"# omnidirectional InH-Office {report.condition.value}: NYU vs 3GPP (delta = NYU - 3GPP)",
        "metric".ljust(label_w) + "".join(h.rjust(col_w + 2) for h in headers),
    ]
    for key, label in METRICS:
        cells = [_cell(report.row(s, b).values[key]) for s, b in columns]
        lines.append(label.ljust(label_w) + "".join(c.rjust(col_w + 2) for c in cells))
    return "\n".join(lines) + "\n"
