"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 calibration failure.
The random seed comes from ``--seed``, else ``$WORKBENCH_SEED``, else a fixed default.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import io as fio
from .fitting import FitError, fit_ci, fit_cif
from .pathloss import (
    BANDS_GHZ,
    Condition,
    MeasurementRecord,
    Mode,
    NotAvailableError,
    ci_path_loss,
    cif_path_loss,
    lookup_params,
    measured_path_loss,
    table_cells,
)
from .pdp import DEFAULT_MTI_NS, DEFAULT_THRESHOLD_DB, channel_stats, ensemble_summary
from .report import build_comparison, render_text
from .synthesis import (
    DEFAULT_SEED,
    Calibration,
    CalibrationError,
    SynthesisConfig,
    build_pdp,
    calibrate_decay,
    simulate_ensemble,
)

log = logging.getLogger("inhchan")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CALIBRATION = 0, 1, 2, 3


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("WORKBENCH_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise DataError(f"WORKBENCH_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        fio.write_atomic(out, text)


# ---------------------------------------------------------------------------
# fit


def cmd_fit(args) -> int:
    path = Path(args.input)
    try:
        records, errors = fio.read_measurements(path)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except fio.SchemaError as exc:
        raise DataError(str(exc)) from None
    for line, msg in errors:
        print(f"{path}:{line}: invalid row: {msg}", file=sys.stderr)
    if errors:
        return EXIT_DATA
    if args.condition:
        records = [r for r in records if r.condition is Condition.parse(args.condition)]
    if args.mode:
        records = [r for r in records if r.mode is Mode.parse(args.mode)]
    if args.band is not None:
        records = [r for r in records if r.f_ghz == args.band]
    try:
        result = fit_cif(records) if args.model == "cif" else fit_ci(records)
    except FitError as exc:
        raise DataError(str(exc)) from None

    out = Path(args.out) if args.out else path.with_name(f"{path.stem}.fit.{args.model}.json")
    payload = result.to_dict()
    text = fio.dumps_json(payload)
    fio.write_atomic(out, text)
    rows = (
        (r.f_ghz, r.d3d_m, measured_path_loss(r), float(res))
        for r, res in zip(records, result.residuals_db)
    )
    fio.write_atomic(out.with_name(f"{out.stem}.residuals.csv"), fio.rows_to_csv(("f_ghz", "d3d_m", "pl_db", "residual_db"), rows))
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# calibrate / simulate


def _cells(args):
    if args.all:
        return [(b, c, m) for m, c in table_cells() for b in BANDS_GHZ]
    if args.band is None or args.condition is None or args.mode is None:
        raise argparse.ArgumentTypeError("give --band, --condition and --mode, or --all")
    return [(args.band, Condition.parse(args.condition), Mode.parse(args.mode))]


def _calibrate(band, condition, mode, seed, n_drops) -> Calibration:
    return calibrate_decay(band, condition, mode, seed=seed, n_drops=n_drops)


def cmd_calibrate(args) -> int:
    seed = _seed(args)
    out_dir = Path(args.calib_dir)
    for band, condition, mode in _cells(args):
        cal = _calibrate(band, condition, mode, seed, args.drops)
        path = out_dir / fio.calibration_filename(band, condition, mode)
        fio.write_json(path, cal.to_dict())
        print(
            f"{path}: scale {cal.scale:.6g}, mean DS {cal.achieved_mu_ds_ns:.3f} ns "
            f"(target {cal.target_mu_ds_ns:.2f} ns)"
        )
    return EXIT_OK


def _load_calibration(calib_dir: Path, band, condition, mode, calibrate: bool, seed: int, n_drops: int) -> Calibration:
    path = calib_dir / fio.calibration_filename(band, condition, mode)
    if path.exists():
        try:
            return Calibration.from_dict(fio.read_json(path))
        except (KeyError, ValueError, TypeError) as exc:
            raise CalibrationError(f"{path}: unreadable calibration ({exc})") from None
    if not calibrate:
        raise CalibrationError(
            f"no calibration file {path}; run `inhchan calibrate --band {band:g} --condition "
            f"{Condition.parse(condition).value} --mode {Mode.parse(mode).value} --calib-dir {calib_dir}` "
            "or pass --calibrate"
        )
    cal = _calibrate(band, condition, mode, seed, n_drops)
    fio.write_json(path, cal.to_dict())
    return cal


def _summary_dict(summary) -> dict:
    return {k: (fio.clean_float(v) if isinstance(v, float) else v) for k, v in summary.to_dict().items()}


def cmd_simulate(args) -> int:
    seed = _seed(args)
    condition, mode = Condition.parse(args.condition), Mode.parse(args.mode)
    cal = _load_calibration(Path(args.calib_dir), args.band, condition, mode, args.calibrate, seed, args.calib_drops)
    config = SynthesisConfig(args.band, condition, mode, decay=cal.decay, seed=seed, snr_margin_db=args.snr_margin)
    batch = simulate_ensemble(config, args.drops, d3d_m=args.distance, workers=args.workers)

    out = Path(args.out_dir)
    meta = {"band_ghz": config.band, "condition": condition.value, "mode": mode.value}
    stats = []
    for i in range(len(batch)):
        truth = batch.drop(i)
        pdp = build_pdp(truth, config.resolution_ns, config.snr_margin_db)
        stem = f"drop_{i:06d}"
        fio.write_pdp(out / f"{stem}.csv", pdp, {**meta, "d3d_m": truth.d3d_m})
        fio.write_json(out / f"{stem}.truth.json", truth.to_dict())
        stats.append(channel_stats(pdp, config.mti_ns, DEFAULT_THRESHOLD_DB))

    summary = {
        "config": {
            **meta,
            "seed": seed,
            "n_drops": args.drops,
            "d3d_m": args.distance,
            "mti_ns": config.mti_ns,
            "resolution_ns": config.resolution_ns,
            "snr_margin_db": config.snr_margin_db,
            "calibration": cal.to_dict(),
        },
        "summary": _summary_dict(ensemble_summary(stats)),
        "truth_summary": _summary_dict(batch.summary()),
    }
    fio.write_json(out / "summary.json", summary)
    s = summary["summary"]
    print(f"{args.drops} drops -> {out}; mean DS {s['mean_ds_ns']:.3f} ns, mean clusters {s['mean_nc']:.3f}, mean MPC/cluster {s['mean_mpc']:.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


STATS_COLUMNS = ("pdp", "rms_ds_ns", "num_clusters", "num_mpcs", "mpcs_per_cluster")


def analyze_dir(pdp_dir: Path, mti_ns: float, threshold_db: float):
    """Stats for every ``*.csv`` with a sidecar; returns (rows, stats, skipped)."""
    files = sorted(p for p in pdp_dir.glob("*.csv") if fio.sidecar_path(p).exists())
    if not files:
        raise DataError(f"{pdp_dir}: no PDP files (CSV with JSON sidecar) found")
    rows, stats, skipped = [], [], []
    for path in files:
        try:
            pdp, _ = fio.read_pdp(path)
        except fio.PDPFormatError as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped.append({"pdp": path.name, "reason": str(exc)})
            continue
        s = channel_stats(pdp, mti_ns, threshold_db)
        stats.append(s)
        if s is None:
            rows.append((path.name, "", "", 0, ""))
        else:
            rows.append((path.name, s.rms_ds_ns, s.num_clusters, s.num_mpcs, " ".join(map(str, s.mpcs_per_cluster))))
    return rows, stats, skipped


def cmd_analyze(args) -> int:
    pdp_dir = Path(args.pdp_dir)
    if not pdp_dir.is_dir():
        raise DataError(f"{pdp_dir}: not a directory")
    rows, stats, skipped = analyze_dir(pdp_dir, args.mti, args.threshold)
    out = Path(args.out_dir) if args.out_dir else pdp_dir
    fio.write_atomic(out / "stats.csv", fio.rows_to_csv(STATS_COLUMNS, rows))
    if stats:
        summary = _summary_dict(ensemble_summary(stats))
    else:
        summary = None
    fio.write_json(
        out / "analysis.json",
        {"mti_ns": args.mti, "threshold_db": args.threshold, "summary": summary, "skipped": skipped},
    )
    absent = sum(s is None for s in stats)
    print(f"analyzed {len(stats)} PDPs ({absent} without MPCs, {len(skipped)} skipped) -> {out}")
    return EXIT_OK if stats else EXIT_DATA


# ---------------------------------------------------------------------------
# compare-3gpp


def _simulated_columns(condition: Condition, n_drops: int, seed: int, calib_dir: Optional[Path]):
    sim = {}
    for band in BANDS_GHZ:
        if calib_dir is not None:
            cal = _load_calibration(calib_dir, band, condition, Mode.OMNI, True, seed, 10_000)
        else:
            cal = _calibrate(band, condition, Mode.OMNI, seed, 10_000)
        config = SynthesisConfig(band, condition, Mode.OMNI, decay=cal.decay, seed=seed)
        batch = simulate_ensemble(config, n_drops)
        records = [
            MeasurementRecord(band, float(d), 0.0, 0.0, 0.0, -float(pl), 0.0, condition, Mode.OMNI)
            for d, pl in zip(batch.d3d_m, batch.path_loss_db)
        ]
        ci = fit_ci(records).to_dict() if len(records) >= 2 else None
        sim[band] = (batch.summary(), ci)
    return sim


def cmd_compare(args) -> int:
    condition = Condition.parse(args.condition)
    seed = _seed(args)
    sim = None
    if args.sim_drops:
        sim = _simulated_columns(condition, args.sim_drops, seed, Path(args.calib_dir) if args.calib_dir else None)
    report = build_comparison(condition, sim)
    text = render_text(report)
    data = report.to_dict()
    if args.out_dir:
        out = Path(args.out_dir)
        fio.write_atomic(out / f"compare-3gpp.{condition.value}.txt", text)
        fio.write_json(out / f"compare-3gpp.{condition.value}.json", data)
    sys.stdout.write(fio.dumps_json(data) if args.json else text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# plotdata


def pathloss_series(condition: Condition, mode: Mode, records: List[MeasurementRecord], points: int = 40):
    """Rows of (series, f_ghz, d3d_m, pl_db) for multi-band CI/CIF curves and measured scatter."""
    ci = lookup_params(28.0, condition, mode, "CI", "multi")
    cif = lookup_params(28.0, condition, mode, "CIF", "multi")
    distances = np.logspace(0.0, np.log10(40.0), points)
    rows = []
    for band in BANDS_GHZ:
        rows += [("CI", band, float(d), float(ci_path_loss(ci, band, d))) for d in distances]
        rows += [("CIF", band, float(d), float(cif_path_loss(cif, band, d))) for d in distances]
    for r in records:
        if r.condition is condition:
            rows.append(("measured", r.f_ghz, r.d3d_m, measured_path_loss(r)))
    return rows


def ds_cdf_series(ds_ns) -> List[tuple]:
    ds = np.sort(np.asarray(ds_ns, dtype=float))
    n = ds.size
    return [("rms_ds_cdf", float(x), (i + 1) / n) for i, x in enumerate(ds)]


def cmd_plotdata(args) -> int:
    out = Path(args.out) if args.out else None
    if args.kind == "pathloss":
        condition = Condition.parse(args.condition or "LOS")
        mode = Mode.parse(args.mode or "omni")
        records = []
        if args.measurements:
            records, errors = fio.read_measurements(args.measurements)
            if errors:
                raise DataError(f"{args.measurements}: {len(errors)} invalid row(s)")
        rows = pathloss_series(condition, mode, records)
        _emit(fio.rows_to_csv(("series", "f_ghz", "d3d_m", "pl_db"), rows), out)
        return EXIT_OK

    # ds_cdf
    if args.pdp_dir:
        _, stats, _ = analyze_dir(Path(args.pdp_dir), args.mti, args.threshold)
        ds = [s.rms_ds_ns for s in stats if s is not None]
    elif args.sim_drops:
        if args.band is None or args.condition is None or args.mode is None:
            raise DataError("--sim-drops needs --band, --condition and --mode")
        seed = _seed(args)
        condition, mode = Condition.parse(args.condition), Mode.parse(args.mode)
        if args.calib_dir:
            cal = _load_calibration(Path(args.calib_dir), args.band, condition, mode, True, seed, 10_000)
        else:
            cal = _calibrate(args.band, condition, mode, seed, 10_000)
        config = SynthesisConfig(args.band, condition, mode, decay=cal.decay, seed=seed)
        ds = simulate_ensemble(config, args.sim_drops).rms_ds_ns
    else:
        ds = []
    rows = ds_cdf_series(ds)
    _emit(fio.rows_to_csv(("series", "rms_ds_ns", "cdf"), rows), out)
    if len(ds):
        print(f"p90 RMS DS: {np.percentile(ds, 90):.3f} ns over {len(ds)} drops", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inhchan", description="Indoor mmWave / sub-THz channel workbench")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def seeded(p):
        p.add_argument("--seed", type=int, default=None, help="overrides $WORKBENCH_SEED")

    def band_arg(p, required=False):
        p.add_argument("--band", type=float, choices=BANDS_GHZ, required=required)

    p = sub.add_parser("fit", help="fit CI or CIF parameters to a measurement CSV")
    p.add_argument("input")
    p.add_argument("--model", choices=("ci", "cif"), default="ci")
    p.add_argument("--condition")
    p.add_argument("--mode")
    band_arg(p)
    p.add_argument("--out", help="fit JSON path (residuals CSV is written next to it)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("calibrate", help="calibrate decay constants to the published mean DS")
    band_arg(p)
    p.add_argument("--condition")
    p.add_argument("--mode")
    p.add_argument("--all", action="store_true", help="every published cell")
    p.add_argument("--drops", type=int, default=10_000)
    p.add_argument("--calib-dir", default="calibration")
    seeded(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="generate drops and an ensemble summary")
    band_arg(p, required=True)
    p.add_argument("--condition", required=True)
    p.add_argument("--mode", required=True)
    p.add_argument("--drops", type=int, default=1000)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--calib-dir", default="calibration")
    p.add_argument("--calibrate", action="store_true", help="calibrate if no calibration file exists")
    p.add_argument("--calib-drops", type=int, default=10_000)
    p.add_argument("--distance", type=float, default=None, help="fixed 3D distance [m]; default log-uniform 3.9-40 m")
    p.add_argument("--snr-margin", type=float, default=10.0, help="noise floor below the weakest MPC [dB]")
    p.add_argument("--workers", type=int, default=1)
    seeded(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="per-PDP statistics for a directory of PDP files")
    p.add_argument("pdp_dir")
    p.add_argument("--mti", type=float, default=DEFAULT_MTI_NS)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD_DB)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare-3gpp", help="NYU vs 3GPP InH-Office omnidirectional comparison")
    p.add_argument("--condition", required=True, choices=("LOS", "NLOS"))
    p.add_argument("--sim-drops", type=int, default=0, help="add simulated columns from this many drops per band")
    p.add_argument("--calib-dir")
    p.add_argument("--out-dir")
    p.add_argument("--json", action="store_true", help="print JSON instead of the text table")
    seeded(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plotdata", help="CSV series for external plotting")
    p.add_argument("kind", choices=("pathloss", "ds_cdf"))
    band_arg(p)
    p.add_argument("--condition")
    p.add_argument("--mode")
    p.add_argument("--measurements", help="measurement CSV for path loss scatter")
    p.add_argument("--pdp-dir", help="PDP directory for the DS CDF")
    p.add_argument("--sim-drops", type=int, default=0)
    p.add_argument("--calib-dir")
    p.add_argument("--mti", type=float, default=DEFAULT_MTI_NS)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD_DB)
    p.add_argument("--out")
    seeded(p)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"inhchan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CalibrationError as exc:
        print(f"inhchan: calibration error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (DataError, NotAvailableError, ValueError) as exc:
        print(f"inhchan: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
