"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line in the
terminal summary (see conftest.py).  Run alone with

    pytest tests/test_acceptance.py -v
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from inhchan import io as fio
from inhchan.cli import main
from inhchan.fitting import fit_ci, fit_cif, weighted_center_frequency
from inhchan.pathloss import (
    CIFParams,
    CIParams,
    MeasurementRecord,
    ci_path_loss,
    cif_path_loss,
    excess_loss,
    fspl_1m,
    lookup_params,
    table_cells,
)
from inhchan.pdp import (
    DirectionalPDP,
    MultipathComponent,
    PowerDelayProfile,
    detect_mpcs,
    estimate_noise_floor,
    partition_clusters,
    rms_delay_spread,
    synthesize_omni,
)
from inhchan.synthesis import DEFAULT_SEED, SynthesisConfig, calibrate_decay, simulate_ensemble

GOLDEN = Path(__file__).parent / "golden"
BANDS = (28.0, 73.0, 142.0)


def _records(f, d, pl):
    return [MeasurementRecord(float(fi), float(di), 0.0, 0.0, 0.0, -float(p)) for fi, di, p in zip(f, d, pl)]


# ---------------------------------------------------------------------------


def test_criterion_1_fspl_constants(criterion):
    rec = criterion(1, "FSPL constants at 1/28/73/142 GHz within 0.01 dB")
    for f, expected in ((1.0, 32.40), (28.0, 61.34), (73.0, 69.67), (142.0, 75.45)):
        got = fspl_1m(f)
        rec.check(abs(got - expected) <= 0.01, f"fspl_1m({f}) = {got:.4f}, expected {expected}")
    rec.finish()


def test_criterion_2_cif_degeneracy(criterion):
    rec = criterion(2, "CIF reduces to CI for b=0 and at f=f0 (1e-9 dB, 10^4 samples)")
    rng = np.random.default_rng(2)
    f = rng.uniform(1.0, 300.0, 10_000)
    d = np.exp(rng.uniform(0.0, np.log(1000.0), 10_000))
    n = rng.uniform(0.5, 6.0, 10_000)
    b = rng.uniform(-1.0, 1.0, 10_000)
    f0 = rng.uniform(1.0, 300.0, 10_000)
    err_b0 = max(abs(cif_path_loss(CIFParams(ni, 0.0, 81.0), fi, di) - ci_path_loss(CIParams(ni), fi, di)) for ni, fi, di in zip(n, f, d))
    err_f0 = max(abs(cif_path_loss(CIFParams(ni, bi, f0i), f0i, di) - ci_path_loss(CIParams(ni), f0i, di)) for ni, bi, f0i, di in zip(n, b, f0, d))
    rec.check(err_b0 <= 1e-9, f"b=0 max error {err_b0:.3e} dB")
    rec.check(err_f0 <= 1e-9, f"f=f0 max error {err_f0:.3e} dB")
    rec.finish()


def test_criterion_3_fit_recovery(criterion):
    rec = criterion(3, "CI/CIF fit recovery on 10^4 synthetic records per cell")
    rng = np.random.default_rng(3)
    cells = [(b, c, m) for m, c in table_cells() for b in BANDS]
    assert len(cells) == 15
    for band, cond, mode in cells:
        p = lookup_params(band, cond, mode, "CI", "single")
        d = np.exp(rng.uniform(np.log(2.0), np.log(40.0), 10_000))
        pl = ci_path_loss(p, band, d) + rng.normal(0.0, p.sigma_db, d.size)
        fit = fit_ci(_records(np.full(d.size, band), d, pl)).params
        key = f"{band:g} {cond.value} {mode.value}"
        rec.check(abs(fit.n - p.n) <= 0.05, f"{key}: n {fit.n:.3f} vs {p.n}")
        rec.check(abs(fit.sigma_db - p.sigma_db) <= 0.2, f"{key}: sigma {fit.sigma_db:.3f} vs {p.sigma_db}")
    for cond in ("LOS", "NLOS"):
        p = lookup_params(28, cond, "omni", "CIF", "multi")
        f = np.repeat(BANDS, [3334, 3333, 3333])
        d = np.exp(rng.uniform(np.log(2.0), np.log(40.0), f.size))
        pl = cif_path_loss(p, f, d) + rng.normal(0.0, p.sigma_db, f.size)
        fit = fit_cif(_records(f, d, pl)).params
        rec.check(abs(fit.n - p.n) <= 0.05, f"CIF {cond}: n {fit.n:.3f} vs {p.n}")
        rec.check(abs(fit.b - p.b) <= 0.05, f"CIF {cond}: b {fit.b:.3f} vs {p.b}")
    rec.finish()


def test_criterion_4_weighted_f0(criterion):
    rec = criterion(4, "equal-count records at 28/73/142 GHz give f0 = 81 GHz exactly")
    recs = _records(np.repeat(BANDS, 7), np.full(21, 5.0), np.full(21, 80.0))
    f0 = weighted_center_frequency(recs)
    rec.check(f0 == 81.0, f"f0 = {f0!r}")
    rec.finish()


def test_criterion_5_excess_loss_claims(criterion):
    rec = criterion(5, "directional LOS excess-loss deltas and omni-vs-directional deltas (0.05 dB)")
    n = {b: lookup_params(b, "LOS", "Directional").n for b in BANDS}
    expected = {(73.0, 10): 4.2, (73.0, 40): 6.7, (28.0, 10): 1.5, (28.0, 40): 2.4}
    for (other, d), want in expected.items():
        got = excess_loss(n[142.0], d) - excess_loss(n[other], d)
        rec.check(abs(got - want) <= 0.05, f"142 vs {other:g} GHz at {d} m: {got:.3f} dB, expected {want}")
        lo, hi = (1.5, 4.2) if d == 10 else (2.4, 6.7)
        rec.check(lo - 0.05 <= got <= hi + 0.05, f"{got:.3f} dB outside [{lo}, {hi}]")
    omni = lookup_params(142, "LOS", "omni").n
    for d, want in ((10, 3.1), (40, 5.0)):
        got = excess_loss(n[142.0], d) - excess_loss(omni, d)
        rec.check(abs(got - want) <= 0.05, f"omni vs directional at {d} m: {got:.3f} dB, expected {want}")
    rec.finish()


# Omnidirectional table, transcribed independently of the package registry:
# per band 28/73/142: (CI n, CI sigma, min DS, max DS, mu DS, mu NC, sigma NC, mu MPC, sigma MPC)
OMNI_TABLE = {
    "LOS": {
        "multi": (1.42, 3.71, 1.42, 0.29, 2.94),
        28.0: (1.17, 2.72, 0.70, 134.40, 10.80, 4.60, 1.94, 4.70, 3.65),
        73.0: (1.36, 2.30, 0.60, 101.90, 6.24, 2.76, 2.32, 3.43, 2.86),
        142.0: (1.74, 3.62, 0.71, 11.94, 3.00, 1.90, 1.30, 2.40, 2.20),
        "3gpp": (1.73, 3.00, {28.0: 20.40, 73.0: 20.21}, 15, 20),
    },
    "NLOS": {
        "multi": (2.66, 7.82, 2.66, 0.11, 7.53),
        28.0: (2.37, 7.22, 0.60, 198.50, 17.10, 5.40, 1.96, 6.40, 4.58),
        73.0: (2.81, 8.71, 0.50, 142.00, 12.30, 3.20, 1.70, 3.20, 5.20),
        142.0: (2.83, 6.07, 0.60, 60.87, 9.20, 2.80, 1.65, 2.20, 2.47),
        "3gpp": (3.19, 8.29, {28.0: 27.40, 73.0: 21.52}, 19, 20),
    },
}
ROW_KEYS = ("ci_n", "ci_sigma_db", "min_ds_ns", "max_ds_ns", "mu_ds_ns", "mu_nc", "sigma_nc", "mu_mpc", "sigma_mpc")
MULTI_KEYS = ("multi_ci_n", "multi_ci_sigma_db", "cif_n", "cif_b", "cif_sigma_db")


def test_criterion_6_table_reproduction(criterion, tmp_path, monkeypatch, capsys):
    rec = criterion(6, "compare-3gpp golden files reproduce every printed omni/3GPP cell")
    monkeypatch.chdir(tmp_path)
    for cond, table in OMNI_TABLE.items():
        rec.check(main(["compare-3gpp", "--condition", cond, "--out-dir", "out"]) == 0, f"{cond}: nonzero exit")
        capsys.readouterr()
        for ext in ("txt", "json"):
            produced = (tmp_path / "out" / f"compare-3gpp.{cond}.{ext}").read_bytes()
            rec.check(produced == (GOLDEN / f"compare-3gpp.{cond}.{ext}").read_bytes(), f"{cond}.{ext} differs from golden")
        rows = {(r["source"], r["band_ghz"]): r for r in json.loads((GOLDEN / f"compare-3gpp.{cond}.json").read_text())["rows"]}
        gn, gs, gds, gnc, gmpc = table["3gpp"]
        for band in BANDS:
            nyu = rows[("NYU", band)]
            for key, want in zip(ROW_KEYS, table[band]):
                rec.check(nyu[key] == want, f"{cond} NYU {band:g} {key}: {nyu[key]} vs {want}")
            for key, want in zip(MULTI_KEYS, table["multi"]):
                rec.check(nyu[key] == want, f"{cond} NYU {band:g} {key}: {nyu[key]} vs {want}")
            gpp, delta = rows[("3GPP", band)], rows[("delta", band)]
            if band == 142.0:
                rec.check(all(gpp[k] is None for k in ROW_KEYS + MULTI_KEYS), f"{cond} 3GPP 142 GHz should be N/A")
                continue
            got = (gpp["multi_ci_n"], gpp["multi_ci_sigma_db"], gpp["mu_ds_ns"], gpp["mu_nc"], gpp["mu_mpc"])
            want = (gn, gs, gds[band], gnc, gmpc)
            rec.check(got == want, f"{cond} 3GPP {band:g}: {got} vs {want}")
            for key in ("multi_ci_n", "mu_ds_ns", "mu_nc", "mu_mpc"):
                rec.check(abs(delta[key] - (nyu[key] - gpp[key])) < 1e-9, f"{cond} delta {band:g} {key}")
        text = (GOLDEN / f"compare-3gpp.{cond}.txt").read_text()
        rec.check("N/A" in text, f"{cond}: text table lacks N/A cells")
    rows = {(r["source"], r["band_ghz"]): r for r in json.loads((GOLDEN / "compare-3gpp.LOS.json").read_text())["rows"]}
    rec.check(abs(rows[("delta", 28.0)]["mu_ds_ns"] + 9.60) < 1e-9, "LOS 28 GHz DS delta should be -9.60 ns")
    rec.finish()


def test_criterion_7_synthesis_ensembles(criterion):
    rec = criterion(7, "10^5-drop ensembles match NC 3%, MPC 5%, DS 10% for all 15 cells; DS decreasing in frequency")
    means = {}
    for mode, cond in table_cells():
        for band in BANDS:
            cal = calibrate_decay(band, cond, mode, seed=DEFAULT_SEED)
            config = SynthesisConfig(band, cond, mode, decay=cal.decay, seed=DEFAULT_SEED)
            s = simulate_ensemble(config, 100_000).summary()
            t = config.targets
            key = f"{band:g} {cond.value} {mode.value}"
            rec.check(abs(s.mean_nc / t.mu_nc - 1) <= 0.03, f"{key}: mean NC {s.mean_nc:.3f} vs {t.mu_nc}")
            rec.check(abs(s.mean_mpc / t.mu_mpc - 1) <= 0.05, f"{key}: mean MPC {s.mean_mpc:.3f} vs {t.mu_mpc}")
            rec.check(abs(s.mean_ds_ns / t.mu_ds_ns - 1) <= 0.10, f"{key}: mean DS {s.mean_ds_ns:.3f} vs {t.mu_ds_ns}")
            means[(mode, cond, band)] = s.mean_ds_ns
    for mode, cond in table_cells():
        seq = [means[(mode, cond, b)] for b in BANDS]
        rec.check(seq[0] > seq[1] > seq[2], f"{cond.value} {mode.value}: DS not decreasing {seq}")
    rec.finish()


def _random_pdp(rng):
    res = rng.choice([2.0, 2.5])
    oversample = int(rng.choice([1, 2]))
    n = int(rng.integers(8, 120))
    powers = rng.uniform(-100.0, -40.0, n)
    return PowerDelayProfile(np.arange(n) * res / oversample, powers, res)


def test_criterion_8_structural_properties(criterion):
    rec = criterion(8, "structural property suite over 10^4 randomized PDPs")
    rng = np.random.default_rng(8)
    for trial in range(10_000):
        pdp = _random_pdp(rng)
        floor = estimate_noise_floor(pdp)
        mpcs = detect_mpcs(pdp)
        for m in mpcs:
            if not rec.check(m.power_dbm >= floor + 5.0, f"trial {trial}: MPC below floor + threshold"):
                break
        gaps = np.diff([m.delay_ns for m in mpcs])
        rec.check(np.all(gaps > pdp.resolution_ns), f"trial {trial}: MPCs within one resolution")

        # clustering on random delay sets
        delays = np.sort(rng.uniform(0.0, 200.0, int(rng.integers(1, 40))))
        comps = [MultipathComponent(float(t), 0.0) for t in delays]
        clusters = partition_clusters(comps, 6.0)
        rec.check([m for c in clusters for m in c.mpcs] == comps, f"trial {trial}: clusters do not concatenate back")
        for c in clusters:
            rec.check(np.all(np.diff(c.delays_ns) <= 6.0), f"trial {trial}: intra-cluster gap > MTI")
        for a, b in zip(clusters, clusters[1:]):
            rec.check(b.delays_ns[0] - a.delays_ns[-1] > 6.0, f"trial {trial}: inter-cluster gap <= MTI")

        # delay-spread invariances
        taps = [MultipathComponent(float(t), float(p)) for t, p in zip(delays, rng.uniform(-110, -30, delays.size))]
        ds = rms_delay_spread(taps)
        shift, gain = rng.uniform(-100, 100), rng.uniform(-50, 50)
        ds_shift = rms_delay_spread([MultipathComponent(m.delay_ns + shift, m.power_dbm) for m in taps])
        ds_gain = rms_delay_spread([MultipathComponent(m.delay_ns, m.power_dbm + gain) for m in taps])
        rec.check(math.isclose(ds, ds_shift, rel_tol=1e-6, abs_tol=1e-6), f"trial {trial}: DS not translation invariant")
        rec.check(math.isclose(ds, ds_gain, rel_tol=1e-9, abs_tol=1e-9), f"trial {trial}: DS not power-scale invariant")

        # omni synthesis against a brute-force sum
        k = int(rng.integers(1, 5))
        dirs, oracle = [], {}
        for j in range(k):
            m = int(rng.integers(1, 10))
            start = int(rng.integers(0, 6))
            p = rng.uniform(-120, -30, m)
            gt, gr = rng.uniform(0, 27, 2)
            dirs.append(DirectionalPDP(30.0 * j, 0.0, gt, gr, PowerDelayProfile((start + np.arange(m)) * 2.0, p, 2.0)))
            for i, v in enumerate(p):
                oracle[start + i] = oracle.get(start + i, 0.0) + 10 ** ((v - gt - gr) / 10)
        out = synthesize_omni(dirs)
        lin = dict(zip(np.rint(out.delays_ns / 2.0).astype(int).tolist(), 10 ** (out.powers_dbm / 10)))
        ok = all(math.isclose(lin.get(b, 0.0), oracle.get(b, 0.0), rel_tol=1e-9, abs_tol=1e-300) for b in set(lin) | set(oracle))
        rec.check(ok, f"trial {trial}: omni synthesis differs from linear-sum oracle")
    rec.finish()


def _tree(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_9_determinism(criterion, tmp_path, monkeypatch, capsys):
    rec = criterion(9, "repeated and parallel simulate runs give byte-identical trees")
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("WORKBENCH_SEED", raising=False)
    base = ["simulate", "--band", "73", "--condition", "NLOS", "--mode", "omni", "--drops", "2500", "--seed", "42", "--calibrate"]
    codes = [
        main(base + ["--out-dir", "run1"]),
        main(base + ["--out-dir", "run2"]),
        main(base + ["--out-dir", "run3", "--workers", "3"]),
    ]
    capsys.readouterr()
    rec.check(codes == [0, 0, 0], f"exit codes {codes}")
    t1, t2, t3 = (_tree(tmp_path / f"run{i}") for i in (1, 2, 3))
    rec.check(len(t1) == 3 * 2500 + 1, f"{len(t1)} files written")
    rec.check(t1 == t2, "repeated serial runs differ")
    rec.check(t1 == t3, "parallel run differs from serial run")
    rec.finish()
