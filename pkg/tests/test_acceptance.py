"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``; the lines are also collected into an
"acceptance" section of the terminal summary.
"""

import math
import subprocess
import sys
import time

import mpmath
import numpy as np
import pytest
from scipy import stats

from udnsim.channel import RadioConfig, beam_grid, beamspace_transform, pathloss_db, steering_vector
from udnsim.engine import SweepConfig, run_sweep, simulate_trial
from udnsim.schemes import NetworkState, Scheme, SchemeConfig, network_rates, noma_ul_rates
from udnsim.topology import SectorGeometry, sample_sbs_positions

SWEEP_TRIALS = 500
RUNTIME_BUDGET_S = 600.0


@pytest.fixture(scope="module")
def sweep():
    cfg = SweepConfig(trials=SWEEP_TRIALS)
    t0 = time.perf_counter()
    result = run_sweep(cfg)
    return cfg, result, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_1_scheme_ordering(sweep, report):
    cfg, res, elapsed = sweep
    ordered = all(
        res.row(d, "NOMA_FD").mean >= res.row(d, "NOMA_HD").mean >= res.row(d, "OMA_HD").mean
        for d in cfg.densities
    )
    mid = [d for d in cfg.densities if 50 <= d <= 400]
    disjoint = all(res.row(d, "NOMA_FD").ci95_low > res.row(d, "OMA_HD").ci95_high for d in mid)
    ok = ordered and disjoint and elapsed <= RUNTIME_BUDGET_S
    detail = (f"ordered={ordered} disjoint_mid_ci={disjoint} "
              f"trials={cfg.trials} runtime={elapsed:.0f}s")
    assert report(1, "NOMA-FD >= NOMA-HD >= OMA-HD at every density", ok, detail)


@pytest.mark.slow
def test_criterion_2_saturation(sweep, report):
    cfg, res, _ = sweep
    gains = {}
    for s in ("OMA_HD", "NOMA_HD", "NOMA_FD"):
        m = {d: res.row(d, s).mean for d in (10.0, 25.0, 700.0, 1000.0)}
        gains[s] = ((m[25.0] - m[10.0]) / m[10.0], (m[1000.0] - m[700.0]) / m[700.0])
    ok = cfg.trials >= 500 and all(last < first for first, last in gains.values())
    detail = " ".join(f"{s}:{f:.3f}>{l:.3f}" for s, (f, l) in gains.items())
    assert report(2, "last-step relative gain below first-step gain", ok, detail)


@pytest.mark.slow
def test_low_density_rise(sweep):
    cfg, res, _ = sweep
    d0, d1 = cfg.densities[:2]
    for s in ("OMA_HD", "NOMA_HD", "NOMA_FD"):
        assert res.row(d1, s).ci95_low > res.row(d0, s).ci95_high, s


def test_criterion_3_pathloss_oracle(report):
    mpmath.mp.dps = 50
    fc, c = mpmath.mpf(28) * 10**9, mpmath.mpf(299792458)
    fspl_1m = 20 * mpmath.log10(4 * mpmath.pi * fc / c)
    worst = 0.0
    for d in (1, 10, 100, 500):
        for los, exponent in ((True, mpmath.mpf("2.01")), (False, mpmath.mpf("3.4"))):
            expected = fspl_1m + 10 * exponent * mpmath.log10(d)
            worst = max(worst, abs(float(pathloss_db(float(d), los) - expected)))
    assert report(3, "path loss vs 50-digit closed form", worst <= 1e-10, f"max_err={worst:.2e} dB")


def test_criterion_4_sic_identity(report):
    rng = np.random.default_rng(404)
    n = 10_000
    # Wide dynamic range: powers spanning 12 decades.
    s = 10.0 ** rng.uniform(-16, -4, size=(n, 2))
    intf = 10.0 ** rng.uniform(-16, -8, size=n)
    si = 10.0 ** rng.uniform(-16, -10, size=n)
    noise = 10.0 ** rng.uniform(-15, -12, size=n)
    bw = 10.0 ** rng.uniform(6, 9, size=n)
    rates = noma_ul_rates(s, intf, si, noise, bw[:, None])
    total = rates.sum(axis=1)
    mpmath.mp.dps = 40
    rel = 0.0
    for k in range(n):
        signal = mpmath.mpf(s[k, 0]) + mpmath.mpf(s[k, 1])
        floor = mpmath.mpf(intf[k]) + mpmath.mpf(si[k]) + mpmath.mpf(noise[k])
        cap = mpmath.mpf(bw[k]) * mpmath.log1p(signal / floor) / mpmath.log(2)
        rel = max(rel, float(abs(total[k] - cap) / cap))
    assert report(4, "UL SIC sum rate equals sum capacity", rel <= 1e-9, f"max_rel={rel:.2e} n={n}")


def test_criterion_5_fd_degeneracy(report):
    radio = RadioConfig(p_user=-math.inf, residual_si=-math.inf)
    cfg = SweepConfig(densities=(300.0,), trials=100, radio=radio,
                      schemes=(SchemeConfig(Scheme.NOMA_HD), SchemeConfig(Scheme.NOMA_FD)))
    mismatches = cells = 0
    for t in range(100):
        _, state, rates = simulate_trial(cfg, 300.0, t)
        cells += state.n_cells
        dl_hd, _ = rates["NOMA_HD"]
        dl_fd, ul_fd = rates["NOMA_FD"]
        per_cell_fd = dl_fd.sum(axis=1) + ul_fd.sum(axis=1)
        if dl_hd.tobytes() != dl_fd.tobytes() or per_cell_fd.tobytes() != dl_hd.sum(axis=1).tobytes():
            mismatches += 1
    ok = mismatches == 0 and cells > 0
    assert report(5, "FD with silent UL equals HD bit for bit", ok,
                  f"topologies=100 cells={cells} mismatches={mismatches}")


def test_criterion_6_beamspace_unitarity(report):
    rng = np.random.default_rng(606)
    n = 64
    h = rng.standard_normal((1000, n)) + 1j * rng.standard_normal((1000, n))
    b = beamspace_transform(h)
    norm_err = float(np.max(np.abs(np.linalg.norm(b, axis=1) / np.linalg.norm(h, axis=1) - 1)))
    onehot_err = 0.0
    for m, psi in enumerate(beam_grid(n)):
        bm = beamspace_transform(steering_vector(n, math.asin(psi)))
        target = np.zeros(n)
        target[m] = 1.0
        onehot_err = max(onehot_err, float(np.max(np.abs(np.abs(bm) - target))))
    ok = norm_err <= 1e-10 and onehot_err <= 1e-10
    assert report(6, "beamspace transform is unitary and on-grid beams are one-hot", ok,
                  f"norm_err={norm_err:.1e} onehot_err={onehot_err:.1e}")


def test_criterion_7_ppp_statistics(report):
    geom = SectorGeometry()
    rng = np.random.default_rng(707)
    draws = 10_000
    mean = 50 * geom.area_km2()
    counts = np.array([len(sample_sbs_positions(50.0, geom, rng)) for _ in range(draws)])
    se = math.sqrt(mean / draws)
    z = abs(counts.mean() - mean) / se
    top = 14  # pool the tail so every expected bin count is >= 5
    observed = np.append(np.bincount(np.minimum(counts, top), minlength=top + 1)[:top],
                         np.sum(counts >= top))
    pmf = stats.poisson.pmf(np.arange(top), mean)
    expected = np.append(pmf, stats.poisson.sf(top - 1, mean)) * draws
    p = stats.chisquare(observed, expected).pvalue
    ok = round(mean, 3) == 6.545 and z < 4 and p > 0.01
    assert report(7, "PPP count at 50/km^2", ok, f"mean={counts.mean():.4f} z={z:.2f} chi2_p={p:.3f}")


def test_criterion_8_determinism_across_workers(tmp_path, report):
    outs = []
    for workers in (1, 3):
        out = tmp_path / f"w{workers}.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "udnsim.cli", "run", "--densities", "25,200,700",
             "--trials", "60", "--seed", "2024", "--workers", str(workers), "--out", str(out)],
            capture_output=True, text=True, check=False)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    assert report(8, "CSV byte-identical for 1 and 3 workers", ok)


def test_criterion_9_single_cell_hand_oracle(report):
    state = NetworkState.single_cell([1.0, 10.0])
    dl, ul = network_rates(state, SchemeConfig(Scheme.NOMA_HD))
    r_w, r_s = dl[0]
    want_w, want_s = math.log2(1 + 0.7 / 1.3), 2.0
    rel = max(abs(r_w - want_w) / want_w, abs(r_s - want_s) / want_s)
    ok = rel <= 1e-9 and round(r_w, 4) == 0.6215 and ul.size == 0
    assert report(9, "single-cell NOMA rates", ok, f"R_w={r_w:.10f} R_s={r_s:.10f}")
