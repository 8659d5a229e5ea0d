"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary. Monte Carlo seeds are fixed.
"""
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from orderflow.cli import build_two_layer, main
from orderflow.config import parse_config
from orderflow.estimators import hurst_fbm, hurst_mixed, hurst_volume, truncate_outliers
from orderflow.hawkes import CB, RB, RS, simulate_core, simulate_two_layer
from orderflow.impact import (impact_exponent, metaorder_experiment, mi_curve, price_path,
                              two_layer_propagator, vol_hurst, volume_hurst)
from orderflow.kernels import resolvent, shifted_pareto
from orderflow.limits import (MixedFbmParams, simulate_core_limit, simulate_mixed_fbm,
                              simulate_reaction_limit, simulate_signed_limit)
from orderflow.rng import path_seeds
from orderflow.scaling import LimitParams, unsigned_factor
from orderflow.specialfn import ml_cdf, ml_cdf_integral, mittag_leffler

DELTAS = (8, 16, 32, 64)


def test_c01_mittag_leffler(verdict):
    x = np.linspace(-5.0, 5.0, 1000)
    got = np.array([mittag_leffler(1.0, 1.0, v) for v in x])
    err_exp = float(np.max(np.abs(got - np.exp(x)) / np.exp(x)))
    # rho(h) = lam h^a / Gamma(a+1) - lam^2 h^2a / Gamma(2a+1) + O(h^3a)
    worst = 0.0
    for a in (0.3, 0.375, 0.45):
        for h in (1e-8, 1e-6, 1e-4):
            rem = (ml_cdf(a, 1.0, h) - h ** a / math.gamma(a + 1)) / h ** (2 * a)
            worst = max(worst, abs(rem + 1.0 / math.gamma(2 * a + 1)) / h ** a)
    ok = err_exp < 1e-10 and worst < 3.0
    verdict(1, ok, f"max rel err vs exp {err_exp:.2e}; small-h remainder ratio {worst:.3f} (< 3)")


def test_c02_first_moment(verdict):
    nu, a0, T, P = 0.05, 0.9, 500.0, 1000
    kern = shifted_pareto(0.375)
    h = 0.01
    psi = resolvent(kern, a0, h=h, horizon=T)
    ts = np.linspace(50.0, T, 10)
    # E N(t) = nu t + nu int_0^t Psi, Psi(s) = int_0^s psi
    Psi = integrate.cumulative_trapezoid(psi.values, dx=h, initial=0.0)
    IPsi = integrate.cumulative_trapezoid(Psi, dx=h, initial=0.0)
    exact = nu * ts + nu * np.interp(ts, psi.t, IPsi)
    counts = np.array([np.searchsorted(simulate_core(nu, a0, kern, T, s).of(CB), ts, side="right")
                       for s in path_seeds(2024, P)])
    z = (counts.mean(0) - exact) / (counts.std(0, ddof=1) / math.sqrt(P))
    ok = bool(np.all(np.abs(z) <= 3.0))
    verdict(2, ok, f"z-scores in [{z.min():.2f}, {z.max():.2f}] at 10 times (|z| <= 3)")


def test_c03_holder_law(verdict):
    a0, lam0, t, n, P = 0.375, 1.0, 0.5, 1024, 10_000
    F, _ = simulate_core_limit(a0, lam0, 1.0, n, 3, n_paths=P)
    Fp = F["F_plus"]
    k = int(t * n)
    g = ml_cdf_integral(a0, lam0, t)
    parts, ok = [], True
    for j in (1, 2, 4):
        h = j / n
        d2 = (Fp[:, k + j] - Fp[:, k]) ** 2
        claim = 2 * lam0 ** 2 / math.gamma(a0 + 1) ** 2 * (1 + g) * h ** (2 * a0)
        rel = abs(d2.mean() - claim) / claim
        ok &= rel <= 0.15
        parts.append(f"h=2^{int(math.log2(h))}: MC {d2.mean():.3g} vs {claim:.3g}")
    verdict(3, ok, "; ".join(parts) + " (15% rel)")


@pytest.fixture(scope="module")
def mixed_paths():
    return simulate_mixed_fbm(MixedFbmParams(0.775, 1.0, 1.0), 2 ** 18, 0.01, 101,
                              n_paths=100)["S"]


def _mean_mixed(paths, delta):
    reps = [hurst_mixed(s, delta) for s in paths]
    good = [r.H_hat for r in reps if not r.degenerate]
    return (float(np.mean(good)) if good else float("nan")), len(reps) - len(good)


def test_c04_mixed_scale_stable(verdict, mixed_paths):
    res = [_mean_mixed(mixed_paths, d) for d in DELTAS]
    means = np.array([m for m, _ in res])
    width = float(means.max() - means.min())
    ok = bool(np.all(np.isfinite(means)) and width <= 0.05
              and means.min() >= 0.72 and means.max() <= 0.83)
    verdict(4, ok, f"mean H_hat {np.round(means, 4).tolist()} band {width:.4f}; "
                   f"degenerate {[d for _, d in res]}")


def test_c05_fbm_scale_dependent(verdict, mixed_paths):
    means = np.array([np.mean([hurst_fbm(s, [d, 2 * d, 4 * d]).H_hat for s in mixed_paths])
                      for d in DELTAS])
    ok = bool(np.all(np.diff(means) > 0) and 0.5 <= means[0] <= 0.6)
    verdict(5, ok, f"mean hurst_fbm {np.round(means, 4).tolist()}")


@pytest.fixture(scope="module")
def limit_paths():
    lp = LimitParams(0.375)
    n = 2 ** 12
    F, V = simulate_core_limit(lp.alpha0, lp.lambda0, lp.mu0, n, 31, n_paths=100)
    X = simulate_reaction_limit(lp.alpha1, lp.lambda1, lp.mu1, F, n, 32)
    return lp, V, X


def test_c06_rough_volume(verdict, limit_paths):
    lp, _, X = limit_paths
    hs = []
    for row in X["X"]:
        rate = np.diff(row)
        inc, _ = truncate_outliers(np.diff(rate))
        hs.append(hurst_volume(inc, 10).H_hat)
    m = float(np.mean(hs))
    verdict(6, abs(m - 0.25) <= 0.07, f"alpha1={lp.alpha1}: mean H {m:.4f} (0.25 +- 0.07)")


def test_c07_vanishing_signed_reaction(verdict):
    lp = LimitParams(0.375)
    Ts = [2.0 ** k for k in range(10, 15)]
    med = []
    for i, T in enumerate(Ts):
        _, fh, params = build_two_layer(parse_config("", T=T))
        c = unsigned_factor(fh)
        sups = []
        for s in path_seeds(700 + i, 200):
            st = simulate_two_layer(params, T, s)
            m = st.marks[np.isin(st.marks, (RB, RS))]
            walk = np.cumsum(np.where(m == RB, 1, -1))
            sups.append(c * (np.abs(walk).max() if walk.size else 0.0))
        med.append(float(np.median(sups)))
    slope = float(np.polyfit(np.log(Ts), np.log(med), 1)[0])
    ok = bool(np.all(np.diff(med) < 0) and slope < -0.1)
    verdict(7, ok, f"alpha0={lp.alpha0}: medians {np.round(med, 4).tolist()} slope {slope:.3f}")


def test_c08_signed_structure(verdict, limit_paths):
    lp, V, X = limit_paths
    S = simulate_signed_limit(lp, 0.5, V, X)["S"]
    mixed, n_deg = _mean_mixed(S, 16)
    fbm = float(np.mean([hurst_fbm(s, [1, 2, 4]).H_hat for s in S]))
    ok = bool(abs(mixed - 0.75) <= 0.07 and fbm < 0.62)
    verdict(8, ok, f"mixed H_hat {mixed:.4f} ({n_deg} degenerate of 100, target 0.75 +- 0.07); "
                   f"finest hurst_fbm {fbm:.4f} (< 0.62)")


def test_c09_propagator_no_arbitrage(verdict):
    cfg = parse_config("")
    _, _, params = build_two_layer(cfg)
    T = cfg.T
    grid = np.linspace(0.0, T, cfg.n_grid + 1)
    prop = two_layer_propagator(params, 0.05, T, cfg.kappa)
    acs = []
    for s in path_seeds(909, 200):
        x = np.diff(price_path(simulate_two_layer(params, T, s), prop, grid)["P"])
        acs.append([np.dot(x[:-lag], x[lag:]) / np.dot(x, x) for lag in range(1, 11)])
    acs = np.array(acs)
    z = acs.mean(0) / (acs.std(0, ddof=1) / math.sqrt(len(acs)))
    ok = bool(np.all(np.abs(z) <= 2.576))
    verdict(9, ok, f"lag 1..10 autocorrelation z-scores in [{z.min():.2f}, {z.max():.2f}] "
                   "(99% band 2.576)")


@pytest.mark.slow
def test_c10_square_root_impact(verdict):
    t = np.linspace(0.0, 1.0, 1025)[1:]
    exact = bool(np.array_equal(mi_curve(0.75, t)["MI"], np.sqrt(t)))
    cfg = parse_config("")
    _, _, params = build_two_layer(cfg)
    duration = cfg.T
    horizon = 3.0 * duration
    prop = two_layer_propagator(params, 0.05, horizon, cfg.kappa)
    _, exponent = metaorder_experiment(params, prop, 0.02, duration, 500, 1010, threads=4)
    ok = exact and abs(exponent - 0.5) <= 0.15
    verdict(10, ok, f"mi_curve(0.75) == sqrt(t): {exact}; fitted exponent {exponent:.4f} "
                    "(0.5 +- 0.15, M=500)")


def test_c11_exponent_ledger(verdict):
    ok, parts = True, []
    for H0 in (Fraction(3, 4), Fraction(31, 40), Fraction(4, 5)):
        h = float(H0)
        want = (float(2 - 2 * H0), float(H0 - Fraction(1, 2)), float(2 * H0 - Fraction(3, 2)))
        got = (impact_exponent(h), volume_hurst(h), vol_hurst(h))
        lp = LimitParams(float(H0 / 2))
        chain = (lp.H0, lp.H1)
        ok &= all(math.isclose(a, b, rel_tol=0, abs_tol=1e-15) for a, b in zip(got, want))
        ok &= all(math.isclose(a, b, rel_tol=0, abs_tol=1e-15) for a, b in zip(chain, (h, want[1])))
        parts.append(f"H0={h}: {tuple(round(v, 12) for v in got)}")
    verdict(11, ok, "; ".join(parts))


def test_c12_determinism(verdict, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("T = 256\nn_grid = 128\nseed = 12\n")
    blobs = {}
    for threads in (1, 4, 8):
        for rep in range(2):
            d = tmp_path / f"t{threads}_{rep}"
            rc = [main(["simulate", "--config", str(cfg), "--paths", "8", "--threads", str(threads),
                        "--out", str(d)])]
            for i in range(8):
                ev = d / f"events_{i:04d}.csv"
                rc.append(main(["rescale", "--config", str(cfg), "--input", str(ev),
                                "--kind", "unsigned", "--out", str(d / f"U_{i}.csv")]))
                rc.append(main(["estimate", "--method", "fbm", "--input", str(d / f"U_{i}.csv"),
                                "--out", str(d / f"est_{i}.json")]))
            assert rc == [0] * len(rc)
            blobs[(threads, rep)] = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    ref = blobs[(1, 0)]
    same = all(b == ref for b in blobs.values())
    verdict(12, same, f"{len(ref)} artifacts byte-identical across threads 1/4/8 x 2 runs: {same}")
