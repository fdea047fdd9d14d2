"""Acceptance criteria, one check per criterion.

Run under pytest, or directly (``python3 tests/test_acceptance.py``) for a
plain PASS/FAIL listing.  Every line is also recorded in ``RESULTS`` for the
terminal summary hook in ``conftest.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from fabricmotion.distributions import (FabricDistParams, analytic_ks, excitation, fabric_cdf,
                                        ks_derivative_dnu, ks_derivative_length, ks_from_excitations,
                                        rigid_cdf)
from fabricmotion.empirical import convolution_cdf_oracle, one_sample_ks, two_sample_ks
from fabricmotion.experiments import ExperimentSpec, run_freq_sweep, run_window_sweep, summarize
from fabricmotion.qp_oracle import decision_values, solve_dual
from fabricmotion.simulate import YokeConfig, pooled_positions
from fabricmotion.svm import SvmParams, kkt_residual, train

N = 10**6
RESULTS = []


def _record(name, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {name}: {detail}"
    RESULTS.append(line)
    print(line)
    return passed


def criterion_1():
    t0 = time.perf_counter()
    nus = (0.05, 0.2, 0.35, 0.5, 0.632121, 0.8, 0.95, 1.0)
    lengths = (0.1, 0.25, 0.4, 0.6, 0.8, 1.0)
    worst = 0.0
    for nu in nus:
        for L in lengths:
            p = FabricDistParams(nu, L)
            x = np.linspace(p.support[0] - 0.05, p.support[1] + 0.05, 2000)
            worst = max(worst, float(np.abs(fabric_cdf(x, p) - convolution_cdf_oracle(p, x)).max()))
    secs = time.perf_counter() - t0
    ok = worst < 1e-6 and secs < 60
    return _record("1 closed-form CDF", ok,
                   f"{len(nus) * len(lengths)} pairs x 2000 points, max error {worst:.1e}, {secs:.1f} s")


def criterion_2():
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for omega in (0.5, 1.0, 2.0, 3.0, 5.0):
        # pooled samples are only as independent as the phase draws, so slow
        # motions get trajectories spanning at least three periods
        base = YokeConfig(duration=max(5.0, 6 * math.pi / omega))
        d = one_sample_ks(pooled_positions(omega, "rigid", N, base), rigid_cdf).statistic
        if d > worst:
            worst, where = d, f"rigid w={omega}"
    for omega in (1.0, 2.0):
        for L in (1 / 3, 2 / 3, 1.0):
            p = FabricDistParams.from_omega(omega, L)
            s = pooled_positions(omega, f"fabric({L})", N)
            d = one_sample_ks(s, lambda x: fabric_cdf(x, p)).statistic
            if d > worst:
                worst, where = d, f"fabric w={omega} L={L:.3g}"
    secs = time.perf_counter() - t0
    return _record("2 simulation vs theory", worst < 0.005 and secs < 120,
                   f"max D {worst:.4f} ({where}) at n=10^6, {secs:.1f} s")


def criterion_3():
    parts, ok = [], True
    for L in (1 / 3, 2 / 3, 1.0):
        a = pooled_positions(1.0, f"fabric({L})", N, master_seed=0)
        b = pooled_positions(2.0, f"fabric({L})", N, master_seed=1)
        emp = two_sample_ks(a, b).statistic
        r = analytic_ks(1.0, 2.0, L)
        gap = abs(r.statistic - emp)
        p1, p2 = FabricDistParams.from_omega(1.0, L), FabricDistParams.from_omega(2.0, L)
        x = np.linspace(-p2.support[1], p2.support[1], 10_000)
        x_sup = abs(x[np.argmax(np.abs(fabric_cdf(x, p1) - fabric_cdf(x, p2)))])
        loc_ok = abs(x_sup - r.argsup) <= x[1] - x[0]
        ok &= gap < 0.01 and loc_ok
        parts.append(f"L={L:.3g}: |{r.statistic:.4f}-{emp:.4f}|={gap:.4f}"
                     f"{'' if gap < 0.01 else ' (>0.01)'}, grid argsup {x_sup:.3f} vs {r.argsup:.3f}"
                     f"{'' if loc_ok else ' (off)'}")
    return _record("3 analytic KS formula", ok, "; ".join(parts))


def _fd_length(L, h=1e-6):
    d = lambda v: analytic_ks(1, 2, v).statistic
    if L + h > 1:
        return (3 * d(L) - 4 * d(L - h) + d(L - 2 * h)) / (2 * h)
    return (d(L + h) - d(L - h)) / (2 * h)


def criterion_4():
    t0 = time.perf_counter()
    lengths = np.arange(1, 21) / 20
    d_len = np.array([analytic_ks(1, 2, L).statistic for L in lengths])
    omegas = np.round(np.arange(1.1, 3.0001, 0.1), 10)
    d_om = np.array([analytic_ks(1, w, 1.0).statistic for w in omegas])
    mono = bool(np.all(np.diff(d_len) > 0) and np.all(np.diff(d_om) > 0))
    worst, positive = 0.0, True
    for L in lengths:
        g = ks_derivative_length(1, 2, L)
        positive &= g > 0
        worst = max(worst, abs(_fd_length(L) / g - 1))
    h = 1e-6
    for w in omegas:
        n1, n2 = excitation(1.0), excitation(w)
        g = ks_derivative_dnu(1, w, 1.0)
        positive &= g > 0
        fd = (ks_from_excitations(n1 - h, n2, 1.0) - ks_from_excitations(n1 + h, n2, 1.0)) / (2 * h)
        worst = max(worst, abs(fd / g - 1))
    secs = time.perf_counter() - t0
    ok = mono and positive and worst < 1e-4 and secs < 5
    return _record("4 monotonicity", ok, f"monotone={mono}, derivatives positive={positive}, "
                                         f"max FD relative error {worst:.1e}, {secs:.2f} s")


def criterion_5():
    a = pooled_positions(1.0, "rigid", N, master_seed=0)
    b = pooled_positions(2.0, "rigid", N, master_seed=1)
    d = two_sample_ks(a, b).statistic
    return _record("5 rigid frequency invariance", d < 0.005, f"two-sample D {d:.4f} at 10^6 per class")


_SWEEP = {}


def _window_sweep():
    if not _SWEEP:
        t0 = time.perf_counter()
        rows = run_window_sweep(ExperimentSpec())
        _SWEEP["secs"] = time.perf_counter() - t0
        _SWEEP["mean"] = {(s["window_seconds"], s["sensor"]): s["mean"]
                          for s in summarize(rows, ["window_seconds", "sensor"])}
    return _SWEEP


def criterion_6():
    sw = _window_sweep()
    m = sw["mean"]
    rigid, l3, l23, l1 = "rigid", f"fabric({1 / 3!r})", f"fabric({2 / 3!r})", "fabric(1.0)"
    checks = {
        "a": (47 <= m[0.025, rigid] <= 54, f"rigid@0.025 {m[0.025, rigid]:.2f}"),
        "b": (51 <= m[0.025, l1] <= 58, f"L=1@0.025 {m[0.025, l1]:.2f}"),
        "c": (m[0.025, l1] - m[0.025, rigid] >= 1.5, f"gain {m[0.025, l1] - m[0.025, rigid]:.2f} pp"),
        "d": (m[1.0, l1] > m[1.0, l23] > m[1.0, rigid],
              f"@1s L=1 {m[1.0, l1]:.2f}, L=2/3 {m[1.0, l23]:.2f}, rigid {m[1.0, rigid]:.2f}"),
        "e": (all(m[2.0, s] >= 98 for s in (rigid, l3, l23, l1)),
              f"@2s min {min(m[2.0, s] for s in (rigid, l3, l23, l1)):.2f}"),
    }
    ok = all(v[0] for v in checks.values()) and sw["secs"] < 600
    detail = "; ".join(f"({k}) {'ok' if v[0] else 'FAILED'} {v[1]}" for k, v in checks.items())
    return _record("6 window-size reproduction", ok, f"{detail}; {sw['secs']:.0f} s")


def criterion_7():
    rng = np.random.default_rng(2024)
    params = SvmParams(gamma=1.0)
    disagree, worst = 0, 0.0
    for _ in range(25):
        x = rng.uniform(-1, 1, size=(20, 2))
        labels = (x @ rng.normal(size=2) + 0.2 * rng.normal() > 0).astype(int)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        model = train(x, params, labels=labels)
        alpha, bias = solve_dual(x, labels, params.c, params.gamma, 100_000)
        ref = decision_values(x, labels, alpha, bias, params.gamma, x)
        disagree += int(np.sum(np.sign(ref) != np.sign(model.decision_function(x))))
        worst = max(worst, kkt_residual(model, x, labels))
    ok = disagree == 0 and worst <= params.tolerance
    return _record("7 SMO correctness", ok, f"25 problems, {disagree} sign disagreements, max KKT {worst:.1e}")


def criterion_8():
    # hardware results are replaced by the theory checks above and these sweep properties
    rows = run_freq_sweep(ExperimentSpec(trials=1, n_per_class=4))
    rigid = max(r["D_empirical"] for r in rows if r["sensor"] == "rigid")
    fabric = [r for r in rows if r["sensor"] != "rigid"]
    track = max(abs(r["D_empirical"] - r["D_analytic"]) for r in fabric)
    incr = all(np.all(np.diff([r["D_analytic"] for r in fabric if r["sensor"] == s]) > 0)
               for s in {r["sensor"] for r in fabric})
    ok = rigid < 0.02 and track < 0.02 and incr
    return _record("8 hardware results substituted", ok,
                   f"freq sweep: rigid D_emp max {rigid:.4f}, D_analytic increasing={incr}, "
                   f"max |D_emp-D_analytic| {track:.4f} (see criteria 2-6 for the rest)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8]


@pytest.mark.slow
@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 9)])
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    outcomes = [c() for c in CRITERIA]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria pass")
    sys.exit(0 if all(outcomes) else 1)
