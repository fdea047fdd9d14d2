"""Self-check suite behind ``fabricmotion verify``.

Each check returns ``(name, passed, detail)``.  ``cdf`` can be swapped for a
perturbed function to make sure the oracle comparisons actually bite.
"""
from __future__ import annotations

import time

import numpy as np
from scipy import integrate, stats

from . import pipeline
from .distributions import (FabricDistParams, analytic_ks, excitation, fabric_cdf, fabric_pdf,
                            ks_derivative_dnu, ks_derivative_length, ks_from_excitations, rigid_cdf,
                            supremum_ks)
from .empirical import convolution_cdf_oracle, one_sample_ks, two_sample_ks
from .qp_oracle import decision_values, solve_dual
from .simulate import generate_dataset, pooled_positions
from .svm import SvmParams, kkt_residual, train

GRID_NU = (0.1, 0.5, 0.9, 0.99)
GRID_L = (0.1, 0.4, 0.7, 1.0)


def _pairs():
    return [FabricDistParams(nu, L) for nu in GRID_NU for L in GRID_L]


def check_cdf_oracle(cdf=fabric_cdf, points=200):
    worst = 0.0
    for p in _pairs():
        lo, hi = p.support
        x = np.linspace(lo - 0.05, hi + 0.05, points)
        worst = max(worst, float(np.abs(cdf(x, p) - convolution_cdf_oracle(p, x)).max()))
    return "cdf_matches_quadrature", worst < 1e-6, f"max |closed form - quadrature| = {worst:.2e}"


def check_cdf_shape(cdf=fabric_cdf):
    bad = []
    for p in _pairs():
        lo, hi = p.support
        x = np.linspace(lo, hi, 2000)
        f = cdf(x, p)
        if np.any(np.diff(f) < -1e-12) or abs(f[0]) > 1e-9 or abs(f[-1] - 1) > 1e-9:
            bad.append(p)
            continue
        for b in p.breakpoints:
            if abs(cdf(b + 1e-12, p) - cdf(b - 1e-12, p)) > 1e-9:
                bad.append(p)
                break
    return "cdf_monotone_continuous", not bad, f"{len(bad)} failing (nu, L) pairs"


def check_pdf_normalized():
    worst = 0.0
    for p in _pairs():
        edges = sorted(set(p.breakpoints))
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            x = np.linspace(a, b, 100_001)
            total += integrate.simpson(fabric_pdf(x, p), x=x)
        worst = max(worst, abs(total - 1.0))
    return "pdf_integrates_to_one", worst < 1e-6, f"max |integral - 1| = {worst:.2e}"


def check_pdf_is_cdf_derivative(cdf=fabric_cdf):
    worst = 0.0
    h = 1e-6
    for p in _pairs():
        lo, hi = p.support
        x = np.linspace(lo, hi, 1000)
        x = x[np.min(np.abs(x[:, None] - np.array(p.breakpoints)[None, :]), axis=1) > 1e-3]
        fd = (cdf(x + h, p) - cdf(x - h, p)) / (2 * h)
        worst = max(worst, float(np.abs(fd - fabric_pdf(x, p)).max()))
    return "pdf_is_cdf_derivative", worst < 1e-4, f"max |dF/dx - f| = {worst:.2e}"


def length_difference(omega1, omega2, length, h=1e-6):
    """Finite-difference ``dD/dL``; one-sided (second order) at the upper limit ``L = 1``."""
    d = lambda L: analytic_ks(omega1, omega2, L).statistic
    if length + h > 1.0:
        return (3 * d(length) - 4 * d(length - h) + d(length - 2 * h)) / (2 * h)
    return (d(length + h) - d(length - h)) / (2 * h)


def check_ks_formula():
    ok = True
    notes = []
    lengths = np.round(np.arange(0.05, 1.0001, 0.05), 10)
    d_len = [analytic_ks(1, 2, L).statistic for L in lengths]
    omegas = np.round(np.arange(1.1, 3.0001, 0.1), 10)
    d_om = [analytic_ks(1, w, 1.0).statistic for w in omegas]
    if not (np.all(np.diff(d_len) > 0) and np.all(np.diff(d_om) > 0)):
        ok = False
        notes.append("not monotone")
    if analytic_ks(1, 2, 0.7).statistic != analytic_ks(2, 1, 0.7).statistic or analytic_ks(1.5, 1.5, 1).statistic != 0:
        ok = False
        notes.append("not symmetric")
    h = 1e-6
    worst = 0.0
    for L in (0.3, 0.5, 1.0):
        fd = length_difference(1, 2, L, h)
        worst = max(worst, abs(fd / ks_derivative_length(1, 2, L) - 1))
        n1, n2 = excitation(1.0), excitation(2.0)
        dn = n2 - n1
        fd = (ks_from_excitations(n2 - dn - h, n2, L) - ks_from_excitations(n2 - dn + h, n2, L)) / (2 * h)
        worst = max(worst, abs(fd / ks_derivative_dnu(1, 2, L) - 1))
    if worst > 1e-4:
        ok = False
    notes.append(f"derivative rel. error {worst:.1e}")
    return "ks_formula_properties", ok, "; ".join(notes)


def check_ks_supremum(cdf=fabric_cdf):
    worst = 0.0
    bound_ok = True
    for L in (1 / 3, 2 / 3, 1.0):
        p1, p2 = FabricDistParams.from_omega(1, L), FabricDistParams.from_omega(2, L)
        x = np.linspace(-2.1, 2.1, 10001)
        grid = float(np.abs(cdf(x, p1) - cdf(x, p2)).max())
        sup = supremum_ks(1, 2, L).statistic
        worst = max(worst, abs(sup - grid))
        bound_ok &= analytic_ks(1, 2, L).statistic <= sup + 1e-12
    return ("ks_supremum_matches_grid", worst < 1e-6 and bound_ok,
            f"max |supremum - grid| = {worst:.2e}; closed form is a lower bound: {bound_ok}")


def check_simulation(cdf=fabric_cdf, n=200_000):
    worst = 0.0
    for omega in (1.0, 2.0):
        s = pooled_positions(omega, "rigid", n, master_seed=11)
        worst = max(worst, one_sample_ks(s, rigid_cdf).statistic)
        p = FabricDistParams.from_omega(omega, 1.0)
        s = pooled_positions(omega, "fabric(1.0)", n, master_seed=11)
        worst = max(worst, one_sample_ks(s, lambda x: cdf(x, p)).statistic)
    return "simulation_matches_theory", worst < 0.01, f"max one-sample D = {worst:.4f} at n = {n}"


def check_two_sample_ks():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        a = np.round(rng.normal(size=rng.integers(5, 300)), 1)
        b = np.round(rng.normal(0.3, 1.2, size=rng.integers(5, 300)), 1)
        worst = max(worst, abs(two_sample_ks(a, b).statistic - stats.ks_2samp(a, b).statistic))
    return "two_sample_ks_matches_reference", worst < 1e-12, f"max difference = {worst:.1e}"


def check_smo(problems=5, iters=20_000):
    rng = np.random.default_rng(7)
    disagree = 0
    worst_kkt = 0.0
    params = SvmParams(gamma=1.0)
    for _ in range(problems):
        x = rng.uniform(-1, 1, size=(20, 2))
        labels = (x @ rng.normal(size=2) > 0).astype(int)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        model = train(x, params, labels=labels)
        alpha, bias = solve_dual(x, labels, params.c, 1.0, iters)
        ref = decision_values(x, labels, alpha, bias, 1.0, x)
        disagree += int(np.sum(np.sign(ref) != np.sign(model.decision_function(x))))
        worst_kkt = max(worst_kkt, kkt_residual(model, x, labels))
    ok = disagree == 0 and worst_kkt <= params.tolerance
    return "smo_matches_dual_qp", ok, f"{disagree} sign disagreements; max KKT residual {worst_kkt:.1e}"


def check_pipeline():
    data = generate_dataset(1, 2, 6, ["rigid", "fabric(1.0)"], master_seed=3)
    problems = []
    for trajs in data.values():
        tr, te = pipeline.split_by_trajectory(trajs, 0.5, np.random.default_rng(1))
        wtr, wte = pipeline.build_windows(tr, 10), pipeline.build_windows(te, 10)
        if set(wtr.source_ids) & set(wte.source_ids):
            problems.append("train/test leakage")
        if len(wtr) != sum(len(t) - 10 + 1 for t in tr):
            problems.append("window count")
        z = pipeline.apply_standardize(pipeline.fit_standardize(wtr), wtr).features
        if np.abs(z.mean(0)).max() > 1e-9 or np.abs(z.std(0) - 1).max() > 1e-9:
            problems.append("standardisation")
    return "pipeline_contracts", not problems, ", ".join(problems) or "split, windows, z-score ok"


def run_checks(inject_fault=False):
    cdf = (lambda x, p: fabric_cdf(x, p) + 1e-3) if inject_fault else fabric_cdf
    checks = [
        lambda: check_cdf_oracle(cdf),
        lambda: check_cdf_shape(cdf),
        check_pdf_normalized,
        lambda: check_pdf_is_cdf_derivative(cdf),
        check_ks_formula,
        lambda: check_ks_supremum(cdf),
        lambda: check_simulation(cdf),
        check_two_sample_ks,
        check_smo,
        check_pipeline,
    ]
    results = []
    for check in checks:
        t0 = time.perf_counter()
        try:
            name, passed, detail = check()
        except Exception as exc:  # a crashing check is a failing check
            name, passed, detail = getattr(check, "__name__", "check"), False, f"error: {exc}"
        results.append((name, bool(passed), detail, time.perf_counter() - t0))
    return results
