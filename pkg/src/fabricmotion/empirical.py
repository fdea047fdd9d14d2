"""Empirical distribution tools and numerical oracles.

Everything here is computed independently of the closed forms in
:mod:`fabricmotion.distributions`, so the two can be checked against each
other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .distributions import FabricDistParams, KsResult
from .errors import DomainError, InsufficientDataError, QuadratureError

__all__ = [
    "Ecdf",
    "PeriodEstimate",
    "convolution_cdf_oracle",
    "convolution_pdf_oracle",
    "ecdf_eval",
    "estimate_period",
    "local_minima",
    "one_sample_ks",
    "two_sample_ks",
]


def _samples(values, name="samples"):
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError(f"{name} must be non-empty")
    return arr


@dataclass(frozen=True)
class Ecdf:
    """Right-continuous empirical distribution function."""

    sorted_samples: np.ndarray

    @classmethod
    def from_samples(cls, samples):
        arr = np.sort(_samples(samples))
        arr.setflags(write=False)
        return cls(arr)

    @property
    def n(self):
        return self.sorted_samples.size

    def __call__(self, x):
        return ecdf_eval(self, x)

    def left_limit(self, x):
        """``F(x-)``, the fraction of samples strictly below ``x``."""
        counts = np.searchsorted(self.sorted_samples, x, side="left")
        return counts / self.n


def ecdf_eval(e: Ecdf, x):
    """Fraction of samples ``<= x``."""
    if e.n == 0:
        raise DomainError("empty ECDF")
    counts = np.searchsorted(e.sorted_samples, x, side="right")
    out = counts / e.n
    return float(out) if np.ndim(out) == 0 else out


def two_sample_ks(a, b) -> KsResult:
    """Exact two-sample KS statistic, including ties.

    Both ECDFs are compared at every pooled sample point and at the left
    limits there, which covers every value the step-function difference
    takes.
    """
    ea, eb = Ecdf.from_samples(a), Ecdf.from_samples(b)
    pooled = np.unique(np.concatenate([ea.sorted_samples, eb.sorted_samples]))
    right = np.abs(ecdf_eval(ea, pooled) - ecdf_eval(eb, pooled))
    left = np.abs(ea.left_limit(pooled) - eb.left_limit(pooled))
    ir, il = int(np.argmax(right)), int(np.argmax(left))
    if right[ir] >= left[il]:
        d, x = right[ir], pooled[ir]
    else:
        d, x = left[il], pooled[il]
    return KsResult(float(d), float(x), "empirical-two-sample")


def one_sample_ks(samples, cdf) -> KsResult:
    """KS distance between the ECDF of ``samples`` and the distribution ``cdf``."""
    x = np.sort(_samples(samples))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    gaps = np.maximum(np.abs(i / n - f), np.abs((i - 1) / n - f))
    k = int(np.argmax(gaps))
    return KsResult(float(gaps[k]), float(x[k]), "empirical-one-sample")


def _uniform_cdf(z, h):
    if h == 0.0:
        return 1.0 if z >= 0.0 else 0.0
    return min(max((z + h) / (2.0 * h), 0.0), 1.0)


def _kinks(x, h):
    out = []
    for c in (x - h, x + h):
        if -1.0 < c < 1.0:
            out.append(math.asin(c))
    return out or None


def _quad_theta(func, x, h, tol):
    # u = sin(theta) turns the arcsine weight into the constant 1/pi.
    val, err, info = integrate.quad(func, -math.pi / 2, math.pi / 2, points=_kinks(x, h),
                                    epsabs=tol, epsrel=0.0, limit=200, full_output=True)[:3]
    if err > 10 * tol or info.get("last", 0) >= 200:
        raise QuadratureError(f"quadrature did not converge at x={x!r}, h={h!r}: "
                              f"estimate={val!r}, abserr={err!r}, intervals={info.get('last')}")
    return val / math.pi


def convolution_cdf_oracle(params: FabricDistParams, x, tol=1e-10):
    """``P(X_r + delta <= x)`` by adaptive Gauss-Kronrod quadrature.

    Integrates ``U_cdf(x - sin(theta))`` over ``theta`` in ``[-pi/2, pi/2]``,
    splitting at the kinks of the uniform CDF.
    """
    h = params.half_width
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    lo, hi = params.support
    for k, xv in enumerate(xs):
        if xv <= lo:
            out[k] = 0.0
        elif xv >= hi:
            out[k] = 1.0
        else:
            out[k] = _quad_theta(lambda t: _uniform_cdf(xv - math.sin(t), h), xv, h, tol)
    return float(out[0]) if np.ndim(x) == 0 else out


def convolution_pdf_oracle(params: FabricDistParams, x, tol=1e-10):
    """Density of ``X_r + delta`` by quadrature of the convolution integral."""
    h = params.half_width
    if h == 0.0:
        raise DomainError("density oracle needs a positive offset width")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for k, xv in enumerate(xs):
        out[k] = _quad_theta(lambda t: 1.0 / (2 * h) if abs(xv - math.sin(t)) <= h else 0.0, xv, h, tol)
    return float(out[0]) if np.ndim(x) == 0 else out


def local_minima(values):
    """Indices of strict local minima; a flat-bottomed minimum reports its centre."""
    v = np.asarray(values, dtype=float)
    found = []
    i, n = 1, v.size
    while i < n - 1:
        if v[i] < v[i - 1]:
            j = i
            while j + 1 < n and v[j + 1] == v[i]:
                j += 1
            if j + 1 < n and v[j + 1] > v[i]:
                found.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return np.array(found, dtype=int)


def _trough_minima(values):
    # One minimum per excursion below the mean, with a hysteresis band so
    # noise near the crossings does not split a trough.
    v = np.asarray(values, dtype=float)
    centre, band = v.mean(), 0.5 * v.std()
    if band == 0.0:
        return np.array([], dtype=int)
    picks = []
    start, below = None, False
    for k, val in enumerate(v):
        if not below and val < centre - band:
            below, start = True, k
        elif below and val > centre + band:
            below = False
            if start > 0:
                picks.append((start, k))
    # troughs still open at the end are incomplete and dropped
    out = []
    for s, e in picks:
        seg = v[s:e]
        idx = np.flatnonzero(seg == seg.min()) + s
        out.append(int(idx[(len(idx) - 1) // 2]))
    return np.array(out, dtype=int)


def _omega_from_minima(times, idx):
    if idx.size < 2:
        raise InsufficientDataError(f"need at least 2 minima, found {idx.size}")
    spacing = np.diff(np.asarray(times)[idx]).mean()
    return 2.0 * math.pi / spacing


@dataclass(frozen=True)
class PeriodEstimate:
    """Angular frequency from minima spacing, with and without pre-smoothing."""

    omega: float
    omega_raw: float
    omega_smoothed: float
    smoothing_width: int


def estimate_period(traj) -> PeriodEstimate:
    """Angular frequency from the mean spacing of successive lowest positions.

    Fabric trajectories are smoothed with a centred moving average of
    ``min(5, floor(sample_rate / 8))`` samples before locating minima, and
    ``omega`` reports the smoothed estimate for them; other sources report
    the raw estimate.  Each below-mean excursion contributes one minimum.
    """
    x = np.asarray(traj.positions, dtype=float)
    t = np.asarray(traj.times, dtype=float)
    if np.isnan(x).any():
        raise DomainError("trajectory has missing samples; fill gaps first")
    width = max(1, min(5, int(math.floor(traj.sample_rate / 8))))
    raw_idx = _trough_minima(x)
    if width > 1:
        smooth = np.convolve(x, np.ones(width) / width, mode="same")
        half = width // 2
        # edges of a 'same' convolution are biased; keep them out of the search
        smooth[:half] = smooth[half]
        smooth[x.size - half:] = smooth[x.size - half - 1]
        sm_idx = _trough_minima(smooth)
    else:
        sm_idx = raw_idx
    is_fabric = str(traj.source).startswith("fabric")
    try:
        w_raw = _omega_from_minima(t, raw_idx)
    except InsufficientDataError:
        if not is_fabric:
            raise
        w_raw = float("nan")
    w_sm = _omega_from_minima(t, sm_idx)
    return PeriodEstimate(w_sm if is_fabric else w_raw, w_raw, w_sm, width)
