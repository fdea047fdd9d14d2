"""Binary soft-margin SVM with a Gaussian RBF kernel, trained by SMO.

The solver is the SMO decomposition with second-order working-set
selection (maximal violating ``i``, then the ``j`` with the largest
guaranteed objective decrease), as used by LIBSVM.  It stops when the
maximal KKT violation ``m(alpha) - M(alpha)`` drops below ``tolerance``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .errors import DomainError, TrainingError, TrajectoryFormatError

__all__ = [
    "MODEL_FORMAT_VERSION",
    "SvmModel",
    "SvmParams",
    "accuracy",
    "kkt_residual",
    "load_model",
    "predict",
    "rbf_kernel",
    "save_model",
    "train",
]

MODEL_FORMAT_VERSION = 1
_TAU = 1e-12


@dataclass(frozen=True)
class SvmParams:
    """Box constraint ``c``, RBF width ``gamma`` (``None`` means ``1/n_features``).

    ``max_passes`` bounds the number of pair updates at ``max_passes * n``.
    ``max_rows`` caps the training set by seeded uniform subsampling
    (``None`` disables the cap); ``cache_rows`` is the largest training set
    for which the full Gram matrix is kept in memory.
    """

    c: float = 1.0
    gamma: float | None = None
    tolerance: float = 1e-3
    max_passes: int = 1000
    max_rows: int | None = 4000
    cache_rows: int = 4000

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"c must be positive, got {self.c!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_passes < 1:
            raise DomainError("max_passes must be at least 1")

    def resolved_gamma(self, n_features):
        return 1.0 / n_features if self.gamma is None else self.gamma


def rbf_kernel(a, b, gamma):
    """``exp(-gamma ||a_i - b_j||^2)`` for all row pairs."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


@numba.njit(cache=True)
def _kernel_row(x, sq, i, gamma, out):
    n, d = x.shape
    for t in range(n):
        dot = 0.0
        for k in range(d):
            dot += x[t, k] * x[i, k]
        d2 = sq[t] + sq[i] - 2.0 * dot
        out[t] = math.exp(-gamma * max(d2, 0.0))


@numba.njit(cache=True)
def _smo(x, y, c, gamma, tol, max_iter, gram, cached):
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)
    sq = np.zeros(n)
    for t in range(n):
        s = 0.0
        for k in range(x.shape[1]):
            s += x[t, k] * x[t, k]
        sq[t] = s
    ki = np.empty(n)
    kj = np.empty(n)
    gap = np.inf
    it = 0
    converged = False
    while it < max_iter:
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < c) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * grad[t]
                if v >= gmax:
                    gmax = v
                    i = t
        if i < 0:
            gap = 0.0
            converged = True
            break
        if cached:
            ki[:] = gram[i]
        else:
            _kernel_row(x, sq, i, gamma, ki)
        gmax2 = -np.inf
        j = -1
        obj_min = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < c):
                v = y[t] * grad[t]
                if v >= gmax2:
                    gmax2 = v
                b = gmax + v
                if b > 0:
                    a = ki[i] + 1.0 - 2.0 * ki[t]
                    if a <= 0:
                        a = _TAU
                    o = -(b * b) / a
                    if o <= obj_min:
                        obj_min = o
                        j = t
        gap = gmax + gmax2
        if gap < tol or j < 0:
            converged = True
            break
        if cached:
            kj[:] = gram[j]
        else:
            _kernel_row(x, sq, j, gamma, kj)
        old_i = alpha[i]
        old_j = alpha[j]
        quad = ki[i] + kj[j] - 2.0 * ki[j]
        if quad <= 0:
            quad = _TAU
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = c - diff
            else:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = c + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > c:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = total - c
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = total - c
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        dai = alpha[i] - old_i
        daj = alpha[j] - old_j
        for t in range(n):
            grad[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj)
        it += 1

    ub = np.inf
    lb = -np.inf
    n_free = 0
    sum_free = 0.0
    for t in range(n):
        yg = y[t] * grad[t]
        if alpha[t] >= c:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            n_free += 1
            sum_free += yg
    rho = sum_free / n_free if n_free > 0 else (ub + lb) / 2.0
    return alpha, rho, it, converged, gap


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained kernel expansion ``f(x) = sum_i dual_coefs_i k(sv_i, x) + bias``."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    gamma: float
    c: float = math.nan
    info: dict = field(default_factory=dict)

    @property
    def n_features(self):
        return self.support_vectors.shape[1]

    def decision_function(self, rows, chunk=4096):
        x = np.atleast_2d(np.asarray(rows, dtype=float))
        if x.shape[1] != self.n_features:
            raise DomainError(f"rows have {x.shape[1]} columns, model expects {self.n_features}")
        out = np.empty(x.shape[0])
        for s in range(0, x.shape[0], chunk):
            out[s:s + chunk] = rbf_kernel(x[s:s + chunk], self.support_vectors, self.gamma) @ self.dual_coefs
        return out + self.bias


def _xy(data, labels=None):
    if labels is None:
        x, labels = data.features, data.labels
    else:
        x = data
    x = np.ascontiguousarray(np.asarray(x, dtype=float))
    labels = np.asarray(labels)
    if x.ndim != 2 or labels.shape != (x.shape[0],):
        raise DomainError("expected a 2-D feature matrix and one label per row")
    if not np.isin(labels, (0, 1)).all():
        raise DomainError("labels must be binary 0/1")
    return x, labels.astype(int)


def train(data, params: SvmParams | None = None, rng=None, labels=None) -> SvmModel:
    """Fit an RBF C-SVM on a :class:`WindowedDataset` (or ``data, labels=...`` arrays).

    ``rng`` seeds the optional row subsampling; the solver itself is
    deterministic.
    """
    params = SvmParams() if params is None else params
    x, lab = _xy(data, labels)
    if np.unique(lab).size < 2:
        raise DomainError("training data must contain both classes")
    n_total = x.shape[0]
    keep = None
    if params.max_rows is not None and n_total > params.max_rows:
        rng = np.random.default_rng(rng)
        keep = np.sort(rng.choice(n_total, size=params.max_rows, replace=False))
        x, lab = x[keep], lab[keep]
        if np.unique(lab).size < 2:
            raise DomainError("subsampled training data lost a class")
    y = np.where(lab == 1, 1.0, -1.0)
    gamma = params.resolved_gamma(x.shape[1])
    n = y.size
    cached = n <= params.cache_rows
    gram = rbf_kernel(x, x, gamma) if cached else np.empty((1, 1))
    max_iter = params.max_passes * max(n, 1)
    alpha, rho, iters, converged, gap = _smo(x, y, float(params.c), gamma, params.tolerance,
                                             max_iter, gram, cached)
    if not converged:
        raise TrainingError(f"SMO did not converge in {iters} updates; KKT gap {gap:.3e}", gap)
    sv = alpha > 0
    info = {"iterations": int(iters), "kkt_gap": float(gap), "n_train_rows": int(n),
            "n_rows_available": int(n_total), "subsampled": keep is not None, "n_support": int(sv.sum()),
            "alpha": alpha, "row_index": keep}
    model = SvmModel(x[sv].copy(), (alpha * y)[sv], float(-rho), gamma, float(params.c), info)
    return model


def kkt_residual(model: SvmModel, data, labels=None):
    """Largest violation of the soft-margin KKT conditions on the training rows.

    ``data`` must be the set passed to :func:`train`; the multipliers are
    taken from ``model.info["alpha"]``.
    """
    x, lab = _xy(data, labels)
    rows = model.info.get("row_index")
    if rows is not None:
        x, lab = x[rows], lab[rows]
    alpha = model.info["alpha"]
    if alpha.size != x.shape[0]:
        raise DomainError("data does not match the rows the model was trained on")
    y = np.where(lab == 1, 1.0, -1.0)
    margin = y * model.decision_function(x)
    at_upper = alpha >= model.c * (1 - 1e-12)
    viol = np.where(alpha <= 0, np.maximum(0.0, 1.0 - margin),
                    np.where(at_upper, np.maximum(0.0, margin - 1.0), np.abs(margin - 1.0)))
    return float(viol.max()) if viol.size else 0.0


def predict(model: SvmModel, rows):
    """Class 1 where the decision value is positive, else 0."""
    return (model.decision_function(rows) > 0).astype(int)


def accuracy(model: SvmModel, data, labels=None):
    """Percentage of rows classified correctly."""
    x, lab = _xy(data, labels)
    return 100.0 * float(np.mean(predict(model, x) == lab))


def save_model(model: SvmModel, path):
    """Versioned flat file: key/value header, then ``dual_coefs`` and ``support_vectors`` blocks."""
    lines = ["# fabricmotion svm model", f"version,{MODEL_FORMAT_VERSION}", f"gamma,{model.gamma!r}",
             f"bias,{model.bias!r}", f"c,{model.c!r}", f"n_support,{model.dual_coefs.size}",
             f"n_features,{model.n_features}", "dual_coefs"]
    lines += [repr(float(v)) for v in model.dual_coefs]
    lines.append("support_vectors")
    lines += [",".join(repr(float(v)) for v in row) for row in model.support_vectors]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> SvmModel:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")]
    head = {}
    k = 0
    while k < len(lines) and lines[k] != "dual_coefs":
        key, _, value = lines[k].partition(",")
        head[key] = value
        k += 1
    try:
        if int(head["version"]) != MODEL_FORMAT_VERSION:
            raise TrajectoryFormatError(f"unsupported model version {head['version']}")
        n_sv, width = int(head["n_support"]), int(head["n_features"])
        coefs = np.array([float(v) for v in lines[k + 1:k + 1 + n_sv]])
        if lines[k + 1 + n_sv] != "support_vectors":
            raise TrajectoryFormatError("missing support_vectors block")
        rows = [[float(v) for v in ln.split(",")] for ln in lines[k + 2 + n_sv:]]
    except (KeyError, ValueError, IndexError) as exc:
        raise TrajectoryFormatError(f"malformed model file: {exc}") from None
    if len(rows) != n_sv or any(len(r) != width for r in rows) or coefs.size != n_sv:
        raise TrajectoryFormatError("model blocks do not match declared sizes")
    sv = np.array(rows, dtype=float).reshape(-1, width) if rows else np.empty((0, width))
    return SvmModel(sv, coefs, float(head["bias"]), float(head["gamma"]), float(head.get("c", "nan")))
