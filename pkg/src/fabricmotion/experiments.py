"""Simulated activity-recognition experiments: window-size and frequency sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import pipeline
from .distributions import analytic_ks, supremum_ks
from .empirical import two_sample_ks
from .errors import DomainError, ExperimentError
from .simulate import YokeConfig, generate_dataset, pooled_positions
from .svm import SvmParams, accuracy, train
from .trajectory import Sensor

__all__ = [
    "DEFAULT_WINDOWS",
    "ExperimentSpec",
    "parse_length",
    "run_freq_sweep",
    "run_window_sweep",
    "summarize",
]

DEFAULT_WINDOWS = (0.025, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
DEFAULT_LENGTHS = (1 / 3, 2 / 3, 1.0)
DEFAULT_FREQ_OMEGAS = (1.25, 1.5, 1.75, 2.0, 2.5, 3.0)


def parse_length(text):
    """Accept ``0.5``, ``1/3`` and the like."""
    return float(Fraction(str(text).strip()))


@dataclass(frozen=True)
class ExperimentSpec:
    omega_low: float = 1.0
    omega_high: float = 2.0
    lengths: tuple = DEFAULT_LENGTHS
    include_rigid: bool = True
    duration: float = 5.0
    sample_rate: float = 40.0
    amplitude: float = 1.0
    n_per_class: int = 20
    window_seconds: tuple = DEFAULT_WINDOWS
    trials: int = 10
    master_seed: int = 0
    svm: SvmParams = field(default_factory=SvmParams)
    stride: int = 1
    train_fraction: float = 0.5
    standardize: str = "train"
    split: str = "trajectory"
    omega_high_list: tuple = DEFAULT_FREQ_OMEGAS
    freq_window: float = 0.025
    ks_samples: int = 100_000
    workers: int = 1

    def __post_init__(self):
        for name in ("omega_low", "omega_high", "duration", "sample_rate", "amplitude", "freq_window"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")
        if self.n_per_class < 2:
            raise DomainError("n_per_class must be at least 2 so both split sides see each class")
        if self.trials < 1 or self.workers < 1 or self.ks_samples < 1:
            raise DomainError("trials, workers and ks_samples must be at least 1")
        if not self.window_seconds or any(not 0 < w <= self.duration for w in self.window_seconds):
            raise DomainError("window sizes must lie in (0, duration]")
        if not 0 < self.freq_window <= self.duration:
            raise DomainError("freq_window must lie in (0, duration]")
        if self.standardize not in ("train", "pooled", "none"):
            raise DomainError(f"unknown standardisation mode {self.standardize!r}")
        if self.split not in ("trajectory", "window"):
            raise DomainError(f"unknown split mode {self.split!r}")
        if not self.sensors:
            raise DomainError("no sensors selected")
        for w in self.omega_high_list:
            if not (math.isfinite(w) and w > 0):
                raise DomainError(f"omega_high_list entries must be positive, got {w!r}")

    @property
    def sensors(self):
        out = [Sensor()] if self.include_rigid else []
        return out + [Sensor(float(length)) for length in self.lengths]

    @property
    def yoke(self):
        return YokeConfig(omega=self.omega_low, amplitude=self.amplitude, sample_rate=self.sample_rate,
                          duration=self.duration)


def _seed(master, *key):
    return np.random.SeedSequence(master, spawn_key=tuple(key))


def _standardized(spec, train_w, test_w):
    if spec.standardize == "none":
        return train_w, test_w
    fit_on = train_w if spec.standardize == "train" else pipeline.WindowedDataset.concat([train_w, test_w])
    params = pipeline.fit_standardize(fit_on)
    return pipeline.apply_standardize(params, train_w), pipeline.apply_standardize(params, test_w)


def _evaluate(spec, trajs, window_s, split_seed, svm_seed):
    nw = pipeline.window_samples(window_s, spec.sample_rate)
    if spec.split == "trajectory":
        tr, te = pipeline.split_by_trajectory(trajs, spec.train_fraction, np.random.default_rng(split_seed))
        train_w = pipeline.build_windows(tr, nw, spec.stride)
        test_w = pipeline.build_windows(te, nw, spec.stride)
    else:
        train_w, test_w = pipeline.split_windows(pipeline.build_windows(trajs, nw, spec.stride),
                                                 spec.train_fraction, np.random.default_rng(split_seed))
    train_w, test_w = _standardized(spec, train_w, test_w)
    model = train(train_w, spec.svm, np.random.default_rng(svm_seed))
    return {
        "window_samples": nw,
        "accuracy": accuracy(model, test_w),
        "train_rows": model.info["n_train_rows"],
        "test_rows": len(test_w),
        "n_support": model.info["n_support"],
        "subsampled": int(model.info["subsampled"]),
    }


def _window_trial(spec, trial):
    data_seed = int(_seed(spec.master_seed, trial, 0).generate_state(1)[0])
    sensors = spec.sensors
    dataset = generate_dataset(spec.omega_low, spec.omega_high, spec.n_per_class, sensors, spec.yoke, data_seed)
    rows = []
    for si, sensor in enumerate(sensors):
        for wi, ws in enumerate(spec.window_seconds):
            try:
                res = _evaluate(spec, dataset[sensor.tag], ws, _seed(spec.master_seed, trial, 1),
                                _seed(spec.master_seed, trial, 2, si, wi))
            except Exception as exc:
                raise ExperimentError(f"trial {trial}, sensor {sensor.tag}, window {ws} s: {exc}") from exc
            rows.append({"window_seconds": ws, "sensor": sensor.tag, "trial": trial, **res,
                         "_order": (wi, si, trial)})
    return rows


def _pool_map(func, spec, items):
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(func, [spec] * len(items), items))
    else:
        results = [func(spec, item) for item in items]
    return [row for chunk in results for row in chunk]


def _sorted(rows):
    rows = sorted(rows, key=lambda r: r["_order"])
    for r in rows:
        del r["_order"]
    return rows


def run_window_sweep(spec: ExperimentSpec):
    """Accuracy of every sensor at every window size, one row per trial.

    Rows are ordered by (window, sensor, trial) whatever the worker count.
    """
    return _sorted(_pool_map(_window_trial, spec, list(range(spec.trials))))


def summarize(rows, keys, value="accuracy"):
    """Mean and sample standard deviation of ``value`` grouped by ``keys`` (first-seen order)."""
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r[value])
    out = []
    for key, vals in groups.items():
        v = np.asarray(vals, dtype=float)
        std = float(v.std(ddof=1)) if v.size > 1 else 0.0
        out.append({**dict(zip(keys, key)), "mean": float(v.mean()), "std": std, "n": int(v.size)})
    return out


def _freq_trial(spec, job):
    oi, omega2, trial = job
    sensors = spec.sensors
    data_seed = int(_seed(spec.master_seed, trial, 10, oi).generate_state(1)[0])
    sub = replace(spec, omega_high=omega2)
    dataset = generate_dataset(spec.omega_low, omega2, spec.n_per_class, sensors, spec.yoke, data_seed)
    rows = []
    for si, sensor in enumerate(sensors):
        try:
            res = _evaluate(sub, dataset[sensor.tag], spec.freq_window, _seed(spec.master_seed, trial, 11, oi),
                            _seed(spec.master_seed, trial, 12, oi, si))
            ks_seed = int(_seed(spec.master_seed, trial, 13, oi, si).generate_state(1)[0])
            a = pooled_positions(spec.omega_low, sensor, spec.ks_samples, spec.yoke, ks_seed, label=0)
            b = pooled_positions(omega2, sensor, spec.ks_samples, spec.yoke, ks_seed + 1, label=0)
            d_emp = two_sample_ks(a / spec.amplitude, b / spec.amplitude).statistic
        except Exception as exc:
            raise ExperimentError(f"trial {trial}, sensor {sensor.tag}, omega2 {omega2}: {exc}") from exc
        if sensor.is_fabric:
            d_an = analytic_ks(spec.omega_low, omega2, sensor.length).statistic
            d_sup = supremum_ks(spec.omega_low, omega2, sensor.length).statistic
        else:
            d_an = d_sup = 0.0
        rows.append({"omega2": omega2, "sensor": sensor.tag, "trial": trial, "accuracy": res["accuracy"],
                     "D_empirical": d_emp, "D_analytic": d_an, "D_supremum": d_sup,
                     "_order": (oi, si, trial)})
    return rows


def run_freq_sweep(spec: ExperimentSpec):
    """Accuracy at a fixed window and KS distances between classes, per high frequency."""
    jobs = [(oi, w, t) for oi, w in enumerate(spec.omega_high_list) for t in range(spec.trials)]
    return _sorted(_pool_map(_freq_trial, spec, jobs))
