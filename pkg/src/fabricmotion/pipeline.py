"""From trajectories to classifier-ready window matrices.

Covers trajectory CSV files, spline gap filling, overlapping windows,
trajectory-level train/test splits and z-score standardisation.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, GapFillError, TrajectoryFormatError
from .trajectory import Sensor, Trajectory

__all__ = [
    "CSV_HEADER",
    "STD_FLOOR",
    "StandardizationParams",
    "WindowedDataset",
    "apply_standardize",
    "build_windows",
    "fill_gaps",
    "fit_standardize",
    "read_trajectories",
    "split_by_trajectory",
    "split_windows",
    "window",
    "window_samples",
    "write_trajectories",
]

CSV_HEADER = ("trajectory_id", "class", "sensor", "t", "x")
STD_FLOOR = 1e-9
MAX_GAP_FRACTION = 0.25
SPACING_TOLERANCE = 0.01


def _format_time(t):
    # at least six decimals, more only when needed for an exact round trip
    for digits in range(6, 25):
        s = f"{t:.{digits}f}"
        if float(s) == t:
            return s
    return repr(t)


def _format_value(x):
    return "" if math.isnan(x) else repr(float(x))


def write_trajectories(trajs, path, comment=None):
    """Write trajectories as ``trajectory_id,class,sensor,t,x`` rows (UTF-8, LF)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for traj in trajs:
            sensor = traj.meta.get("sensor", traj.source)
            for t, x in zip(traj.times, traj.positions):
                w.writerow((traj.trajectory_id, traj.label, sensor, _format_time(t), _format_value(x)))


def _source_for(sensor):
    try:
        return Sensor.parse(sensor).tag
    except DomainError:
        return "ingested"


def read_trajectories(path):
    """Read a trajectory CSV written by :func:`write_trajectories` or by hand.

    Lines starting with ``#`` are comments.  Empty ``x`` fields load as NaN.
    Sensor names other than ``rigid`` and ``fabric(L)`` give source
    ``"ingested"``; the raw name is kept in ``meta["sensor"]``.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    rows = {}
    order = []
    header_seen = False
    last_id = None
    for lineno, line in enumerate(io.StringIO(text), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = next(csv.reader([line]))
        if not header_seen:
            if tuple(f.strip() for f in fields) != CSV_HEADER:
                raise TrajectoryFormatError(f"expected header {','.join(CSV_HEADER)}", lineno)
            header_seen = True
            continue
        if len(fields) != len(CSV_HEADER):
            raise TrajectoryFormatError(f"expected {len(CSV_HEADER)} fields, got {len(fields)}", lineno)
        tid_s, cls_s, sensor, t_s, x_s = (f.strip() for f in fields)
        try:
            tid, label, t = int(tid_s), int(cls_s), float(t_s)
            x = float(x_s) if x_s else math.nan
        except ValueError as exc:
            raise TrajectoryFormatError(f"cannot parse row: {exc}", lineno) from None
        if label not in (0, 1):
            raise TrajectoryFormatError(f"class must be 0 or 1, got {label}", lineno)
        if tid != last_id:
            if tid in rows:
                raise TrajectoryFormatError(f"rows of trajectory {tid} are not contiguous", lineno)
            rows[tid] = {"label": label, "sensor": sensor, "t": [], "x": [], "line": lineno}
            order.append(tid)
            last_id = tid
        rec = rows[tid]
        if rec["label"] != label or rec["sensor"] != sensor:
            raise TrajectoryFormatError(f"class/sensor changes within trajectory {tid}", lineno)
        if rec["t"] and t <= rec["t"][-1]:
            raise TrajectoryFormatError(f"times of trajectory {tid} are not increasing", lineno)
        rec["t"].append(t)
        rec["x"].append(x)
    if not header_seen:
        raise TrajectoryFormatError("missing header", None)

    out = []
    for tid in order:
        rec = rows[tid]
        t = np.array(rec["t"])
        if t.size < 2:
            raise TrajectoryFormatError(f"trajectory {tid} has fewer than 2 samples", rec["line"])
        dt = np.diff(t)
        ref = np.median(dt)
        if np.any(np.abs(dt - ref) > SPACING_TOLERANCE * ref):
            raise TrajectoryFormatError(f"trajectory {tid} has non-uniform sample spacing", rec["line"])
        out.append(Trajectory(t, np.array(rec["x"]), rec["label"], _source_for(rec["sensor"]), tid,
                              {"sensor": rec["sensor"]}))
    return out


def _missing_runs(mask):
    runs = []
    n = mask.size
    i = 0
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def fill_gaps(traj: Trajectory) -> Trajectory:
    """Replace missing samples with a natural cubic spline through the present ones."""
    missing = traj.missing
    if not missing.any():
        return traj
    n = missing.size
    if missing[0] or missing[-1]:
        raise GapFillError(f"trajectory {traj.trajectory_id}: first and last samples must be present")
    for start, stop in _missing_runs(missing):
        if stop - start + 1 > MAX_GAP_FRACTION * n:
            raise GapFillError(f"trajectory {traj.trajectory_id}: gap of {stop - start + 1} samples "
                               f"exceeds {MAX_GAP_FRACTION:.0%} of {n}")
    present = ~missing
    spline = CubicSpline(traj.times[present], traj.positions[present], bc_type="natural")
    filled = traj.positions.copy()
    filled[missing] = spline(traj.times[missing])
    return traj.with_positions(filled)


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    """Rows of ``window_size`` consecutive positions with per-row labels and source ids."""

    features: np.ndarray
    labels: np.ndarray
    source_ids: np.ndarray
    window_size: int
    sample_rate: float

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[1] != self.window_size:
            raise DomainError("features must have window_size columns")
        if not (self.labels.shape == self.source_ids.shape == (self.features.shape[0],)):
            raise DomainError("labels and source_ids must have one entry per row")

    def __len__(self):
        return self.features.shape[0]

    @property
    def window_seconds(self):
        return self.window_size / self.sample_rate

    def subset(self, rows):
        return WindowedDataset(self.features[rows], self.labels[rows], self.source_ids[rows],
                               self.window_size, self.sample_rate)

    def with_features(self, features):
        return WindowedDataset(features, self.labels, self.source_ids, self.window_size, self.sample_rate)

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        if not parts:
            raise DomainError("nothing to concatenate")
        nw = {p.window_size for p in parts}
        if len(nw) != 1:
            raise DomainError("cannot concatenate datasets with different window sizes")
        return cls(np.vstack([p.features for p in parts]), np.concatenate([p.labels for p in parts]),
                   np.concatenate([p.source_ids for p in parts]), nw.pop(), parts[0].sample_rate)


def window_samples(seconds, sample_rate):
    """Window length in samples for a duration in seconds (at least one)."""
    return max(1, int(round(seconds * sample_rate)))


def window(traj: Trajectory, window_size: int, stride: int = 1) -> WindowedDataset:
    """Overlapping windows ``(x_i, ..., x_{i+Nw-1})`` for ``i = 0, stride, 2*stride, ...``."""
    n = len(traj)
    if not (1 <= window_size <= n):
        raise DomainError(f"window size {window_size} outside [1, {n}]")
    if stride < 1:
        raise DomainError("stride must be at least 1")
    if traj.has_gaps:
        raise DomainError(f"trajectory {traj.trajectory_id} has missing samples; fill gaps first")
    rows = np.lib.stride_tricks.sliding_window_view(traj.positions, window_size)[::stride]
    rows = np.ascontiguousarray(rows)
    m = rows.shape[0]
    return WindowedDataset(rows, np.full(m, traj.label, dtype=int), np.full(m, traj.trajectory_id, dtype=int),
                           window_size, traj.sample_rate)


def build_windows(trajs, window_size, stride=1) -> WindowedDataset:
    return WindowedDataset.concat(window(t, window_size, stride) for t in trajs)


def split_by_trajectory(trajs, fraction=0.5, rng=None):
    """Stratified split at trajectory granularity; returns ``(train, test)`` lists."""
    if not 0.0 < fraction < 1.0:
        raise DomainError("fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(rng)
    train, test = [], []
    for label in (0, 1):
        group = [t for t in trajs if t.label == label]
        if len(group) < 2:
            raise DomainError(f"class {label} has {len(group)} trajectories; need at least 2")
        order = rng.permutation(len(group))
        k = min(max(int(round(fraction * len(group))), 1), len(group) - 1)
        train.extend(group[i] for i in order[:k])
        test.extend(group[i] for i in order[k:])
    return train, test


def split_windows(data: WindowedDataset, fraction=0.5, rng=None):
    """Stratified split at window granularity (leaks overlapping windows; for comparison only)."""
    rng = np.random.default_rng(rng)
    train_rows, test_rows = [], []
    for label in (0, 1):
        rows = np.flatnonzero(data.labels == label)
        if rows.size < 2:
            raise DomainError(f"class {label} has {rows.size} windows; need at least 2")
        rows = rows[rng.permutation(rows.size)]
        k = min(max(int(round(fraction * rows.size)), 1), rows.size - 1)
        train_rows.append(rows[:k])
        test_rows.append(rows[k:])
    return data.subset(np.sort(np.concatenate(train_rows))), data.subset(np.sort(np.concatenate(test_rows)))


@dataclass(frozen=True, eq=False)
class StandardizationParams:
    """Per-column mean and standard deviation (floored at ``STD_FLOOR``)."""

    mean: np.ndarray
    std: np.ndarray

    def to_csv(self, path, comment=None):
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mean", *map(repr, self.mean.tolist())])
            w.writerow(["std", *map(repr, self.std.tolist())])

    @classmethod
    def from_csv(cls, path):
        rows = {}
        with Path(path).open(encoding="utf-8", newline="") as fh:
            for row in csv.reader(line for line in fh if not line.startswith("#")):
                if row:
                    rows[row[0]] = np.array([float(v) for v in row[1:]])
        if set(rows) != {"mean", "std"} or rows["mean"].shape != rows["std"].shape:
            raise TrajectoryFormatError("standardisation file needs matching 'mean' and 'std' rows")
        return cls(rows["mean"], np.maximum(rows["std"], STD_FLOOR))


def fit_standardize(train) -> StandardizationParams:
    """Column statistics of the training rows."""
    x = train.features if isinstance(train, WindowedDataset) else np.asarray(train, dtype=float)
    if x.shape[0] == 0:
        raise DomainError("cannot standardise an empty dataset")
    return StandardizationParams(x.mean(axis=0), np.maximum(x.std(axis=0), STD_FLOOR))


def apply_standardize(params: StandardizationParams, data):
    """z-score ``data`` with ``params``; columns that were constant map to 0."""
    x = data.features if isinstance(data, WindowedDataset) else np.asarray(data, dtype=float)
    z = (x - params.mean) / params.std
    z[:, params.std <= STD_FLOOR] = 0.0
    return data.with_features(z) if isinstance(data, WindowedDataset) else z
