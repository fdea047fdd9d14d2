"""Scotch-yoke trajectories seen by a rigid sensor and by sensors on fabric."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, replace

import numpy as np

from .distributions import excitation
from .errors import DomainError
from .trajectory import Sensor, Trajectory

__all__ = [
    "YokeConfig",
    "fabric_trajectory",
    "generate_dataset",
    "pooled_positions",
    "rigid_trajectory",
    "trajectory_seed",
]


@dataclass(frozen=True)
class YokeConfig:
    """Sinusoidal yoke motion ``A sin(omega t + phase)``.

    ``phase=None`` draws the phase uniformly from ``(-pi, pi]`` once per
    trajectory.
    """

    omega: float = 1.0
    amplitude: float = 1.0
    phase: float | None = None
    sample_rate: float = 40.0
    duration: float = 5.0

    def __post_init__(self):
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise DomainError(f"amplitude must be positive, got {self.amplitude!r}")
        if not (self.omega >= 0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be non-negative, got {self.omega!r}")
        if not (self.sample_rate > 0 and self.duration > 0):
            raise DomainError("sample_rate and duration must be positive")
        if self.phase is not None and not math.isfinite(self.phase):
            raise DomainError("phase must be finite")
        if self.n_samples < 2:
            raise DomainError(f"duration x sample_rate gives {self.n_samples} samples; need >= 2")

    @property
    def n_samples(self):
        return int(round(self.duration * self.sample_rate))

    @property
    def times(self):
        return np.arange(self.n_samples) / self.sample_rate


def _draw_phase(config, rng):
    if config.phase is not None:
        return float(config.phase)
    # (-pi, pi]: reflect numpy's half-open [-pi, pi)
    return -float(rng.uniform(-math.pi, math.pi))


def _rigid_positions(config, phase):
    return config.amplitude * np.sin(config.omega * config.times + phase)


def rigid_trajectory(config: YokeConfig, rng, label=0, trajectory_id=0) -> Trajectory:
    """Body position sampled at ``config.sample_rate``."""
    phase = _draw_phase(config, rng)
    return Trajectory(config.times, _rigid_positions(config, phase), label, "rigid",
                      trajectory_id, {"phase": phase, "omega": config.omega})


def fabric_trajectory(config: YokeConfig, length, rng, label=0, trajectory_id=0) -> Trajectory:
    """Body position plus i.i.d. offsets ``U(-nu L, nu L)`` per sample.

    The phase (if random) is drawn from ``rng`` before the offsets, so a
    rigid and a fabric trajectory built from equally seeded generators share
    the same underlying motion.
    """
    sensor = Sensor(length)
    phase = _draw_phase(config, rng)
    half = excitation(config.omega) * sensor.length
    offsets = rng.uniform(-half, half, config.n_samples) if half > 0 else np.zeros(config.n_samples)
    positions = _rigid_positions(config, phase) + offsets
    return Trajectory(config.times, positions, label, sensor.tag, trajectory_id,
                      {"phase": phase, "omega": config.omega, "half_width": half})


def trajectory_seed(master_seed, label, index, sensor=None):
    """Seed sequence for one trajectory; stable across runs and platforms."""
    key = (label, index) if sensor is None else (zlib.crc32(sensor.encode()), label, index)
    return np.random.SeedSequence(master_seed, spawn_key=key)


def generate_dataset(low_omega, high_omega, n_per_class, sensors, base=None, master_seed=0):
    """Labelled trajectories for every sensor: class 0 at ``low_omega``, class 1 at ``high_omega``.

    Returns ``{sensor_tag: [Trajectory, ...]}`` ordered by (class, index).
    Trial ``(class, index)`` uses the same phase for every sensor; fabric
    offsets come from a sensor-specific stream.
    """
    if n_per_class < 1:
        raise DomainError("n_per_class must be at least 1")
    sensors = [s if isinstance(s, Sensor) else Sensor.parse(s) for s in sensors]
    if not sensors:
        raise DomainError("at least one sensor is required")
    base = YokeConfig() if base is None else base
    configs = [replace(base, omega=low_omega), replace(base, omega=high_omega)]
    out = {}
    for k, sensor in enumerate(sensors):
        trajs = []
        for label, cfg in enumerate(configs):
            for i in range(n_per_class):
                phase_rng = np.random.default_rng(trajectory_seed(master_seed, label, i))
                fixed = replace(cfg, phase=_draw_phase(cfg, phase_rng))
                tid = k * 2 * n_per_class + label * n_per_class + i
                if sensor.is_fabric:
                    noise_rng = np.random.default_rng(trajectory_seed(master_seed, label, i, sensor.tag))
                    traj = fabric_trajectory(fixed, sensor.length, noise_rng, label, tid)
                else:
                    traj = rigid_trajectory(fixed, None, label, tid)
                trajs.append(traj)
        out[sensor.tag] = trajs
    return out


def pooled_positions(omega, sensor, n_samples, base=None, master_seed=0, label=0):
    """``n_samples`` positions pooled over independent random-phase trajectories."""
    sensor = sensor if isinstance(sensor, Sensor) else Sensor.parse(sensor)
    base = YokeConfig() if base is None else base
    n_traj = -(-n_samples // base.n_samples)
    trajs = generate_dataset(omega, omega, n_traj, [sensor], base, master_seed)[sensor.tag]
    trajs = [t for t in trajs if t.label == label]
    return np.concatenate([t.positions for t in trajs])[:n_samples]
