"""Timestamped one-dimensional position series."""
from __future__ import annotations

import re
from fractions import Fraction
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

_FABRIC_TAG = re.compile(r"^fabric\((?P<length>[^)]+)\)$")


@dataclass(frozen=True)
class Sensor:
    """Where a trajectory was recorded: rigidly on the body or on fabric of ``length``."""

    length: float | None = None

    def __post_init__(self):
        if self.length is not None and not (0.0 < self.length <= 1.0):
            raise DomainError(f"fabric length must lie in (0, 1], got {self.length!r}")

    @property
    def is_fabric(self):
        return self.length is not None

    @property
    def tag(self):
        return "rigid" if self.length is None else f"fabric({self.length!r})"

    @classmethod
    def parse(cls, tag):
        tag = tag.strip()
        if tag == "rigid":
            return cls()
        m = _FABRIC_TAG.match(tag)
        if m is None:
            raise DomainError(f"unknown sensor tag {tag!r}")
        try:
            length = float(Fraction(m.group("length").strip()))
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"bad fabric length in {tag!r}") from None
        return cls(length)

    def __str__(self):
        return self.tag


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Positions (metres) at uniformly spaced times (seconds).

    ``positions`` may hold NaN for missing samples; see
    :func:`fabricmotion.pipeline.fill_gaps`.  ``source`` is ``"rigid"``,
    ``"fabric(L)"`` or ``"ingested"``.
    """

    times: np.ndarray
    positions: np.ndarray
    label: int
    source: str
    trajectory_id: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.positions, dtype=float)
        if t.ndim != 1 or t.shape != x.shape:
            raise DomainError("times and positions must be 1-D arrays of equal length")
        if t.size < 2:
            raise DomainError("a trajectory needs at least 2 samples")
        if not np.all(np.diff(t) > 0):
            raise DomainError("times must be strictly increasing")
        if self.label not in (0, 1):
            raise DomainError(f"label must be 0 or 1, got {self.label!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", x)

    def __len__(self):
        return self.times.size

    @property
    def sample_rate(self):
        return (self.times.size - 1) / (self.times[-1] - self.times[0])

    @property
    def duration(self):
        return self.times.size / self.sample_rate

    @property
    def missing(self):
        return np.isnan(self.positions)

    @property
    def has_gaps(self):
        return bool(self.missing.any())

    def with_positions(self, positions, **changes):
        return replace(self, positions=np.asarray(positions, dtype=float), **changes)
