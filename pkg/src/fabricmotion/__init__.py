"""Probabilistic model of motion sensing through loose clothing.

A rigid sinusoidal motion plus a frequency-dependent uniform fabric offset,
its closed-form distribution theory, KS distances between movement classes,
and a simulation-to-SVM activity-recognition pipeline.
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

from .distributions import (FabricDistParams, KsResult, RigidLaw, analytic_ks, excitation, fabric_cdf,
                            fabric_pdf, ks_derivative_dnu, ks_derivative_length, rigid_cdf, rigid_pdf,
                            supremum_ks)
from .empirical import Ecdf, convolution_cdf_oracle, estimate_period, one_sample_ks, two_sample_ks
from .simulate import YokeConfig, fabric_trajectory, generate_dataset, rigid_trajectory
from .trajectory import Sensor, Trajectory

__all__ = [
    "Ecdf",
    "FabricDistParams",
    "KsResult",
    "RigidLaw",
    "Sensor",
    "Trajectory",
    "YokeConfig",
    "analytic_ks",
    "convolution_cdf_oracle",
    "estimate_period",
    "excitation",
    "fabric_cdf",
    "fabric_pdf",
    "fabric_trajectory",
    "generate_dataset",
    "ks_derivative_dnu",
    "ks_derivative_length",
    "one_sample_ks",
    "rigid_cdf",
    "rigid_pdf",
    "rigid_trajectory",
    "supremum_ks",
    "two_sample_ks",
]
