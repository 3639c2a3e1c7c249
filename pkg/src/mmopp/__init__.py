"""Simulation and analysis toolkit for a three-species fast-slow
predator-prey system with demographic noise."""

__version__ = "0.1.0"

from .model import ModelParams, NoiseParams, baseline_params  # noqa: F401
