"""Experiment orchestration: configs, ensembles, sweeps, persistence, CLI."""

from .config import ConfigError, RunConfig, load_config
from .ensemble import (
    DomeResult,
    PointResult,
    SampleResult,
    SweepResult,
    map_dome,
    run_ensemble,
    run_point,
    sweep_amplitude,
    sweep_disorder,
    sweep_frequency,
    sweep_phase,
)
from .runner import run_config

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "SampleResult",
    "PointResult",
    "SweepResult",
    "DomeResult",
    "run_point",
    "run_ensemble",
    "sweep_phase",
    "sweep_amplitude",
    "sweep_frequency",
    "sweep_disorder",
    "map_dome",
    "run_config",
]
