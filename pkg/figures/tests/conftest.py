"""Session fixtures: tiny run directories for every experiment kind.

The fixtures drive the simulator package once per session to produce
real run directories; the figure package under test then consumes them
purely through the files on disk.
"""

from __future__ import annotations

import math

import pytest

from dtcsim.experiments.config import config_from_dict
from dtcsim.experiments.runner import run_config

_BASE = {
    "system": {"n_spins": 6},
    "schedule": {"cycles": 120},
    "drive": {"amplitude": 0.2},
    "ensemble": {"n_samples": 2, "seed": 7},
}

_EXPERIMENTS = {
    "run": {"kind": "run"},
    "phase": {"kind": "phase", "grid": [0.0, math.pi / 4, math.pi / 2]},
    "amplitude": {"kind": "amplitude", "grid": [0.05, 0.2]},
    "frequency": {"kind": "frequency", "grid": [-0.05, 0.0, 0.05]},
    "dome": {"kind": "dome", "grid": [1.0, 2.0, 3.0]},
    "noise": {"kind": "noise", "grid": [0.0, 0.5]},
}


@pytest.fixture(scope="session")
def run_dirs(tmp_path_factory):
    """Map experiment kind -> freshly produced run directory."""
    root = tmp_path_factory.mktemp("runs")
    dirs = {}
    for name, experiment in _EXPERIMENTS.items():
        cfg = config_from_dict({**_BASE, "experiment": experiment})
        out = root / name
        result = run_config(cfg, out)
        assert result.exit_code == 0, f"fixture run {name} reported failures"
        dirs[name] = out
    return dirs
