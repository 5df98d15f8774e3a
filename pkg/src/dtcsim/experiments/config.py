"""Run configuration: a single TOML file describes one experiment.

Angles may be given directly in radians (``gamma_y``) or in units of pi
(``gamma_y_over_pi``); the ``_over_pi`` spelling wins if both appear.
Times are in whatever unit the coupling normalization implies — graphs
are rescaled so the median |coupling| is 1, so ``tau = 0.025`` means
J*tau = 0.025.  The AC frequency is resolved against the realized
schedule resonance: ``frequency = "resonance"`` (the default) plus an
optional ``detuning``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on older interpreters
    import tomli as tomllib

from ..sequence import (
    AcDrive,
    PulseSchedule,
    build_single_tone,
    build_three_tone,
    build_two_tone,
)

SCHEDULE_KINDS = ("single_tone", "two_tone", "three_tone", "spin_lock")
EXPERIMENT_KINDS = ("run", "phase", "amplitude", "frequency", "dome", "noise")


class ConfigError(ValueError):
    """Invalid configuration; carries the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully resolved experiment description."""

    # system
    n_spins: int = 10
    r_min: float = 0.9
    r_max: float = 1.1
    # schedule
    schedule_kind: str = "two_tone"
    n_x: tuple[int, ...] = (16,)
    tau: float = 0.025
    tau_x: float = 0.0375
    tau_y: float = 0.075
    theta_x: float = math.pi / 2.0
    gamma_y: float = 0.98 * math.pi
    cycles: int = 500
    # drive
    amplitude: float = 0.0
    phase: float = math.pi / 2.0
    frequency: float | None = None  # None means: realized resonance + detuning
    detuning: float = 0.0
    # disorder
    sigma: float = 0.0
    # ensemble
    n_samples: int = 10
    seed: int = 11
    workers: int = 1
    # experiment
    experiment_kind: str = "run"
    grid: tuple[float, ...] = ()
    initial_axis: str = ""
    component: str = ""
    # propagator
    engine: str = "auto"
    dipolar_during_pulses: bool = False

    def resolved(self) -> "RunConfig":
        """Fill axis/component defaults from the schedule kind."""
        axis = self.initial_axis or ("z" if self.schedule_kind == "single_tone" else "x")
        comp = self.component or ("z" if self.schedule_kind == "single_tone" else "x")
        return replace(self, initial_axis=axis, component=comp)


def _angle(table: dict, key: str, default: float, context: str) -> float:
    over_pi = table.get(f"{key}_over_pi")
    if over_pi is not None:
        if not isinstance(over_pi, (int, float)) or isinstance(over_pi, bool):
            raise ConfigError(f"{context}.{key}_over_pi", "must be a number")
        return float(over_pi) * math.pi
    value = table.get(key, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{context}.{key}", "must be a number (radians)")
    return float(value)


def _number(table: dict, key: str, default, context: str, *,
            minimum=None, strict_min=None, integer=False):
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}.{key}", "must be a number")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{context}.{key}", "must be an integer")
        value = int(value)
    else:
        value = float(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{context}.{key}", f"must be >= {minimum}")
    if strict_min is not None and value <= strict_min:
        raise ConfigError(f"{context}.{key}", f"must be > {strict_min}")
    return value


def config_from_dict(raw: dict) -> RunConfig:
    """Build and validate a RunConfig from nested tables (parsed TOML)."""
    system = raw.get("system", {})
    schedule = raw.get("schedule", {})
    drive = raw.get("drive", {})
    disorder = raw.get("disorder", {})
    ensemble = raw.get("ensemble", {})
    experiment = raw.get("experiment", {})
    propagator = raw.get("propagator", {})

    n_spins = _number(system, "n_spins", 10, "system", minimum=2, integer=True)
    r_min = _number(system, "r_min", 0.9, "system", strict_min=0.0)
    r_max = _number(system, "r_max", 1.1, "system", strict_min=0.0)
    if r_max <= r_min:
        raise ConfigError("system.r_max", "must exceed r_min")

    kind = schedule.get("kind", "two_tone")
    if kind not in SCHEDULE_KINDS:
        raise ConfigError("schedule.kind", f"must be one of {SCHEDULE_KINDS}")
    raw_n_x = schedule.get("n_x", 16)
    if isinstance(raw_n_x, list):
        n_x = tuple(int(v) for v in raw_n_x)
    else:
        n_x = (int(raw_n_x),)
    if kind == "three_tone" and len(n_x) != 2:
        raise ConfigError("schedule.n_x", "three_tone needs a pair [n1, n2]")
    if any(v < 1 for v in n_x) and kind != "single_tone":
        raise ConfigError("schedule.n_x", "block sizes must be >= 1")

    tau = _number(schedule, "tau", 0.025, "schedule", strict_min=0.0)
    tau_x = _number(schedule, "tau_x", 1.5 * tau, "schedule", minimum=0.0)
    tau_y = _number(schedule, "tau_y", 3.0 * tau, "schedule", minimum=0.0)
    theta_x = _angle(schedule, "theta_x", math.pi / 2.0, "schedule")
    gamma_y = _angle(schedule, "gamma_y", 0.98 * math.pi, "schedule")
    cycles = _number(schedule, "cycles", 500, "schedule", minimum=0, integer=True)
    if kind == "single_tone" and not 0.0 <= tau_y < tau:
        raise ConfigError("schedule.tau_y", "single_tone needs tau > tau_y >= 0")

    amplitude = _number(drive, "amplitude", 0.0, "drive", minimum=0.0)
    phase = _angle(drive, "phase", math.pi / 2.0, "drive")
    freq_raw = drive.get("frequency", "resonance")
    if freq_raw == "resonance":
        frequency = None
    elif isinstance(freq_raw, (int, float)) and not isinstance(freq_raw, bool):
        frequency = float(freq_raw)
        if frequency <= 0.0:
            raise ConfigError("drive.frequency", "must be positive or 'resonance'")
    else:
        raise ConfigError("drive.frequency", "must be a number or 'resonance'")
    detuning = _number(drive, "detuning", 0.0, "drive")

    sigma = _number(disorder, "sigma", 0.0, "disorder", minimum=0.0)

    n_samples = _number(ensemble, "n_samples", 10, "ensemble", minimum=1, integer=True)
    seed = _number(ensemble, "seed", 11, "ensemble", integer=True)
    workers = _number(ensemble, "workers", 1, "ensemble", minimum=1, integer=True)

    experiment_kind = experiment.get("kind", "run")
    if experiment_kind not in EXPERIMENT_KINDS:
        raise ConfigError("experiment.kind", f"must be one of {EXPERIMENT_KINDS}")
    grid_raw = experiment.get("grid", [])
    if not isinstance(grid_raw, list):
        raise ConfigError("experiment.grid", "must be a list of numbers")
    grid = tuple(float(v) for v in grid_raw)
    initial_axis = experiment.get("initial_axis", "")
    if initial_axis not in ("", "x", "z"):
        raise ConfigError("experiment.initial_axis", "must be 'x' or 'z'")
    component = experiment.get("component", "")
    if component not in ("", "x", "y", "z"):
        raise ConfigError("experiment.component", "must be one of x, y, z")

    engine = propagator.get("engine", "auto")
    if engine not in ("auto", "dense", "krylov"):
        raise ConfigError("propagator.engine", "must be auto, dense, or krylov")
    dipolar_during_pulses = bool(propagator.get("dipolar_during_pulses", False))

    cfg = RunConfig(
        n_spins=n_spins, r_min=r_min, r_max=r_max,
        schedule_kind=kind, n_x=n_x, tau=tau, tau_x=tau_x, tau_y=tau_y,
        theta_x=theta_x, gamma_y=gamma_y, cycles=cycles,
        amplitude=amplitude, phase=phase, frequency=frequency, detuning=detuning,
        sigma=sigma,
        n_samples=n_samples, seed=seed, workers=workers,
        experiment_kind=experiment_kind, grid=grid,
        initial_axis=initial_axis, component=component,
        engine=engine, dipolar_during_pulses=dipolar_during_pulses,
    )
    return cfg.resolved()


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("(file)", f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("(file)", f"not valid TOML: {exc}") from None
    return config_from_dict(raw)


def build_schedule(cfg: RunConfig, *, gamma_y: float | None = None,
                   cycles: int | None = None) -> PulseSchedule:
    """Construct the configured schedule, optionally overriding gamma_y/cycles."""
    gamma = cfg.gamma_y if gamma_y is None else gamma_y
    n_cycles = cfg.cycles if cycles is None else cycles
    if cfg.schedule_kind == "two_tone":
        return build_two_tone(cfg.n_x[0], cfg.tau, cfg.tau_x, cfg.tau_y,
                              cfg.theta_x, gamma, n_cycles)
    if cfg.schedule_kind == "spin_lock":
        return build_two_tone(cfg.n_x[0], cfg.tau, cfg.tau_x, cfg.tau_y,
                              cfg.theta_x, gamma, n_cycles, include_y=False)
    if cfg.schedule_kind == "single_tone":
        return build_single_tone(cfg.tau, cfg.tau_y, gamma, n_cycles)
    if cfg.schedule_kind == "three_tone":
        return build_three_tone(cfg.n_x[0], cfg.n_x[1], cfg.tau, cfg.tau_x,
                                cfg.tau_y, cfg.theta_x, gamma, n_cycles)
    raise ConfigError("schedule.kind", f"unhandled kind {cfg.schedule_kind}")


def resolve_drive(cfg: RunConfig, schedule: PulseSchedule, *,
                  amplitude: float | None = None,
                  phase: float | None = None,
                  detuning: float | None = None) -> AcDrive | None:
    """Turn the drive table into a concrete AcDrive against this schedule.

    Returns None when the (possibly overridden) amplitude is zero, which
    the propagator treats as no AC field at all.
    """
    amp = cfg.amplitude if amplitude is None else amplitude
    if amp == 0.0:
        return None
    ph = cfg.phase if phase is None else phase
    det = cfg.detuning if detuning is None else detuning
    return schedule.resonant_drive(amp, phase=ph, detuning=det,
                                   frequency=cfg.frequency)
