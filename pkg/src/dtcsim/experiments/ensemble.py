"""Ensemble execution: seeded trajectory batches, parameter sweeps, dome maps.

Sample ``i`` of an ensemble draws its cluster with seed ``base + i`` and
its disorder with seed ``base + i + DISORDER_SEED_OFFSET``.  Every sweep
point reuses the same seeds, so point-to-point differences reflect the
swept parameter rather than resampling noise (common random numbers),
and response-curve fits see mostly common-mode ensemble scatter.

Workers receive self-contained task dicts (config + per-sample seeds +
parameter overrides) and rebuild graph, Hamiltonian, and schedule
locally, so the pool never ships operator matrices.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..analysis import (
    ExponentialFit,
    beat_frequency_from_series,
    demodulated,
    fidelity,
    fit_exponential,
    lifetime_1e,
)
from ..lattice import normalized_to_median, orient_graph, sample_graph
from ..operators import build_hdd, build_hsl
from ..propagator import (
    PropagatorOptions,
    TimeTrace,
    cached_operators,
    evolve,
    initial_state,
    make_engine,
)
from ..sequence import sample_disorder, schedule_hash
from .config import RunConfig, build_schedule, resolve_drive

DISORDER_SEED_OFFSET = 500_000

DEFAULT_PHASE_GRID = tuple(np.linspace(0.0, 2.0 * math.pi, 13))
DEFAULT_AMPLITUDE_GRID = tuple(np.geomspace(0.05, 1.0, 8))
DEFAULT_DOME_GAMMAS = tuple(
    np.unique(np.append(np.linspace(0.0, 1.3 * math.pi, 20), math.pi))
)


@dataclass(frozen=True)
class SampleResult:
    """One trajectory's observables, or the error that prevented them."""

    index: int
    graph_seed: int
    disorder_seed: int | None
    f: float | None
    lifetime: float | None  # 1/e envelope crossing; None when censored/failed
    censored: bool
    demod_times: np.ndarray | None
    demod_values: np.ndarray | None
    j_spinlock: float | None = None
    trace: TimeTrace | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class PointResult:
    """Ensemble aggregate at one parameter point.

    ``t2_fit`` is the exponential fit to the ensemble-mean demodulated
    trace (not a mean of per-sample fits); ``t2_1e_mean`` averages the
    per-sample 1/e crossings over uncensored samples only.
    """

    label: float | None
    amplitude: float
    phase: float
    detuning: float
    sigma: float
    period: float
    f_res: float
    point_hash: str  # hash of (schedule, drive) shared by the point's samples
    samples: tuple[SampleResult, ...]
    f_mean: float | None
    f_std: float | None
    f_se: float | None
    demod_times: np.ndarray | None
    mean_demod: np.ndarray | None
    t2_fit: ExponentialFit | None
    t2_1e_mean: float | None
    n_censored: int
    beat: float | None
    j_spinlock_mean: float | None

    @property
    def n_ok(self) -> int:
        return sum(1 for s in self.samples if s.ok)

    @property
    def n_failed(self) -> int:
        return sum(1 for s in self.samples if not s.ok)

    @property
    def errors(self) -> tuple[str, ...]:
        return tuple(s.error for s in self.samples if s.error)


@dataclass(frozen=True)
class SweepResult:
    """A grid of PointResults, with drive-off partner points when produced."""

    kind: str
    grid: tuple[float, ...]
    points: tuple[PointResult, ...]
    baselines: tuple[PointResult, ...] = ()


@dataclass(frozen=True)
class DomeResult:
    """Ensemble-mean demodulated signal over (kick angle, kick count)."""

    gammas: tuple[float, ...]
    times: np.ndarray  # post-kick sample times, shared by every column
    field: np.ndarray  # shape (len(gammas), len(times))
    with_ac: bool
    n_samples: int
    n_failed: int
    period: float
    f_res: float
    errors: tuple[str, ...] = ()


def _sample_seeds(cfg: RunConfig, index: int, sigma: float) -> tuple[int, int | None]:
    graph_seed = cfg.seed + index
    disorder_seed = cfg.seed + index + DISORDER_SEED_OFFSET if sigma > 0.0 else None
    return graph_seed, disorder_seed


def _build_system(cfg: RunConfig, graph_seed: int):
    """(graph, ops, hdd) for one sample: place, orient, normalize, lift."""
    graph = normalized_to_median(
        orient_graph(sample_graph(cfg.n_spins, cfg.r_min, cfg.r_max, graph_seed))
    )
    ops = cached_operators(cfg.n_spins)
    return graph, ops, build_hdd(graph, ops)


def _options(cfg: RunConfig) -> PropagatorOptions:
    return PropagatorOptions(
        engine=cfg.engine, dipolar_during_pulses=cfg.dipolar_during_pulses
    )


def _trajectory_task(task: dict) -> SampleResult:
    """Run one seeded trajectory; never raises (errors travel in the result)."""
    cfg: RunConfig = task["cfg"]
    index = task["index"]
    graph_seed = task["graph_seed"]
    disorder_seed = task["disorder_seed"]
    try:
        schedule = build_schedule(cfg, gamma_y=task.get("gamma_y"))
        drive = resolve_drive(
            cfg,
            schedule,
            amplitude=task.get("amplitude"),
            phase=task.get("phase"),
            detuning=task.get("detuning"),
        )
        graph, ops, hdd = _build_system(cfg, graph_seed)
        j_spinlock = build_hsl(graph, ops).j_spinlock
        sigma = task["sigma"]
        disorder = (
            sample_disorder(sigma, cfg.n_spins, disorder_seed) if sigma > 0.0 else None
        )
        state = initial_state(ops, cfg.initial_axis)
        trace = evolve(
            state, schedule, hdd, drive, disorder, ops=ops, options=_options(cfg)
        )
        comp = cfg.component
        has_kicks = bool(np.any(trace.parity > 0))
        fres = fidelity(trace, comp, samples="post_kick" if has_kicks else "all")
        life = lifetime_1e(trace, comp)
        if has_kicks:
            times, dem, _ = demodulated(trace, comp)
        else:
            times, dem = trace.times, trace.component(comp)
        return SampleResult(
            index=index,
            graph_seed=graph_seed,
            disorder_seed=disorder_seed,
            f=fres.f,
            lifetime=life.lifetime,
            censored=life.censored,
            demod_times=times,
            demod_values=dem,
            j_spinlock=j_spinlock,
            trace=trace if task["keep_trace"] else None,
        )
    except Exception as exc:  # worker boundary: report, let the point decide
        return SampleResult(
            index=index,
            graph_seed=graph_seed,
            disorder_seed=disorder_seed,
            f=None,
            lifetime=None,
            censored=False,
            demod_times=None,
            demod_values=None,
            error=f"{type(exc).__name__}: {exc}",
        )


def _run_tasks(tasks: list[dict], workers: int, fn=_trajectory_task) -> list:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _aggregate(
    label: float | None,
    amplitude: float,
    phase: float,
    detuning: float,
    sigma: float,
    period: float,
    f_res: float,
    point_hash: str,
    samples: list[SampleResult],
) -> PointResult:
    ok = [s for s in samples if s.ok]
    base = dict(
        label=label,
        amplitude=amplitude,
        phase=phase,
        detuning=detuning,
        sigma=sigma,
        period=period,
        f_res=f_res,
        point_hash=point_hash,
        samples=tuple(samples),
    )
    if not ok:
        return PointResult(
            **base,
            f_mean=None,
            f_std=None,
            f_se=None,
            demod_times=None,
            mean_demod=None,
            t2_fit=None,
            t2_1e_mean=None,
            n_censored=0,
            beat=None,
            j_spinlock_mean=None,
        )
    fvals = np.array([s.f for s in ok])
    f_mean = float(np.mean(fvals))
    f_std = float(np.std(fvals, ddof=1)) if len(fvals) > 1 else None
    f_se = f_std / math.sqrt(len(fvals)) if f_std is not None else None

    times = ok[0].demod_times
    mean_demod = np.mean(np.stack([s.demod_values for s in ok]), axis=0)

    t2_fit = None
    if len(times) >= 3:
        try:
            t2_fit = fit_exponential(times, mean_demod)
        except (RuntimeError, ValueError):
            t2_fit = None

    lifetimes = [s.lifetime for s in ok if not s.censored and s.lifetime is not None]
    t2_1e_mean = float(np.mean(lifetimes)) if lifetimes else None
    n_censored = sum(1 for s in ok if s.censored)

    return PointResult(
        **base,
        f_mean=f_mean,
        f_std=f_std,
        f_se=f_se,
        demod_times=times,
        mean_demod=mean_demod,
        t2_fit=t2_fit,
        t2_1e_mean=t2_1e_mean,
        n_censored=n_censored,
        beat=beat_frequency_from_series(times, mean_demod),
        j_spinlock_mean=float(np.mean([s.j_spinlock for s in ok])),
    )


def run_point(
    cfg: RunConfig,
    *,
    label: float | None = None,
    amplitude: float | None = None,
    phase: float | None = None,
    detuning: float | None = None,
    sigma: float | None = None,
    gamma_y: float | None = None,
    keep_traces: bool = True,
) -> PointResult:
    """Run the configured ensemble at one parameter point.

    Keyword overrides replace the config's drive/disorder values for
    this point only; seeds stay those of the config, so overridden
    points are paired sample-by-sample with the unmodified run.
    """
    cfg = cfg.resolved()
    amp = cfg.amplitude if amplitude is None else amplitude
    ph = cfg.phase if phase is None else phase
    det = cfg.detuning if detuning is None else detuning
    sig = cfg.sigma if sigma is None else sigma
    schedule = build_schedule(cfg, gamma_y=gamma_y)
    drive = resolve_drive(cfg, schedule, amplitude=amp, phase=ph, detuning=det)
    point_hash = schedule_hash(schedule, drive, None)
    tasks = []
    for i in range(cfg.n_samples):
        graph_seed, disorder_seed = _sample_seeds(cfg, i, sig)
        tasks.append(
            dict(
                cfg=cfg,
                index=i,
                graph_seed=graph_seed,
                disorder_seed=disorder_seed,
                amplitude=amp,
                phase=ph,
                detuning=det,
                sigma=sig,
                gamma_y=gamma_y,
                keep_trace=keep_traces,
            )
        )
    samples = _run_tasks(tasks, cfg.workers)
    return _aggregate(
        label, amp, ph, det, sig, schedule.period, schedule.f_res, point_hash, samples
    )


def run_ensemble(cfg: RunConfig, *, keep_traces: bool = True) -> PointResult:
    """Run the config exactly as written (no parameter overrides)."""
    return run_point(cfg, keep_traces=keep_traces)


def sweep_phase(cfg: RunConfig, phases=None) -> SweepResult:
    """Fixed-amplitude drive at a grid of AC phases, plus a drive-off baseline."""
    grid = tuple(phases) if phases is not None else (cfg.grid or DEFAULT_PHASE_GRID)
    points = tuple(
        run_point(cfg, label=p, phase=p, keep_traces=False) for p in grid
    )
    baseline = run_point(cfg, label=None, amplitude=0.0, keep_traces=False)
    return SweepResult("phase", grid, points, (baseline,))


def sweep_amplitude(cfg: RunConfig, amplitudes=None) -> SweepResult:
    """Response curve over drive amplitude, plus a drive-off baseline."""
    grid = (
        tuple(amplitudes)
        if amplitudes is not None
        else (cfg.grid or DEFAULT_AMPLITUDE_GRID)
    )
    points = tuple(
        run_point(cfg, label=a, amplitude=a, keep_traces=False) for a in grid
    )
    baseline = run_point(cfg, label=None, amplitude=0.0, keep_traces=False)
    return SweepResult("amplitude", grid, points, (baseline,))


def sweep_frequency(cfg: RunConfig, detunings=None) -> SweepResult:
    """Response over detuning from the schedule resonance, plus drive-off."""
    grid = tuple(detunings) if detunings is not None else cfg.grid
    if not grid:
        raise ValueError("frequency sweep needs a detuning grid")
    points = tuple(
        run_point(cfg, label=d, detuning=d, keep_traces=False) for d in grid
    )
    baseline = run_point(cfg, label=None, amplitude=0.0, keep_traces=False)
    return SweepResult("frequency", grid, points, (baseline,))


def sweep_disorder(cfg: RunConfig, sigmas=None) -> SweepResult:
    """Drive-on vs drive-off points at each static-disorder width."""
    grid = tuple(sigmas) if sigmas is not None else cfg.grid
    if not grid:
        raise ValueError("disorder sweep needs a sigma grid")
    points = tuple(
        run_point(cfg, label=s, sigma=s, keep_traces=False) for s in grid
    )
    baselines = tuple(
        run_point(cfg, label=s, sigma=s, amplitude=0.0, keep_traces=False)
        for s in grid
    )
    return SweepResult("noise", grid, points, baselines)


def _dome_sample_task(task: dict) -> dict:
    """All kick-angle columns for one seeded sample, sharing one engine.

    The schedule's segment durations do not depend on the kick angle, so
    the drive, the free-segment unitaries, and the x-pulse cache are
    valid across every column; only y-pulse entries differ per angle.
    """
    cfg: RunConfig = task["cfg"]
    gammas = task["gammas"]
    try:
        graph, ops, hdd = _build_system(cfg, task["graph_seed"])
        sigma = task["sigma"]
        disorder = (
            sample_disorder(sigma, cfg.n_spins, task["disorder_seed"])
            if sigma > 0.0
            else None
        )
        amp = cfg.amplitude if task["with_ac"] else 0.0
        schedule0 = build_schedule(cfg, gamma_y=gammas[0])
        drive = resolve_drive(cfg, schedule0, amplitude=amp)
        options = _options(cfg)
        engine = make_engine(hdd, ops, drive, disorder, options)
        state = initial_state(ops, cfg.initial_axis)
        rows = []
        times = None
        for g in gammas:
            schedule = build_schedule(cfg, gamma_y=g)
            trace = evolve(
                state,
                schedule,
                hdd,
                drive,
                disorder,
                ops=ops,
                options=options,
                engine=engine,
            )
            t, dem, _ = demodulated(trace, cfg.component)
            times = t
            rows.append(dem)
        return dict(index=task["index"], times=times, field=np.stack(rows), error=None)
    except Exception as exc:
        return dict(
            index=task["index"],
            times=None,
            field=None,
            error=f"{type(exc).__name__}: {exc}",
        )


def map_dome(
    cfg: RunConfig, gammas=None, *, with_ac: bool = True
) -> DomeResult:
    """Ensemble-mean demodulated signal over a grid of kick angles.

    Every sample reuses one propagation engine across all angles; the
    drive (resolved once, against the angle-independent schedule
    timing) is switched off entirely when ``with_ac`` is false.
    """
    cfg = cfg.resolved()
    grid = tuple(gammas) if gammas is not None else (cfg.grid or DEFAULT_DOME_GAMMAS)
    schedule0 = build_schedule(cfg, gamma_y=grid[0])
    tasks = []
    for i in range(cfg.n_samples):
        graph_seed, disorder_seed = _sample_seeds(cfg, i, cfg.sigma)
        tasks.append(
            dict(
                cfg=cfg,
                index=i,
                graph_seed=graph_seed,
                disorder_seed=disorder_seed,
                sigma=cfg.sigma,
                gammas=grid,
                with_ac=with_ac,
            )
        )
    results = _run_tasks(tasks, cfg.workers, fn=_dome_sample_task)
    ok = [r for r in results if r["error"] is None]
    errors = tuple(r["error"] for r in results if r["error"] is not None)
    if not ok:
        raise RuntimeError(
            "every dome sample failed: " + "; ".join(errors[:3])
        )
    times = ok[0]["times"]
    field = np.mean(np.stack([r["field"] for r in ok]), axis=0)
    return DomeResult(
        gammas=grid,
        times=times,
        field=field,
        with_ac=with_ac,
        n_samples=len(ok),
        n_failed=len(errors),
        period=schedule0.period,
        f_res=schedule0.f_res,
        errors=errors,
    )
