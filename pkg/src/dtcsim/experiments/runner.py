"""Experiment dispatch: one validated config in, one run directory out.

The run directory holds the versioned CSVs plus ``manifest.json``; see
:mod:`dtcsim.experiments.io` for the formats.  Reruns with the same
config and seeds produce byte-identical files (no timestamps, repr
floats, deterministic ordering).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from pathlib import Path

from ..analysis import effective_field, prethermal_oracle
from . import io
from .config import RunConfig, build_schedule, load_config, resolve_drive
from .ensemble import (
    DomeResult,
    PointResult,
    SweepResult,
    map_dome,
    run_point,
    sweep_amplitude,
    sweep_disorder,
    sweep_frequency,
    sweep_phase,
)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_PARTIAL = 2


@dataclass(frozen=True)
class RunOutput:
    """What run_config produced: directory, manifest content, exit code."""

    out_dir: Path
    manifest: dict
    exit_code: int


def _config_echo(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    echo["n_x"] = list(cfg.n_x)
    echo["grid"] = list(cfg.grid)
    return echo


def _oracle_block(cfg: RunConfig, point: PointResult) -> dict | None:
    """Plateau prediction for this point's drive, plus the raw residual.

    The prediction is exact only up to one global scale (the coupling
    norm convention), so the residual is recorded as data, not judged.
    """
    if point.amplitude == 0.0 or point.j_spinlock_mean is None:
        return None
    schedule = build_schedule(cfg)
    drive = resolve_drive(
        cfg,
        schedule,
        amplitude=point.amplitude,
        phase=point.phase,
        detuning=point.detuning,
    )
    if drive is None:
        return None
    b_eff = effective_field(drive, cfg.tau_y, cfg.gamma_y)
    pred = prethermal_oracle(b_eff, point.j_spinlock_mean)
    return {
        "b_eff": b_eff,
        "m_plateau": pred.m_plateau,
        "inv_temperature": pred.inv_temperature,
        "residual": None if point.f_mean is None else point.f_mean - pred.m_plateau,
    }


def _point_records(cfg: RunConfig, points, baselines) -> list[dict]:
    records = []
    for role, group in (("point", points), ("baseline", baselines)):
        for point in group:
            record = io.point_record(point, role)
            oracle = _oracle_block(cfg, point)
            if oracle is not None:
                record["analysis"]["oracle"] = oracle
            records.append(record)
    return records


def _exit_code(points, baselines) -> int:
    for point in (*points, *baselines):
        if point.n_failed > 0:
            return EXIT_PARTIAL
    return EXIT_OK


def _write_point_traces(out_dir: Path, point: PointResult, role: str) -> list[str]:
    names = []
    for sample in point.samples:
        if sample.trace is None:
            continue
        name = f"trace_{role}_{sample.index:03d}.csv"
        io.write_trace_csv(
            out_dir / name,
            sample.trace,
            graph_seed=sample.graph_seed,
            disorder_seed=sample.disorder_seed,
        )
        names.append(name)
    return names


def _run_single(cfg: RunConfig, out_dir: Path) -> tuple[dict, int]:
    point = run_point(cfg, keep_traces=True)
    baselines: tuple[PointResult, ...] = ()
    if cfg.amplitude > 0.0:
        baselines = (run_point(cfg, amplitude=0.0, keep_traces=True),)

    traces = _write_point_traces(out_dir, point, "point")
    for baseline in baselines:
        traces += _write_point_traces(out_dir, baseline, "baseline")
    io.write_summary_csv(
        out_dir / "summary.csv", (point,), baselines, experiment="run"
    )
    io.write_demod_csv(out_dir / "demod.csv", (point,), baselines)

    manifest = {
        "experiment": "run",
        "config": _config_echo(cfg),
        "points": _point_records(cfg, (point,), baselines),
        "files": {"summary": "summary.csv", "demod": "demod.csv", "traces": traces},
    }
    return manifest, _exit_code((point,), baselines)


_SWEEPS = {
    "phase": sweep_phase,
    "amplitude": sweep_amplitude,
    "frequency": sweep_frequency,
    "noise": sweep_disorder,
}


def _run_sweep(cfg: RunConfig, out_dir: Path) -> tuple[dict, int]:
    sweep: SweepResult = _SWEEPS[cfg.experiment_kind](cfg)
    io.write_summary_csv(
        out_dir / "summary.csv",
        sweep.points,
        sweep.baselines,
        experiment=sweep.kind,
    )
    io.write_demod_csv(out_dir / "demod.csv", sweep.points, sweep.baselines)
    manifest = {
        "experiment": sweep.kind,
        "config": _config_echo(cfg),
        "grid": list(sweep.grid),
        "points": _point_records(cfg, sweep.points, sweep.baselines),
        "files": {"summary": "summary.csv", "demod": "demod.csv"},
    }
    return manifest, _exit_code(sweep.points, sweep.baselines)


def _dome_record(dome: DomeResult, name: str) -> dict:
    return {
        "file": name,
        "with_ac": dome.with_ac,
        "gammas": list(dome.gammas),
        "n_samples": dome.n_samples,
        "n_failed": dome.n_failed,
        "errors": list(dome.errors),
        "period": dome.period,
        "f_res": dome.f_res,
    }


def _run_dome(cfg: RunConfig, out_dir: Path) -> tuple[dict, int]:
    domes = []
    free = map_dome(cfg, with_ac=False)
    io.write_dome_csv(out_dir / "dome_free.csv", free)
    domes.append(_dome_record(free, "dome_free.csv"))
    results = [free]
    if cfg.amplitude > 0.0:
        driven = map_dome(cfg, with_ac=True)
        io.write_dome_csv(out_dir / "dome_ac.csv", driven)
        domes.append(_dome_record(driven, "dome_ac.csv"))
        results.append(driven)
    manifest = {
        "experiment": "dome",
        "config": _config_echo(cfg),
        "domes": domes,
        "files": {"domes": [d["file"] for d in domes]},
    }
    code = EXIT_PARTIAL if any(d.n_failed for d in results) else EXIT_OK
    return manifest, code


def run_config(
    config: RunConfig | str | Path,
    out_dir: str | Path,
    *,
    workers: int | None = None,
) -> RunOutput:
    """Execute the experiment a config describes into a run directory.

    Accepts a RunConfig or a path to one; ``workers`` overrides the
    configured pool size.  Raises ConfigError for invalid configs;
    sample-level failures are recorded in the manifest and reflected
    in the exit code instead of raising.
    """
    cfg = config if isinstance(config, RunConfig) else load_config(config)
    cfg = cfg.resolved()
    if workers is not None:
        cfg = replace(cfg, workers=workers)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.experiment_kind == "run":
        manifest, code = _run_single(cfg, out_dir)
    elif cfg.experiment_kind in _SWEEPS:
        manifest, code = _run_sweep(cfg, out_dir)
    elif cfg.experiment_kind == "dome":
        manifest, code = _run_dome(cfg, out_dir)
    else:  # config validation makes this unreachable; keep the guard
        raise ValueError(f"unhandled experiment kind {cfg.experiment_kind!r}")

    manifest["format"] = io.MANIFEST_FORMAT
    io.write_manifest(out_dir / "manifest.json", manifest)
    return RunOutput(out_dir=out_dir, manifest=manifest, exit_code=code)


def format_report(manifest: dict) -> str:
    """Human-readable digest of a run directory's manifest."""
    lines = [f"experiment: {manifest.get('experiment')}"]
    cfg = manifest.get("config", {})
    lines.append(
        "system: L={n_spins} samples={n_samples} cycles={cycles} seed={seed}".format(
            **{
                k: cfg.get(k)
                for k in ("n_spins", "n_samples", "cycles", "seed")
            }
        )
    )
    for record in manifest.get("points", []):
        analysis = record.get("analysis", {})
        label = record.get("label")
        head = f"  [{record['role']}]"
        if label is not None:
            head += f" label={label:+.6g}"
        f_mean, f_se = analysis.get("f_mean"), analysis.get("f_se")
        if f_mean is None:
            head += " FAILED: " + "; ".join(record.get("errors", [])[:2])
        else:
            head += f" F={f_mean:+.6f}"
            if f_se:
                head += f" +/- {f_se:.6f}"
            t2 = analysis.get("t2_fit_lifetime")
            if t2 is not None:
                head += f" T2'={t2:.4g}"
            beat = analysis.get("beat")
            if beat is not None:
                head += f" beat={beat:.4g}"
        if record.get("n_failed"):
            head += f" ({record['n_failed']} sample(s) failed)"
        lines.append(head)
    for dome in manifest.get("domes", []):
        lines.append(
            "  [dome] file={file} with_ac={with_ac} angles={n} samples={ns}".format(
                file=dome["file"],
                with_ac=dome["with_ac"],
                n=len(dome["gammas"]),
                ns=dome["n_samples"],
            )
        )
    return "\n".join(lines)
