"""Experiment-layer tests: config validation, seeded ensembles, run
directories, and the CLI.

Instances are kept tiny (3 spins, tens of cycles) so the whole file runs
in seconds; the physics-scale behavior is exercised by the acceptance
suite.  Determinism checks compare bytes on disk, not just values.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from dtcsim.analysis import demodulated, fidelity
from dtcsim.experiments import ensemble as ensemble_mod
from dtcsim.experiments.cli import main as cli_main
from dtcsim.experiments.config import (
    ConfigError,
    RunConfig,
    build_schedule,
    config_from_dict,
    load_config,
    resolve_drive,
)
from dtcsim.experiments.ensemble import (
    DEFAULT_DOME_GAMMAS,
    map_dome,
    run_ensemble,
    run_point,
    sweep_amplitude,
    sweep_disorder,
    sweep_frequency,
    sweep_phase,
)
from dtcsim.experiments.io import (
    read_demod_csv,
    read_dome_csv,
    read_manifest,
    read_summary_csv,
    read_trace_csv,
    write_demod_csv,
    write_dome_csv,
    write_manifest,
    write_summary_csv,
    write_trace_csv,
)
from dtcsim.experiments.runner import EXIT_OK, EXIT_PARTIAL, run_config


def tiny_dict(**over):
    base = {
        "system": {"n_spins": 3, "r_min": 0.9, "r_max": 1.1},
        "schedule": {
            "kind": "two_tone",
            "n_x": 2,
            "tau": 0.05,
            "tau_x": 0.06,
            "tau_y": 0.08,
            "cycles": 30,
        },
        "drive": {"amplitude": 0.3},
        "ensemble": {"n_samples": 2, "seed": 7},
        "experiment": {"kind": "run"},
    }
    for table, kv in over.items():
        base.setdefault(table, {}).update(kv)
    return base


def tiny_cfg(**over) -> RunConfig:
    return config_from_dict(tiny_dict(**over))


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_config_defaults_follow_tau():
    cfg = config_from_dict({"schedule": {"tau": 0.04}})
    assert cfg.tau_x == pytest.approx(0.06)
    assert cfg.tau_y == pytest.approx(0.12)
    assert cfg.gamma_y == pytest.approx(0.98 * math.pi)
    assert cfg.theta_x == pytest.approx(math.pi / 2)


def test_config_angle_over_pi_spelling_wins():
    cfg = config_from_dict(
        {"schedule": {"gamma_y": 1.0, "gamma_y_over_pi": 0.5}}
    )
    assert cfg.gamma_y == pytest.approx(0.5 * math.pi)


@pytest.mark.parametrize(
    "patch, key_fragment",
    [
        ({"system": {"n_spins": 1}}, "system.n_spins"),
        ({"system": {"n_spins": 2.5}}, "system.n_spins"),
        ({"system": {"r_min": 1.2, "r_max": 1.0}}, "system.r_max"),
        ({"schedule": {"kind": "four_tone"}}, "schedule.kind"),
        ({"schedule": {"tau": 0.0}}, "schedule.tau"),
        ({"schedule": {"tau_x": -0.1}}, "schedule.tau_x"),
        ({"schedule": {"cycles": -1}}, "schedule.cycles"),
        ({"schedule": {"gamma_y": "big"}}, "schedule.gamma_y"),
        ({"drive": {"amplitude": -0.5}}, "drive.amplitude"),
        ({"drive": {"frequency": -2.0}}, "drive.frequency"),
        ({"drive": {"frequency": "fast"}}, "drive.frequency"),
        ({"disorder": {"sigma": -1.0}}, "disorder.sigma"),
        ({"ensemble": {"n_samples": 0}}, "ensemble.n_samples"),
        ({"ensemble": {"workers": 0}}, "ensemble.workers"),
        ({"experiment": {"kind": "mystery"}}, "experiment.kind"),
        ({"experiment": {"grid": "not-a-list"}}, "experiment.grid"),
        ({"experiment": {"initial_axis": "y"}}, "experiment.initial_axis"),
        ({"experiment": {"component": "phi"}}, "experiment.component"),
        ({"propagator": {"engine": "gpu"}}, "propagator.engine"),
    ],
)
def test_config_errors_name_the_offending_key(patch, key_fragment):
    with pytest.raises(ConfigError) as err:
        config_from_dict(tiny_dict(**patch))
    assert key_fragment in str(err.value)
    assert err.value.key == key_fragment


def test_config_three_tone_needs_block_pair():
    with pytest.raises(ConfigError, match="n_x"):
        config_from_dict(tiny_dict(schedule={"kind": "three_tone", "n_x": 4}))
    cfg = config_from_dict(
        tiny_dict(schedule={"kind": "three_tone", "n_x": [3, 5]})
    )
    assert cfg.n_x == (3, 5)


def test_config_single_tone_pulse_width_bound():
    with pytest.raises(ConfigError, match="tau_y"):
        config_from_dict(
            tiny_dict(schedule={"kind": "single_tone", "tau": 0.05, "tau_y": 0.05})
        )
    cfg = config_from_dict(
        tiny_dict(schedule={"kind": "single_tone", "tau": 0.05, "tau_y": 0.0})
    )
    assert cfg.schedule_kind == "single_tone"


def test_config_resolved_defaults_depend_on_schedule_kind():
    two = tiny_cfg()
    assert (two.initial_axis, two.component) == ("x", "x")
    single = config_from_dict(
        tiny_dict(schedule={"kind": "single_tone", "tau": 0.05, "tau_y": 0.0})
    )
    assert (single.initial_axis, single.component) == ("z", "z")
    forced = config_from_dict(tiny_dict(experiment={"initial_axis": "z"}))
    assert forced.initial_axis == "z"
    assert forced.component == "x"


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(
        "\n".join(
            (
                "[system]",
                "n_spins = 4",
                "[schedule]",
                'kind = "two_tone"',
                "n_x = 3",
                "tau = 0.03",
                "cycles = 12",
                "gamma_y_over_pi = 0.95",
                "[drive]",
                "amplitude = 0.2",
                'frequency = "resonance"',
                "detuning = 0.01",
                "[ensemble]",
                "n_samples = 2",
                "seed = 42",
            )
        )
    )
    cfg = load_config(path)
    assert cfg.n_spins == 4
    assert cfg.n_x == (3,)
    assert cfg.gamma_y == pytest.approx(0.95 * math.pi)
    assert cfg.frequency is None  # resolved against the realized resonance
    assert cfg.detuning == pytest.approx(0.01)
    assert cfg.seed == 42


def test_load_config_missing_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("this is { not toml")
    with pytest.raises(ConfigError, match="TOML"):
        load_config(bad)


def test_build_schedule_kind_dispatch_and_overrides():
    cfg = tiny_cfg()
    sched = build_schedule(cfg)
    assert sched.kind == "two_tone"
    assert sched.period == pytest.approx(3 * 0.05 + 2 * 0.06 + 0.08)
    shorter = build_schedule(cfg, cycles=5)
    assert len(shorter.segments) < len(sched.segments)
    lock = build_schedule(
        config_from_dict(tiny_dict(schedule={"kind": "spin_lock"}))
    )
    assert lock.kind == "spin_lock"
    single = build_schedule(
        config_from_dict(
            tiny_dict(schedule={"kind": "single_tone", "tau": 0.05, "tau_y": 0.0})
        )
    )
    assert single.kind == "single_tone"


def test_resolve_drive_zero_amplitude_is_none():
    cfg = tiny_cfg()
    sched = build_schedule(cfg)
    assert resolve_drive(cfg, sched, amplitude=0.0) is None
    drive = resolve_drive(cfg, sched)
    assert drive is not None
    assert drive.amplitude == pytest.approx(0.3)
    assert drive.frequency == pytest.approx(sched.f_res)
    detuned = resolve_drive(cfg, sched, detuning=0.02)
    assert detuned.frequency == pytest.approx(sched.f_res + 0.02)


def test_resolve_drive_fixed_frequency_override():
    cfg = config_from_dict(tiny_dict(drive={"frequency": 1.25}))
    sched = build_schedule(cfg)
    drive = resolve_drive(cfg, sched)
    assert drive.frequency == pytest.approx(1.25)


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def test_run_point_is_deterministic():
    cfg = tiny_cfg()
    a = run_point(cfg, keep_traces=False)
    b = run_point(cfg, keep_traces=False)
    assert a.f_mean == b.f_mean
    assert a.point_hash == b.point_hash
    assert np.array_equal(a.mean_demod, b.mean_demod)


def test_run_point_seed_pairing_across_overrides():
    cfg = tiny_cfg()
    on = run_point(cfg, keep_traces=False)
    off = run_point(cfg, amplitude=0.0, keep_traces=False)
    assert [s.graph_seed for s in on.samples] == [s.graph_seed for s in off.samples]
    # same graphs -> identical spin-lock scale, but different drive physics
    assert on.j_spinlock_mean == off.j_spinlock_mean
    assert on.point_hash != off.point_hash
    assert on.amplitude == pytest.approx(0.3)
    assert off.amplitude == 0.0


def test_run_point_seeds_differ_per_sample_and_channel():
    cfg = tiny_cfg(disorder={"sigma": 0.5})
    pt = run_point(cfg, keep_traces=False)
    graph_seeds = [s.graph_seed for s in pt.samples]
    disorder_seeds = [s.disorder_seed for s in pt.samples]
    assert len(set(graph_seeds)) == len(graph_seeds)
    assert all(d is not None for d in disorder_seeds)
    assert not set(graph_seeds) & set(disorder_seeds)


def test_run_point_parallel_matches_serial():
    cfg = tiny_cfg()
    serial = run_point(cfg, keep_traces=False)
    parallel = run_point(replace(cfg, workers=2), keep_traces=False)
    assert parallel.f_mean == serial.f_mean
    assert np.array_equal(parallel.mean_demod, serial.mean_demod)
    assert [s.graph_seed for s in parallel.samples] == [
        s.graph_seed for s in serial.samples
    ]


def test_run_ensemble_runs_config_as_written():
    cfg = tiny_cfg()
    pt = run_ensemble(cfg, keep_traces=True)
    assert pt.amplitude == pytest.approx(cfg.amplitude)
    assert pt.n_ok == cfg.n_samples
    assert all(s.trace is not None for s in pt.samples)
    sched = build_schedule(cfg)
    assert pt.period == pytest.approx(sched.period)
    assert pt.f_res == pytest.approx(sched.f_res)
    assert len(pt.point_hash) == 64


def test_sample_failures_are_contained(monkeypatch):
    cfg = tiny_cfg()
    original = ensemble_mod._build_system

    def failing(inner_cfg, graph_seed):
        if graph_seed == inner_cfg.seed + 1:
            raise RuntimeError("synthetic sample failure")
        return original(inner_cfg, graph_seed)

    monkeypatch.setattr(ensemble_mod, "_build_system", failing)
    pt = run_point(cfg, keep_traces=False)
    assert pt.n_failed == 1
    assert pt.n_ok == 1
    assert "synthetic sample failure" in pt.errors[0]
    assert pt.f_mean is not None  # aggregates over the surviving sample


def test_sweep_phase_grid_labels_and_baseline():
    cfg = tiny_cfg(schedule={"cycles": 15})
    grid = (0.0, math.pi / 2)
    sweep = sweep_phase(cfg, grid)
    assert sweep.kind == "phase"
    assert sweep.grid == grid
    assert [p.label for p in sweep.points] == list(grid)
    assert [p.phase for p in sweep.points] == list(grid)
    (baseline,) = sweep.baselines
    assert baseline.amplitude == 0.0
    assert [s.graph_seed for s in baseline.samples] == [
        s.graph_seed for s in sweep.points[0].samples
    ]


def test_sweep_amplitude_uses_config_grid():
    cfg = tiny_cfg(
        schedule={"cycles": 15},
        experiment={"kind": "amplitude", "grid": [0.1, 0.4]},
    )
    sweep = sweep_amplitude(cfg)
    assert sweep.grid == (0.1, 0.4)
    assert [p.amplitude for p in sweep.points] == [0.1, 0.4]


def test_sweep_frequency_requires_grid():
    cfg = tiny_cfg(schedule={"cycles": 15})
    with pytest.raises(ValueError, match="detuning grid"):
        sweep_frequency(cfg)
    sweep = sweep_frequency(cfg, (-0.05, 0.05))
    assert [p.detuning for p in sweep.points] == [-0.05, 0.05]
    sched = build_schedule(cfg)
    assert sweep.points[0].f_res == pytest.approx(sched.f_res)


def test_sweep_disorder_pairs_baseline_per_sigma():
    cfg = tiny_cfg(schedule={"cycles": 15})
    sweep = sweep_disorder(cfg, (0.0, 0.8))
    assert sweep.kind == "noise"
    assert [p.sigma for p in sweep.points] == [0.0, 0.8]
    assert [b.sigma for b in sweep.baselines] == [0.0, 0.8]
    assert all(b.amplitude == 0.0 for b in sweep.baselines)
    with pytest.raises(ValueError, match="sigma grid"):
        sweep_disorder(cfg)


def test_map_dome_field_layout():
    cfg = tiny_cfg(schedule={"cycles": 12})
    gammas = (0.9 * math.pi, math.pi, 1.1 * math.pi)
    dome = map_dome(cfg, gammas, with_ac=False)
    assert dome.gammas == gammas
    assert dome.field.shape == (3, len(dome.times))
    assert np.all(np.diff(dome.times) > 0)
    assert not dome.with_ac
    assert dome.n_samples == cfg.n_samples
    assert dome.n_failed == 0
    # the pi column starts fully demodulated-polarized
    pi_col = dome.field[1]
    assert pi_col[0] == pytest.approx(np.max(np.abs(dome.field[:, 0])), abs=1e-9)


def test_map_dome_ac_toggle_changes_field():
    cfg = tiny_cfg(schedule={"cycles": 12})
    gammas = (math.pi,)
    free = map_dome(cfg, gammas, with_ac=False)
    driven = map_dome(cfg, gammas, with_ac=True)
    assert not np.allclose(free.field, driven.field)
    assert driven.with_ac


def test_default_dome_grid_contains_exact_pi():
    assert any(g == math.pi for g in DEFAULT_DOME_GAMMAS)


# ---------------------------------------------------------------------------
# run-directory files
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_point():
    return run_point(tiny_cfg(), keep_traces=True)


def test_trace_csv_round_trip_is_exact(tmp_path, small_point):
    sample = small_point.samples[0]
    path = write_trace_csv(
        tmp_path / "t.csv",
        sample.trace,
        graph_seed=sample.graph_seed,
        disorder_seed=sample.disorder_seed,
    )
    back = read_trace_csv(path)
    for name in ("times", "ix", "iy", "iz", "s", "phi"):
        assert np.array_equal(getattr(back, name), getattr(sample.trace, name)), name
    assert np.array_equal(back.parity, sample.trace.parity)
    assert np.array_equal(back.kinds, sample.trace.kinds)
    assert back.meta["graph_seed"] == sample.graph_seed
    assert back.meta["schedule_hash"] == sample.trace.meta["schedule_hash"]
    assert back.meta["period"] == sample.trace.meta["period"]


def test_reloaded_trace_analyzes_identically(tmp_path, small_point):
    trace = small_point.samples[1].trace
    back = read_trace_csv(write_trace_csv(tmp_path / "t.csv", trace))
    assert fidelity(back).f == fidelity(trace).f
    t0, d0, _ = demodulated(trace)
    t1, d1, _ = demodulated(back)
    assert np.array_equal(t0, t1)
    assert np.array_equal(d0, d1)


def test_summary_csv_round_trip(tmp_path, small_point):
    baseline = run_point(tiny_cfg(), amplitude=0.0, keep_traces=False)
    path = write_summary_csv(
        tmp_path / "summary.csv", (small_point,), (baseline,), experiment="run"
    )
    meta, rows = read_summary_csv(path)
    assert meta["experiment"] == "run"
    assert [r["role"] for r in rows] == ["point", "baseline"]
    point_row = rows[0]
    assert point_row["f_mean"] == small_point.f_mean
    assert point_row["f_se"] == small_point.f_se
    assert point_row["n_ok"] == small_point.n_ok
    assert point_row["point_hash"] == small_point.point_hash
    assert rows[1]["amplitude"] == 0.0
    assert rows[1]["label"] is None


def test_demod_csv_round_trip(tmp_path, small_point):
    path = write_demod_csv(tmp_path / "demod.csv", (small_point,))
    rows = read_demod_csv(path)
    assert len(rows) == len(small_point.demod_times)
    assert all(r["role"] == "point" for r in rows)
    assert [r["time"] for r in rows] == list(small_point.demod_times)
    assert [r["value"] for r in rows] == list(small_point.mean_demod)


def test_dome_csv_round_trip(tmp_path):
    cfg = tiny_cfg(schedule={"cycles": 10})
    dome = map_dome(cfg, (0.9 * math.pi, math.pi), with_ac=False)
    back = read_dome_csv(write_dome_csv(tmp_path / "dome.csv", dome))
    assert back.gammas == dome.gammas
    assert np.array_equal(back.times, dome.times)
    assert np.array_equal(back.field, dome.field)
    assert back.with_ac == dome.with_ac
    assert back.n_samples == dome.n_samples
    assert back.period == dome.period
    assert back.f_res == dome.f_res


def test_readers_reject_wrong_format(tmp_path, small_point):
    trace_path = write_trace_csv(tmp_path / "t.csv", small_point.samples[0].trace)
    with pytest.raises(ValueError, match="dtc-summary"):
        read_summary_csv(trace_path)
    with pytest.raises(ValueError, match="dtc-trace"):
        read_trace_csv(write_summary_csv(tmp_path / "s.csv", (small_point,)))
    with pytest.raises(ValueError, match="format header"):
        (tmp_path / "junk.csv").write_text("time,parity\n0.0,0\n")
        read_trace_csv(tmp_path / "junk.csv")


def test_manifest_round_trip(tmp_path):
    manifest = {"experiment": "run", "points": [], "config": {"n_spins": 3}}
    path = write_manifest(tmp_path / "manifest.json", manifest)
    back = read_manifest(path)
    assert back["format"] == "dtc-run v1"
    assert back["experiment"] == "run"
    assert back["config"] == {"n_spins": 3}


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

def test_run_config_writes_complete_run_directory(tmp_path):
    cfg = tiny_cfg()
    out = run_config(cfg, tmp_path / "run")
    assert out.exit_code == EXIT_OK
    files = {p.name for p in (tmp_path / "run").iterdir()}
    assert {"summary.csv", "demod.csv", "manifest.json"} <= files
    # driven run keeps per-sample traces for both arms
    assert "trace_point_000.csv" in files
    assert "trace_baseline_000.csv" in files
    manifest = read_manifest(tmp_path / "run" / "manifest.json")
    assert manifest["format"] == "dtc-run v1"
    roles = [r["role"] for r in manifest["points"]]
    assert roles == ["point", "baseline"]
    driven = manifest["points"][0]
    assert driven["analysis"]["oracle"]["b_eff"] > 0.0
    assert "m_plateau" in driven["analysis"]["oracle"]
    assert manifest["points"][1]["analysis"].get("oracle") is None


def test_run_config_reruns_byte_identically(tmp_path):
    cfg = tiny_cfg()
    run_config(cfg, tmp_path / "a")
    run_config(cfg, tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes(), name


def test_run_config_sweep_directory(tmp_path):
    cfg = tiny_cfg(
        schedule={"cycles": 12},
        experiment={"kind": "phase", "grid": [0.0, math.pi / 2]},
    )
    out = run_config(cfg, tmp_path / "sweep")
    assert out.exit_code == EXIT_OK
    manifest = out.manifest
    assert manifest["experiment"] == "phase"
    assert manifest["grid"] == [0.0, math.pi / 2]
    meta, rows = read_summary_csv(tmp_path / "sweep" / "summary.csv")
    assert meta["experiment"] == "phase"
    assert [r["role"] for r in rows] == ["point", "point", "baseline"]
    demod_rows = read_demod_csv(tmp_path / "sweep" / "demod.csv")
    labels = {r["label"] for r in demod_rows if r["role"] == "point"}
    assert labels == {0.0, math.pi / 2}


def test_run_config_dome_directory(tmp_path):
    cfg = tiny_cfg(
        schedule={"cycles": 10},
        drive={"amplitude": 0.0},
        experiment={"kind": "dome", "grid": [0.9 * math.pi, math.pi]},
    )
    out = run_config(cfg, tmp_path / "dome")
    assert out.exit_code == EXIT_OK
    files = {p.name for p in (tmp_path / "dome").iterdir()}
    assert "dome_free.csv" in files
    assert "dome_ac.csv" not in files  # zero amplitude: no driven map
    assert out.manifest["domes"][0]["with_ac"] is False


def test_run_config_partial_failure_exit_code(tmp_path, monkeypatch):
    cfg = tiny_cfg()
    original = ensemble_mod._build_system

    def failing(inner_cfg, graph_seed):
        if graph_seed == inner_cfg.seed:
            raise RuntimeError("synthetic sample failure")
        return original(inner_cfg, graph_seed)

    monkeypatch.setattr(ensemble_mod, "_build_system", failing)
    out = run_config(cfg, tmp_path / "partial")
    assert out.exit_code == EXIT_PARTIAL
    assert out.manifest["points"][0]["n_failed"] == 1
    assert "synthetic sample failure" in out.manifest["points"][0]["errors"][0]


def test_run_config_accepts_config_path(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text(
        "\n".join(
            (
                "[system]",
                "n_spins = 3",
                "[schedule]",
                "n_x = 2",
                "tau = 0.05",
                "tau_x = 0.06",
                "tau_y = 0.08",
                "cycles = 10",
                "[ensemble]",
                "n_samples = 1",
                "seed = 3",
            )
        )
    )
    out = run_config(path, tmp_path / "from_file")
    assert out.exit_code == EXIT_OK
    assert out.manifest["config"]["n_spins"] == 3


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def write_cli_config(tmp_path, extra=()):
    path = tmp_path / "cli.toml"
    path.write_text(
        "\n".join(
            (
                "[system]",
                "n_spins = 3",
                "[schedule]",
                "n_x = 2",
                "tau = 0.05",
                "tau_x = 0.06",
                "tau_y = 0.08",
                "cycles = 10",
                "[drive]",
                "amplitude = 0.2",
                "[ensemble]",
                "n_samples = 1",
                "seed = 3",
                *extra,
            )
        )
    )
    return path


def test_cli_run_and_report(tmp_path, capsys):
    cfg_path = write_cli_config(tmp_path)
    out_dir = tmp_path / "out"
    assert cli_main(["run", "--config", str(cfg_path), "--out", str(out_dir)]) == 0
    printed = capsys.readouterr().out
    assert "experiment: run" in printed
    assert (out_dir / "manifest.json").exists()
    assert cli_main(["report", "--out", str(out_dir)]) == 0
    assert "F=" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[system]\nn_spins = 1\n")
    assert cli_main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1
    assert "n_spins" in capsys.readouterr().err


def test_cli_missing_config_file(tmp_path, capsys):
    missing = tmp_path / "absent.toml"
    assert cli_main(["run", "--config", str(missing), "--out", str(tmp_path / "x")]) == 1
    assert "not found" in capsys.readouterr().err


def test_cli_command_kind_mismatch(tmp_path, capsys):
    cfg_path = write_cli_config(
        tmp_path, extra=("[experiment]", 'kind = "phase"', "grid = [0.0, 1.5]")
    )
    assert cli_main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "x")]) == 1
    err = capsys.readouterr().err
    assert "experiment.kind" in err
    assert cli_main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "y")]) == 0


def test_cli_report_on_missing_directory(tmp_path, capsys):
    assert cli_main(["report", "--out", str(tmp_path / "nowhere")]) == 1
    assert "manifest.json" in capsys.readouterr().err


def test_cli_rejects_unknown_command():
    with pytest.raises(SystemExit):
        cli_main(["frobnicate", "--config", "x", "--out", "y"])
