"""Run-directory persistence: versioned CSVs plus a JSON manifest.

This layout is the file contract consumed by downstream tooling (the
figures package reads these files, never the simulator's objects).
Each CSV states its schema in the first line ('# dtc-trace v1', ...)
followed by '# key = value' metadata lines, then a column-name row.
Floats are written with repr(), so reruns are byte-identical and
round-trips through the files are exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..analysis import post_kick_mask
from ..propagator import TimeTrace
from .ensemble import DomeResult, PointResult

TRACE_FORMAT = "dtc-trace v1"
SUMMARY_FORMAT = "dtc-summary v1"
DEMOD_FORMAT = "dtc-demod v1"
DOME_FORMAT = "dtc-dome v1"
MANIFEST_FORMAT = "dtc-run v1"

SUMMARY_COLUMNS = (
    "role",
    "label",
    "amplitude",
    "phase",
    "detuning",
    "sigma",
    "period",
    "f_res",
    "point_hash",
    "n_samples",
    "n_ok",
    "n_failed",
    "n_censored",
    "f_mean",
    "f_std",
    "f_se",
    "t2_fit_amplitude",
    "t2_fit_lifetime",
    "t2_1e_mean",
    "beat",
    "j_spinlock_mean",
)


def _fmt(value) -> str:
    """One CSV cell: repr for floats, str for ints/strings, '' for absent."""
    if value is None:
        return ""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return str(value)


def _header(format_line: str, meta: dict) -> list[str]:
    lines = [f"# {format_line}"]
    for key, value in meta.items():
        if value is not None:
            lines.append(f"# {key} = {_fmt(value)}")
    return lines


def _parse_header(lines: list[str]) -> tuple[str, dict, int]:
    """(format line, meta dict, index of the column-name row)."""
    if not lines or not lines[0].startswith("# "):
        raise ValueError("missing format header line")
    fmt = lines[0][2:].strip()
    meta: dict = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        key, _, value = body.partition("=")
        meta[key.strip()] = value.strip()
        i += 1
    return fmt, meta, i


# ---------------------------------------------------------------------------
# Per-trajectory traces
# ---------------------------------------------------------------------------


def write_trace_csv(
    path: str | Path,
    trace: TimeTrace,
    *,
    graph_seed: int | None = None,
    disorder_seed: int | None = None,
) -> Path:
    """One trajectory: header block with hash and seeds, then samples."""
    path = Path(path)
    meta = {
        "schedule_kind": trace.meta.get("schedule_kind"),
        "schedule_hash": trace.meta.get("schedule_hash"),
        "n_spins": trace.meta.get("n_spins"),
        "cycles": trace.meta.get("cycles"),
        "period": trace.meta.get("period"),
        "f_res": trace.meta.get("f_res"),
        "graph_seed": graph_seed,
        "disorder_seed": disorder_seed,
    }
    lines = _header(TRACE_FORMAT, meta)
    lines.append("time,parity,Ix,Iy,Iz,S,phi")
    for i in range(len(trace)):
        lines.append(
            ",".join(
                (
                    _fmt(trace.times[i]),
                    str(int(trace.parity[i])),
                    _fmt(trace.ix[i]),
                    _fmt(trace.iy[i]),
                    _fmt(trace.iz[i]),
                    _fmt(trace.s[i]),
                    _fmt(trace.phi[i]),
                )
            )
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def read_trace_csv(path: str | Path) -> TimeTrace:
    """Rebuild a TimeTrace from disk.

    The pulse-kind column is not stored; kinds are reconstructed from
    the parity column (the first sample at each new parity followed a
    y-pulse), which is exactly what the analysis functions rely on.
    """
    lines = Path(path).read_text().splitlines()
    fmt, raw_meta, start = _parse_header(lines)
    if fmt != TRACE_FORMAT:
        raise ValueError(f"expected '{TRACE_FORMAT}' file, found {fmt!r}")
    columns = lines[start].split(",")
    if columns != ["time", "parity", "Ix", "Iy", "Iz", "S", "phi"]:
        raise ValueError(f"unexpected trace columns: {columns}")
    rows = [line.split(",") for line in lines[start + 1 :] if line]
    times = np.array([float(r[0]) for r in rows])
    parity = np.array([int(r[1]) for r in rows], dtype=int)
    ix = np.array([float(r[2]) for r in rows])
    iy = np.array([float(r[3]) for r in rows])
    iz = np.array([float(r[4]) for r in rows])
    s = np.array([float(r[5]) for r in rows])
    phi = np.array([float(r[6]) for r in rows])

    meta: dict = {}
    for key in ("schedule_kind", "schedule_hash"):
        if key in raw_meta:
            meta[key] = raw_meta[key]
    for key in ("n_spins", "cycles", "graph_seed", "disorder_seed"):
        if key in raw_meta:
            meta[key] = int(raw_meta[key])
    for key in ("period", "f_res"):
        if key in raw_meta:
            meta[key] = float(raw_meta[key])

    kinds = np.where(post_kick_mask(parity), "y", "x")
    return TimeTrace(
        times=times,
        parity=parity,
        kinds=kinds,
        ix=ix,
        iy=iy,
        iz=iz,
        s=s,
        phi=phi,
        meta=meta,
        final_state=None,
    )


# ---------------------------------------------------------------------------
# Point summaries and ensemble-mean demodulated series
# ---------------------------------------------------------------------------


def _summary_row(point: PointResult, role: str) -> str:
    fit = point.t2_fit
    cells = (
        role,
        _fmt(point.label),
        _fmt(point.amplitude),
        _fmt(point.phase),
        _fmt(point.detuning),
        _fmt(point.sigma),
        _fmt(point.period),
        _fmt(point.f_res),
        point.point_hash,
        str(len(point.samples)),
        str(point.n_ok),
        str(point.n_failed),
        str(point.n_censored),
        _fmt(point.f_mean),
        _fmt(point.f_std),
        _fmt(point.f_se),
        _fmt(fit.amplitude if fit else None),
        _fmt(fit.lifetime if fit else None),
        _fmt(point.t2_1e_mean),
        _fmt(point.beat),
        _fmt(point.j_spinlock_mean),
    )
    return ",".join(cells)


def write_summary_csv(
    path: str | Path,
    points: tuple[PointResult, ...],
    baselines: tuple[PointResult, ...] = (),
    *,
    experiment: str = "",
) -> Path:
    """One row per point; drive-off partner points carry role=baseline."""
    path = Path(path)
    lines = _header(SUMMARY_FORMAT, {"experiment": experiment or None})
    lines.append(",".join(SUMMARY_COLUMNS))
    for point in points:
        lines.append(_summary_row(point, "point"))
    for point in baselines:
        lines.append(_summary_row(point, "baseline"))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_summary_csv(path: str | Path) -> tuple[dict, list[dict]]:
    """(file metadata, one dict per row with numeric cells parsed)."""
    lines = Path(path).read_text().splitlines()
    fmt, meta, start = _parse_header(lines)
    if fmt != SUMMARY_FORMAT:
        raise ValueError(f"expected '{SUMMARY_FORMAT}' file, found {fmt!r}")
    columns = lines[start].split(",")
    rows = []
    for line in lines[start + 1 :]:
        if not line:
            continue
        cells = line.split(",")
        row: dict = {}
        for name, cell in zip(columns, cells):
            if cell == "":
                row[name] = None
            elif name in ("role", "point_hash"):
                row[name] = cell
            elif name.startswith("n_"):
                row[name] = int(cell)
            else:
                row[name] = float(cell)
        rows.append(row)
    return meta, rows


def write_demod_csv(
    path: str | Path,
    points: tuple[PointResult, ...],
    baselines: tuple[PointResult, ...] = (),
) -> Path:
    """Long-format ensemble-mean demodulated series for every point."""
    path = Path(path)
    lines = _header(DEMOD_FORMAT, {})
    lines.append("role,label,time,value")
    for role, group in (("point", points), ("baseline", baselines)):
        for point in group:
            if point.mean_demod is None:
                continue
            label = _fmt(point.label)
            for t, v in zip(point.demod_times, point.mean_demod):
                lines.append(f"{role},{label},{_fmt(t)},{_fmt(v)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_demod_csv(path: str | Path) -> list[dict]:
    """Rows of {role, label, time, value}; label is None for plain runs."""
    lines = Path(path).read_text().splitlines()
    fmt, _, start = _parse_header(lines)
    if fmt != DEMOD_FORMAT:
        raise ValueError(f"expected '{DEMOD_FORMAT}' file, found {fmt!r}")
    rows = []
    for line in lines[start + 1 :]:
        if not line:
            continue
        role, label, t, v = line.split(",")
        rows.append(
            {
                "role": role,
                "label": float(label) if label else None,
                "time": float(t),
                "value": float(v),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Dome maps
# ---------------------------------------------------------------------------


def write_dome_csv(path: str | Path, dome: DomeResult) -> Path:
    """Kick-angle x time field in long format, kick-angle-major order."""
    path = Path(path)
    meta = {
        "with_ac": "true" if dome.with_ac else "false",
        "n_samples": dome.n_samples,
        "period": dome.period,
        "f_res": dome.f_res,
    }
    lines = _header(DOME_FORMAT, meta)
    lines.append("gamma,time,value")
    for gi, gamma in enumerate(dome.gammas):
        g = _fmt(gamma)
        for ti, t in enumerate(dome.times):
            lines.append(f"{g},{_fmt(t)},{_fmt(dome.field[gi, ti])}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_dome_csv(path: str | Path) -> DomeResult:
    lines = Path(path).read_text().splitlines()
    fmt, meta, start = _parse_header(lines)
    if fmt != DOME_FORMAT:
        raise ValueError(f"expected '{DOME_FORMAT}' file, found {fmt!r}")
    gammas: list[float] = []
    rows: list[list[float]] = []
    times: list[float] = []
    first_gamma = None
    for line in lines[start + 1 :]:
        if not line:
            continue
        g, t, v = (float(c) for c in line.split(","))
        if not gammas or g != gammas[-1]:
            gammas.append(g)
            rows.append([])
            if first_gamma is None:
                first_gamma = g
        if g == first_gamma:
            times.append(t)
        rows[-1].append(v)
    return DomeResult(
        gammas=tuple(gammas),
        times=np.array(times),
        field=np.array(rows),
        with_ac=meta.get("with_ac") == "true",
        n_samples=int(meta.get("n_samples", 0)),
        n_failed=0,
        period=float(meta.get("period", 0.0)),
        f_res=float(meta.get("f_res", 0.0)),
    )


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


def point_record(point: PointResult, role: str) -> dict:
    """JSON-ready manifest record: seeds, realized timing, hash, analysis.

    Carries everything needed to reproduce the point in isolation.
    """
    fit = point.t2_fit
    return {
        "role": role,
        "label": point.label,
        "amplitude": point.amplitude,
        "phase": point.phase,
        "detuning": point.detuning,
        "sigma": point.sigma,
        "period": point.period,
        "f_res": point.f_res,
        "schedule_hash": point.point_hash,
        "graph_seeds": [s.graph_seed for s in point.samples],
        "disorder_seeds": [s.disorder_seed for s in point.samples],
        "n_ok": point.n_ok,
        "n_failed": point.n_failed,
        "errors": list(point.errors),
        "analysis": {
            "f_mean": point.f_mean,
            "f_std": point.f_std,
            "f_se": point.f_se,
            "t2_fit_amplitude": fit.amplitude if fit else None,
            "t2_fit_lifetime": fit.lifetime if fit else None,
            "t2_1e_mean": point.t2_1e_mean,
            "n_censored": point.n_censored,
            "beat": point.beat,
            "j_spinlock_mean": point.j_spinlock_mean,
        },
    }


def write_manifest(path: str | Path, manifest: dict) -> Path:
    path = Path(path)
    payload = dict(manifest)
    payload.setdefault("format", MANIFEST_FORMAT)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


def read_manifest(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
