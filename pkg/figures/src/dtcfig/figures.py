"""Figure renderers for simulator run directories.

Each figure kind consumes one run directory through the file contract
(``manifest.json`` plus versioned CSVs) and writes one image.  Given
the same run directory and style options, rendering is deterministic:
the output bytes do not change between invocations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm, Normalize, TwoSlopeNorm  # noqa: E402

from .contract import (  # noqa: E402
    ContractError,
    load_manifest,
    read_demod,
    read_dome,
    read_summary,
    read_trace,
)

#: Figure kinds and the experiment kind each one consumes.
FIGURE_KINDS = ("trace", "phase", "amplitude", "frequency", "dome", "noise")

_EXPERIMENT_FOR_FIGURE = {
    "trace": "run",
    "phase": "phase",
    "amplitude": "amplitude",
    "frequency": "frequency",
    "dome": "dome",
    "noise": "noise",
}

_POINT_COLOR = "#1f77b4"
_BASELINE_COLOR = "#7f7f7f"


@dataclass(frozen=True)
class StyleOptions:
    """Rendering knobs; the seed pins any randomized styling."""

    seed: int = 0
    dome_scale: str = "linear"  # "linear" or "log" color scale
    dpi: int = 150

    def __post_init__(self) -> None:
        if self.dome_scale not in ("linear", "log"):
            raise ValueError(
                f"dome_scale must be 'linear' or 'log', got {self.dome_scale!r}"
            )


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: kind, input run directory, output path, style."""

    kind: str
    run_dir: Path
    out_path: Path
    style: StyleOptions = field(default_factory=StyleOptions)


def _series(table, role: str):
    """(labels, f_mean, f_se) for summary rows with the given role."""
    roles = table.strings("role")
    labels = table.floats("label")
    means = table.floats("f_mean")
    ses = table.floats("f_se")
    rows = [i for i, r in enumerate(roles) if r == role]
    return (
        [labels[i] for i in rows],
        [means[i] for i in rows],
        [ses[i] for i in rows],
    )


def _errorbar(ax, xs, ys, es, **kwargs):
    es = [0.0 if e is None else e for e in es]
    ax.errorbar(xs, ys, yerr=es, marker="o", markersize=4, capsize=3, **kwargs)


def _demod_strands(table, role: str):
    """Ordered {label cell -> (times, values)} for one demod role."""
    roles = table.strings("role")
    labels = table.strings("label")
    times = table.floats("time")
    values = table.floats("value")
    strands: dict[str, tuple[list, list]] = {}
    for r, lab, t, v in zip(roles, labels, times, values):
        if r != role:
            continue
        ts, vs = strands.setdefault(lab, ([], []))
        ts.append(t)
        vs.append(v)
    return strands


def _config_line(manifest: dict) -> str:
    cfg = manifest.get("config", {})
    bits = []
    for key, tag in (("n_spins", "L"), ("n_samples", "samples"), ("cycles", "cycles")):
        if cfg.get(key) is not None:
            bits.append(f"{tag}={cfg[key]}")
    return "  ".join(bits)


def _finish(fig, spec: FigureSpec) -> Path:
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.style.dpi, metadata={"Software": "dtcfig"})
    plt.close(fig)
    return out


# --- kind renderers -------------------------------------------------


def _render_trace(spec: FigureSpec, manifest: dict):
    demod = read_demod(spec.run_dir)
    point = _demod_strands(demod, "point")
    baseline = _demod_strands(demod, "baseline")

    trace_files = manifest.get("files", {}).get("traces", [])
    n_rows = 2 if trace_files else 1
    fig, axes = plt.subplots(
        n_rows, 1, figsize=(7.0, 3.2 * n_rows), constrained_layout=True
    )
    ax = axes[0] if n_rows > 1 else axes

    for lab, (ts, vs) in point.items():
        ax.plot(ts, vs, color=_POINT_COLOR, lw=1.2, label="AC drive on")
    for lab, (ts, vs) in baseline.items():
        ax.plot(ts, vs, color=_BASELINE_COLOR, lw=1.2, label="drive off")
    if point:
        first = next(iter(point.values()))
        v0 = first[1][0]
        ax.axhline(v0 / np.e, color="k", ls="--", lw=0.8, label="1/e of start")
    summary = read_summary(spec.run_dir)
    roles = summary.strings("role")
    t2 = summary.floats("t2_1e_mean")
    for i, role in enumerate(roles):
        if role == "point" and t2[i] is not None:
            ax.axvline(t2[i], color=_POINT_COLOR, ls=":", lw=0.8)
    ax.set_xlabel("time t (units of 1/J)")
    ax.set_ylabel("demodulated polarization")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"subharmonic decay   {_config_line(manifest)}", fontsize=10)

    if trace_files:
        ax2 = axes[1]
        trace = read_trace(Path(spec.run_dir) / trace_files[0])
        ts = trace.floats("time")
        for name, color in (("Ix", "#1f77b4"), ("Iy", "#2ca02c"), ("Iz", "#d62728")):
            ax2.plot(ts, trace.floats(name), lw=0.7, label=name, color=color)
        ax2.set_xlabel("time t (units of 1/J)")
        ax2.set_ylabel("collective spin / spin count")
        ax2.legend(loc="upper right", fontsize=8)
        ax2.set_title(f"single sample: {trace_files[0]}", fontsize=9)
    return fig


def _render_phase(spec: FigureSpec, manifest: dict):
    summary = read_summary(spec.run_dir)
    labels, means, ses = _series(summary, "point")
    base_labels, base_means, _ = _series(summary, "baseline")

    fig, (ax, ax2) = plt.subplots(
        1, 2, figsize=(10.0, 3.6), constrained_layout=True
    )
    xs = [lab / np.pi for lab in labels]
    _errorbar(ax, xs, means, ses, color=_POINT_COLOR, ls="-", label="AC drive on")
    for m in base_means:
        ax.axhline(m, color=_BASELINE_COLOR, ls="--", lw=1.0, label="drive off")
    ax.set_xlabel("drive phase (units of π)")
    ax.set_ylabel("fidelity F")
    ax.legend(loc="lower left", fontsize=8)
    ax.set_title(f"fidelity vs drive phase   {_config_line(manifest)}", fontsize=10)

    demod = read_demod(spec.run_dir)
    strands = _demod_strands(demod, "point")
    cmap = plt.get_cmap("viridis")
    rng = np.random.default_rng(spec.style.seed)
    n = max(len(strands), 1)
    for k, (lab, (ts, vs)) in enumerate(strands.items()):
        color = cmap(k / max(n - 1, 1))
        ts = np.asarray(ts, dtype=float)
        vs = np.asarray(vs, dtype=float)
        keep = min(len(ts), 400)
        pick = np.sort(rng.choice(len(ts), size=keep, replace=False))
        ax2.scatter(
            ts[pick], vs[pick], s=2.0, color=color, alpha=0.5, linewidths=0
        )
        ax2.plot([], [], color=color, label=f"Φ/π = {float(lab) / np.pi:.3g}")
    ax2.set_xlabel("time t (units of 1/J)")
    ax2.set_ylabel("demodulated polarization")
    ax2.legend(loc="upper right", fontsize=6, ncols=2)
    ax2.set_title("per-phase demodulated strands", fontsize=10)
    return fig


def _render_amplitude(spec: FigureSpec, manifest: dict):
    summary = read_summary(spec.run_dir)
    labels, means, ses = _series(summary, "point")
    base_labels, base_means, _ = _series(summary, "baseline")

    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    _errorbar(ax, labels, means, ses, color=_POINT_COLOR, ls="-", label="AC drive on")
    for m in base_means:
        ax.axhline(m, color=_BASELINE_COLOR, ls="--", lw=1.0, label="drive off")
    ax.set_xlabel("AC drive amplitude (units of J)")
    ax.set_ylabel("fidelity F")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(f"fidelity vs drive amplitude   {_config_line(manifest)}", fontsize=10)
    return fig


def _render_frequency(spec: FigureSpec, manifest: dict):
    summary = read_summary(spec.run_dir)
    labels, means, ses = _series(summary, "point")
    base_labels, base_means, _ = _series(summary, "baseline")

    fig, ax = plt.subplots(figsize=(6.8, 4.2), constrained_layout=True)
    _errorbar(ax, labels, means, ses, color=_POINT_COLOR, ls="-", label="AC drive on")
    for m in base_means:
        ax.axhline(m, color=_BASELINE_COLOR, ls="--", lw=1.0, label="drive off")
    ax.axvline(0.0, color="k", lw=0.6, ls=":")
    ax.set_xlabel("drive detuning from subharmonic resonance")
    ax.set_ylabel("fidelity F")
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title(
        f"fidelity vs drive detuning   {_config_line(manifest)}", fontsize=10
    )

    finite = [x for x in labels if x is not None]
    if len(finite) >= 5:
        span = max(finite) - min(finite)
        if span > 0:
            lo, hi = -span / 8.0, span / 8.0
            inner = [
                (x, m, s)
                for x, m, s in zip(labels, means, ses)
                if x is not None and lo <= x <= hi
            ]
            if len(inner) >= 3:
                axins = ax.inset_axes([0.58, 0.55, 0.4, 0.4])
                xs, ms, ss = zip(*inner)
                _errorbar(axins, xs, ms, ss, color=_POINT_COLOR, ls="-")
                axins.axvline(0.0, color="k", lw=0.6, ls=":")
                axins.tick_params(labelsize=6)
                axins.set_title("near resonance", fontsize=7)
    return fig


def _dome_grid(table):
    """(gammas, times, value grid) from a gamma-major dome table."""
    gammas = table.floats("gamma")
    times = table.floats("time")
    values = table.floats("value")
    ordered: dict[float, tuple[list, list]] = {}
    for g, t, v in zip(gammas, times, values):
        ts, vs = ordered.setdefault(g, ([], []))
        ts.append(t)
        vs.append(np.nan if v is None else v)
    gs = list(ordered)
    t_axis = ordered[gs[0]][0]
    for g, (ts, _) in ordered.items():
        if ts != t_axis:
            raise ContractError(
                f"{table.path.name}: kick angle {g} has a mismatched time axis"
            )
    grid = np.array([ordered[g][1] for g in gs], dtype=float)
    return np.asarray(gs, dtype=float), np.asarray(t_axis, dtype=float), grid


def _render_dome(spec: FigureSpec, manifest: dict):
    names = manifest.get("files", {}).get("domes", [])
    if not names:
        raise ContractError("manifest lists no dome files")
    panels = [(name, _dome_grid(read_dome(Path(spec.run_dir) / name))) for name in names]

    all_vals = np.concatenate([grid.ravel() for _, (_, _, grid) in panels])
    all_vals = all_vals[np.isfinite(all_vals)]
    if spec.style.dome_scale == "log":
        mags = np.abs(all_vals)
        top = float(mags.max()) if mags.size else 1.0
        floor = max(top * 1e-3, 1e-12)
        norm = LogNorm(vmin=floor, vmax=max(top, floor * 10))
        cmap = "viridis"
    else:
        lo = float(all_vals.min()) if all_vals.size else 0.0
        hi = float(all_vals.max()) if all_vals.size else 1.0
        if lo < 0.0 < hi:
            bound = max(abs(lo), abs(hi))
            norm = TwoSlopeNorm(vmin=-bound, vcenter=0.0, vmax=bound)
            cmap = "RdBu_r"
        else:
            norm = Normalize(vmin=lo, vmax=hi if hi > lo else lo + 1.0)
            cmap = "viridis"

    fig, axes = plt.subplots(
        1,
        len(panels),
        figsize=(5.4 * len(panels), 4.0),
        constrained_layout=True,
        squeeze=False,
    )
    mesh = None
    for ax, (name, (gs, ts, grid)) in zip(axes[0], panels):
        shown = np.abs(grid) if spec.style.dome_scale == "log" else grid
        if spec.style.dome_scale == "log":
            shown = np.clip(shown, norm.vmin, None)
        mesh = ax.pcolormesh(
            ts, gs / np.pi, shown, norm=norm, cmap=cmap, shading="nearest"
        )
        ax.set_xlabel("time t (units of 1/J)")
        ax.set_ylabel("kick angle (units of π)")
        record = next(
            (d for d in manifest.get("domes", []) if d.get("file") == name), {}
        )
        tag = "AC drive on" if record.get("with_ac") else "free decay"
        ax.set_title(f"{tag}   ({spec.style.dome_scale} scale)", fontsize=10)
    fig.colorbar(mesh, ax=axes[0], label="demodulated polarization", shrink=0.9)
    fig.suptitle(f"decay dome   {_config_line(manifest)}", fontsize=10)
    return fig


def _render_noise(spec: FigureSpec, manifest: dict):
    summary = read_summary(spec.run_dir)
    labels, means, ses = _series(summary, "point")
    base_labels, base_means, base_ses = _series(summary, "baseline")

    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    _errorbar(ax, labels, means, ses, color=_POINT_COLOR, ls="-", label="AC drive on")
    if base_labels:
        _errorbar(
            ax,
            base_labels,
            base_means,
            base_ses,
            color=_BASELINE_COLOR,
            ls="--",
            label="drive off",
        )
    ax.set_xlabel("static field disorder width (units of J)")
    ax.set_ylabel("fidelity F")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(
        f"fidelity vs field disorder   {_config_line(manifest)}", fontsize=10
    )
    return fig


_RENDERERS = {
    "trace": _render_trace,
    "phase": _render_phase,
    "amplitude": _render_amplitude,
    "frequency": _render_frequency,
    "dome": _render_dome,
    "noise": _render_noise,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure from a run directory; returns the image path."""
    if spec.kind not in FIGURE_KINDS:
        raise ContractError(
            f"unknown figure kind {spec.kind!r}; expected one of {FIGURE_KINDS}"
        )
    manifest = load_manifest(spec.run_dir)
    expected = _EXPERIMENT_FOR_FIGURE[spec.kind]
    experiment = manifest.get("experiment")
    if experiment != expected:
        raise ContractError(
            f"figure kind {spec.kind!r} consumes a {expected!r} run directory,"
            f" but {Path(spec.run_dir).name} holds experiment {experiment!r}"
        )
    fig = _RENDERERS[spec.kind](spec, manifest)
    return _finish(fig, spec)
