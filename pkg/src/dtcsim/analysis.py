"""Fidelity metric, lifetimes, spectra, and analytic plateau predictions.

All functions are pure and operate on :class:`~dtcsim.propagator.TimeTrace`
values or plain arrays; nothing here mutates a trace.  The parity-weighted
fidelity and the 1/e lifetime work on post-kick samples (one per y-pulse),
selected through the parity labels so the same logic applies to traces
rebuilt from CSV files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .propagator import TimeTrace
from .sequence import AcDrive


@dataclass(frozen=True)
class FidelityResult:
    """Parity-weighted time average of one spin component."""

    f: float
    n_samples: int
    window: tuple[float, float]
    component: str
    toggles: tuple[int, ...]


@dataclass(frozen=True)
class LifetimeFit:
    """1/e crossing of the smoothed envelope; censored when it never crosses."""

    lifetime: float | None
    censored: bool
    kick_count: int | None
    method: str
    lower_bound: float


@dataclass(frozen=True)
class ExponentialFit:
    """Least-squares A * exp(-t / lifetime) fit of a demodulated trace."""

    amplitude: float
    lifetime: float


@dataclass(frozen=True)
class PrethermalPrediction:
    """Plateau magnetization and inverse temperature from quasi-energy conservation."""

    b_eff: float
    j_spinlock: float
    mu: float
    inv_temperature: float
    m_plateau: float


@dataclass(frozen=True)
class PhaseSpectrum:
    """Magnitude spectrum of the unwrapped transverse phase."""

    frequencies: np.ndarray
    magnitude: np.ndarray
    peak_frequency: float
    peak_magnitude: float
    band_mean: float | None


def post_kick_mask(parity: np.ndarray) -> np.ndarray:
    """True where a sample is the first at its (nonzero) kick parity.

    Samples are emitted after every pulse, but the parity label changes
    only at y-pulses, so the first sample of each new parity is exactly
    the post-kick one.  This reconstruction uses only the parity column
    and therefore works identically on traces reloaded from CSV.
    """
    parity = np.asarray(parity)
    if parity.size == 0:
        return np.zeros(0, dtype=bool)
    mask = np.empty(parity.shape, dtype=bool)
    mask[0] = parity[0] > 0
    mask[1:] = parity[1:] > parity[:-1]
    return mask


def demodulated(trace: TimeTrace, component: str = "x") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times, parity-demodulated values, parities) at post-kick samples."""
    mask = post_kick_mask(trace.parity)
    par = trace.parity[mask]
    vals = trace.component(component)[mask]
    toggles = np.where(par % 2 == 0, 1.0, -1.0)
    return trace.times[mask], vals * toggles, par


def fidelity(trace: TimeTrace, component: str = "x",
             window: tuple[float, float] | None = None,
             samples: str = "post_kick") -> FidelityResult:
    """F = (1/N') sum_i <I^component(t_i)> * (-1)^parity(t_i).

    By default only post-kick samples enter the sum (one per y-pulse);
    ``samples='all'`` includes the quasi-continuous post-x readouts.
    ``window=(t_lo, t_hi)`` restricts the averaged samples.
    """
    if len(trace) == 0:
        raise ValueError("fidelity needs a non-empty trace")
    if samples == "post_kick":
        mask = post_kick_mask(trace.parity)
    elif samples == "all":
        mask = np.ones(len(trace), dtype=bool)
    else:
        raise ValueError("samples must be 'post_kick' or 'all'")
    if window is not None:
        lo, hi = window
        mask = mask & (trace.times >= lo) & (trace.times <= hi)
    if not np.any(mask):
        raise ValueError("no samples left after masking")
    par = trace.parity[mask]
    vals = trace.component(component)[mask]
    toggles = np.where(par % 2 == 0, 1, -1)
    times = trace.times[mask]
    return FidelityResult(
        f=float(np.mean(vals * toggles)),
        n_samples=int(mask.sum()),
        window=(float(times[0]), float(times[-1])),
        component=component,
        toggles=tuple(int(t) for t in toggles),
    )


def _sliding_median(values: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return values.copy()
    half = width // 2
    out = np.empty_like(values)
    n = len(values)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = np.median(values[lo:hi])
    return out


def lifetime_1e(trace: TimeTrace, component: str = "x") -> LifetimeFit:
    """First 1/e crossing of the smoothed envelope, linearly interpolated.

    The envelope is |<I^component>| over all post-pulse samples,
    smoothed by a sliding median whose width covers one super-period
    (micromotion within a period must not trigger the crossing).  A
    trace whose envelope never crosses is reported censored, with the
    trace length as a lower bound, never fabricated.
    """
    if len(trace) < 2:
        raise ValueError("lifetime needs at least two samples")
    env = np.abs(trace.component(component))
    period = trace.meta.get("period")
    if period:
        width = int(np.searchsorted(trace.times, trace.times[0] + period, side="right"))
        width = max(1, width) | 1
    else:
        width = 3
    smooth = _sliding_median(env, width)
    ref = smooth[0]
    lower_bound = float(trace.times[-1] - trace.times[0])
    if ref == 0.0:
        return LifetimeFit(None, True, None, "sliding_median_1e", lower_bound)
    threshold = ref / math.e
    below = smooth < threshold
    for i in range(1, len(smooth)):
        if below[i] and not below[i - 1]:
            frac = (smooth[i - 1] - threshold) / (smooth[i - 1] - smooth[i])
            t_cross = trace.times[i - 1] + frac * (trace.times[i] - trace.times[i - 1])
            return LifetimeFit(
                lifetime=float(t_cross),
                censored=False,
                kick_count=int(trace.parity[i]),
                method="sliding_median_1e",
                lower_bound=lower_bound,
            )
    return LifetimeFit(None, True, None, "sliding_median_1e", lower_bound)


def fit_exponential(times: np.ndarray, values: np.ndarray,
                    p0: tuple[float, float] | None = None) -> ExponentialFit:
    """Least-squares A*exp(-t/T) fit; the T is the 'fitted lifetime' estimator.

    Unlike the 1/e crossing, the least-squares lifetime responds to a
    late-time plateau (the fit is dragged toward long T), which is the
    estimator of record for lifetime-ratio comparisons of decaying
    versus plateauing ensembles.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 3:
        raise ValueError("need at least three samples to fit")
    if p0 is None:
        span = float(times[-1] - times[0]) or 1.0
        a0 = float(values[0]) if values[0] != 0.0 else float(np.max(np.abs(values)) or 1.0)
        p0 = (a0, span / 5.0)

    def model(t, a, tau):
        return a * np.exp(-t / tau)

    popt, _ = curve_fit(model, times, values, p0=p0, maxfev=20000)
    return ExponentialFit(amplitude=float(popt[0]), lifetime=float(popt[1]))


def effective_field(drive: AcDrive, tau_y: float, gamma_y: float) -> float:
    """Static x-field the resonant AC drive engineers through the finite kicks.

    B_eff = sin(phase) * amplitude * tau_y / gamma_y, signed: the phase
    controls both magnitude and direction, vanishing at phase = 0 or pi
    and maximal in magnitude at pi/2 and 3pi/2.
    """
    if gamma_y <= 0.0:
        raise ValueError("gamma_y must be positive")
    return math.sin(drive.phase) * drive.amplitude * tau_y / gamma_y


def prethermal_oracle(b_eff: float, j_spinlock: float, mu: float = 1.0) -> PrethermalPrediction:
    """Plateau magnetization from quasi-energy conservation.

    m_plateau = mu * B_eff^2 / (B_eff^2 + J_spinlock^2), with inverse
    temperature -mu * B_eff / (B_eff^2 + J_spinlock^2).  Limits: zero
    plateau at zero field (infinite temperature), mu at infinite field,
    mu/2 when the field equals the spin-lock scale; quadratic growth
    for small fields.
    """
    if j_spinlock <= 0.0:
        raise ValueError("j_spinlock must be positive")
    denom = b_eff * b_eff + j_spinlock * j_spinlock
    return PrethermalPrediction(
        b_eff=b_eff,
        j_spinlock=j_spinlock,
        mu=mu,
        inv_temperature=-mu * b_eff / denom,
        m_plateau=mu * b_eff * b_eff / denom,
    )


def _interp_crossings(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Zero-crossing times of a sampled series by linear interpolation."""
    idx = np.nonzero(np.sign(v[1:]) * np.sign(v[:-1]) < 0)[0]
    if len(idx) == 0:
        return np.empty(0)
    frac = v[idx] / (v[idx] - v[idx + 1])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def _truncate_dead_tail(t: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cut the region where the local envelope no longer resolves.

    Once the oscillation has decayed, sign flips come from fluctuations,
    not the beat, and would corrupt the spacing statistics in either
    direction (stuck signs stretch spacings; chatter shrinks them).
    """
    magnitude = np.abs(v)
    scale = float(np.max(magnitude))
    if scale == 0.0:
        return t[:0], v[:0]
    width = max(3, len(v) // 50) | 1
    half = width // 2
    envelope = np.array([
        magnitude[max(0, i - half): i + half + 1].max() for i in range(len(v))
    ])
    resolvable = envelope > 0.05 * scale
    last = int(np.nonzero(resolvable)[0][-1]) if np.any(resolvable) else len(v) - 1
    return t[: last + 1], v[: last + 1]


def _raw_candidate(times: np.ndarray, values: np.ndarray):
    """Crossing statistics of the series as-is (signal inverts by itself)."""
    t, v = _truncate_dead_tail(times, values)
    crossings = _interp_crossings(t, v)
    if len(crossings) < 2:
        return None
    spacing = np.diff(crossings)
    med = float(np.median(spacing))
    good = spacing[spacing > 0.5 * med]
    if len(good) == 0:
        return None
    estimate = float(1.0 / (2.0 * np.median(good)))
    if len(good) < 2:
        # a single debounced spacing has no spread to score; the envelope
        # truncation is the only chatter guard in that regime
        return estimate, 0.0
    q1, q3 = np.percentile(good, [25, 75])
    return estimate, float((q3 - q1) / np.median(good))


def _timed_crossings(times: np.ndarray, values: np.ndarray, window: int):
    """Crossing times of the oscillation around a running-median trend.

    The trend window must exceed the oscillation period or the filter
    tracks the oscillation itself; short-scale noise is averaged out
    before crossing detection, and the leading samples are dropped
    because the initial transient dominates the trend error there.
    """
    from scipy.ndimage import median_filter

    n = len(values)
    trend = median_filter(values, size=window | 1, mode="nearest")
    residual = values - trend
    w_smooth = max(3, n // 50) | 1
    smooth = np.convolve(residual, np.ones(w_smooth) / w_smooth, mode="same")
    # a running median is exact on monotone data but biased where the
    # filter window is truncated at the record edge, so skip at least
    # half a window (plus the smoothing edge) on each side
    burn = max(n // 10, (window | 1) // 2 + w_smooth)
    stop = n - w_smooth
    if stop - burn < 8:
        return None
    t, v = _truncate_dead_tail(times[burn:stop], smooth[burn:stop])
    if len(v) < 8:
        return None
    crossings = _interp_crossings(t, v)
    if len(crossings) < 5:
        return None
    return crossings


def _half_period_fit(crossings: np.ndarray):
    """Half period and consistency score from a crossing-time sequence.

    An oscillation riding a nonzero plateau crosses the trend in
    asymmetric pairs: spacings alternate between the short leg inside
    each excursion and the long leg between excursions.  Differences
    two crossings apart always span one full period, so they are the
    robust statistic; a regression with an alternating offset term
    absorbs the pair asymmetry when timing the half period.
    """
    period_spans = crossings[2:] - crossings[:-2]
    med = float(np.median(period_spans))
    if med <= 0:
        return None
    q1, q3 = np.percentile(period_spans, [25, 75])
    score = float((q3 - q1) / med)
    k = np.arange(len(crossings))
    design = np.column_stack([np.ones_like(k), k, (-1.0) ** k])
    coef, *_ = np.linalg.lstsq(design, crossings, rcond=None)
    half_period = float(coef[1])
    if half_period <= 0:
        return None
    return half_period, score


def _detrended_candidate(times: np.ndarray, values: np.ndarray, window: int):
    """Beat candidate from the slow oscillation around the decay trend.

    A weak beat rides on top of a decaying positive signal without ever
    inverting it; subtracting a running-median trend exposes the
    oscillating envelope component so its zero crossings can be timed.
    A first pass with the given window yields an approximate period; a
    second pass locks the trend window to that period, because the
    running median over exactly one period of an oscillation reduces to
    the trend alone, eliminating curvature leakage into the residual.
    """
    crossings = _timed_crossings(times, values, window)
    if crossings is None:
        return None
    best = _half_period_fit(crossings)
    if best is None:
        return None
    # the first pass may have timed the period against a leaky trend
    # window; retry with the window locked to the estimated period and
    # keep whichever fit is internally more consistent
    dt = float(np.median(np.diff(times)))
    locked = int(round(2.0 * best[0] / dt))
    if 8 <= locked < len(values):
        refined = _timed_crossings(times, values, locked)
        if refined is not None:
            fit = _half_period_fit(refined)
            if fit is not None and fit[1] < best[1]:
                best = fit
    half_period, score = best
    return float(1.0 / (2.0 * half_period)), score


def beat_frequency_from_series(times: np.ndarray, values: np.ndarray) -> float | None:
    """Beat frequency of an already demodulated series; None when censored.

    The beat shows up as a sign change of the oscillating envelope every
    half beat period, so the estimate is 1 / (2 x crossing spacing) with
    crossings located by linear interpolation.  Two signal shapes are
    handled: a fully inverting beat (the series itself changes sign) and
    a weak beat riding a decaying positive plateau (the oscillation only
    shows once the slow trend is removed).  Each extraction — the raw
    series plus a ladder of trend windows — yields a candidate estimate
    scored by the interquartile spread of its crossing spacings, and the
    most internally consistent one wins.  A candidate whose spacings are
    wildly uneven is fluctuation chatter, not a beat; when every
    candidate fails (e.g. exactly on resonance) the series is censored.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        return None
    if float(np.max(np.abs(values))) == 0.0:
        return None
    candidates = []
    raw = _raw_candidate(times, values)
    if raw is not None:
        candidates.append(raw)
    n = len(values)
    if n >= 160:
        for window in (n // 3, n // 4, n // 5):
            cand = _detrended_candidate(times, values, window)
            if cand is not None:
                candidates.append(cand)
    # consistency gate: spacings of a real beat are nearly even, while
    # fluctuation chatter spreads over a wide spacing range
    candidates = [c for c in candidates if c[1] <= 0.25]
    if not candidates:
        return None
    best = min(candidates, key=lambda c: c[1])
    return best[0]


def beat_frequency(trace: TimeTrace, component: str = "x") -> float | None:
    """Detuning estimate from zero crossings of the demodulated signal.

    An off-resonance AC field beats against the toggling frame at the
    detuning frequency, so the demodulated post-kick signal changes
    sign every half beat period.  Returns None (censored) when fewer
    than two zero crossings exist — e.g. exactly on resonance.
    """
    times, dem, _ = demodulated(trace, component)
    return beat_frequency_from_series(times, dem)


def phase_dft(trace: TimeTrace, band: tuple[float, float] | None = None) -> PhaseSpectrum:
    """Magnitude spectrum of the unwrapped transverse phase.

    Requires uniformly spaced samples (spin-lock schedules emit them);
    raises on non-uniform sampling rather than resampling silently.
    The DC bin is excluded from the reported peak.  ``band=(lo, hi)``
    additionally reports the mean magnitude in that frequency band.
    """
    if len(trace) < 4:
        raise ValueError("phase spectrum needs at least four samples")
    dts = np.diff(trace.times)
    dt = float(np.mean(dts))
    if np.max(np.abs(dts - dt)) > 1e-9 * dt:
        raise ValueError("phase_dft requires uniformly spaced samples")
    phase = np.unwrap(trace.phi)
    spectrum = np.fft.rfft(phase - np.mean(phase))
    magnitude = np.abs(spectrum) * 2.0 / len(phase)
    freqs = np.fft.rfftfreq(len(phase), d=dt)
    peak_idx = 1 + int(np.argmax(magnitude[1:]))
    band_mean = None
    if band is not None:
        lo, hi = band
        sel = (freqs >= lo) & (freqs <= hi)
        if not np.any(sel):
            raise ValueError("band contains no frequency bins")
        band_mean = float(np.mean(magnitude[sel]))
    return PhaseSpectrum(
        frequencies=freqs,
        magnitude=magnitude,
        peak_frequency=float(freqs[peak_idx]),
        peak_magnitude=float(magnitude[peak_idx]),
        band_mean=band_mean,
    )
