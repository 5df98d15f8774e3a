"""Drive protocols as ordered segments with exact AC-field integrals.

A schedule is a flat, explicit list of :class:`Segment` values covering
every repetition, so segment start times are contiguous by construction
and the propagator never needs to know which builder produced them.
Builders are pure: the same arguments always produce an identical
schedule.

Time units are whatever the caller uses for durations; frequencies are
the reciprocal unit.  The AC amplitude is in angular-frequency units
(field times gyromagnetic ratio), so its time integral is an angle.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

FREE = "free"
X_PULSE = "x_pulse"
Y_PULSE = "y_pulse"

_PULSE_KINDS = (X_PULSE, Y_PULSE)


@dataclass(frozen=True)
class AcDrive:
    """Sinusoidal z-field B(t) = amplitude * sin(2*pi*frequency*(t - t_origin) + phase).

    ``t_origin`` anchors the phase convention: builders report the center
    of their first y-pulse as the natural origin, so ``phase = pi/2``
    puts field extrema at the y-kicks.  ``amplitude = 0`` encodes "no AC
    field".
    """

    amplitude: float
    frequency: float
    phase: float
    t_origin: float = 0.0

    def __post_init__(self) -> None:
        if self.amplitude < 0.0:
            raise ValueError("AC amplitude must be >= 0")

    @property
    def is_off(self) -> bool:
        return self.amplitude == 0.0


NO_DRIVE = AcDrive(amplitude=0.0, frequency=0.0, phase=0.0)


@dataclass(frozen=True)
class Segment:
    """One contiguous piece of the drive: free evolution or a pulse.

    ``angle`` is the nominal rotation angle (theta_x or gamma_y); it is
    zero for free segments.  ``t0`` is the absolute start time, used for
    AC integration.  Pulse durations may be zero (instantaneous kick);
    free durations must be positive.
    """

    kind: str
    duration: float
    t0: float
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (FREE,) + _PULSE_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.kind == FREE and self.duration <= 0.0:
            raise ValueError("free segments need positive duration")
        if self.kind in _PULSE_KINDS and self.duration < 0.0:
            raise ValueError("pulse duration must be >= 0")

    @property
    def t_end(self) -> float:
        return self.t0 + self.duration

    @property
    def center(self) -> float:
        return self.t0 + 0.5 * self.duration


@dataclass(frozen=True)
class DisorderRealization:
    """Static per-site pulse-angle errors and z-field offsets.

    ``chi`` multiplies the x-pulse duration, ``eta`` the y-pulse
    duration (angle errors per unit time); ``zeta`` is a static z-field
    offset active during free evolution.  All entries are uniform in
    [-sigma/2, +sigma/2] and reproducible from the seed.
    """

    chi: tuple[float, ...]
    eta: tuple[float, ...]
    zeta: tuple[float, ...]
    sigma: float
    seed: int | None = None

    @property
    def n_spins(self) -> int:
        return len(self.chi)

    @property
    def is_zero(self) -> bool:
        return self.sigma == 0.0


def sample_disorder(sigma: float, n_spins: int, seed: int | None = None) -> DisorderRealization:
    """Draw one static disorder realization; sigma = 0 gives all zeros."""
    if sigma < 0.0:
        raise ValueError("disorder strength must be >= 0")
    if n_spins < 1:
        raise ValueError("need at least one spin")
    if sigma == 0.0:
        zeros = (0.0,) * n_spins
        return DisorderRealization(zeros, zeros, zeros, 0.0, seed)
    rng = np.random.default_rng(seed)
    half = 0.5 * sigma
    chi, eta, zeta = (tuple(rng.uniform(-half, half, n_spins)) for _ in range(3))
    return DisorderRealization(chi, eta, zeta, sigma, seed)


@dataclass(frozen=True)
class PulseSchedule:
    """An ordered, fully expanded segment list plus its bookkeeping.

    ``block_periods`` holds the realized repetition period(s): one entry
    for single- and two-tone drives, two for the three-tone drive.  The
    resonance frequencies 1/(2*T_block) are always reported from the
    realized timing, never assumed.  ``ac_time_origin`` is the center of
    the first y-pulse (first x-pulse if the schedule has none), the
    reference for :class:`AcDrive` phases.
    """

    kind: str
    segments: tuple[Segment, ...]
    cycles: int
    n_x: tuple[int, ...]
    tau: float
    tau_x: float
    tau_y: float
    theta_x: float
    gamma_y: float
    block_periods: tuple[float, ...]
    ac_time_origin: float

    @property
    def period(self) -> float:
        """Total super-period (sum of the block periods)."""
        return float(sum(self.block_periods))

    @property
    def total_duration(self) -> float:
        if not self.segments:
            return 0.0
        return self.segments[-1].t_end

    @property
    def resonance_frequencies(self) -> tuple[float, ...]:
        return tuple(1.0 / (2.0 * t) for t in self.block_periods)

    @property
    def f_res(self) -> float:
        return self.resonance_frequencies[0]

    def readout_segments(self) -> tuple[tuple[int, int], ...]:
        """(segment index, kick parity after that segment) for each sample.

        A sample is emitted after every pulse segment; the parity label
        counts y-pulses applied so far, including the one just applied.
        """
        out = []
        parity = 0
        for i, seg in enumerate(self.segments):
            if seg.kind == Y_PULSE:
                parity += 1
                out.append((i, parity))
            elif seg.kind == X_PULSE:
                out.append((i, parity))
        return tuple(out)

    def resonant_drive(
        self,
        amplitude: float,
        phase: float = math.pi / 2.0,
        detuning: float = 0.0,
        frequency: float | None = None,
        block: int = 0,
    ) -> AcDrive:
        """AC drive locked to this schedule's realized resonance.

        ``frequency`` overrides the resonance entirely; otherwise the
        drive sits at ``resonance_frequencies[block] + detuning``.
        """
        if frequency is None:
            frequency = self.resonance_frequencies[block] + detuning
        return AcDrive(
            amplitude=amplitude,
            frequency=frequency,
            phase=phase,
            t_origin=self.ac_time_origin,
        )


def _empty_schedule(kind: str, n_x: tuple[int, ...], tau: float, tau_x: float,
                    tau_y: float, theta_x: float, gamma_y: float,
                    block_periods: tuple[float, ...]) -> PulseSchedule:
    return PulseSchedule(
        kind=kind, segments=(), cycles=0, n_x=n_x, tau=tau, tau_x=tau_x,
        tau_y=tau_y, theta_x=theta_x, gamma_y=gamma_y,
        block_periods=block_periods, ac_time_origin=0.0,
    )


def build_two_tone(
    n_x: int,
    tau: float,
    tau_x: float,
    tau_y: float,
    theta_x: float,
    gamma_y: float,
    cycles: int,
    include_y: bool = True,
) -> PulseSchedule:
    """Spin-lock train of ``n_x`` theta_x-pulses plus one gamma_y kick per period.

    ``tau`` is the free-evolution gap between pulse edges (so pulses can
    never overlap regardless of their widths, and the stated example
    ratios tau_y = 3 tau = 2 tau_x are directly expressible).  One
    period is

        [free(tau), x(tau_x)] * n_x, free(tau), y(tau_y)

    with realized T = (n_x + 1) tau + n_x tau_x + tau_y.  With
    ``include_y=False`` the y-pulse and its preceding gap are dropped
    (pure spin-lock drive, uniform post-x sampling): one period is then
    [free(tau), x(tau_x)] * n_x.
    """
    if n_x < 1:
        raise ValueError("need at least one x-pulse per period")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if tau_x <= 0.0 or (include_y and tau_y <= 0.0):
        raise ValueError("finite pulse widths are required (tau_x, tau_y > 0)")
    if cycles < 0:
        raise ValueError("cycles must be >= 0")

    if include_y:
        period = (n_x + 1) * tau + n_x * tau_x + tau_y
        kind = "two_tone"
    else:
        period = n_x * (tau + tau_x)
        tau_y = 0.0
        kind = "spin_lock"

    if cycles == 0:
        return _empty_schedule(kind, (n_x,), tau, tau_x, tau_y, theta_x, gamma_y, (period,))

    segments: list[Segment] = []
    t = 0.0
    first_y_center = None
    first_x_center = None
    for _ in range(cycles):
        for _ in range(n_x):
            segments.append(Segment(FREE, tau, t))
            t += tau
            seg = Segment(X_PULSE, tau_x, t, theta_x)
            if first_x_center is None:
                first_x_center = seg.center
            segments.append(seg)
            t += tau_x
        if include_y:
            segments.append(Segment(FREE, tau, t))
            t += tau
            seg = Segment(Y_PULSE, tau_y, t, gamma_y)
            if first_y_center is None:
                first_y_center = seg.center
            segments.append(seg)
            t += tau_y

    origin = first_y_center if first_y_center is not None else first_x_center
    return PulseSchedule(
        kind=kind, segments=tuple(segments), cycles=cycles, n_x=(n_x,),
        tau=tau, tau_x=tau_x, tau_y=tau_y, theta_x=theta_x, gamma_y=gamma_y,
        block_periods=(period,), ac_time_origin=origin,
    )


def build_single_tone(
    tau: float,
    tau_y: float,
    gamma_y: float,
    cycles: int,
) -> PulseSchedule:
    """Kicks only: gamma_y pulses spaced by ``tau`` (start-to-start).

    ``tau_y = 0`` is the instantaneous-kick idealization; the free gap
    is then the full ``tau``.  One period is [free(tau - tau_y),
    y(tau_y)] and a sample is emitted after each kick.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if not 0.0 <= tau_y < tau:
        raise ValueError("need tau > tau_y >= 0")
    if cycles < 0:
        raise ValueError("cycles must be >= 0")
    if cycles == 0:
        return _empty_schedule("single_tone", (), tau, 0.0, tau_y, 0.0, gamma_y, (tau,))

    segments: list[Segment] = []
    t = 0.0
    first_y_center = None
    gap = tau - tau_y
    for _ in range(cycles):
        segments.append(Segment(FREE, gap, t))
        t += gap
        seg = Segment(Y_PULSE, tau_y, t, gamma_y)
        if first_y_center is None:
            first_y_center = seg.center
        segments.append(seg)
        t += tau_y
    return PulseSchedule(
        kind="single_tone", segments=tuple(segments), cycles=cycles, n_x=(),
        tau=tau, tau_x=0.0, tau_y=tau_y, theta_x=0.0, gamma_y=gamma_y,
        block_periods=(tau,), ac_time_origin=first_y_center,
    )


def build_three_tone(
    n_x_1: int,
    n_x_2: int,
    tau: float,
    tau_x: float,
    tau_y: float,
    theta_x: float,
    gamma_y: float,
    cycles: int,
) -> PulseSchedule:
    """Alternating spin-lock blocks of ``n_x_1`` and ``n_x_2`` x-pulses.

    Each block ends with one gamma_y kick, so successive kicks are
    spaced by the two block periods T1 and T2 in alternation; the two
    realized resonance frequencies 1/(2*T1) and 1/(2*T2) are reported.
    ``cycles`` counts full (block1 + block2) super-periods.
    """
    if n_x_1 == n_x_2:
        raise ValueError("block sizes must differ (equal sizes degenerate to two-tone)")
    if min(n_x_1, n_x_2) < 1:
        raise ValueError("need at least one x-pulse per block")
    if tau <= 0.0 or tau_x <= 0.0 or tau_y <= 0.0:
        raise ValueError("tau, tau_x, tau_y must be positive")
    if cycles < 0:
        raise ValueError("cycles must be >= 0")

    periods = tuple((n + 1) * tau + n * tau_x + tau_y for n in (n_x_1, n_x_2))
    if cycles == 0:
        return _empty_schedule("three_tone", (n_x_1, n_x_2), tau, tau_x, tau_y,
                               theta_x, gamma_y, periods)

    segments: list[Segment] = []
    t = 0.0
    first_y_center = None
    for _ in range(cycles):
        for n in (n_x_1, n_x_2):
            for _ in range(n):
                segments.append(Segment(FREE, tau, t))
                t += tau
                segments.append(Segment(X_PULSE, tau_x, t, theta_x))
                t += tau_x
            segments.append(Segment(FREE, tau, t))
            t += tau
            seg = Segment(Y_PULSE, tau_y, t, gamma_y)
            if first_y_center is None:
                first_y_center = seg.center
            segments.append(seg)
            t += tau_y
    return PulseSchedule(
        kind="three_tone", segments=tuple(segments), cycles=cycles,
        n_x=(n_x_1, n_x_2), tau=tau, tau_x=tau_x, tau_y=tau_y,
        theta_x=theta_x, gamma_y=gamma_y, block_periods=periods,
        ac_time_origin=first_y_center,
    )


def ac_integral(drive: AcDrive, t_start: float, t_end: float) -> float:
    """Exact closed-form integral of the AC field over [t_start, t_end].

    The result is the z-rotation angle the field imparts over that
    window.  No quadrature is involved; a zero-frequency drive reduces
    to the constant field amplitude*sin(phase).
    """
    if t_end < t_start:
        raise ValueError("t_end must be >= t_start")
    if drive.amplitude == 0.0 or t_end == t_start:
        return 0.0
    if drive.frequency == 0.0:
        return drive.amplitude * math.sin(drive.phase) * (t_end - t_start)
    w = 2.0 * math.pi * drive.frequency
    a0 = w * (t_start - drive.t_origin) + drive.phase
    a1 = w * (t_end - drive.t_origin) + drive.phase
    return drive.amplitude / w * (math.cos(a0) - math.cos(a1))


# ---------------------------------------------------------------------------
# Serialization: one dict per value type, JSON-ready, floats kept exact via
# repr round-trip.  The schedule dict is the unit of reproducibility.
# ---------------------------------------------------------------------------

_BUILDERS = {
    "two_tone": lambda d: build_two_tone(
        d["n_x"][0], d["tau"], d["tau_x"], d["tau_y"], d["theta_x"],
        d["gamma_y"], d["cycles"]),
    "spin_lock": lambda d: build_two_tone(
        d["n_x"][0], d["tau"], d["tau_x"], d["tau_y"], d["theta_x"],
        d["gamma_y"], d["cycles"], include_y=False),
    "single_tone": lambda d: build_single_tone(
        d["tau"], d["tau_y"], d["gamma_y"], d["cycles"]),
    "three_tone": lambda d: build_three_tone(
        d["n_x"][0], d["n_x"][1], d["tau"], d["tau_x"], d["tau_y"],
        d["theta_x"], d["gamma_y"], d["cycles"]),
}


def schedule_to_dict(schedule: PulseSchedule) -> dict:
    return {
        "kind": schedule.kind,
        "n_x": list(schedule.n_x),
        "tau": schedule.tau,
        "tau_x": schedule.tau_x,
        "tau_y": schedule.tau_y,
        "theta_x": schedule.theta_x,
        "gamma_y": schedule.gamma_y,
        "cycles": schedule.cycles,
        "block_periods": list(schedule.block_periods),
        "f_res": list(schedule.resonance_frequencies),
        "ac_time_origin": schedule.ac_time_origin,
    }


def schedule_from_dict(d: dict) -> PulseSchedule:
    kind = d.get("kind")
    if kind not in _BUILDERS:
        raise ValueError(f"unknown schedule kind {kind!r}")
    if kind == "single_tone" and d.get("n_x"):
        raise ValueError("single_tone schedules take no n_x")
    sched = _BUILDERS[kind](d)
    return sched


def drive_to_dict(drive: AcDrive) -> dict:
    return {
        "amplitude": drive.amplitude,
        "frequency": drive.frequency,
        "phase": drive.phase,
        "t_origin": drive.t_origin,
    }


def drive_from_dict(d: dict) -> AcDrive:
    return AcDrive(d["amplitude"], d["frequency"], d["phase"], d.get("t_origin", 0.0))


def disorder_to_dict(dis: DisorderRealization) -> dict:
    return {
        "chi": list(dis.chi),
        "eta": list(dis.eta),
        "zeta": list(dis.zeta),
        "sigma": dis.sigma,
        "seed": dis.seed,
    }


def disorder_from_dict(d: dict) -> DisorderRealization:
    return DisorderRealization(
        tuple(d["chi"]), tuple(d["eta"]), tuple(d["zeta"]), d["sigma"], d.get("seed")
    )


def schedule_hash(schedule: PulseSchedule, drive: AcDrive | None = None,
                  disorder: DisorderRealization | None = None) -> str:
    """Stable hex digest of the full drive description.

    Covers schedule timing and angles, the AC drive, and the disorder
    realization; two runs with equal hashes evolve identical unitaries.
    """
    payload = {"schedule": schedule_to_dict(schedule)}
    if drive is not None:
        payload["drive"] = drive_to_dict(drive)
    if disorder is not None:
        payload["disorder"] = disorder_to_dict(disorder)
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()
