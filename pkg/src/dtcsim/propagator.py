"""Exact closed-system propagation of state vectors through pulse schedules.

Segment model
-------------
Free segments evolve under the dipolar Hamiltonian plus any static
z-field offsets, with the AC field entering as an exactly factorized
collective z-phase (it commutes with both).  Pulse segments apply the
rotation generator with per-site angle errors and with the AC window
integral embedded in the same exponential,

    x: sum_l (theta_x + tau_x chi_l) I_l^x  +  theta_ac I^z
    y: sum_l (gamma_y + tau_y eta_l) I_l^y  +  theta_ac I^z

where theta_ac is the exact AC integral over the pulse window.  The
non-commutativity of the embedded z-phase with the rotation is exactly
the mechanism that converts a resonant AC field into an effective
static x-field, so the phase must not be factored out of the pulse
exponential.  Dipolar evolution during the (short) pulse windows is
neglected by default; ``dipolar_during_pulses=True`` restores it for
comparison studies.

Engines
-------
Two independent routes compute the segment exponentials: a dense
eigendecomposition engine with memoization keyed by (kind, duration,
angle, AC-integral bucket at 1e-12 resolution), and a matrix-free
Lanczos engine with a residual-controlled Krylov subspace.  Resonant
schedules revisit a few dozen distinct AC buckets, so the dense cache
turns millions of segments into a handful of factorizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from collections import OrderedDict
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigh_tridiagonal

from .operators import DipolarHamiltonian, OperatorSet, build_operators
from .sequence import (
    FREE,
    X_PULSE,
    Y_PULSE,
    AcDrive,
    DisorderRealization,
    NO_DRIVE,
    PulseSchedule,
    Segment,
    ac_integral,
    schedule_hash,
)

NORM_TOL = 1e-9


class NormDriftError(RuntimeError):
    """State norm left the unit sphere beyond tolerance: propagation is broken."""


class KrylovConvergenceError(RuntimeError):
    """The Krylov subspace hit its size cap before reaching tolerance."""


@dataclass
class QuantumState:
    """Complex amplitude vector plus its absolute time."""

    vector: np.ndarray
    time: float = 0.0

    @property
    def dimension(self) -> int:
        return self.vector.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def copy(self) -> "QuantumState":
        return QuantumState(self.vector.copy(), self.time)


@dataclass(frozen=True)
class PropagatorOptions:
    """Tuning knobs; the defaults are what every acceptance run uses."""

    engine: str = "auto"  # auto | dense | krylov
    dense_max_spins: int = 12
    theta_bucket: float = 1e-12
    krylov_tol: float = 1e-10
    krylov_max_dim: int = 64
    substeps: int | None = None
    dipolar_during_pulses: bool = False
    cache_bytes_limit: int = 1_500_000_000
    norm_tol: float = NORM_TOL


DEFAULT_OPTIONS = PropagatorOptions()


@dataclass
class TimeTrace:
    """Observables sampled after each pulse, per-spin normalized.

    ``parity`` counts y-kicks applied up to and including the sample's
    segment; ``kinds`` records which pulse emitted each sample ('x' or
    'y').  ``s`` and ``phi`` are the transverse magnitude and azimuth.
    ``extra`` holds caller-requested observable traces by name.
    """

    times: np.ndarray
    parity: np.ndarray
    kinds: np.ndarray
    ix: np.ndarray
    iy: np.ndarray
    iz: np.ndarray
    s: np.ndarray
    phi: np.ndarray
    meta: dict
    final_state: QuantumState | None
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def component(self, name: str) -> np.ndarray:
        try:
            return {"x": self.ix, "y": self.iy, "z": self.iz,
                    "s": self.s, "phi": self.phi}[name]
        except KeyError:
            raise ValueError(f"unknown trace component {name!r}") from None


def initial_state(ops: OperatorSet, axis: str) -> QuantumState:
    """Product state fully polarized along +x or +z, at time zero."""
    dim = ops.dimension
    if axis == "z":
        vec = np.zeros(dim, dtype=complex)
        vec[0] = 1.0
    elif axis == "x":
        vec = np.full(dim, dim ** -0.5, dtype=complex)
    else:
        raise ValueError("axis must be 'x' or 'z'")
    return QuantumState(vec, 0.0)


@lru_cache(maxsize=8)
def cached_operators(n_spins: int) -> OperatorSet:
    return build_operators(n_spins)


# ---------------------------------------------------------------------------
# Engines
# ---------------------------------------------------------------------------


def _site_field_csr(ops: OperatorSet, axis: str, weights: np.ndarray) -> sp.csr_matrix:
    """sum_l weights[l] * I_l^axis as CSR (zero matrix for all-zero weights)."""
    n = ops.n_spins
    total = sp.csr_matrix((ops.dimension, ops.dimension), dtype=complex)
    for l in range(n):
        w = weights[l]
        if w != 0.0:
            total = total + w * ops.site(axis, l)
    return total.tocsr()


class _EngineBase:
    """Shared segment bookkeeping for both exponential routes."""

    def __init__(self, hdd: DipolarHamiltonian, ops: OperatorSet,
                 drive: AcDrive, disorder: DisorderRealization | None,
                 options: PropagatorOptions):
        self.ops = ops
        self.drive = drive
        self.options = options
        self.dim = ops.dimension
        self.mz = ops.collective_z.diagonal().real.copy()

        chi = np.zeros(ops.n_spins)
        eta = np.zeros(ops.n_spins)
        zeta = np.zeros(ops.n_spins)
        if disorder is not None:
            if disorder.n_spins != ops.n_spins:
                raise ValueError("disorder realization size does not match spin count")
            chi = np.asarray(disorder.chi, dtype=float)
            eta = np.asarray(disorder.eta, dtype=float)
            zeta = np.asarray(disorder.zeta, dtype=float)
        self._hdd_bare = hdd.matrix
        self._free_gen = (hdd.matrix + _site_field_csr(ops, "z", zeta)).tocsr()
        self._chi = chi
        self._eta = eta
        self._x_err = _site_field_csr(ops, "x", chi)
        self._y_err = _site_field_csr(ops, "y", eta)
        self._has_x_err = bool(np.any(chi))
        self._has_y_err = bool(np.any(eta))

    # -- AC bookkeeping ----------------------------------------------------
    def _theta_window(self, seg: Segment) -> float:
        return ac_integral(self.drive, seg.t0, seg.t_end)

    def _snapped_theta(self, seg: Segment) -> tuple[int, float]:
        theta = self._theta_window(seg)
        bucket = self.options.theta_bucket
        key = round(theta / bucket)
        return key, key * bucket

    def _pulse_generator(self, seg: Segment, theta_ac: float) -> sp.csr_matrix:
        """Hermitian CSR generator G with the segment unitary exp(-iG)."""
        if seg.kind == X_PULSE:
            gen = seg.angle * self.ops.collective_x
            if self._has_x_err and seg.duration > 0.0:
                gen = gen + seg.duration * self._x_err
        elif seg.kind == Y_PULSE:
            gen = seg.angle * self.ops.collective_y
            if self._has_y_err and seg.duration > 0.0:
                gen = gen + seg.duration * self._y_err
        else:  # pragma: no cover - callers dispatch on kind
            raise ValueError(f"not a pulse segment: {seg.kind}")
        if theta_ac != 0.0:
            gen = gen + theta_ac * self.ops.collective_z
        if self.options.dipolar_during_pulses and seg.duration > 0.0:
            gen = gen + seg.duration * self._hdd_bare
        return gen.tocsr()

    def _pulse_is_product(self, seg: Segment) -> bool:
        """True when the pulse generator is a sum of one-site terms only."""
        return not (self.options.dipolar_during_pulses and seg.duration > 0.0)

    def _site_rotations(self, seg: Segment, theta_ac: float) -> list[np.ndarray]:
        """Per-site 2x2 unitaries of a product pulse, exact in theta_ac.

        Off-resonance drives give every pulse a fresh AC angle, which
        would defeat any unitary memoization; the factored form needs no
        cache at all and is exact, so detuned sweeps cost the same as
        resonant ones.
        """
        if seg.kind == X_PULSE:
            errs = self._chi
        elif seg.kind == Y_PULSE:
            errs = self._eta
        else:  # pragma: no cover - callers dispatch on kind
            raise ValueError(f"not a pulse segment: {seg.kind}")
        mats = []
        for err in errs:
            a = seg.angle + seg.duration * err
            if seg.kind == X_PULSE:
                mats.append(su2_exp(a, 0.0, theta_ac))
            else:
                mats.append(su2_exp(0.0, a, theta_ac))
        return mats

    # -- public ------------------------------------------------------------
    def apply(self, psi: np.ndarray, seg: Segment, sign: float = 1.0) -> np.ndarray:
        if self.options.substeps and seg.kind != FREE and seg.duration > 0.0:
            return self._apply_substepped(psi, seg, sign)
        if seg.kind == FREE:
            theta = self._theta_window(seg)
            psi = self._apply_free(psi, seg.duration, sign)
            if theta != 0.0:
                psi = np.exp(-1j * sign * theta * self.mz) * psi
            return psi
        if self._pulse_is_product(seg):
            return self._apply_pulse_product(psi, seg, self._theta_window(seg), sign)
        key, theta = self._snapped_theta(seg)
        return self._apply_pulse(psi, seg, key, theta, sign)

    def _apply_substepped(self, psi: np.ndarray, seg: Segment, sign: float) -> np.ndarray:
        """Fine-time-step reference for pulse windows (quasi-static check).

        Splits the pulse into equal subwindows, each with its own exact
        AC integral; the segment order respects the sign for reversal.
        """
        k = int(self.options.substeps)
        subdur = seg.duration / k
        subang = seg.angle / k
        order = range(k) if sign > 0 else range(k - 1, -1, -1)
        for j in order:
            sub = Segment(seg.kind, subdur, seg.t0 + j * subdur, subang)
            theta = self._theta_window(sub)
            psi = self._exp_apply_uncached(psi, self._pulse_generator(sub, theta), sign)
        return psi

    # subclass hooks
    def _apply_free(self, psi, duration, sign):  # pragma: no cover - abstract
        raise NotImplementedError

    def _apply_pulse(self, psi, seg, key, theta, sign):  # pragma: no cover - abstract
        raise NotImplementedError

    def _apply_pulse_product(self, psi, seg, theta, sign):  # pragma: no cover - abstract
        raise NotImplementedError

    def _exp_apply_uncached(self, psi, gen, sign):  # pragma: no cover - abstract
        raise NotImplementedError


class _DenseEngine(_EngineBase):
    """Eigendecomposition route with a byte-bounded unitary cache."""

    def __init__(self, *args):
        super().__init__(*args)
        self._free_cache: dict[float, np.ndarray] = {}
        self._pulse_cache: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._unitary_bytes = 16 * self.dim * self.dim

    def _expm_dense(self, gen: sp.csr_matrix) -> np.ndarray:
        w, v = eigh(gen.toarray())
        return (v * np.exp(-1j * w)) @ v.conj().T

    def _cache_insert(self, cache: OrderedDict, key, value) -> None:
        cache[key] = value
        limit = max(1, self.options.cache_bytes_limit // self._unitary_bytes)
        while len(cache) > limit:
            cache.popitem(last=False)

    def _apply_free(self, psi, duration, sign):
        u = self._free_cache.get(duration)
        if u is None:
            u = self._expm_dense(duration * self._free_gen)
            self._free_cache[duration] = u
        if sign > 0:
            return u @ psi
        return u.conj().T @ psi

    def _apply_pulse(self, psi, seg, key, theta, sign):
        cache_key = (seg.kind, seg.duration, seg.angle, key)
        u = self._pulse_cache.get(cache_key)
        if u is None:
            u = self._expm_dense(self._pulse_generator(seg, theta))
            self._cache_insert(self._pulse_cache, cache_key, u)
        else:
            self._pulse_cache.move_to_end(cache_key)
        if sign > 0:
            return u @ psi
        return u.conj().T @ psi

    def _apply_pulse_product(self, psi, seg, theta, sign):
        out = psi
        for k, u in enumerate(self._site_rotations(seg, theta)):
            if sign < 0:
                u = u.conj().T
            out = np.einsum("ab,ibj->iaj", u, out.reshape(2**k, 2, -1))
        return out.reshape(-1)

    def _exp_apply_uncached(self, psi, gen, sign):
        w, v = eigh(gen.toarray())
        return (v * np.exp(-1j * sign * w)) @ (v.conj().T @ psi)


class _KrylovEngine(_EngineBase):
    """Matrix-free Lanczos route; O(2^L) memory, residual-controlled."""

    def __init__(self, *args):
        super().__init__(*args)
        self._gen_cache: OrderedDict[tuple, sp.csr_matrix] = OrderedDict()

    def _apply_free(self, psi, duration, sign):
        return _lanczos_expm(self._free_gen, psi, duration * sign,
                             self.options.krylov_tol, self.options.krylov_max_dim)

    def _apply_pulse(self, psi, seg, key, theta, sign):
        cache_key = (seg.kind, seg.duration, seg.angle, key)
        gen = self._gen_cache.get(cache_key)
        if gen is None:
            gen = self._pulse_generator(seg, theta)
            self._gen_cache[cache_key] = gen
            while len(self._gen_cache) > 512:
                self._gen_cache.popitem(last=False)
        return _lanczos_expm(gen, psi, sign, self.options.krylov_tol,
                             self.options.krylov_max_dim)

    def _apply_pulse_product(self, psi, seg, theta, sign):
        # fresh generator per pulse: exact AC angle, no quantization
        return _lanczos_expm(self._pulse_generator(seg, theta), psi, sign,
                             self.options.krylov_tol, self.options.krylov_max_dim)

    def _exp_apply_uncached(self, psi, gen, sign):
        return _lanczos_expm(gen, psi, sign, self.options.krylov_tol,
                             self.options.krylov_max_dim)


def _lanczos_expm(a_csr: sp.csr_matrix, v: np.ndarray, scale: float,
                  tol: float, max_m: int) -> np.ndarray:
    """exp(-1j*scale*A) @ v for Hermitian A, via a Lanczos subspace.

    Grows the subspace until the standard a-posteriori residual
    estimate beta_m * |last Ritz coefficient| drops below ``tol`` times
    the vector norm.  Full reorthogonalization keeps the basis clean at
    the small subspace sizes this problem needs.
    """
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0 or scale == 0.0:
        if scale == 0.0:
            return v.copy()
        return v.copy()
    q = v / nrm
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    w = a_csr @ q
    alphas.append(float(np.vdot(q, w).real))
    w = w - alphas[0] * q
    y = None
    for _ in range(max_m):
        beta = float(np.linalg.norm(w))
        ew, ev = eigh_tridiagonal(alphas, betas)
        y = ev @ (np.exp(-1j * scale * ew) * ev[0, :].conj())
        if beta * abs(y[-1]) <= tol or beta < 1e-14:
            break
        q_next = w / beta
        for b in basis:  # full reorthogonalization
            q_next = q_next - np.vdot(b, q_next) * b
        qn = float(np.linalg.norm(q_next))
        if qn < 1e-14:
            break
        q_next = q_next / qn
        basis.append(q_next)
        betas.append(beta)
        w = a_csr @ q_next - beta * basis[-2]
        a_next = float(np.vdot(q_next, w).real)
        alphas.append(a_next)
        w = w - a_next * q_next
    else:
        raise KrylovConvergenceError(
            f"Krylov subspace cap {max_m} reached before tolerance {tol}"
        )
    out = np.zeros_like(v)
    for coeff, b in zip(y, basis):
        out += coeff * b
    return nrm * out


def make_engine(hdd: DipolarHamiltonian, ops: OperatorSet,
                drive: AcDrive | None = None,
                disorder: DisorderRealization | None = None,
                options: PropagatorOptions | None = None) -> _EngineBase:
    """Build a reusable segment-application engine.

    Engines may be shared across :func:`evolve` calls that use the same
    Hamiltonian, drive, and disorder — e.g. a dome scan over gamma_y,
    where the x-pulse cache carries over between columns.  They must
    not be shared across different drives or disorder realizations.
    """
    options = options or DEFAULT_OPTIONS
    drive = drive or NO_DRIVE
    engine = options.engine
    if engine == "auto":
        engine = "dense" if ops.n_spins <= options.dense_max_spins else "krylov"
    if engine == "dense":
        return _DenseEngine(hdd, ops, drive, disorder, options)
    if engine == "krylov":
        return _KrylovEngine(hdd, ops, drive, disorder, options)
    raise ValueError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------


def segment_unitary_apply(
    state: QuantumState,
    segment: Segment,
    hdd: DipolarHamiltonian,
    drive: AcDrive | None = None,
    disorder: DisorderRealization | None = None,
    *,
    ops: OperatorSet | None = None,
    options: PropagatorOptions | None = None,
) -> QuantumState:
    """Apply one segment's unitary; the state time must equal segment.t0."""
    if abs(state.time - segment.t0) > 1e-9 * max(1.0, abs(segment.t0)):
        raise ValueError(
            f"state time {state.time} does not match segment start {segment.t0}"
        )
    options = options or DEFAULT_OPTIONS
    drive = drive or NO_DRIVE
    if ops is None:
        ops = cached_operators(hdd.graph.n_spins)
    engine = make_engine(hdd, ops, drive, disorder, options)
    vec = engine.apply(state.vector.copy(), segment)
    out = QuantumState(vec, segment.t_end)
    _check_norm(out, options.norm_tol)
    return out


def _check_norm(state: QuantumState, tol: float) -> None:
    drift = abs(state.norm - 1.0)
    if drift > tol:
        raise NormDriftError(f"norm drift {drift:.3e} exceeds tolerance {tol:.1e}")


def evolve(
    state: QuantumState,
    schedule: PulseSchedule,
    hdd: DipolarHamiltonian,
    drive: AcDrive | None = None,
    disorder: DisorderRealization | None = None,
    *,
    ops: OperatorSet | None = None,
    options: PropagatorOptions | None = None,
    extra_observables: dict | None = None,
    engine: _EngineBase | None = None,
) -> TimeTrace:
    """Run the full schedule, sampling observables after every pulse.

    The input state is not mutated.  Samples carry the kick parity
    (y-pulses so far) and the emitting pulse kind; all spin components
    are normalized per spin to [-1, 1].  ``extra_observables`` maps
    names to Hermitian matrices whose expectations are sampled at the
    same markers (un-normalized).  A pre-built ``engine`` (from
    :func:`make_engine`, with the same hdd/drive/disorder) may be
    passed to reuse its unitary caches across calls.
    """
    options = options or DEFAULT_OPTIONS
    drive = drive or NO_DRIVE
    if ops is None:
        ops = cached_operators(hdd.graph.n_spins)
    if state.dimension != ops.dimension:
        raise ValueError("state dimension does not match operator set")
    extra_observables = extra_observables or {}

    if engine is None:
        engine = make_engine(hdd, ops, drive, disorder, options)
    psi = state.vector.copy()
    half_l = ops.n_spins / 2.0

    times: list[float] = []
    parities: list[int] = []
    kinds: list[str] = []
    ix: list[float] = []
    iy: list[float] = []
    iz: list[float] = []
    extra: dict[str, list[float]] = {name: [] for name in extra_observables}

    sx, sy, sz = ops.collective_x, ops.collective_y, ops.collective_z
    parity = 0
    for i, seg in enumerate(schedule.segments):
        psi = engine.apply(psi, seg)
        if seg.kind == FREE:
            continue
        if seg.kind == Y_PULSE:
            parity += 1
        times.append(seg.t_end)
        parities.append(parity)
        kinds.append("y" if seg.kind == Y_PULSE else "x")
        ix.append(float(np.vdot(psi, sx @ psi).real) / half_l)
        iy.append(float(np.vdot(psi, sy @ psi).real) / half_l)
        iz.append(float(np.vdot(psi, sz @ psi).real) / half_l)
        for name, mat in extra_observables.items():
            extra[name].append(float(np.vdot(psi, mat @ psi).real))
        if (i & 0xFF) == 0xFF:
            _check_norm(QuantumState(psi, seg.t_end), options.norm_tol)

    final_time = schedule.segments[-1].t_end if schedule.segments else state.time
    final = QuantumState(psi, final_time)
    _check_norm(final, options.norm_tol)

    ix_a, iy_a, iz_a = (np.asarray(a) for a in (ix, iy, iz))
    s = np.hypot(ix_a, iy_a)
    if np.any(s > 1.0 + NORM_TOL):
        raise NormDriftError("transverse projection exceeded 1 beyond tolerance")
    phi = np.arctan2(iy_a, ix_a)
    phi[phi == -math.pi] = math.pi

    meta = {
        "n_spins": ops.n_spins,
        "cycles": schedule.cycles,
        "period": schedule.period,
        "f_res": schedule.f_res,
        "schedule_kind": schedule.kind,
        "schedule_hash": schedule_hash(schedule, drive, disorder),
    }
    return TimeTrace(
        times=np.asarray(times),
        parity=np.asarray(parities, dtype=int),
        kinds=np.asarray(kinds),
        ix=ix_a, iy=iy_a, iz=iz_a, s=s, phi=phi,
        meta=meta, final_state=final,
        extra={k: np.asarray(v) for k, v in extra.items()},
    )


def reverse_evolve(
    state: QuantumState,
    schedule: PulseSchedule,
    hdd: DipolarHamiltonian,
    drive: AcDrive | None = None,
    disorder: DisorderRealization | None = None,
    *,
    ops: OperatorSet | None = None,
    options: PropagatorOptions | None = None,
) -> QuantumState:
    """Apply the exact inverse of the schedule (reversed order, negated generators)."""
    options = options or DEFAULT_OPTIONS
    drive = drive or NO_DRIVE
    if ops is None:
        ops = cached_operators(hdd.graph.n_spins)
    engine = make_engine(hdd, ops, drive, disorder, options)
    psi = state.vector.copy()
    for seg in reversed(schedule.segments):
        psi = engine.apply(psi, seg, sign=-1.0)
    start = schedule.segments[0].t0 if schedule.segments else state.time
    out = QuantumState(psi, start)
    _check_norm(out, options.norm_tol)
    return out


# ---------------------------------------------------------------------------
# Single-spin closed forms (oracle helpers and the cancellation check)
# ---------------------------------------------------------------------------


def su2_exp(ax: float, ay: float, az: float) -> np.ndarray:
    """exp(-i (ax I^x + ay I^y + az I^z)) for one spin-1/2, closed form."""
    phi = math.sqrt(ax * ax + ay * ay + az * az)
    if phi == 0.0:
        return np.eye(2, dtype=complex)
    nx, ny, nz = ax / phi, ay / phi, az / phi
    c = math.cos(phi / 2.0)
    s = math.sin(phi / 2.0)
    return np.array(
        [[c - 1j * s * nz, -1j * s * nx - s * ny],
         [-1j * s * nx + s * ny, c + 1j * s * nz]],
        dtype=complex,
    )


def single_particle_check(
    n_x: int = 16,
    theta_x: float = math.pi / 2.0,
    gamma_y: float = math.pi,
    b_amp: float = 1.0,
    tau: float = 1.0,
    phi_ac: float = math.pi / 2.0,
    tau_y: float = 0.0,
) -> float:
    """Two-cycle defect norm of the non-interacting drive at resonance.

    Builds the exact one-spin unitary for two periods of the two-tone
    drive with instantaneous x-pulses (and y-pulse width ``tau_y``,
    zero by default), AC field locked to the realized resonance
    f = 1/(2T), and returns the Frobenius norm of U_two_cycles + 1.
    For instantaneous pulses this vanishes identically: every AC phase
    picked up in the first cycle is unwound in the second, so the net
    effect is two y kicks, whose square is -1.  A finite ``tau_y``
    breaks the cancellation linearly in b_amp * tau_y, which is the
    entire sensing mechanism.
    """
    if n_x < 1:
        raise ValueError("need at least one x-pulse")
    period = (n_x + 1) * tau + tau_y
    freq = 1.0 / (2.0 * period)
    t_origin = (n_x + 1) * tau + 0.5 * tau_y
    drive = AcDrive(abs(b_amp), freq, phi_ac, t_origin)

    u = np.eye(2, dtype=complex)
    t = 0.0
    for _ in range(2):
        for _ in range(n_x):
            theta = ac_integral(drive, t, t + tau)
            t += tau
            u = su2_exp(0.0, 0.0, theta) @ u
            u = su2_exp(theta_x, 0.0, 0.0) @ u
        theta = ac_integral(drive, t, t + tau)
        t += tau
        u = su2_exp(0.0, 0.0, theta) @ u
        theta_y = ac_integral(drive, t, t + tau_y)
        t += tau_y
        u = su2_exp(0.0, gamma_y, theta_y) @ u
    return float(np.linalg.norm(u + np.eye(2)))


def factorized_y_pulse(gamma_y: float, alpha: float) -> np.ndarray:
    """First-order factorization of exp(-i(gamma_y I^y + alpha I^z)).

    Returns exp(-i gamma_y I^y) exp(-i (c_x I^x + c_z I^z)) with
    c_x = -alpha (1 - cos gamma_y)/gamma_y and
    c_z = alpha sin(gamma_y)/gamma_y, the exact first-order-in-alpha
    correction in the rotated frame; the residual is O(alpha^2).
    """
    if gamma_y == 0.0:
        raise ValueError("gamma_y must be nonzero")
    c_x = -alpha * (1.0 - math.cos(gamma_y)) / gamma_y
    c_z = alpha * math.sin(gamma_y) / gamma_y
    return su2_exp(0.0, gamma_y, 0.0) @ su2_exp(c_x, 0.0, c_z)


def factorization_distance(gamma_y: float, alpha: float) -> float:
    """Operator distance between the exact kick-with-z-field and its factorization."""
    exact = su2_exp(0.0, gamma_y, alpha)
    return float(np.linalg.norm(exact - factorized_y_pulse(gamma_y, alpha)))
