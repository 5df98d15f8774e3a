"""Spin-1/2 many-body operators on the full 2^L Hilbert space.

Collective and per-site angular-momentum operators (I^alpha = sigma^alpha/2),
the secular dipolar Hamiltonian

    H_dd = sum_{k<l} J_kl (3 I_k^z I_l^z - I_k . I_l)  [+ sum_l zeta_l I_l^z],

and the spin-locked reference Hamiltonian

    H_SL = -1/2 sum_{k<l} J_kl (3 I_k^x I_l^x - I_k . I_l),

which is what an x-pulse train averages H_dd into (see
:func:`toggling_average`).  H_dd commutes with I^z exactly and H_SL with
I^x; both identities are structural, not approximate, and the test suite
asserts them against dense matrices.

Operators are stored sparse (CSR); ``dense()`` converts for the small
sizes where an explicit matrix is still a sensible object.  H_dd at
L = 15 has a few million stored entries, which is fine; a dense 2^15
square matrix is not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .lattice import SpinGraph

# Above this the 2^L x 2^L dense matrix stops being a reasonable thing
# to materialize (2^13 squared complex ~ 1 GiB).
DENSE_CAP = 12

# Hard cap for building any operator at all; past this even the sparse
# representation and the state vector get out of hand on one node.
L_CAP = 22

_SIGMA = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def _site_operator(n_spins: int, axis: str, site: int) -> sp.csr_matrix:
    """I_site^axis = 1 x ... x sigma^axis/2 x ... x 1 (site-th factor)."""
    left = sp.identity(2**site, format="coo", dtype=complex)
    right = sp.identity(2 ** (n_spins - site - 1), format="coo", dtype=complex)
    op = sp.kron(sp.kron(left, 0.5 * _SIGMA[axis]), right)
    return op.tocsr()


@dataclass(frozen=True)
class OperatorSet:
    """Collective I^x/y/z plus per-site accessors for a fixed L."""

    n_spins: int
    dimension: int
    collective_x: sp.csr_matrix
    collective_y: sp.csr_matrix
    collective_z: sp.csr_matrix

    def site(self, axis: str, k: int) -> sp.csr_matrix:
        """Single-site operator I_k^axis."""
        if axis not in _SIGMA:
            raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
        if not 0 <= k < self.n_spins:
            raise ValueError(f"site index {k} out of range for L={self.n_spins}")
        return _site_operator(self.n_spins, axis, k)

    def collective(self, axis: str) -> sp.csr_matrix:
        return {"x": self.collective_x, "y": self.collective_y, "z": self.collective_z}[axis]


def build_operators(n_spins: int) -> OperatorSet:
    """Construct the collective operators for ``n_spins`` spins."""
    if n_spins < 1:
        raise ValueError(f"need at least one spin, got {n_spins}")
    if n_spins > L_CAP:
        raise ValueError(f"L={n_spins} exceeds the supported cap of {L_CAP}")
    dim = 2**n_spins
    ops = {}
    for axis in ("x", "y", "z"):
        total = sp.csr_matrix((dim, dim), dtype=complex)
        for k in range(n_spins):
            total = total + _site_operator(n_spins, axis, k)
        ops[axis] = total.tocsr()
    return OperatorSet(
        n_spins=n_spins,
        dimension=dim,
        collective_x=ops["x"],
        collective_y=ops["y"],
        collective_z=ops["z"],
    )


def dense(op: sp.spmatrix | np.ndarray) -> np.ndarray:
    """Materialize a (small) operator as an ndarray; refuses huge ones."""
    if isinstance(op, np.ndarray):
        return op
    dim = op.shape[0]
    if dim > 2**DENSE_CAP:
        raise ValueError(f"refusing to densify a {dim}x{dim} matrix (cap 2^{DENSE_CAP})")
    return np.asarray(op.todense())


@dataclass(frozen=True)
class DipolarHamiltonian:
    """H_dd (plus optional static z-field disorder) for one graph."""

    graph: SpinGraph
    matrix: sp.csr_matrix
    zeta: np.ndarray | None = None

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def dense(self) -> np.ndarray:
        return dense(self.matrix)


@dataclass(frozen=True)
class SpinLockHamiltonian:
    """H_SL and its per-spin infinite-temperature norm J_spinlock."""

    graph: SpinGraph
    matrix: sp.csr_matrix
    j_spinlock: float

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def dense(self) -> np.ndarray:
        return dense(self.matrix)


def _pair_coupling_operator(n_spins: int, main_axis: str, k: int, l: int) -> sp.csr_matrix:
    """3 I_k^a I_l^a - I_k . I_l for a pair, with a = main_axis."""
    total = sp.csr_matrix((2**n_spins, 2**n_spins), dtype=complex)
    for axis in ("x", "y", "z"):
        # 3 I^a I^a - I.I leaves weight +2 on the main axis, -1 elsewhere
        weight = 2.0 if axis == main_axis else -1.0
        term = _site_operator(n_spins, axis, k) @ _site_operator(n_spins, axis, l)
        total = total + weight * term
    return total


def _dipolar_sum(graph: SpinGraph, main_axis: str, prefactor: float) -> sp.csr_matrix:
    n = graph.n_spins
    dim = 2**n
    total = sp.csr_matrix((dim, dim), dtype=complex)
    J = graph.couplings
    for k in range(n):
        for l in range(k + 1, n):
            if J[k, l] == 0.0:
                continue
            total = total + (prefactor * J[k, l]) * _pair_coupling_operator(n, main_axis, k, l)
    return total.tocsr()


def build_hdd(
    graph: SpinGraph,
    ops: OperatorSet,
    z_disorder: np.ndarray | None = None,
) -> DipolarHamiltonian:
    """Assemble H_dd, optionally with per-site static z-offsets zeta_l.

    The zeta term commutes with everything diagonal, so adding it keeps
    [H, I^z] = 0 intact.
    """
    if graph.n_spins != ops.n_spins:
        raise ValueError(f"graph has {graph.n_spins} spins but operators have {ops.n_spins}")
    H = _dipolar_sum(graph, "z", 1.0)
    zeta = None
    if z_disorder is not None:
        zeta = np.asarray(z_disorder, dtype=float)
        if zeta.shape != (graph.n_spins,):
            raise ValueError(f"z_disorder must have shape ({graph.n_spins},), got {zeta.shape}")
        for l, z in enumerate(zeta):
            if z != 0.0:
                H = H + z * _site_operator(graph.n_spins, "z", l)
        H = H.tocsr()
    return DipolarHamiltonian(graph=graph, matrix=H, zeta=zeta)


def build_hsl(graph: SpinGraph, ops: OperatorSet) -> SpinLockHamiltonian:
    """Assemble H_SL = -1/2 sum J_kl (3 I^x I^x - I.I).

    ``j_spinlock`` is the Frobenius norm scaled by sqrt(2^L * L): the
    root-mean-square energy per spin in the infinite-temperature state,
    which keeps the number intensive across system sizes.
    """
    if graph.n_spins != ops.n_spins:
        raise ValueError(f"graph has {graph.n_spins} spins but operators have {ops.n_spins}")
    H = _dipolar_sum(graph, "x", -0.5)
    fro = float(np.sqrt((np.abs(H.data) ** 2).sum()))
    j_sl = fro / np.sqrt(2.0**graph.n_spins * graph.n_spins)
    return SpinLockHamiltonian(graph=graph, matrix=H, j_spinlock=j_sl)


def _rotation_x(n_spins: int, angle: float) -> np.ndarray:
    """Exact collective rotation exp(-i angle I^x) as a dense matrix."""
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    r = np.array([[c, -1.0j * s], [-1.0j * s, c]], dtype=complex)
    out = np.array([[1.0 + 0.0j]])
    for _ in range(n_spins):
        out = np.kron(out, r)
    return out


def toggling_average(
    hdd: DipolarHamiltonian, ops: OperatorSet, N: int, theta_x: float
) -> np.ndarray:
    """Average of H_dd over the N+1 frames of an x-pulse train.

    Returns (1/(N+1)) sum_{l=0..N} R_x(-l theta) H_dd R_x(l theta) as a
    dense Hermitian matrix.  For theta_x = pi/2 and N+1 a multiple of 4
    the frames close and the average equals H_SL exactly; otherwise a
    symmetry-breaking remainder of order 1/N survives.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    n = ops.n_spins
    if n > DENSE_CAP - 2:
        raise ValueError(f"toggling_average is a dense validation op; L={n} is too large")
    H = hdd.dense()
    total = np.zeros_like(H)
    for l in range(N + 1):
        R = _rotation_x(n, l * theta_x)
        total += R.conj().T @ H @ R
    return total / (N + 1)
