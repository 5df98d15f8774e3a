"""Collective operators, dipolar/spin-lock Hamiltonians, toggling average."""
import math

import numpy as np
import pytest
import scipy.sparse as sp

from dtcsim.lattice import SpinGraph, coupling_matrix
from dtcsim.operators import (
    L_CAP,
    build_hdd,
    build_hsl,
    build_operators,
    dense,
    toggling_average,
)

# Hand-written Pauli blocks used by every oracle below; independent of
# the package's own operator constructors.
SX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SY = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
ID = np.eye(2, dtype=complex)


def kron_chain(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def site_op(n, k, block):
    return kron_chain([block if i == k else ID for i in range(n)])


def two_spin_graph(j):
    """Synthetic 2-spin cluster with an exact coupling J_01 = j."""
    r = (2.0 / abs(j)) ** (1.0 / 3.0)
    pos = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, r]])
    axis = np.array([0.0, 0.0, 1.0])
    scale = 1.0 if j > 0 else -1.0
    J = coupling_matrix(pos, axis, coupling_scale=scale)
    return SpinGraph(
        n_spins=2, positions=pos, axis=axis, couplings=J, coupling_scale=scale,
        r_min=0.5, r_max=2 * r, median_coupling=abs(j), seed=None,
    )


# ---------------------------------------------------------------------------
# collective operators
# ---------------------------------------------------------------------------


def test_single_spin_z_eigenvalues():
    ops = build_operators(1)
    w = np.linalg.eigvalsh(dense(ops.collective_z))
    np.testing.assert_allclose(np.sort(w), [-0.5, 0.5], atol=1e-14)


def test_collective_operators_match_kron_oracle():
    n = 3
    ops = build_operators(n)
    for axis, block in (("x", SX), ("y", SY), ("z", SZ)):
        oracle = sum(site_op(n, k, block) for k in range(n))
        np.testing.assert_allclose(dense(ops.collective(axis)), oracle, atol=1e-14)


def test_commutator_algebra():
    ops = build_operators(6)
    pairs = [
        (ops.collective_x, ops.collective_y, ops.collective_z),
        (ops.collective_y, ops.collective_z, ops.collective_x),
        (ops.collective_z, ops.collective_x, ops.collective_y),
    ]
    for a, b, c in pairs:
        comm = (a @ b - b @ a).toarray()
        np.testing.assert_allclose(comm, 1j * c.toarray(), atol=1e-12)


def test_collective_operators_are_hermitian():
    ops = build_operators(5)
    for axis in "xyz":
        m = ops.collective(axis)
        assert abs(m - m.getH()).max() < 1e-14


def test_site_accessor_and_bounds():
    ops = build_operators(3)
    np.testing.assert_allclose(dense(ops.site("y", 1)), site_op(3, 1, SY), atol=1e-14)
    with pytest.raises(ValueError):
        ops.site("q", 0)
    with pytest.raises(ValueError):
        ops.site("x", 3)


def test_operator_set_size_guards():
    with pytest.raises(ValueError):
        build_operators(0)
    with pytest.raises(ValueError):
        build_operators(L_CAP + 1)


# ---------------------------------------------------------------------------
# dipolar Hamiltonian
# ---------------------------------------------------------------------------


def test_two_spin_dipolar_spectrum():
    j = 0.7
    graph = two_spin_graph(j)
    ops = build_operators(2)
    h = build_hdd(graph, ops)
    w = np.sort(np.linalg.eigvalsh(dense(h.matrix)))
    expected = np.sort([j / 2.0, j / 2.0, -j, 0.0])
    np.testing.assert_allclose(w, expected, atol=1e-12)


def test_two_spin_dipolar_matrix_oracle():
    j = 1.3
    graph = two_spin_graph(j)
    ops = build_operators(2)
    h = dense(build_hdd(graph, ops).matrix)
    sdots = (np.kron(SX, SX) + np.kron(SY, SY) + np.kron(SZ, SZ))
    oracle = j * (3.0 * np.kron(SZ, SZ) - sdots)
    np.testing.assert_allclose(h, oracle, atol=1e-13)


def test_dipolar_conserves_z_magnetization(system6):
    graph, ops, hdd = system6
    comm = hdd.matrix @ ops.collective_z - ops.collective_z @ hdd.matrix
    assert abs(comm).max() < 1e-12


def test_dipolar_is_hermitian_and_traceless(system6):
    _, _, hdd = system6
    m = hdd.matrix
    assert abs(m - m.getH()).max() < 1e-12
    assert abs(m.diagonal().sum()) < 1e-10


def test_dipolar_with_static_z_offsets(system4):
    graph, ops, _ = system4
    zeta = np.array([0.3, -0.1, 0.05, 0.2])
    bare = build_hdd(graph, ops)
    shifted = build_hdd(graph, ops, z_disorder=zeta)
    field = sum(zeta[k] * dense(ops.site("z", k)) for k in range(4))
    np.testing.assert_allclose(
        dense(shifted.matrix), dense(bare.matrix) + field, atol=1e-13
    )
    np.testing.assert_array_equal(shifted.zeta, zeta)
    # site z fields keep the collective-z conservation intact
    comm = shifted.matrix @ ops.collective_z - ops.collective_z @ shifted.matrix
    assert abs(comm).max() < 1e-12


def test_dipolar_rejects_mismatched_sizes(system4):
    graph, _, _ = system4
    ops6 = build_operators(6)
    with pytest.raises(ValueError):
        build_hdd(graph, ops6)


# ---------------------------------------------------------------------------
# spin-lock Hamiltonian
# ---------------------------------------------------------------------------


def test_spin_lock_matches_kron_oracle(system4):
    graph, ops, _ = system4
    hsl = build_hsl(graph, ops)
    n = 4
    oracle = np.zeros((2**n, 2**n), dtype=complex)
    for k in range(n):
        for l in range(k + 1, n):
            xx = site_op(n, k, SX) @ site_op(n, l, SX)
            dots = (
                site_op(n, k, SX) @ site_op(n, l, SX)
                + site_op(n, k, SY) @ site_op(n, l, SY)
                + site_op(n, k, SZ) @ site_op(n, l, SZ)
            )
            oracle += -0.5 * graph.couplings[k, l] * (3.0 * xx - dots)
    np.testing.assert_allclose(dense(hsl.matrix), oracle, atol=1e-12)


def test_spin_lock_conserves_x_magnetization(system4):
    graph, ops, _ = system4
    hsl = build_hsl(graph, ops)
    comm = hsl.matrix @ ops.collective_x - ops.collective_x @ hsl.matrix
    assert abs(comm).max() < 1e-12


def test_two_spin_lock_energy_scale_closed_form():
    j = 1.0
    graph = two_spin_graph(j)
    ops = build_operators(2)
    hsl = build_hsl(graph, ops)
    # spectrum of -(j/2)(3 IxIx - I.I) is {-j/4, -j/4, j/2, 0};
    # Frobenius norm sqrt(3/8) j over sqrt(2^L * L) = sqrt(8)
    assert hsl.j_spinlock == pytest.approx(abs(j) * math.sqrt(3.0) / 8.0, rel=1e-12)


def test_spin_lock_scale_is_intensive_in_j():
    g1 = two_spin_graph(1.0)
    g2 = two_spin_graph(2.0)
    ops = build_operators(2)
    ratio = build_hsl(g2, ops).j_spinlock / build_hsl(g1, ops).j_spinlock
    assert ratio == pytest.approx(2.0, rel=1e-12)


# ---------------------------------------------------------------------------
# toggling average
# ---------------------------------------------------------------------------


def test_toggling_average_reproduces_spin_lock(system4):
    graph, ops, hdd = system4
    avg = toggling_average(hdd, ops, N=3, theta_x=math.pi / 2.0)
    hsl = build_hsl(graph, ops)
    assert np.max(np.abs(avg - dense(hsl.matrix))) < 1e-10


def test_toggling_average_with_zero_kicks_is_bare_hamiltonian(system4):
    _, ops, hdd = system4
    avg = toggling_average(hdd, ops, N=0, theta_x=math.pi / 2.0)
    np.testing.assert_allclose(avg, dense(hdd.matrix), atol=1e-12)


def test_toggling_average_defect_shrinks_as_one_over_n(system4):
    graph, ops, hdd = system4
    hsl = dense(build_hsl(graph, ops).matrix)

    def defect(n):
        avg = toggling_average(hdd, ops, N=n, theta_x=math.pi / 2.0)
        return np.max(np.abs(avg - hsl))

    d4, d8, d16 = defect(4), defect(8), defect(16)
    assert d4 > 1e-6  # N+1 not a multiple of 4: identity genuinely broken
    assert d8 < d4
    assert d16 < d8
    # leading correction scales like 1/N
    assert d4 / d16 == pytest.approx(4.0, rel=0.5)


def test_toggling_average_at_multiple_of_four_other_sizes(system6):
    graph, ops, hdd = system6
    hsl = build_hsl(graph, ops)
    for n in (7, 11):
        avg = toggling_average(hdd, ops, N=n, theta_x=math.pi / 2.0)
        assert np.max(np.abs(avg - dense(hsl.matrix))) < 1e-10
