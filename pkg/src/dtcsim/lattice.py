"""Random 3D spin clusters and their dipolar coupling matrix.

Spins are placed one by one in a cube under two geometric constraints:
no pair closer than ``r_min`` (overly strong couplings would effectively
detach a pair from the rest of the cluster) and every spin within
``r_max`` of at least one other (no stragglers coupled to nothing).
The secular dipolar coupling between sites k and l is

    J_kl = c_exp * (3 cos^2(theta_kl) - 1) / r_kl^3,

with theta_kl the angle between the pair vector and the external-field
axis.  Because the angular factor changes sign at the magic angle, the
cluster can afterwards be rotated so that the signed sum of all
couplings vanishes, mimicking the balance of positive and negative
couplings of a bulk powder sample.  All lengths are dimensionless and
couplings carry angular-frequency units set by ``coupling_scale``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Total candidate draws allowed while growing one graph.  Exhausting it
# means the requested (n_spins, r_min, r_max) combination is infeasible
# at the chosen cube size, and we refuse rather than bend a constraint.
MAX_CANDIDATE_DRAWS = 100_000

# |sum J| below ORIENT_TOL * sum|J| counts as balanced.
ORIENT_TOL = 1e-9


class GraphSamplingError(RuntimeError):
    """Candidate budget exhausted before all spins could be placed."""


class OrientationError(RuntimeError):
    """No sign change of the coupling sum found over the search grid."""


@dataclass(frozen=True)
class SpinGraph:
    """Immutable sampled cluster with its coupling matrix.

    Attributes
    ----------
    n_spins : int
        Number of spins L.
    positions : (L, 3) ndarray
        Sites in the sampling cube, dimensionless lengths.
    axis : (3,) ndarray
        Unit vector of the external-field direction used for the
        angular factor.
    couplings : (L, L) ndarray
        Symmetric matrix J_kl, zero diagonal, angular-frequency units.
    coupling_scale : float
        Overall prefactor c_exp of every J_kl.
    r_min, r_max : float
        The distance bounds the positions were sampled under.
    median_coupling : float
        Median of |J_kl| over the L(L-1)/2 pairs; the unit "J" in which
        times are usually quoted.
    seed : int or None
        Seed that produced ``positions`` (None for synthetic graphs).
    """

    n_spins: int
    positions: np.ndarray
    axis: np.ndarray
    couplings: np.ndarray
    coupling_scale: float
    r_min: float
    r_max: float
    median_coupling: float
    seed: int | None = None


def coupling_matrix(positions: np.ndarray, axis: np.ndarray, coupling_scale: float = 1.0) -> np.ndarray:
    """Dipolar couplings c*(3 cos^2 theta - 1)/r^3 for all pairs."""
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[0]
    diff = pos[:, None, :] - pos[None, :, :]          # (L, L, 3)
    dist = np.linalg.norm(diff, axis=2)
    np.fill_diagonal(dist, np.inf)
    cos_th = (diff @ axis) / dist
    J = coupling_scale * (3.0 * cos_th**2 - 1.0) / dist**3
    np.fill_diagonal(J, 0.0)
    return J


def _median_abs_offdiag(J: np.ndarray) -> float:
    iu = np.triu_indices(J.shape[0], k=1)
    return float(np.median(np.abs(J[iu])))


def _make_graph(positions, axis, coupling_scale, r_min, r_max, seed) -> SpinGraph:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    J = coupling_matrix(positions, axis, coupling_scale)
    return SpinGraph(
        n_spins=positions.shape[0],
        positions=np.asarray(positions, dtype=float),
        axis=axis,
        couplings=J,
        coupling_scale=float(coupling_scale),
        r_min=float(r_min),
        r_max=float(r_max),
        median_coupling=_median_abs_offdiag(J),
        seed=seed,
    )


def sample_graph(n_spins: int, r_min: float, r_max: float, seed: int) -> SpinGraph:
    """Draw spin positions one by one inside a cube.

    A candidate position is accepted when it keeps at least ``r_min``
    from every spin placed so far and (from the second spin on) lies
    within ``r_max`` of at least one of them.  Each accepted spin
    therefore has a neighbour within ``r_max`` by construction.  The
    cube side grows as n_spins^(1/3) * r_max so the target density
    stays reachable.  The graph is returned unoriented (axis = +z);
    call :func:`orient_graph` to balance the coupling signs.

    Raises
    ------
    ValueError
        If n_spins < 2 or the distance bounds are not 0 < r_min < r_max.
    GraphSamplingError
        If the global candidate budget is exhausted first.
    """
    if n_spins < 2:
        raise ValueError(f"need at least 2 spins, got {n_spins}")
    if not (0.0 < r_min < r_max):
        raise ValueError(f"need 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}")

    rng = np.random.default_rng(seed)
    side = n_spins ** (1.0 / 3.0) * r_max
    placed = np.empty((n_spins, 3))
    placed[0] = rng.uniform(0.0, side, size=3)
    count = 1
    draws = 0
    while count < n_spins:
        if draws >= MAX_CANDIDATE_DRAWS:
            raise GraphSamplingError(
                f"placed {count}/{n_spins} spins after {draws} candidate draws; "
                f"(r_min={r_min}, r_max={r_max}) looks infeasible at this density"
            )
        cand = rng.uniform(0.0, side, size=3)
        draws += 1
        d = np.linalg.norm(placed[:count] - cand, axis=1)
        if d.min() < r_min:
            continue
        if d.min() > r_max:
            continue
        placed[count] = cand
        count += 1

    return _make_graph(placed, np.array([0.0, 0.0, 1.0]), 1.0, r_min, r_max, seed)


def coupling_sum_for_axis(graph: SpinGraph, axis: np.ndarray) -> float:
    """Signed sum over pairs of J_kl evaluated with a trial axis."""
    J = coupling_matrix(graph.positions, np.asarray(axis, float), graph.coupling_scale)
    iu = np.triu_indices(graph.n_spins, k=1)
    return float(J[iu].sum())


N_THETA, N_PHI = 25, 48


def _sphere_grid() -> np.ndarray:
    """Regular (theta, phi) grid on the unit sphere, poles included."""
    thetas = np.linspace(0.0, np.pi, N_THETA)
    phis = np.linspace(0.0, 2.0 * np.pi, N_PHI, endpoint=False)
    pts = []
    for th in thetas:
        for ph in phis:
            pts.append([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    return np.asarray(pts)


def _arc_midpoint(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Normalized chord midpoint of two nearby unit vectors.

    For the short arcs we bisect this agrees with the geodesic midpoint
    to O(angle^3), and unlike an arccos-based slerp it keeps full
    resolution when a and b are separated by less than sqrt(eps).
    """
    mid = 0.5 * (a + b)
    return mid / np.linalg.norm(mid)


def _adjacent_sign_change(vals: np.ndarray) -> tuple[int, int] | None:
    """Indices of two neighbouring grid points with opposite signs.

    Neighbouring (rather than merely opposite-signed) endpoints keep the
    bisection arc short and well away from the antipodal degeneracy of
    the great-circle interpolation.
    """
    v = vals.reshape(N_THETA, N_PHI)
    flat = lambda i, j: i * N_PHI + j  # noqa: E731
    for i in range(N_THETA):
        for j in range(N_PHI):
            j2 = (j + 1) % N_PHI
            if v[i, j] > 0.0 and v[i, j2] < 0.0 or v[i, j] < 0.0 and v[i, j2] > 0.0:
                return flat(i, j), flat(i, j2)
            if i + 1 < N_THETA and (v[i, j] > 0.0) != (v[i + 1, j] > 0.0) and v[i + 1, j] != 0.0 and v[i, j] != 0.0:
                return flat(i, j), flat(i + 1, j)
    return None


def orient_graph(graph: SpinGraph) -> SpinGraph:
    """Rotate the field axis so the signed coupling sum vanishes.

    Scans a coarse grid of directions for a sign change of
    sum_{k<l} J_kl(axis), then bisects along the great-circle arc
    between an opposite-sign pair until |sum J| <= ORIENT_TOL * sum|J|.
    Positions are untouched; only ``axis`` (and hence the couplings)
    changes.  A graph balanced within ten times that tolerance is
    returned unchanged; the hysteresis makes the operation exactly
    idempotent even though sum|J| itself depends on the axis.
    """
    if graph.n_spins < 2:
        raise ValueError("orientation needs at least 2 spins")

    iu = np.triu_indices(graph.n_spins, k=1)
    abs_sum = float(np.abs(graph.couplings[iu]).sum())
    if abs_sum == 0.0:
        return graph
    tol = ORIENT_TOL * abs_sum

    if abs(float(graph.couplings[iu].sum())) <= 10.0 * tol:
        return graph

    grid = _sphere_grid()
    vals = np.array([coupling_sum_for_axis(graph, p) for p in grid])

    hit = int(np.argmin(np.abs(vals)))
    if abs(vals[hit]) <= tol:
        return _regraph_with_axis(graph, grid[hit])

    bracket = _adjacent_sign_change(vals)
    if bracket is None:
        # A symmetric 3x3 quadratic form minus its own mean always
        # straddles zero, so landing here means degenerate geometry.
        raise OrientationError(
            f"coupling sum has no sign change over {len(grid)} directions "
            f"(range [{vals.min():.3e}, {vals.max():.3e}])"
        )

    ia, ib = bracket
    a, b = grid[ia], grid[ib]
    fa = vals[ia]
    # Bisection along the arc; 200 steps is far beyond what the
    # tolerance needs, the loop exits on tol long before that.
    for _ in range(200):
        mid = _arc_midpoint(a, b)
        fm = coupling_sum_for_axis(graph, mid)
        if abs(fm) <= tol:
            return _regraph_with_axis(graph, mid)
        if (fm > 0.0) == (fa > 0.0):
            a, fa = mid, fm
        else:
            b = mid
    raise OrientationError("bisection failed to reach tolerance")  # pragma: no cover


def _regraph_with_axis(graph: SpinGraph, axis: np.ndarray) -> SpinGraph:
    return _make_graph(
        graph.positions, axis, graph.coupling_scale, graph.r_min, graph.r_max, graph.seed
    )


def coupling_stats(graph: SpinGraph) -> tuple[float, float, float]:
    """(median |J|, max |J|, signed sum of J) over the k<l pairs."""
    iu = np.triu_indices(graph.n_spins, k=1)
    vals = graph.couplings[iu]
    return float(np.median(np.abs(vals))), float(np.abs(vals).max()), float(vals.sum())


def normalized_to_median(graph: SpinGraph) -> SpinGraph:
    """Rescale the coupling prefactor so that median |J_kl| = 1.

    Ensemble runs share one schedule and one frequency grid, which only
    makes sense if every sampled graph uses the same time unit; fixing
    the median coupling to unity per graph provides that unit.
    """
    med = graph.median_coupling
    if med <= 0.0:
        raise ValueError("median coupling is zero; cannot normalize")
    scale = graph.coupling_scale / med
    out = _make_graph(graph.positions, graph.axis, scale, graph.r_min, graph.r_max, graph.seed)
    return out


def graph_to_record(graph: SpinGraph) -> dict:
    """JSON-ready dict capturing everything needed to rebuild the graph."""
    return {
        "n_spins": graph.n_spins,
        "positions": graph.positions.tolist(),
        "axis": graph.axis.tolist(),
        "coupling_scale": graph.coupling_scale,
        "r_min": graph.r_min,
        "r_max": graph.r_max,
        "seed": graph.seed,
    }


def graph_from_record(rec: dict) -> SpinGraph:
    """Inverse of :func:`graph_to_record` (couplings are recomputed)."""
    return _make_graph(
        np.asarray(rec["positions"], dtype=float),
        np.asarray(rec["axis"], dtype=float),
        float(rec["coupling_scale"]),
        float(rec["r_min"]),
        float(rec["r_max"]),
        rec.get("seed"),
    )
