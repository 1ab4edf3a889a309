"""Spread metrics for point sets in the unit cube.

Dispersion (radius of the largest empty ball), star discrepancy (worst
anchored-box volume deviation), squared distance to reference points, the
dispersion lower bound, and the Lipschitz optimization-error certificate.

Dispersion and star discrepancy are computed exactly for d <= 2 and by grid
approximation above that.  The exact dispersion search enumerates the only
places the largest empty ball can be centered: box corners, clipped Voronoi
vertices (circumcenters of point triples), and intersections of pairwise
bisectors with the box edges.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

_EVAL_CHUNK = 32768
_MAX_GRID_CELLS = 2**24


@dataclass(frozen=True)
class PointSet:
    """k points in [0,1]^d, rows of ``points``."""

    points: np.ndarray
    d: int

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise ValueError(f"points must be a (k, {self.d}) array, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("point set must be nonempty")
        if not (np.all(pts >= 0.0) and np.all(pts <= 1.0)):
            raise ValueError("all coordinates must lie in [0, 1]")
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class MetricReport:
    """The full spread profile of one point set."""

    dispersion: float
    dispersion_method: str
    dispersion_resolution: float | None
    star_discrepancy: float
    star_method: str
    dist_to_center: float
    dist_to_origin: float
    lower_bound: float


def dispersion_lower_bound(k: int, d: int) -> float:
    """(Gamma(d/2+1))^(1/d) / (sqrt(pi) * k^(1/d)): no k-point set does better.

    Equals 1/(2k) in one dimension.
    """
    if k < 1 or d < 1:
        raise ValueError("k and d must be >= 1")
    return math.gamma(d / 2.0 + 1.0) ** (1.0 / d) / (math.sqrt(math.pi) * k ** (1.0 / d))


def _min_sq_dists(candidates: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Min squared distance from each candidate row to the point set, chunked."""
    out = np.empty(candidates.shape[0])
    for lo in range(0, candidates.shape[0], _EVAL_CHUNK):
        block = candidates[lo : lo + _EVAL_CHUNK]
        d2 = np.sum((block[:, None, :] - points[None, :, :]) ** 2, axis=-1)
        out[lo : lo + _EVAL_CHUNK] = d2.min(axis=1)
    return out


def _dispersion_1d(x: np.ndarray) -> float:
    xs = np.sort(x[:, 0])
    best = max(float(xs[0]), float(1.0 - xs[-1]))
    if xs.size > 1:
        best = max(best, float(np.max(np.diff(xs)) / 2.0))
    return best


def _bisector_edge_candidates(pts: np.ndarray) -> np.ndarray:
    """Intersections of pairwise perpendicular bisectors with the four box
    edges (d = 2)."""
    k = pts.shape[0]
    if k < 2:
        return np.empty((0, 2))
    ii, jj = np.triu_indices(k, 1)
    mid = (pts[ii] + pts[jj]) / 2.0
    dvec = pts[jj] - pts[ii]
    cands = []
    # Edge x = e: solve (e - mx)*dx + (y - my)*dy = 0 for y; likewise y = e.
    for axis, e in ((0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)):
        other = 1 - axis
        denom = dvec[:, other]
        # Subnormal denominators overflow the divide; such bisectors run
        # parallel to the edge and their intersections land far outside [0,1].
        ok = np.abs(denom) > 1e-300
        t = np.zeros(len(denom))
        t[ok] = mid[ok, other] - (e - mid[ok, axis]) * dvec[ok, axis] / denom[ok]
        inside = ok & (t >= 0.0) & (t <= 1.0)
        c = np.empty((int(inside.sum()), 2))
        c[:, axis] = e
        c[:, other] = t[inside]
        cands.append(c)
    return np.vstack(cands)


def _circumcenter_candidates(pts: np.ndarray) -> np.ndarray:
    """Circumcenters of point triples that land inside the box (d = 2)."""
    k = pts.shape[0]
    if k < 3:
        return np.empty((0, 2))
    trips = np.array(list(itertools.combinations(range(k), 3)))
    a, b, c = pts[trips[:, 0]], pts[trips[:, 1]], pts[trips[:, 2]]
    ab = b - a
    ac = c - a
    det = 2.0 * (ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])
    ok = np.abs(det) > 1e-300
    rb = np.sum(b * b - a * a, axis=1)
    rc = np.sum(c * c - a * a, axis=1)
    cx = np.zeros(len(det))
    cy = np.zeros(len(det))
    cx[ok] = (ac[ok, 1] * rb[ok] - ab[ok, 1] * rc[ok]) / det[ok]
    cy[ok] = (ab[ok, 0] * rc[ok] - ac[ok, 0] * rb[ok]) / det[ok]
    inside = ok & (cx >= 0.0) & (cx <= 1.0) & (cy >= 0.0) & (cy <= 1.0)
    return np.column_stack([cx[inside], cy[inside]])


def _dispersion_2d(pts: np.ndarray) -> float:
    corners = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    cands = np.vstack(
        [corners, _bisector_edge_candidates(pts), _circumcenter_candidates(pts)]
    )
    return float(math.sqrt(np.max(_min_sq_dists(cands, pts))))


def _grid_axis_count(d: int, target: int) -> int:
    """Points per axis so the full lattice stays within the cell budget."""
    n = target
    while n > 2 and n**d > _MAX_GRID_CELLS:
        n = int(_MAX_GRID_CELLS ** (1.0 / d))
    return max(n, 2)


def _dispersion_grid(pts: np.ndarray, d: int, resolution: float) -> tuple[float, float]:
    n = _grid_axis_count(d, int(round(1.0 / resolution)) + 1)
    axis = np.linspace(0.0, 1.0, n)
    spacing = axis[1] - axis[0]
    best = 0.0
    # Slab by the first axis to bound memory at n^(d-1) candidates.
    rest = np.stack(
        np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1
    ).reshape(-1, d - 1)
    slab = np.empty((rest.shape[0], d))
    slab[:, 1:] = rest
    for x0 in axis:
        slab[:, 0] = x0
        best = max(best, float(np.max(_min_sq_dists(slab, pts))))
    return math.sqrt(best), float(spacing)


def dispersion(
    ps: PointSet, resolution: float = 1.0 / 64.0
) -> tuple[float, str, float | None]:
    """Largest empty-ball radius: max over the cube of L2 distance to the set.

    Exact for d <= 2; a lattice search at ``resolution`` above that, whose
    value underestimates the truth by at most resolution * sqrt(d) / 2.
    Returns (value, method, resolution-or-None).
    """
    pts = ps.points
    if ps.d == 1:
        return _dispersion_1d(pts), "exact", None
    if ps.d == 2:
        return _dispersion_2d(pts), "exact", None
    value, spacing = _dispersion_grid(pts, ps.d, resolution)
    return value, "grid-approx", spacing


def _star_exact_1d(x: np.ndarray) -> float:
    xs = np.sort(x[:, 0])
    k = xs.size
    crit = np.unique(np.append(xs, 1.0))
    lt = np.searchsorted(xs, crit, side="left") / k
    le = np.searchsorted(xs, crit, side="right") / k
    best = float(np.max(np.abs(lt - crit)))
    open_ok = crit < 1.0
    if np.any(open_ok):
        best = max(best, float(np.max(np.abs(le[open_ok] - crit[open_ok]))))
    return best


def _star_exact_2d(pts: np.ndarray) -> float:
    k = pts.shape[0]
    u1 = np.unique(np.append(pts[:, 0], 1.0))
    u2 = np.unique(np.append(pts[:, 1], 1.0))
    n1, n2 = u1.size, u2.size
    vol = np.outer(u1, u2)

    def cumulative(side1: str, side2: str) -> np.ndarray:
        q1 = np.searchsorted(u1, pts[:, 0], side=side1)
        q2 = np.searchsorted(u2, pts[:, 1], side=side2)
        h = np.zeros((n1 + 1, n2 + 1))
        np.add.at(h, (q1, q2), 1.0)
        return h.cumsum(axis=0).cumsum(axis=1)[:n1, :n2] / k

    # side='right' ranks realize strict x < u; side='left' realizes x <= u,
    # the u -> coordinate+ limit, valid only where the coordinate is < 1.
    mask1 = (u1 < 1.0)[:, None]
    mask2 = (u2 < 1.0)[None, :]
    best = 0.0
    for s1, m1 in (("right", None), ("left", mask1)):
        for s2, m2 in (("right", None), ("left", mask2)):
            dev = np.abs(cumulative(s1, s2) - vol)
            if m1 is not None:
                dev = np.where(m1, dev, 0.0)
            if m2 is not None:
                dev = np.where(m2, dev, 0.0)
            best = max(best, float(dev.max()))
    return best


def _star_grid(pts: np.ndarray, d: int, resolution: float) -> float:
    n = _grid_axis_count(d, int(round(1.0 / resolution)))
    k = pts.shape[0]
    # Right-open bins: a point exactly on an edge i/n belongs to the box
    # anchored strictly above it, matching the half-open box definition.
    idx = np.minimum((pts * n).astype(np.int64), n - 1)
    counts = np.zeros((n,) * d, dtype=np.int32)
    np.add.at(counts, tuple(idx.T), 1)
    for axis in range(d):
        counts = counts.cumsum(axis=axis, dtype=np.int32)
    u = np.arange(1, n + 1) / n
    best = 0.0
    # Slab over the first axis to avoid materializing the full volume array.
    vol_rest = u
    for _ in range(d - 2):
        vol_rest = vol_rest[..., None] * u
    for i0 in range(n):
        dev = np.abs(counts[i0] / k - u[i0] * vol_rest)
        best = max(best, float(np.max(dev)))
    return best


def star_discrepancy(ps: PointSet, resolution: float = 1.0 / 256.0) -> tuple[float, str]:
    """Worst deviation |fraction inside [0,u) - volume| over anchored boxes.

    Exact for d <= 2 via the critical coordinate set (evaluating both the
    open value at each coordinate and its closed right limit); a lattice
    lower bound above that.  Returns (value, method).
    """
    pts = ps.points
    if ps.d == 1:
        return _star_exact_1d(pts), "exact"
    if ps.d == 2:
        return _star_exact_2d(pts), "exact"
    return _star_grid(pts, ps.d, resolution), "grid-approx"


def distance_to_point(ps: PointSet, ref) -> float:
    """Squared L2 distance from ``ref`` to the nearest point of the set."""
    ref = np.asarray(ref, dtype=float)
    if ref.shape != (ps.d,):
        raise ValueError(f"reference point must have shape ({ps.d},), got {ref.shape}")
    if not (np.all(ref >= 0.0) and np.all(ref <= 1.0)):
        raise ValueError("reference point must lie in [0, 1]^d")
    return float(np.min(np.sum((ps.points - ref) ** 2, axis=1)))


def distance_to_center(ps: PointSet) -> float:
    return distance_to_point(ps, np.full(ps.d, 0.5))


def distance_to_origin(ps: PointSet) -> float:
    return distance_to_point(ps, np.zeros(ps.d))


def optimization_error_certificate(dispersion_value: float, lipschitz: float) -> float:
    """Upper bound L * d_k on the gap between the true optimum and the best
    sampled value of any L-Lipschitz objective."""
    if dispersion_value < 0.0 or lipschitz < 0.0:
        raise ValueError("dispersion and lipschitz must be nonnegative")
    return lipschitz * dispersion_value


def metric_report(ps: PointSet) -> MetricReport:
    """All metrics of one point set in a single pass."""
    disp, disp_method, disp_res = dispersion(ps)
    star, star_method = star_discrepancy(ps)
    return MetricReport(
        dispersion=disp,
        dispersion_method=disp_method,
        dispersion_resolution=disp_res,
        star_discrepancy=star,
        star_method=star_method,
        dist_to_center=distance_to_center(ps),
        dist_to_origin=distance_to_origin(ps),
        lower_bound=dispersion_lower_bound(ps.k, ps.d),
    )
