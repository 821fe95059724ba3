"""The six Poisson-driven tuple models and the simulation driver.

Each model owns a scalar tuple functional (used by the reference enumeration
engine and small-scale tests) plus a vectorised enumeration path used by
``run_model`` at production sizes.  Both paths evaluate the same arithmetic;
the vectorised paths only prune candidates with exact lower bounds, so the
returned multiset of values is identical up to floating-point associativity,
and tests hold them to that.

Model catalogue (arity, rescaling exponent gamma):

* ``proximity_flats``     pairs of k-flats, distance inside the window,
                          k < d/2, gamma = 2 / (d - 2k)
* ``intersecting_flats``  ell-tuples of k-flats hitting the unit ball,
                          j-th intrinsic volume of the intersection,
                          gamma = j * ell / 2
* ``sphere_polytope``     pairs of points on S^(d-1), chord distance,
                          gamma = 2 / (d - 1)
* ``gilbert``             pairs of points in the window at distance <= delta_t,
                          gamma = 2 / d
* ``point_simplices``     (d+1)-tuples of points, simplex volume,
                          gamma = d + 1
* ``hyperplane_simplices`` (d+1)-tuples of hyperplanes, volume of the induced
                          simplex when it lies inside the window,
                          gamma = d * (d + 1)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ConvexBody,
    Flat,
    Hyperplane,
    dist_within_window_info,
    flat_ball_intersection,
    intersect_flats,
    intrinsic_volume_ball,
    simplex_volume,
)
from .orderstats import EnumerationStrategy, grid_pair_candidates, rescale
from .sampling import (
    SeededStream,
    sample_isotropic_flats,
    sample_isotropic_hyperplanes,
    sample_points_in_body,
    sample_points_on_sphere,
)

MODEL_KINDS = (
    "proximity_flats",
    "intersecting_flats",
    "sphere_polytope",
    "gilbert",
    "point_simplices",
    "hyperplane_simplices",
)

# models whose functional dominates the pairwise point distance; only these
# may use the grid_prune strategy
METRIC_MODELS = ("gilbert", "sphere_polytope")

_DEGENERACY_TOL = 1e-12
_BATCH_ROWS = 1 << 18

__all__ = [
    "MODEL_KINDS",
    "METRIC_MODELS",
    "ModelSpec",
    "SimulationRun",
    "f_proximity",
    "f_intersecting",
    "f_sphere_chord",
    "f_gilbert",
    "f_point_simplex",
    "f_hyperplane_simplex",
    "tuple_functional",
    "draw_sample",
    "run_model",
]


@dataclass(frozen=True)
class ModelSpec:
    """Immutable description of one model instance."""

    kind: str
    d: int
    window: ConvexBody | None = None
    k: int | None = None
    ell: int | None = None
    j: int | None = None
    delta_expr: str = "t**(-1.0/d)"

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.d < 1 or self.d > 10:
            raise ValueError("dimension d must be in [1, 10]")
        if self.kind == "proximity_flats":
            if self.window is None or self.window.dim != self.d:
                raise ValueError("proximity_flats needs a window of matching dimension")
            if self.k is None or not (1 <= self.k and self.d - 2 * self.k >= 1):
                raise ValueError("proximity_flats needs 1 <= k < d/2")
        elif self.kind == "intersecting_flats":
            if self.k is None or self.ell is None or self.j is None:
                raise ValueError("intersecting_flats needs k, ell and j")
            codim = self.d - self.k
            if not (self.k >= self.d / 2 and 1 <= codim):
                raise ValueError("intersecting_flats needs d/2 <= k <= d-1")
            if not (self.ell >= 1 and self.ell * codim <= self.d):
                raise ValueError("intersecting_flats needs 1 <= ell with ell*(d-k) <= d")
            if not (1 <= self.j <= self.d - self.ell * codim):
                raise ValueError("intersecting_flats needs 1 <= j <= d - ell*(d-k)")
            ball = ConvexBody.unit_ball(self.d)
            if self.window is None:
                object.__setattr__(self, "window", ball)
            elif (self.window.kind != "ball" or self.window.radius != 1.0
                  or np.any(self.window.center != 0.0)):
                raise ValueError("intersecting_flats is pinned to the unit ball window")
        elif self.kind == "sphere_polytope":
            if self.d < 2:
                raise ValueError("sphere_polytope needs d >= 2")
            if self.window is not None:
                raise ValueError("sphere_polytope carries no window")
        elif self.kind == "hyperplane_simplices":
            if self.d < 2:
                raise ValueError("hyperplane_simplices needs d >= 2")
            if self.window is None or self.window.dim != self.d:
                raise ValueError("hyperplane_simplices needs a window of matching dimension")
        else:  # gilbert, point_simplices
            if self.window is None or self.window.dim != self.d:
                raise ValueError(f"{self.kind} needs a window of matching dimension")

    @property
    def arity(self) -> int:
        if self.kind == "intersecting_flats":
            return self.ell
        if self.kind in ("point_simplices", "hyperplane_simplices"):
            return self.d + 1
        return 2

    @property
    def gamma(self) -> float:
        if self.kind == "proximity_flats":
            return 2.0 / (self.d - 2 * self.k)
        if self.kind == "intersecting_flats":
            return self.j * self.ell / 2.0
        if self.kind == "sphere_polytope":
            return 2.0 / (self.d - 1)
        if self.kind == "gilbert":
            return 2.0 / self.d
        if self.kind == "point_simplices":
            return float(self.d + 1)
        return float(self.d * (self.d + 1))

    def delta(self, t: float) -> float:
        """Gilbert connection threshold delta_t from the configured expression."""
        if self.kind != "gilbert":
            raise ValueError("delta is only defined for gilbert models")
        env = {"t": float(t), "d": float(self.d), "log": math.log, "sqrt": math.sqrt}
        value = float(eval(self.delta_expr, {"__builtins__": {}}, env))
        if not value > 0:
            raise ValueError(f"delta expression produced a nonpositive value: {value}")
        return value

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "d": self.d}
        for name in ("k", "ell", "j"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if self.kind == "gilbert":
            out["delta_expr"] = self.delta_expr
        if self.window is not None:
            if self.window.kind == "ball":
                out["window"] = {"kind": "ball", "center": self.window.center.tolist(),
                                 "radius": self.window.radius}
            else:
                out["window"] = {"kind": "box", "lower": self.window.lower.tolist(),
                                 "upper": self.window.upper.tolist()}
        return out

    @staticmethod
    def from_dict(data: dict) -> "ModelSpec":
        window = None
        wdata = data.get("window")
        if wdata is not None:
            if wdata["kind"] == "ball":
                window = ConvexBody.ball(wdata["center"], wdata["radius"])
            else:
                window = ConvexBody.box(wdata["lower"], wdata["upper"])
        return ModelSpec(
            kind=data["kind"], d=int(data["d"]), window=window,
            k=data.get("k"), ell=data.get("ell"), j=data.get("j"),
            delta_expr=data.get("delta_expr", "t**(-1.0/d)"),
        )


# ---------------------------------------------------------------------------
# scalar tuple functionals


def f_proximity(e: Flat, f: Flat, window: ConvexBody):
    """Distance between E cap W and F cap W; (value, converged flag)."""
    return dist_within_window_info(e, f, window)


def f_intersecting(flats, d: int, k: int, ell: int, j: int):
    """V_j of the common intersection with the unit ball; None if the tuple is
    degenerate or the intersection misses the ball or has V_j = 0."""
    flats = [fl.to_flat() if isinstance(fl, Hyperplane) else fl for fl in flats]
    inter = intersect_flats(flats)
    expected_dim = d - ell * (d - k)
    if inter is None or inter.dim != expected_dim:
        return None, True  # degenerate
    section = flat_ball_intersection(inter, ConvexBody.unit_ball(d))
    if section is None:
        return None, False
    _, radius, m = section
    if radius <= 0.0:
        return None, False
    return intrinsic_volume_ball(m, j, radius), False


def _pair_distance(y1, y2) -> float:
    # same reduction order as the vectorised einsum path, so the reference
    # engine and the batch engine agree bit for bit
    diff = np.asarray(y1, float) - np.asarray(y2, float)
    return math.sqrt(float(np.einsum("i,i->", diff, diff)))


def f_sphere_chord(y1, y2) -> float:
    return _pair_distance(y1, y2)


def f_gilbert(y1, y2, delta: float):
    dist = _pair_distance(y1, y2)
    return dist if dist <= delta else None


def f_point_simplex(vertices):
    """Simplex volume; None (degenerate) when the points are affinely dependent."""
    vol = simplex_volume(vertices)
    return (vol, False) if vol > 0.0 else (None, True)


def f_hyperplane_simplex(hyperplanes, window: ConvexBody):
    """Volume of the simplex carved out by d+1 hyperplanes when it lies in the
    window; returns (value | None, degenerate flag)."""
    hps = list(hyperplanes)
    d = window.dim
    if len(hps) != d + 1:
        raise ValueError("expected d+1 hyperplanes")
    normals = np.array([hp.normal for hp in hps])
    offsets = np.array([hp.offset for hp in hps])
    # canonical order makes the value exactly permutation invariant
    order = np.lexsort(np.column_stack([normals, offsets]).T[::-1])
    normals = normals[order]
    offsets = offsets[order]
    vertices = np.empty((d + 1, d))
    for drop in range(d + 1):
        rows = [i for i in range(d + 1) if i != drop]
        a = normals[rows]
        if abs(np.linalg.det(a)) < _DEGENERACY_TOL:
            return None, True
        vertices[drop] = np.linalg.solve(a, offsets[rows])
    if not np.all(window.contains(vertices)):
        return None, False
    vol = simplex_volume(vertices)
    if vol <= 0.0:
        return None, True
    return vol, False


class _Diagnostics:
    def __init__(self):
        self.degenerate = 0
        self.unconverged = 0

    def as_dict(self) -> dict:
        return {"skipped_degenerate": self.degenerate,
                "unconverged_projections": self.unconverged}


def tuple_functional(spec: ModelSpec, t: float, diag: _Diagnostics | None = None):
    """Scalar functional tuple -> value | None for the reference engine."""
    diag = diag if diag is not None else _Diagnostics()
    if spec.kind == "proximity_flats":
        def func(tup):
            value, converged = f_proximity(tup[0], tup[1], spec.window)
            if not converged:
                diag.unconverged += 1
            return value
    elif spec.kind == "intersecting_flats":
        def func(tup):
            value, degenerate = f_intersecting(tup, spec.d, spec.k, spec.ell, spec.j)
            if degenerate:
                diag.degenerate += 1
            return value
    elif spec.kind == "sphere_polytope":
        def func(tup):
            return f_sphere_chord(tup[0], tup[1])
    elif spec.kind == "gilbert":
        delta = spec.delta(t)

        def func(tup):
            return f_gilbert(tup[0], tup[1], delta)
    elif spec.kind == "point_simplices":
        def func(tup):
            value, degenerate = f_point_simplex(np.asarray(tup, float))
            if degenerate:
                diag.degenerate += 1
            return value
    else:  # hyperplane_simplices
        def func(tup):
            value, degenerate = f_hyperplane_simplex(tup, spec.window)
            if degenerate:
                diag.degenerate += 1
            return value
    return func


# ---------------------------------------------------------------------------
# sampling dispatch


def draw_sample(spec: ModelSpec, t: float, stream: SeededStream):
    """Draw one realisation of the model's driving Poisson process."""
    if spec.kind in ("gilbert", "point_simplices"):
        return sample_points_in_body(t, spec.window, stream).points
    if spec.kind == "sphere_polytope":
        return sample_points_on_sphere(t, spec.d, stream).points
    if spec.kind == "proximity_flats":
        return sample_isotropic_flats(t, spec.k, spec.window, stream).flats
    if spec.kind == "intersecting_flats":
        if spec.k == spec.d - 1:
            return sample_isotropic_hyperplanes(t, spec.window, stream)
        return sample_isotropic_flats(t, spec.k, spec.window, stream).flats
    return sample_isotropic_hyperplanes(t, spec.window, stream)


# ---------------------------------------------------------------------------
# vectorised enumeration paths


def _pair_distances(points: np.ndarray, threshold: float, cell_size: float | None):
    """Distances of all point pairs within threshold, via the spatial grid."""
    pairs = list(grid_pair_candidates(points, threshold, cell_size))
    if not pairs:
        return np.empty(0)
    idx = np.asarray(pairs, dtype=np.int64)
    diff = points[idx[:, 0]] - points[idx[:, 1]]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return dist[dist <= threshold]


def _all_pair_distances(points: np.ndarray, threshold: float):
    n = points.shape[0]
    if n < 2:
        return np.empty(0)
    i, j = np.triu_indices(n, 1)
    diff = points[i] - points[j]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return dist[dist <= threshold]


def _line_pair_lower_bounds(bases, dirs, idx):
    """Global (window-free) distances between pairs of lines; a lower bound
    for the within-window distance."""
    a, u = bases[idx[:, 0]], dirs[idx[:, 0]]
    b, v = bases[idx[:, 1]], dirs[idx[:, 1]]
    w = b - a
    c = np.einsum("ij,ij->i", u, v)
    uw = np.einsum("ij,ij->i", u, w)
    vw = np.einsum("ij,ij->i", v, w)
    det = 1.0 - c * c
    parallel = det < 1e-12
    safe = np.where(parallel, 1.0, det)
    s = (uw - c * vw) / safe
    r = (c * uw - vw) / safe
    res = w + r[:, None] * v - s[:, None] * u
    dist = np.linalg.norm(res, axis=1)
    if np.any(parallel):
        res_par = w - uw[:, None] * u
        dist = np.where(parallel, np.linalg.norm(res_par, axis=1), dist)
    return dist


def _flat_pair_lower_bound(e: Flat, f: Flat) -> float:
    """Global flat-flat distance via least squares on the joint span."""
    m = np.hstack([e.frame.T, -f.frame.T])
    w = f.base - e.base
    coef, *_ = np.linalg.lstsq(m, w, rcond=None)
    return float(np.linalg.norm(w - m @ coef))


def _enumerate_proximity(spec, flats, threshold, diag):
    n = len(flats)
    if n < 2:
        return []
    idx = np.column_stack(np.triu_indices(n, 1))
    if spec.k == 1:
        bases = np.array([fl.base for fl in flats])
        dirs = np.array([fl.frame[0] for fl in flats])
        lower = _line_pair_lower_bounds(bases, dirs, idx)
    else:
        lower = np.array([_flat_pair_lower_bound(flats[i], flats[j]) for i, j in idx])
    values = []
    for i, j in idx[lower <= threshold]:
        value, converged = f_proximity(flats[i], flats[j], spec.window)
        if not converged:
            diag.unconverged += 1
        if value <= threshold:
            values.append(value)
    return values


def _enumerate_intersecting_pairs(spec, planes, threshold, diag):
    """Fast path for ell = 2, k = d - 1: intersect hyperplane pairs with the
    unit ball."""
    n = len(planes)
    if n < 2:
        return []
    normals = np.array([hp.normal for hp in planes])
    offsets = np.array([hp.offset for hp in planes])
    i, j = np.triu_indices(n, 1)
    n1, n2 = normals[i], normals[j]
    o1, o2 = offsets[i], offsets[j]
    c = np.einsum("ij,ij->i", n1, n2)
    det = 1.0 - c * c
    ok = det > _DEGENERACY_TOL
    diag.degenerate += int(np.size(ok) - np.count_nonzero(ok))
    safe = np.where(ok, det, 1.0)
    a = (o1 - c * o2) / safe
    b = (o2 - c * o1) / safe
    foot = a[:, None] * n1 + b[:, None] * n2  # min-norm point on the intersection
    h2 = np.einsum("ij,ij->i", foot, foot)
    radius = np.sqrt(np.clip(1.0 - h2, 0.0, None))
    m = spec.d - 2 * (spec.d - spec.k)  # dimension of the pair intersection
    unit = intrinsic_volume_ball(m, spec.j, 1.0)
    vals = unit * radius**spec.j
    keep = ok & (h2 < 1.0) & (vals > 0.0) & (vals <= threshold)
    return vals[keep].tolist()


_COMBO_CACHE: dict[int, np.ndarray] = {}


def _combo_indices(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) as an index array; cached via a master table.

    Subsets of range(m) for m <= n are exactly the master rows whose maximal
    index is below m, so one table serves every smaller sample size.
    """
    if n < k:
        return np.empty((0, k), dtype=np.int64)
    cached = _COMBO_CACHE.get(k)
    if cached is None or cached[-1, -1] < n - 1:
        cached = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(n), k)),
            dtype=np.int64,
        ).reshape(-1, k)
        _COMBO_CACHE[k] = cached
    return cached[cached[:, -1] < n]


def _canonical_vertex_order(verts: np.ndarray) -> np.ndarray:
    """Per-tuple lexicographic row order, batched.

    Stable radix argsort from the least significant coordinate upward;
    the resulting order matches np.lexsort row sorting exactly, so the
    batch path and the scalar simplex_volume see bit-identical matrices.
    """
    d = verts.shape[2]
    order = np.argsort(verts[:, :, d - 1], axis=1, kind="stable")
    for col in range(d - 2, -1, -1):
        keys = np.take_along_axis(verts[:, :, col], order, axis=1)
        refine = np.argsort(keys, axis=1, kind="stable")
        order = np.take_along_axis(order, refine, axis=1)
    return order


def _enumerate_point_simplices(points, threshold, diag):
    n, d = points.shape
    if n < d + 1:
        return []
    idx = _combo_indices(n, d + 1)
    values = []
    fact = math.factorial(d)
    for start in range(0, idx.shape[0], _BATCH_ROWS):
        chunk = idx[start:start + _BATCH_ROWS]
        verts = points[chunk]
        verts = np.take_along_axis(verts, _canonical_vertex_order(verts)[:, :, None], axis=1)
        diff = verts[:, 1:, :] - verts[:, :1, :]
        vols = np.abs(np.linalg.det(diff)) / fact
        diag.degenerate += int(np.count_nonzero(vols <= 0.0))
        keep = (vols > 0.0) & (vols <= threshold)
        values.extend(vols[keep].tolist())
    return values


def _enumerate_hyperplane_simplices_2d(spec, planes, threshold, diag):
    n = len(planes)
    if n < 3:
        return []
    normals = np.array([hp.normal for hp in planes])
    offsets = np.array([hp.offset for hp in planes])
    pi, pj = np.triu_indices(n, 1)
    det = normals[pi, 0] * normals[pj, 1] - normals[pi, 1] * normals[pj, 0]
    ok = np.abs(det) >= _DEGENERACY_TOL
    safe = np.where(ok, det, 1.0)
    vx = (offsets[pi] * normals[pj, 1] - offsets[pj] * normals[pi, 1]) / safe
    vy = (offsets[pj] * normals[pi, 0] - offsets[pi] * normals[pj, 0]) / safe
    verts = np.column_stack([vx, vy])
    verts[~ok] = np.nan
    pair_row = np.full((n, n), -1, dtype=np.int64)
    pair_row[pi, pj] = np.arange(pi.size)
    pair_row[pj, pi] = pair_row[pi, pj]
    inside = np.zeros(pi.size, dtype=bool)
    inside[ok] = spec.window.contains(verts[ok])
    idx = _combo_indices(n, 3)
    values = []
    for start in range(0, idx.shape[0], _BATCH_ROWS):
        chunk = idx[start:start + _BATCH_ROWS]
        r12 = pair_row[chunk[:, 0], chunk[:, 1]]
        r13 = pair_row[chunk[:, 0], chunk[:, 2]]
        r23 = pair_row[chunk[:, 1], chunk[:, 2]]
        rows = np.stack([r12, r13, r23], axis=1)
        valid = ok[rows].all(axis=1)
        diag.degenerate += int(np.count_nonzero(~valid))
        admissible = valid & inside[rows].all(axis=1)
        if not np.any(admissible):
            continue
        v = verts[rows[admissible]]
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        degen = area <= 0.0
        diag.degenerate += int(np.count_nonzero(degen))
        keep = (~degen) & (area <= threshold)
        values.extend(area[keep].tolist())
    return values


def _enumerate_generic(spec, items, t, threshold, diag):
    func = tuple_functional(spec, t, diag)
    values = []
    for combo in itertools.combinations(items, spec.arity):
        val = func(combo)
        if val is not None and val <= threshold:
            values.append(float(val))
    return values


# ---------------------------------------------------------------------------
# driver


@dataclass
class SimulationRun:
    """One replication: admissible values, rescaled values, order statistics."""

    spec: ModelSpec
    t: float
    gamma: float
    values: np.ndarray
    rescaled: np.ndarray
    order_stats: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def run_model(spec: ModelSpec, t: float, x_max: float, m_max: int,
              stream: SeededStream | None = None, sample=None,
              strategy: EnumerationStrategy | None = None) -> SimulationRun:
    """Simulate (or reuse) one sample and extract rescaled order statistics.

    The cutoff keeps admissible values <= x_max * t^(-gamma); rescaled values
    are multiplied by t^gamma so they live on the x-scale of the limit law.
    Order statistics beyond the number of admissible values are +inf.
    """
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    if strategy is not None and strategy.kind == "grid_prune" and spec.kind not in METRIC_MODELS:
        raise ValueError(f"grid_prune is not distance-compatible with {spec.kind}")
    gamma = spec.gamma
    threshold = x_max * t**-gamma
    diag = _Diagnostics()
    if sample is None:
        if stream is None:
            raise ValueError("need a stream when no sample is forced")
        items = draw_sample(spec, t, stream)
    else:
        items = getattr(sample, "points", None)
        if items is None:
            items = getattr(sample, "flats", sample)
    extra: dict = {}
    if spec.kind == "gilbert":
        delta = spec.delta(t)
        extra["delta"] = delta
        extra["threshold_exceeds_delta"] = threshold > delta

    if strategy is not None and strategy.kind == "brute_force":
        values = _enumerate_generic(spec, list(items), t, threshold, diag)
    elif spec.kind == "gilbert":
        eff = min(threshold, extra["delta"])
        pts = np.atleast_2d(np.asarray(items, float))
        pts = pts.reshape(-1, spec.d)
        cell = strategy.cell_size if strategy is not None else None
        values = _pair_distances(pts, eff, cell).tolist()
    elif spec.kind == "sphere_polytope":
        pts = np.asarray(items, float).reshape(-1, spec.d)
        cell = strategy.cell_size if strategy is not None else None
        values = _pair_distances(pts, threshold, cell).tolist()
    elif spec.kind == "proximity_flats":
        values = _enumerate_proximity(spec, list(items), threshold, diag)
    elif spec.kind == "intersecting_flats" and spec.ell == 2 and spec.k == spec.d - 1:
        planes = list(items)
        if planes and isinstance(planes[0], Flat):
            planes = [Hyperplane.from_flat(fl) for fl in planes]
        values = _enumerate_intersecting_pairs(spec, planes, threshold, diag)
    elif spec.kind == "point_simplices":
        pts = np.asarray(items, float).reshape(-1, spec.d)
        values = _enumerate_point_simplices(pts, threshold, diag)
    elif spec.kind == "hyperplane_simplices" and spec.d == 2:
        values = _enumerate_hyperplane_simplices_2d(spec, list(items), threshold, diag)
    else:
        values = _enumerate_generic(spec, list(items), t, threshold, diag)

    values = np.sort(np.asarray(values, dtype=float))
    rescaled = rescale(values, t, gamma)
    order_stats = np.full(m_max, np.inf)
    take = min(m_max, rescaled.size)
    order_stats[:take] = rescaled[:take]
    diagnostics = {
        "n_items": len(items),
        "n_values": int(values.size),
        "threshold": threshold,
        **diag.as_dict(),
        **extra,
    }
    return SimulationRun(spec=spec, t=t, gamma=gamma, values=values,
                         rescaled=rescaled, order_stats=order_stats,
                         diagnostics=diagnostics)
