"""Convex bodies, affine flats and the integral-geometric constants used everywhere else.

Conventions
-----------
* ``unit_ball_volume(d)`` is kappa_d = pi^(d/2) / Gamma(d/2 + 1).
* Intrinsic volumes follow the Steiner normalisation: for the unit d-ball,
  V_j = binom(d, j) kappa_d / kappa_{d-j}; for a box they are the elementary
  symmetric polynomials of the side lengths.
* The Haar measure on affine k-flats is normalised so that the measure of
  flats hitting the unit ball equals kappa_{d-k}; equivalently the Crofton
  formula holds with ``crofton_constant(d, i, k)``.  Samplers and tests pin
  this normalisation empirically through flat hit counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_DIMENSION = 10
RANK_TOL = 1e-10
FRAME_TOL = 1e-9
HIT_TOL = 1e-9
DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_ITER = 10_000

__all__ = [
    "MAX_DIMENSION",
    "RANK_TOL",
    "DYKSTRA_TOL",
    "DYKSTRA_MAX_ITER",
    "unit_ball_volume",
    "sphere_surface_area",
    "intrinsic_volume_ball",
    "intrinsic_volumes_box",
    "crofton_constant",
    "simplex_volume",
    "ConvexBody",
    "Flat",
    "Hyperplane",
    "intersect_flats",
    "flat_ball_intersection",
    "line_window_segment",
    "segment_segment_distance",
    "project_onto_body",
    "project_onto_flat",
    "project_flat_window",
    "flat_body_distance",
    "flat_hits_body",
    "dist_within_window",
    "dist_within_window_info",
    "spherical_cap_area",
    "ball_window_overlap",
    "disk_box_overlap",
]


def unit_ball_volume(d: int) -> float:
    """Volume kappa_d of the unit ball in R^d, for 0 <= d <= 20."""
    if not isinstance(d, (int, np.integer)) or d < 0 or d > 20:
        raise ValueError(f"dimension must be an integer in [0, 20], got {d!r}")
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def sphere_surface_area(d: int) -> float:
    """Surface measure d * kappa_d of the unit sphere S^(d-1) in R^d."""
    if d < 1:
        raise ValueError("sphere surface area needs d >= 1")
    return d * unit_ball_volume(d)


def intrinsic_volume_ball(m: int, j: int, r: float) -> float:
    """V_j of an m-dimensional ball of radius r (dimension-independent embedding)."""
    if j < 0 or j > m:
        raise ValueError(f"need 0 <= j <= m, got j={j}, m={m}")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return math.comb(m, j) * unit_ball_volume(m) / unit_ball_volume(m - j) * r**j


def intrinsic_volumes_box(sides) -> np.ndarray:
    """All intrinsic volumes (V_0, ..., V_d) of a box with the given side lengths.

    V_j equals the j-th elementary symmetric polynomial of the sides.
    """
    sides = np.asarray(sides, dtype=float)
    if sides.ndim != 1 or sides.size == 0:
        raise ValueError("sides must be a nonempty 1-d array")
    if np.any(sides <= 0):
        raise ValueError("side lengths must be positive")
    # coefficients of prod (1 + s_i x) give e_0 .. e_d
    coeffs = np.array([1.0])
    for s in sides:
        coeffs = np.convolve(coeffs, np.array([1.0, s]))
    return coeffs


def crofton_constant(d: int, i: int, k: int) -> float:
    """Constant in the Crofton formula: integral of V_i(W cap E) over k-flats
    equals this constant times V_{d-k+i}(W)."""
    if not (0 <= k <= d and 0 <= i <= k):
        raise ValueError(f"need 0 <= i <= k <= d, got d={d}, i={i}, k={k}")
    num = math.factorial(k) * math.factorial(d - k + i)
    num *= unit_ball_volume(k) * unit_ball_volume(d - k + i)
    den = math.factorial(d) * math.factorial(i)
    den *= unit_ball_volume(d) * unit_ball_volume(i)
    return num / den


def simplex_volume(vertices) -> float:
    """d-dimensional volume of the simplex spanned by d+1 points in R^d."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
        raise ValueError(f"expected (d+1) x d vertex array, got shape {v.shape}")
    d = v.shape[1]
    # canonical vertex order makes the value exactly permutation invariant
    v = v[np.lexsort(v.T[::-1])]
    diff = v[1:] - v[0]
    return abs(float(np.linalg.det(diff))) / math.factorial(d)


# ---------------------------------------------------------------------------
# convex bodies


@dataclass(frozen=True)
class ConvexBody:
    """Observation window: an axis-aligned box or a Euclidean ball in R^d."""

    kind: str
    center: np.ndarray = field(default=None)
    radius: float = 0.0
    lower: np.ndarray = field(default=None)
    upper: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kind not in ("ball", "box"):
            raise ValueError(f"unsupported body kind {self.kind!r}")
        if self.kind == "ball":
            c = np.asarray(self.center, dtype=float)
            object.__setattr__(self, "center", c)
            if c.ndim != 1:
                raise ValueError("ball center must be a vector")
            if not self.radius > 0:
                raise ValueError("ball radius must be positive")
        else:
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
            if lo.shape != hi.shape or lo.ndim != 1:
                raise ValueError("box corners must be vectors of equal length")
            if np.any(hi <= lo):
                raise ValueError("box must have positive side lengths")
            object.__setattr__(self, "center", (lo + hi) / 2.0)
        if self.dim > MAX_DIMENSION:
            raise ValueError(f"dimension capped at {MAX_DIMENSION}")

    @staticmethod
    def ball(center, radius: float) -> "ConvexBody":
        return ConvexBody(kind="ball", center=np.asarray(center, dtype=float), radius=float(radius))

    @staticmethod
    def box(lower, upper) -> "ConvexBody":
        return ConvexBody(kind="box", lower=np.asarray(lower, dtype=float), upper=np.asarray(upper, dtype=float))

    @staticmethod
    def unit_ball(d: int) -> "ConvexBody":
        return ConvexBody.ball(np.zeros(d), 1.0)

    @staticmethod
    def unit_cube(d: int) -> "ConvexBody":
        return ConvexBody.box(np.zeros(d), np.ones(d))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def sides(self) -> np.ndarray:
        if self.kind != "box":
            raise ValueError("sides only defined for boxes")
        return self.upper - self.lower

    def volume(self) -> float:
        if self.kind == "ball":
            return unit_ball_volume(self.dim) * self.radius**self.dim
        return float(np.prod(self.sides))

    def intrinsic_volumes(self) -> np.ndarray:
        d = self.dim
        if self.kind == "ball":
            return np.array([intrinsic_volume_ball(d, j, self.radius) for j in range(d + 1)])
        return intrinsic_volumes_box(self.sides)

    def circumradius(self) -> float:
        if self.kind == "ball":
            return self.radius
        return float(np.linalg.norm(self.sides) / 2.0)

    def inradius(self) -> float:
        if self.kind == "ball":
            return self.radius
        return float(np.min(self.sides) / 2.0)

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "ball":
            inside = np.linalg.norm(pts - self.center, axis=1) <= self.radius + tol
        else:
            inside = np.all((pts >= self.lower - tol) & (pts <= self.upper + tol), axis=1)
        return inside if np.ndim(points) > 1 else bool(inside[0])

    def shrink(self, margin: float) -> "ConvexBody | None":
        """Inner parallel body at distance margin, or None if it is empty."""
        if margin < 0:
            raise ValueError("margin must be nonnegative")
        if self.kind == "ball":
            r = self.radius - margin
            return ConvexBody.ball(self.center, r) if r > 0 else None
        lo, hi = self.lower + margin, self.upper - margin
        return ConvexBody.box(lo, hi) if np.all(hi > lo) else None


# ---------------------------------------------------------------------------
# flats


def _orthonormalize(frame: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(frame.T)
    # fix signs so the frame is reproducible
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


@dataclass(frozen=True)
class Flat:
    """Affine k-flat { base + span(frame) } in R^d; frame rows are orthonormal."""

    base: np.ndarray
    frame: np.ndarray  # shape (k, d); k may be 0 for a point flat

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        frame = np.asarray(self.frame, dtype=float)
        if frame.ndim != 2:
            frame = frame.reshape(-1, base.size)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)
        if frame.shape[1] != base.size:
            raise ValueError("frame and base dimensions disagree")
        if frame.shape[0] > 0:
            gram = frame @ frame.T
            if not np.allclose(gram, np.eye(frame.shape[0]), atol=FRAME_TOL):
                object.__setattr__(self, "frame", _orthonormalize(frame))

    @staticmethod
    def through_points(p: np.ndarray, q: np.ndarray) -> "Flat":
        p = np.asarray(p, dtype=float)
        direction = np.asarray(q, dtype=float) - p
        n = np.linalg.norm(direction)
        if n == 0:
            raise ValueError("points coincide")
        return Flat(base=p, frame=(direction / n)[None, :])

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.base.size

    def complement_basis(self) -> np.ndarray:
        """Orthonormal basis of the orthogonal complement, shape (d-k, d)."""
        d, k = self.ambient_dim, self.dim
        if k == 0:
            return np.eye(d)
        # full SVD of the frame exposes the null space in the right singular vectors
        _, _, vt = np.linalg.svd(self.frame, full_matrices=True)
        return vt[k:]

    def project_point(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        rel = y - self.base
        if self.dim == 0:
            return self.base.copy()
        return self.base + self.frame.T @ (self.frame @ rel)


@dataclass(frozen=True)
class Hyperplane:
    """Hyperplane { x : normal . x = offset } with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(n)
        if norm == 0:
            raise ValueError("normal must be nonzero")
        object.__setattr__(self, "normal", n / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    @staticmethod
    def from_flat(flat: Flat) -> "Hyperplane":
        if flat.dim != flat.ambient_dim - 1:
            raise ValueError("flat is not a hyperplane")
        normal = flat.complement_basis()[0]
        return Hyperplane(normal=normal, offset=float(normal @ flat.base))

    def to_flat(self) -> Flat:
        d = self.normal.size
        _, _, vt = np.linalg.svd(self.normal[None, :], full_matrices=True)
        return Flat(base=self.offset * self.normal, frame=vt[1:])


def intersect_flats(flats) -> Flat | None:
    """Affine intersection of several flats, or None if empty/degenerate.

    The flats are stacked as linear constraints N x = N b and solved by SVD.
    Rank decisions use RANK_TOL; a rank-deficient (non-generic) system is
    treated as degenerate and returns None.
    """
    flats = list(flats)
    if not flats:
        raise ValueError("need at least one flat")
    d = flats[0].ambient_dim
    rows, rhs, expected_rank = [], [], 0
    for fl in flats:
        comp = fl.complement_basis()
        rows.append(comp)
        rhs.append(comp @ fl.base)
        expected_rank += d - fl.dim
    a = np.vstack(rows)
    b = np.concatenate(rhs)
    if expected_rank > d:
        return None
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > RANK_TOL * max(s[0], 1.0))) if s.size else 0
    if rank < expected_rank:
        return None
    # minimal-norm particular solution + consistency check
    x = vt[:rank].T @ ((u[:, :rank].T @ b) / s[:rank])
    if np.linalg.norm(a @ x - b) > 1e-8 * max(1.0, np.linalg.norm(b)):
        return None
    return Flat(base=x, frame=vt[rank:])


def flat_ball_intersection(flat: Flat, ball: ConvexBody):
    """Intersect a flat with a ball; returns (center, radius, dim) or None."""
    if ball.kind != "ball":
        raise ValueError("expected a ball")
    foot = flat.project_point(ball.center)
    gap2 = float(np.dot(ball.center - foot, ball.center - foot))
    r2 = ball.radius**2 - gap2
    if r2 < 0:
        return None
    return foot, math.sqrt(max(r2, 0.0)), flat.dim


def line_window_segment(flat: Flat, window: ConvexBody):
    """Endpoints (p0, p1) of a line's chord through the window, or None."""
    if flat.dim != 1:
        raise ValueError("needs a 1-flat")
    direction = flat.frame[0]
    if window.kind == "ball":
        section = flat_ball_intersection(flat, window)
        if section is None:
            return None
        foot, radius, _ = section
        return foot - radius * direction, foot + radius * direction
    lo, hi = -np.inf, np.inf
    base = flat.base
    for i in range(base.size):
        u = direction[i]
        if u == 0.0:
            if not (window.lower[i] <= base[i] <= window.upper[i]):
                return None
            continue
        s0 = (window.lower[i] - base[i]) / u
        s1 = (window.upper[i] - base[i]) / u
        if s0 > s1:
            s0, s1 = s1, s0
        lo, hi = max(lo, s0), min(hi, s1)
    if lo > hi:
        return None
    return base + lo * direction, base + hi * direction


def segment_segment_distance(p0, p1, q0, q1) -> float:
    """Exact distance of two segments: clamped quadratic minimisation."""
    p0 = np.asarray(p0, float)
    q0 = np.asarray(q0, float)
    d1 = np.asarray(p1, float) - p0
    d2 = np.asarray(q1, float) - q0
    r = p0 - q0
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    if a == 0.0 and e == 0.0:
        return float(np.linalg.norm(r))
    if a == 0.0:
        s, t = 0.0, min(max(f / e, 0.0), 1.0)
    else:
        c = float(np.dot(d1, r))
        if e == 0.0:
            s, t = min(max(-c / a, 0.0), 1.0), 0.0
        else:
            b = float(np.dot(d1, d2))
            denom = a * e - b * b
            s = min(max((b * f - c * e) / denom, 0.0), 1.0) if denom > 0.0 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                s, t = min(max(-c / a, 0.0), 1.0), 0.0
            elif t > 1.0:
                s, t = min(max((b - c) / a, 0.0), 1.0), 1.0
    return float(np.linalg.norm(r + s * d1 - t * d2))


def project_onto_body(y: np.ndarray, body: ConvexBody) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if body.kind == "box":
        return np.clip(y, body.lower, body.upper)
    rel = y - body.center
    norm = np.linalg.norm(rel)
    if norm <= body.radius:
        return y.copy()
    return body.center + rel * (body.radius / norm)


def project_onto_flat(y: np.ndarray, flat: Flat) -> np.ndarray:
    return flat.project_point(y)


def project_flat_window(y, flat: Flat, window: ConvexBody,
                        tol: float = DYKSTRA_TOL, max_iter: int = DYKSTRA_MAX_ITER):
    """Project y onto flat cap window by Dykstra's alternating scheme.

    Returns (point, converged).  The intersection must be nonempty for the
    limit point to be the true projection; callers guarantee that.
    """
    x = np.asarray(y, dtype=float).copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iter):
        a = flat.project_point(x + p)
        p = x + p - a
        x_new = project_onto_body(a + q, window)
        q = a + q - x_new
        if np.linalg.norm(x_new - x) < tol:
            return x_new, True
        x = x_new
    return x, False


def flat_body_distance(flat: Flat, body: ConvexBody,
                       tol: float = DYKSTRA_TOL, max_iter: int = DYKSTRA_MAX_ITER):
    """Distance between a flat and a convex body, computed exactly.

    Reduces to the normal space of the flat: with C an orthonormal basis of
    the complement, dist = min over y in body of |C(y - base)|.  Closed form
    for balls and for codimension 1; bounded least squares otherwise.
    Alternating projections are avoided here because their linear rate
    degrades to useless near tangency, which is exactly where the hit test
    lives.
    """
    comp = flat.complement_basis()
    if comp.shape[0] == 0:
        return 0.0, True
    if body.kind == "ball":
        gap = float(np.linalg.norm(comp @ (body.center - flat.base)))
        return max(0.0, gap - body.radius), True
    if comp.shape[0] == 1:
        c = comp[0]
        mid = float(c @ (body.center - flat.base))
        half = float(np.abs(c) @ (body.sides / 2.0))
        return max(0.0, abs(mid) - half), True
    from scipy.optimize import lsq_linear

    res = lsq_linear(comp, comp @ flat.base, bounds=(body.lower, body.upper),
                     tol=1e-14)
    return float(np.linalg.norm(comp @ res.x - comp @ flat.base)), True


def flat_hits_body(flat: Flat, body: ConvexBody, tol: float = HIT_TOL) -> bool:
    if body.kind == "ball":
        foot = flat.project_point(body.center)
        return float(np.linalg.norm(foot - body.center)) <= body.radius + tol
    comp = flat.complement_basis()
    if comp.shape[0] == 2:
        # the image of the box in the flat's 2-d normal space is a zonotope;
        # membership of the origin is a support test over the facet normals,
        # which are the perps of the generators (plus the generator
        # directions themselves, covering degenerate segments)
        c = comp @ (body.center - flat.base)
        gens = comp * (body.sides / 2.0)
        normals = np.concatenate([gens[::-1] * np.array([[-1.0], [1.0]]), gens], axis=1).T
        lens = np.linalg.norm(normals, axis=1)
        keep = lens > 0
        normals = normals[keep] / lens[keep, None]
        return bool(np.all(np.abs(normals @ c) <= np.abs(normals @ gens).sum(axis=1) + tol))
    dist, _ = flat_body_distance(flat, body)
    return dist <= tol


def dist_within_window_info(e: Flat, f: Flat, window: ConvexBody,
                            tol: float = DYKSTRA_TOL, max_iter: int = DYKSTRA_MAX_ITER):
    """Distance between E cap W and F cap W, with a convergence flag.

    Lines get the exact closed form (their window sections are segments).
    Higher-dimensional flats fall back to alternating projections between
    the two convex sets E cap W and F cap W, each projection computed with
    Dykstra's algorithm, stopping when the distance stabilises to within
    tol or the iteration cap is hit.
    """
    for fl in (e, f):
        if not flat_hits_body(fl, window):
            raise ValueError("both flats must intersect the window")
    if e.dim == 1 and f.dim == 1:
        seg_e = line_window_segment(e, window)
        seg_f = line_window_segment(f, window)
        return segment_segment_distance(*seg_e, *seg_f), True
    x, ok0 = project_flat_window(project_onto_body(e.base, window), e, window, tol, max_iter)
    converged = ok0
    dist = np.inf
    for _ in range(max_iter):
        y, ok1 = project_flat_window(x, f, window, tol, max_iter)
        x, ok2 = project_flat_window(y, e, window, tol, max_iter)
        converged = converged and ok1 and ok2
        new_dist = float(np.linalg.norm(x - y))
        if abs(dist - new_dist) < tol:
            return new_dist, converged
        dist = new_dist
    return dist, False


def dist_within_window(e: Flat, f: Flat, window: ConvexBody,
                       tol: float = DYKSTRA_TOL, max_iter: int = DYKSTRA_MAX_ITER) -> float:
    return dist_within_window_info(e, f, window, tol, max_iter)[0]


# ---------------------------------------------------------------------------
# overlap volumes used by the exact mean-count and kernel formulas


def spherical_cap_area(d: int, chord: float) -> float:
    """Surface measure on S^(d-1) of a cap of chord radius ``chord``.

    The cap is { y : |y - y0| <= chord } for a fixed pole y0.  Exact closed
    forms for d in {2, 3}; numeric quadrature of sin^(d-2) otherwise.
    """
    if d < 2:
        raise ValueError("needs d >= 2")
    if chord <= 0:
        return 0.0
    if chord >= 2:
        return sphere_surface_area(d)
    theta = 2.0 * math.asin(chord / 2.0)
    if d == 2:
        return 2.0 * theta
    if d == 3:
        return math.pi * chord**2
    from scipy.integrate import quad

    val, _ = quad(lambda phi: math.sin(phi) ** (d - 2), 0.0, theta)
    return (d - 1) * unit_ball_volume(d - 1) * val


def disk_box_overlap(centers: np.ndarray, radius: float, box: ConvexBody) -> np.ndarray:
    """Vectorised area of disk(center_i, radius) cap box, for 2-d boxes.

    Requires 2 * radius <= min side so that at most one face per axis cuts the
    disk; that is the regime every caller operates in.
    """
    if box.kind != "box" or box.dim != 2:
        raise ValueError("expected a 2-d box")
    if 2.0 * radius > box.inradius() * 2.0 + 1e-15:
        raise ValueError("radius too large for the closed-form overlap")
    pts = np.atleast_2d(np.asarray(centers, dtype=float))
    r = float(radius)
    full = math.pi * r * r
    area = np.full(pts.shape[0], full)
    # distances to the four sides; by the size condition at most one per axis is < r
    gaps = np.stack([
        pts[:, 0] - box.lower[0], box.upper[0] - pts[:, 0],
        pts[:, 1] - box.lower[1], box.upper[1] - pts[:, 1],
    ], axis=1)
    seg = np.zeros_like(gaps)
    cut = gaps < r
    if np.any(cut):
        g = np.clip(gaps[cut], 0.0, r)
        seg[cut] = r * r * np.arccos(g / r) - g * np.sqrt(r * r - g * g)
    area -= seg.sum(axis=1)
    # corner corrections: pairs (x-side, y-side) both cut with the corner inside the disk
    for ix in (0, 1):
        for iy in (2, 3):
            a = np.clip(gaps[:, ix], 0.0, None)
            b = np.clip(gaps[:, iy], 0.0, None)
            mask = (gaps[:, ix] < r) & (gaps[:, iy] < r) & (a * a + b * b < r * r)
            if np.any(mask):
                av, bv = a[mask], b[mask]
                c = np.sqrt(r * r - bv * bv)
                upper = 0.5 * (c * bv + r * r * np.arcsin(c / r)) - bv * c
                lower = 0.5 * (av * np.sqrt(r * r - av * av) + r * r * np.arcsin(av / r)) - bv * av
                corner = upper - lower
                idx = np.where(mask)[0]
                area[idx] += corner
    return area if np.ndim(centers) > 1 else area


def ball_window_overlap(y, radius: float, window: ConvexBody) -> float:
    """Volume of ball(y, radius) cap window; exact for d=1 boxes, d<=2 balls,
    d=2 boxes."""
    y = np.asarray(y, dtype=float)
    d = window.dim
    r = float(radius)
    if window.kind == "box":
        if d == 1:
            lo, hi = window.lower[0], window.upper[0]
            return max(0.0, min(y[0] + r, hi) - max(y[0] - r, lo))
        if d == 2:
            return float(disk_box_overlap(y[None, :], r, window)[0])
        raise NotImplementedError("box overlap implemented for d <= 2")
    # ball window
    gap = float(np.linalg.norm(y - window.center))
    rw = window.radius
    if gap + r <= rw:
        return unit_ball_volume(d) * r**d
    if gap >= r + rw:
        return 0.0
    if d == 1:
        return max(0.0, min(y[0] + r, window.center[0] + rw) - max(y[0] - r, window.center[0] - rw))
    if d == 2:
        # standard two-disk lens
        d1 = (gap * gap + r * r - rw * rw) / (2.0 * gap)
        d2 = gap - d1
        part1 = r * r * math.acos(np.clip(d1 / r, -1, 1)) - d1 * math.sqrt(max(r * r - d1 * d1, 0.0))
        part2 = rw * rw * math.acos(np.clip(d2 / rw, -1, 1)) - d2 * math.sqrt(max(rw * rw - d2 * d2, 0.0))
        return part1 + part2
    raise NotImplementedError("ball overlap implemented for d <= 2")
