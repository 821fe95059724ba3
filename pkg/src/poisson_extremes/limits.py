"""Limit-law parameters and finite-intensity error quantities.

For every model family the rescaled functional process converges to a
Poisson process on the positive half-axis whose intensity measure is
nu((a, b]) = beta * (b**tau - a**tau).  This module provides the
(gamma, beta, tau) triple per family, the order-statistic tails of the
limit, exact or bounded evaluations of the mean admissible-tuple count
alpha_t, the locality supremum r_t entering the convergence-rate bound,
and randomized quasi-Monte Carlo integration for the two beta
coefficients that have no closed form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from .geometry import (
    ConvexBody,
    crofton_constant,
    intrinsic_volume_ball,
    spherical_cap_area,
    unit_ball_volume,
)
from .models import ModelSpec, run_model
from .sampling import SeededStream

DEFAULT_SAMPLES = 1 << 13
DEFAULT_RANDOMIZATIONS = 16
DEFAULT_BETA_SEED = 424243
_QUAD_TOL = 1e-11
# a single quadrature node carrying this share of one randomization's mass
# marks the integral as numerically untrustworthy
_DOMINANCE_LIMIT = 0.25


@dataclass(frozen=True)
class LimitLaw:
    """Parameters of the limiting Weibull-intensity Poisson process."""

    gamma: float
    beta: float
    tau: float
    beta_provenance: str = "closed_form"
    beta_stderr: float | None = None

    def __post_init__(self):
        if not (self.gamma > 0 and self.beta > 0 and self.tau > 0):
            raise ValueError("gamma, beta, tau must all be positive")
        if self.beta_provenance not in ("closed_form", "numeric"):
            raise ValueError(f"unknown provenance {self.beta_provenance!r}")


@dataclass(frozen=True)
class BetaEstimate:
    estimate: float
    stderr: float
    diverged: bool
    n_samples: int
    n_randomizations: int


@dataclass(frozen=True)
class AlphaValue:
    """Evaluation of the mean number of admissible tuples.

    kind is "exact" when the value is the exact mean (up to quadrature
    tolerance), "interval" when only two-sided bounds are available
    (value then holds the limit beta * x**tau), and "limit" when the
    leading-order limit is all we report.
    """

    value: float
    kind: str
    lower: float | None = None
    upper: float | None = None


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    reps: int


# ---------------------------------------------------------------------------
# limit parameters


def _beta_intersecting(d: int, k: int, ell: int, j: int) -> float:
    m = ell * (d - k)
    chain = 1.0
    for i in range(ell):
        chain *= crofton_constant(d, i * (d - k), k)
    return (
        m
        / (2.0 * math.factorial(ell))
        * chain
        * intrinsic_volume_ball(d, m, 1.0)
        * intrinsic_volume_ball(d - m, j, 1.0) ** (-2.0 / j)
    )


def limit_params(
    spec: ModelSpec,
    *,
    force_numeric: bool = False,
    samples: int = DEFAULT_SAMPLES,
    randomizations: int = DEFAULT_RANDOMIZATIONS,
    stream: SeededStream | None = None,
    threads: int = 1,
) -> LimitLaw:
    """Limit triple (gamma, beta, tau) for a model instance.

    Every beta equals the limit of alpha_t(x) / x**tau, the normalized
    mean number of admissible tuples; the constants with closed forms
    are also pinned by Monte Carlo mean-count estimates in the test
    suite.  The simplex-volume families dispatch to beta_numeric when no
    closed form exists (point simplices beyond the plane, all
    hyperplane simplices); force_numeric routes the planar point-simplex
    case through the integration path as a consistency check.
    """
    d = spec.d
    if spec.kind == "proximity_flats":
        k = spec.k
        tau = float(d - 2 * k)
        beta = (
            math.comb(d - k, k)
            * unit_ball_volume(d - k) ** 2
            / (2.0 * math.comb(d, k) * unit_ball_volume(d))
            * spec.window.volume()
        )
        return LimitLaw(2.0 / tau, beta, tau)
    if spec.kind == "intersecting_flats":
        tau = 2.0 / spec.j
        return LimitLaw(spec.j * spec.ell / 2.0, _beta_intersecting(d, spec.k, spec.ell, spec.j), tau)
    if spec.kind == "sphere_polytope":
        beta = 0.5 * d * unit_ball_volume(d) * unit_ball_volume(d - 1)
        return LimitLaw(2.0 / (d - 1), beta, float(d - 1))
    if spec.kind == "gilbert":
        beta = 0.5 * unit_ball_volume(d) * spec.window.volume()
        return LimitLaw(2.0 / d, beta, float(d))
    if spec.kind == "point_simplices":
        gamma, tau = float(d + 1), 1.0
        if d == 2 and not force_numeric:
            return LimitLaw(gamma, 2.0 * spec.window.volume() ** 2, tau)
    elif spec.kind == "hyperplane_simplices":
        gamma, tau = float(d * (d + 1)), 1.0 / d
    else:
        raise ValueError(f"unknown model kind {spec.kind!r}")
    if stream is None:
        stream = SeededStream(DEFAULT_BETA_SEED)
    est = beta_numeric(
        spec, samples=samples, stream=stream, randomizations=randomizations, threads=threads
    )
    return LimitLaw(gamma, est.estimate, tau, "numeric", est.stderr)


# ---------------------------------------------------------------------------
# randomized quasi-Monte Carlo for the two integral betas


def _unit_normals(u: np.ndarray) -> np.ndarray:
    g = special.ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / np.where(norms < 1e-12, 1.0, norms)


def _hyperplane_hits(window: ConvexBody, normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    # support-function test: the hyperplane {x . n = p} meets the window iff
    # |p - n . c| is at most the window's support half-width in direction n
    gap = np.abs(offsets - normals @ window.center)
    if window.kind == "ball":
        return gap <= window.radius
    return gap <= 0.5 * np.abs(normals) @ window.sides


def _box2_chords(normals: np.ndarray, offsets: np.ndarray, box: ConvexBody) -> np.ndarray:
    """Length of {x . n = p} cap box for a batch of lines in the plane."""
    perp = np.stack([-normals[:, 1], normals[:, 0]], axis=1)
    foot = offsets[:, None] * normals
    lo_all = np.full(offsets.shape, -np.inf)
    hi_all = np.full(offsets.shape, np.inf)
    for i in (0, 1):
        a, q = perp[:, i], foot[:, i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (box.lower[i] - q) / a
            t2 = (box.upper[i] - q) / a
        lo, hi = np.minimum(t1, t2), np.maximum(t1, t2)
        small = np.abs(a) < 1e-14
        inside = (q >= box.lower[i]) & (q <= box.upper[i])
        lo = np.where(small, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(small, np.where(inside, np.inf, -np.inf), hi)
        lo_all, hi_all = np.maximum(lo_all, lo), np.minimum(hi_all, hi)
    return np.clip(hi_all - lo_all, 0.0, None)


def _slice_measure(window: ConvexBody, normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """(d-1)-volume of window cap {x . n = p}, vectorized over rows."""
    d = window.dim
    if window.kind == "box":
        if d != 2:
            raise NotImplementedError("box slice measures implemented in the plane only")
        return _box2_chords(normals, offsets, window)
    h = np.abs(offsets - normals @ window.center)
    rad2 = np.clip(window.radius**2 - h * h, 0.0, None)
    return unit_ball_volume(d - 1) * rad2 ** (0.5 * (d - 1))


def _point_simplex_integrand(spec: ModelSpec):
    window, d = spec.window, spec.d
    if window.kind == "box" and d != 2:
        raise NotImplementedError("box slice measures implemented in the plane only")
    center, rc = window.center, window.circumradius()
    factor = d * unit_ball_volume(d) / (d + 1) * (2.0 * rc)

    def integrand(u: np.ndarray) -> np.ndarray:
        if d == 2:
            phi = 2.0 * math.pi * u[:, 0]
            normals = np.stack([np.cos(phi), np.sin(phi)], axis=1)
            last = u[:, 1]
        else:
            normals = _unit_normals(u[:, :d])
            last = u[:, d]
        offsets = normals @ center + (2.0 * last - 1.0) * rc
        return factor * _slice_measure(window, normals, offsets) ** (d + 1)

    return integrand, (2 if d == 2 else d + 1)


def _point_simplex_endpoint_integrand(spec: ModelSpec):
    # planar ball windows only: a chord is parametrized by its two boundary
    # angles, with area element R*sin(psi)/2 relative to the (direction,
    # signed offset) parametrization, psi the half-angle between endpoints
    if spec.d != 2 or spec.window.kind != "ball":
        raise NotImplementedError("endpoint parametrization needs a planar ball window")
    radius = spec.window.radius
    factor = 2.0 * unit_ball_volume(2) / 3.0 * math.pi * radius

    def integrand(u: np.ndarray) -> np.ndarray:
        psi = math.pi * np.abs(u[:, 1] - u[:, 0])
        s = np.sin(psi)
        return factor * (2.0 * radius * s) ** 3 * s

    return integrand, 2


def _hyperplane_simplex_values(normals, offsets, u_dir, window, rc):
    """Batched integrand core shared by the planar and general samplers."""
    d = window.dim
    n_rows = normals.shape[0]
    hits = np.ones(n_rows, dtype=bool)
    for i in range(d):
        hits &= _hyperplane_hits(window, normals[:, i, :], offsets[:, i])
    det = np.linalg.det(normals)
    ok = hits & (np.abs(det) > 1e-300)
    out = np.zeros(n_rows)
    if not np.any(ok):
        return out
    vertex = np.linalg.solve(normals[ok], offsets[ok][:, :, None])[:, :, 0]
    inside = window.contains(vertex)
    # q_i = u . (i-th column of N^{-1}); the simplex cut off by the d
    # hyperplanes and a unit-offset hyperplane normal to u has volume
    # 1 / (d! |det N| prod_i |q_i|), so the -1/d power is the d-th root
    # of that product, which vanishes smoothly wherever u is parallel to
    # one of the cut directions
    q = np.linalg.solve(np.swapaxes(normals[ok], 1, 2), u_dir[ok][:, :, None])[:, :, 0]
    vol_inv = math.factorial(d) * np.abs(det[ok]) * np.prod(np.abs(q), axis=1)
    vals = np.where(inside, vol_inv ** (1.0 / d), 0.0)
    # the last hyperplane's offset is integrated out analytically; the
    # volume constraint admits offsets on both sides of the vertex, so
    # the interval {|delta| <= (x vol)^{1/d}} has length 2 (x vol)^{1/d}
    out[ok] = 2.0 * (2.0 * rc) ** d / math.factorial(d + 1) * vals
    return out


def _hyperplane_simplex_integrand(spec: ModelSpec):
    window, d = spec.window, spec.d
    center, rc = window.center, window.circumradius()

    if d == 2:

        def integrand(u: np.ndarray) -> np.ndarray:
            phi = 2.0 * math.pi * u[:, [0, 2, 4]]
            normals = np.stack([np.cos(phi), np.sin(phi)], axis=2)
            offsets = normals[:, :2] @ center + (2.0 * u[:, [1, 3]] - 1.0) * rc
            return _hyperplane_simplex_values(normals[:, :2], offsets, normals[:, 2], window, rc)

        return integrand, 5

    def integrand(u: np.ndarray) -> np.ndarray:
        n = u.shape[0]
        normals = _unit_normals(u[:, : d * d].reshape(n, d, d))
        offsets = normals @ center + (2.0 * u[:, d * d : d * d + d] - 1.0) * rc
        u_dir = _unit_normals(u[:, d * d + d :])
        return _hyperplane_simplex_values(normals, offsets, u_dir, window, rc)

    return integrand, d * d + 2 * d


def _aggregate(means, dominances, median: bool):
    means = np.asarray(means, dtype=float)
    center = float(np.median(means)) if median else float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / math.sqrt(means.size))
    if median:
        # the sample median is sqrt(pi/2) noisier than the mean; matches the
        # observed seed-to-seed spread of the heavy-tailed integrand
        stderr *= math.sqrt(0.5 * math.pi)
    diverged = bool(
        np.max(dominances) > _DOMINANCE_LIMIT or (center != 0.0 and stderr > 0.5 * abs(center))
    )
    return center, stderr, diverged


def beta_numeric(
    spec: ModelSpec,
    samples: int = DEFAULT_SAMPLES,
    stream: SeededStream | None = None,
    *,
    randomizations: int = DEFAULT_RANDOMIZATIONS,
    threads: int = 1,
    parametrization: str = "offset",
) -> BetaEstimate:
    """Randomized quasi-Monte Carlo estimate of an integral beta.

    Scrambled Sobol points, one independent scrambling per
    randomization; the spread of the per-randomization means gives the
    standard error.  Point simplices aggregate by mean of means; the
    hyperplane-simplex integrand has an integrable blow-up at
    near-parallel hyperplane pairs, so that family aggregates by median
    of means and flags the estimate as diverged when a single node
    dominates a randomization or the spread swamps the value.

    parametrization="endpoints" (planar ball windows, point simplices)
    integrates over chord endpoint angles instead of the direction and
    signed offset of the cutting line; the two routes share nothing but
    the integrand value, which makes them a useful consistency check.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples per randomization")
    if randomizations < DEFAULT_RANDOMIZATIONS:
        raise ValueError(f"need at least {DEFAULT_RANDOMIZATIONS} randomizations")
    if stream is None:
        stream = SeededStream(DEFAULT_BETA_SEED)
    if spec.kind == "point_simplices":
        median = False
        if parametrization == "offset":
            integrand, dim = _point_simplex_integrand(spec)
        elif parametrization == "endpoints":
            integrand, dim = _point_simplex_endpoint_integrand(spec)
        else:
            raise ValueError(f"unknown parametrization {parametrization!r}")
    elif spec.kind == "hyperplane_simplices":
        if parametrization != "offset":
            raise ValueError("hyperplane simplices support the offset parametrization only")
        median = True
        integrand, dim = _hyperplane_simplex_integrand(spec)
    else:
        raise ValueError("beta_numeric only applies to the simplex-volume families")

    n_log2 = max(3, math.ceil(math.log2(samples)))

    def one(r: int):
        engine = qmc.Sobol(d=dim, scramble=True, seed=stream.child(r).generator())
        vals = np.asarray(integrand(engine.random_base2(n_log2)), dtype=float)
        total = float(np.abs(vals).sum())
        dominance = float(np.abs(vals).max() / total) if total > 0 else 0.0
        return float(vals.mean()), dominance

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(randomizations)))
    else:
        results = [one(r) for r in range(randomizations)]
    means = [m for m, _ in results]
    dominances = [dom for _, dom in results]
    center, stderr, diverged = _aggregate(means, dominances, median)
    return BetaEstimate(center, stderr, diverged, 2**n_log2, randomizations)


# ---------------------------------------------------------------------------
# limit tails and intensity


def limit_tail(m: int, x, law: LimitLaw):
    """P(m-th smallest rescaled value > x) under the limit process."""
    if m < 1:
        raise ValueError("order statistic index starts at 1")
    x = np.asarray(x, dtype=float)
    mass = law.beta * np.clip(x, 0.0, None) ** law.tau
    out = special.pdtr(m - 1, mass)
    return float(out) if out.ndim == 0 else out


def intensity_measure(a: float, b: float, law: LimitLaw) -> float:
    """Mass of the limit intensity on the interval (a, b]."""
    if not 0 <= a <= b:
        raise ValueError("need 0 <= a <= b")
    return law.beta * (b**law.tau - a**law.tau)


# ---------------------------------------------------------------------------
# alpha_t: exact values, bounds, Monte Carlo


def _elementary_symmetric(values: np.ndarray) -> np.ndarray:
    coeffs = np.ones(1)
    for v in values:
        coeffs = np.convolve(coeffs, [1.0, v])
    return coeffs[::-1]  # index m = e_m


def _alpha_gilbert_box(sides: np.ndarray, s: float, t: float) -> float:
    # integral of the box set covariance over a centered s-ball, valid while
    # the ball fits inside the box in every axis direction
    d = sides.size
    e = _elementary_symmetric(sides)
    total = 0.0
    for r in range(d + 1):
        total += (
            (-1.0) ** r
            * e[d - r]
            * math.pi ** (0.5 * (d - r))
            / math.gamma(0.5 * (d + r) + 1.0)
            * s ** (d + r)
        )
    return 0.5 * t * t * total


def _cap_integral(d: int, rho: float, a: float) -> float:
    """kappa_{d-1} * integral_a^rho (rho^2 - u^2)^((d-1)/2) du, a in [-rho, rho]."""
    if rho <= 0:
        return 0.0
    p = 0.5 * (d + 1)
    half = 0.5 * rho**d * math.gamma(0.5) * math.gamma(p) / math.gamma(p + 0.5)
    frac = min((abs(a) / rho) ** 2, 1.0)
    piece = half * (1.0 - special.betainc(0.5, p, frac))
    value = piece if a >= 0 else 2.0 * half - piece
    return unit_ball_volume(d - 1) * value


def _ball_lens_volume(d: int, big: float, small: float, gap: float) -> float:
    """Volume of the intersection of balls with radii big, small at distance gap."""
    if gap >= big + small:
        return 0.0
    if gap <= big - small:
        return unit_ball_volume(d) * small**d
    plane = (gap * gap + big * big - small * small) / (2.0 * gap)
    return _cap_integral(d, big, plane) + _cap_integral(d, small, gap - plane)


def _alpha_gilbert_ball(window: ConvexBody, s: float, t: float) -> float:
    d, radius = window.dim, window.radius

    def radial(h: float) -> float:
        return h ** (d - 1) * _ball_lens_volume(d, radius, s, h)

    val, _ = integrate.quad(
        radial, 0.0, radius, points=[max(radius - s, 0.0)], epsabs=_QUAD_TOL, limit=200
    )
    return 0.5 * t * t * d * unit_ball_volume(d) * val


def _proximity_alpha_bounds(spec: ModelSpec, s: float, t: float):
    d, k, window = spec.d, spec.k, spec.window
    upper_iv = window.intrinsic_volumes()
    inner = window.shrink(s)
    lower_iv = inner.intrinsic_volumes() if inner is not None else np.zeros(d + 1)
    kap = unit_ball_volume
    lower = upper = 0.0
    for j in range(k + 1):
        coeff = (
            math.comb(k, j)
            * math.comb(d - j, k)
            / (2.0 * math.comb(d, k) * math.comb(d, k - j))
            * kap(k)
            * kap(d - k)
            * kap(d - j)
            * kap(d + j - k)
            / (kap(j) * kap(d) ** 2)
        )
        scale = t * t * s ** (d - k - j)
        lower += coeff * lower_iv[d - k + j] * scale
        upper += coeff * upper_iv[d - k + j] * scale
    return lower, upper


def alpha_t_intersecting(spec: ModelSpec, x: float, t: float) -> float:
    """Exact mean number of admissible flat tuples in the unit ball."""
    d, k, ell, j = spec.d, spec.k, spec.ell, spec.j
    m = ell * (d - k)
    rho = min((x * t**-spec.gamma / intrinsic_volume_ball(d - m, j, 1.0)) ** (1.0 / j), 1.0)
    chain = 1.0
    for i in range(ell):
        chain *= crofton_constant(d, i * (d - k), k)
    return (
        t**ell
        / math.factorial(ell)
        * chain
        * intrinsic_volume_ball(d, m, 1.0)
        * (1.0 - (1.0 - rho * rho) ** (0.5 * m))
    )


def alpha_t(spec: ModelSpec, x: float, t: float, law: LimitLaw | None = None) -> AlphaValue:
    """Mean number of admissible tuples at the rescaled threshold x.

    Exact for the metric families (gilbert, sphere polytope).  The flat
    proximity family gets two-sided bounds obtained by growing the flat
    traces outward ignoring the window boundary (upper) and shrinking
    the window first (lower); its value field carries the limit.  The
    remaining families report the limit beta * x**tau only.
    """
    if not (x > 0 and t > 0):
        raise ValueError("x and t must be positive")
    s = x * t**-spec.gamma
    if spec.kind == "gilbert":
        eff = min(s, spec.delta(t))
        if spec.window.kind == "box":
            if eff <= float(np.min(spec.window.sides)):
                return AlphaValue(_alpha_gilbert_box(spec.window.sides, eff, t), "exact")
        else:
            return AlphaValue(_alpha_gilbert_ball(spec.window, eff, t), "exact")
    if spec.kind == "sphere_polytope":
        d = spec.d
        area = spherical_cap_area(d, min(s, 2.0))
        return AlphaValue(0.5 * t * t * d * unit_ball_volume(d) * area, "exact")
    if law is None:
        law = limit_params(spec)
    limit = law.beta * x**law.tau
    if spec.kind == "proximity_flats":
        lower, upper = _proximity_alpha_bounds(spec, s, t)
        return AlphaValue(limit, "interval", lower, upper)
    return AlphaValue(limit, "limit")


def alpha_t_mc(
    spec: ModelSpec, x: float, t: float, reps: int, stream: SeededStream
) -> McEstimate:
    """Plain Monte Carlo estimate of alpha_t: mean admissible-tuple count."""
    if reps < 2:
        raise ValueError("need at least two replications")
    counts = np.empty(reps)
    for r in range(reps):
        run = run_model(spec, t, x_max=x, m_max=1, stream=stream.child(r))
        counts[r] = run.diagnostics["n_values"]
    return McEstimate(float(counts.mean()), float(counts.std(ddof=1) / math.sqrt(reps)), reps)


def alpha_t_mc_conditional(
    spec: ModelSpec, x: float, t: float, samples: int, stream: SeededStream
) -> McEstimate:
    """Smoothed Monte Carlo for the gilbert alpha_t.

    Conditioning on one point reduces the estimand to the window average
    of the exact overlap volume of window and threshold ball, which is
    evaluated in closed form per sample point; the variance drops by
    orders of magnitude against the raw tuple count.
    """
    if spec.kind != "gilbert":
        raise ValueError("conditional estimator is specific to the gilbert family")
    window = spec.window
    eff = min(x * t**-spec.gamma, spec.delta(t))
    gen = stream.generator()
    if window.kind == "box":
        pts = window.lower + gen.random((samples, window.dim)) * window.sides
        if window.dim == 2:
            from .geometry import disk_box_overlap

            overlaps = disk_box_overlap(pts, eff, window)
        else:
            from .geometry import ball_window_overlap

            overlaps = np.array([ball_window_overlap(p, eff, window) for p in pts])
    else:
        direction = gen.standard_normal((samples, window.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radii = window.radius * gen.random(samples) ** (1.0 / window.dim)
        pts = window.center + direction * radii[:, None]
        from .geometry import ball_window_overlap

        overlaps = np.array([ball_window_overlap(p, eff, window) for p in pts])
    scale = 0.5 * t * t * window.volume()
    mean = scale * float(overlaps.mean())
    stderr = scale * float(overlaps.std(ddof=1) / math.sqrt(samples))
    return McEstimate(mean, stderr, samples)


# ---------------------------------------------------------------------------
# locality bounds and the convergence-rate bound


def r_t_bound(spec: ModelSpec, x: float, t: float) -> float | None:
    """Upper bound for the locality supremum r_t(x).

    r_t is the largest expected number of admissible completions over
    all ways of pinning part of a tuple.  Exact for the sphere family,
    the standard threshold-ball bound for gilbert, and explicit
    conservative bounds for the flat families.  For intersecting flats
    the supremum is driven by near-tangent configurations whose trace
    ball is smaller than the threshold; when d - k = 1 that contribution
    does not decay in t, and the bound reported here reflects that
    honestly rather than assuming a generic-position configuration.
    The simplex-volume families have no usable bound, hence None.
    """
    if not (x > 0 and t > 0):
        raise ValueError("x and t must be positive")
    s = x * t**-spec.gamma
    d = spec.d
    if spec.kind == "gilbert":
        eff = min(s, spec.delta(t))
        return t * unit_ball_volume(d) * eff**d
    if spec.kind == "sphere_polytope":
        return t * spherical_cap_area(d, min(s, 2.0))
    if spec.kind == "proximity_flats":
        k = spec.k
        rc = spec.window.circumradius()
        total = 0.0
        for j in range(k + 1):
            total += (
                s ** (d - k - j)
                * math.comb(d - j, k)
                * unit_ball_volume(d - j)
                / unit_ball_volume(k)
                * intrinsic_volume_ball(k, j, rc)
            )
        return t * crofton_constant(d, 0, k) * total
    if spec.kind == "intersecting_flats":
        k, ell, j = spec.k, spec.ell, spec.j
        m = ell * (d - k)
        rho = min((s / intrinsic_volume_ball(d - m, j, 1.0)) ** (1.0 / j), 1.0)
        best = 0.0
        for fixed in range(1, ell):
            q = (ell - fixed) * (d - k)
            ambient = d - fixed * (d - k)
            chain = 1.0
            for n in range(ell - fixed):
                chain *= crofton_constant(d, n * (d - k), k)
            shape = max(1.0 - (1.0 - rho * rho) ** (0.5 * q), rho**q)
            best = max(best, t ** (ell - fixed) * chain * intrinsic_volume_ball(ambient, q, 1.0) * shape)
        return best
    return None


def rate_bound(spec: ModelSpec, m: int, x: float, t: float, C: float) -> float | None:
    """Bound on the distance of the m-th order-statistic tail to its limit.

    |beta x^tau - alpha_t(x)| + C * sqrt(r_t(x)); the constant C by the
    pinned-tuple dependence structure is not explicit and must be
    supplied.  None when r_t has no usable bound.
    """
    if m < 1:
        raise ValueError("order statistic index starts at 1")
    if C <= 0:
        raise ValueError("C must be positive")
    locality = r_t_bound(spec, x, t)
    if locality is None:
        return None
    law = limit_params(spec)
    target = law.beta * x**law.tau
    if spec.kind == "intersecting_flats":
        gap = abs(target - alpha_t_intersecting(spec, x, t))
    else:
        alpha = alpha_t(spec, x, t, law=law)
        if alpha.kind == "interval":
            gap = max(abs(target - alpha.lower), abs(target - alpha.upper))
        else:
            gap = abs(target - alpha.value)
    return gap + C * math.sqrt(locality)


# ---------------------------------------------------------------------------
# sampling from the limit process


def weibull_process_sample(law: LimitLaw, x_max: float, stream: SeededStream) -> np.ndarray:
    """One realization of the limit process restricted to (0, x_max], sorted."""
    gen = stream.generator()
    n = gen.poisson(law.beta * x_max**law.tau)
    points = x_max * gen.random(n) ** (1.0 / law.tau)
    return np.sort(points)


def weibull_order_stats(
    law: LimitLaw, m_max: int, x_max: float, reps: int, stream: SeededStream
) -> np.ndarray:
    """(reps, m_max) array of limit-process order statistics, inf-padded."""
    out = np.full((reps, m_max), np.inf)
    for r in range(reps):
        pts = weibull_process_sample(law, x_max, stream.child(r))
        take = min(m_max, pts.size)
        out[r, :take] = pts[:take]
    return out
