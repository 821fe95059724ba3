"""Poisson samplers for points, sphere points and isotropic flats.

Reproducibility uses a seed tree: a stream is addressed by (seed, path) and
child(i) appends i to the path, so a split is a genuine tree edge and sibling
subtrees never meet (child(a).child(b) differs from child(a + b)).  Each
address is hashed by SeedSequence into an independent Philox generator; draws
depend only on the address, never on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ConvexBody,
    Flat,
    Hyperplane,
    crofton_constant,
    flat_hits_body,
    sphere_surface_area,
    unit_ball_volume,
)

_MAX_SEED = 2**64
_WORD = 0xFFFFFFFF

__all__ = [
    "SeededStream",
    "split_stream",
    "PointSample",
    "FlatSample",
    "sample_points_in_body",
    "sample_points_on_sphere",
    "sample_isotropic_flats",
    "sample_isotropic_hyperplanes",
    "uniform_frame",
    "flat_hit_rate_mean",
]


@dataclass(frozen=True)
class SeededStream:
    """Addressable random substream: one node of a per-seed stream tree."""

    seed: int
    path: tuple = ()

    def __post_init__(self):
        if not (0 <= self.seed < _MAX_SEED):
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        for part in self.path:
            if not (0 <= part < 2**64):
                raise ValueError("path entries must fit in an unsigned 64-bit integer")

    def stream_key(self) -> tuple:
        """(seed, path) address; injective by construction."""
        return (self.seed, self.path)

    def generator(self) -> np.random.Generator:
        # fixed-width words keep distinct paths distinct in the spawn key
        # (a large entry cannot alias a pair of small ones)
        words = []
        for part in self.path:
            words.append(part & _WORD)
            words.append(part >> 32)
        seq = np.random.SeedSequence(self.seed, spawn_key=tuple(words))
        return np.random.Generator(np.random.Philox(seed=seq))

    def child(self, offset: int) -> "SeededStream":
        return SeededStream(self.seed, self.path + (offset,))


def split_stream(seed: int, replication: int) -> SeededStream:
    """Substream for one replication of an experiment with master seed."""
    return SeededStream(seed).child(replication)


@dataclass
class PointSample:
    points: np.ndarray  # (n, d)
    t: float
    window: ConvexBody | None  # None for sphere-supported samples
    on_sphere: bool = False

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass
class FlatSample:
    flats: list
    k: int
    t: float
    window: ConvexBody


def sample_points_in_body(t: float, window: ConvexBody, stream: SeededStream) -> PointSample:
    """Poisson process with intensity t * Lebesgue restricted to the window."""
    if t <= 0:
        raise ValueError("intensity t must be positive")
    gen = stream.generator()
    mean = t * window.volume()
    n = int(gen.poisson(mean))
    d = window.dim
    if window.kind == "box":
        pts = gen.uniform(window.lower, window.upper, size=(n, d))
    else:
        # rejection from the bounding box of the ball
        pts = np.empty((n, d))
        filled = 0
        lo = window.center - window.radius
        hi = window.center + window.radius
        while filled < n:
            need = n - filled
            cand = gen.uniform(lo, hi, size=(max(need * 2, 16), d))
            keep = cand[np.linalg.norm(cand - window.center, axis=1) <= window.radius]
            take = min(keep.shape[0], need)
            pts[filled:filled + take] = keep[:take]
            filled += take
    return PointSample(points=pts, t=t, window=window)


def sample_points_on_sphere(t: float, d: int, stream: SeededStream) -> PointSample:
    """Poisson process with intensity t * surface measure on S^(d-1)."""
    if t <= 0:
        raise ValueError("intensity t must be positive")
    if d < 2:
        raise ValueError("sphere sampling needs d >= 2")
    gen = stream.generator()
    n = int(gen.poisson(t * sphere_surface_area(d)))
    raw = gen.standard_normal((n, d))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    # resample the (probability-zero) zero rows rather than dividing by zero
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        raw[bad] = gen.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return PointSample(points=raw / norms, t=t, window=None, on_sphere=True)


def uniform_frame(gen: np.random.Generator, d: int, k: int) -> np.ndarray:
    """Haar-uniform orthonormal k-frame in R^d (rows), via sign-fixed QR."""
    a = gen.standard_normal((d, k))
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


def flat_hit_rate_mean(t: float, k: int, window: ConvexBody) -> float:
    """Mean number of k-flats of an intensity-t isotropic process hitting the window."""
    d = window.dim
    return t * crofton_constant(d, 0, k) * float(window.intrinsic_volumes()[d - k])


def _sample_flats_hitting_ball(gen, t: float, k: int, ball: ConvexBody) -> list:
    """Exact sampler for a ball window: direction Haar on the Grassmannian,
    translation uniform on the projected (d-k)-ball."""
    d = ball.dim
    mean = t * unit_ball_volume(d - k) * ball.radius ** (d - k)
    n = int(gen.poisson(mean))
    if n == 0:
        return []
    m = d - k
    a = gen.standard_normal((n, d, k))
    q, r = np.linalg.qr(a)
    signs = np.sign(np.einsum("nii->ni", r))
    signs[signs == 0] = 1.0
    frames = np.swapaxes(q * signs[:, None, :], 1, 2)
    # right singular vectors beyond rank k span the orthogonal complement
    _, _, vt = np.linalg.svd(frames)
    comps = vt[:, k:, :]
    # z uniform in the (d-k)-ball: uniform direction, radius ~ U^(1/(d-k))
    zdir = gen.standard_normal((n, m))
    norms = np.linalg.norm(zdir, axis=1, keepdims=True)
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        zdir[bad] = gen.standard_normal((int(bad.sum()), m))
        norms = np.linalg.norm(zdir, axis=1, keepdims=True)
    z = zdir / norms * gen.uniform(size=(n, 1)) ** (1.0 / m)
    bases = ball.center + ball.radius * np.einsum("nmd,nm->nd", comps, z)
    return [Flat(base=bases[i], frame=frames[i]) for i in range(n)]


def sample_isotropic_flats(t: float, k: int, window: ConvexBody, stream: SeededStream) -> FlatSample:
    """Isotropic Poisson k-flat process restricted to flats hitting the window.

    Box windows are handled by sampling the process on the circumscribed ball
    (exact there) and thinning by the hit test; the restriction of a Poisson
    process is again Poisson, so the thinned sample has exactly the right law.
    """
    d = window.dim
    if not (1 <= k <= d - 1):
        raise ValueError(f"flat dimension k must satisfy 1 <= k <= d-1, got {k}")
    if t <= 0:
        raise ValueError("intensity t must be positive")
    gen = stream.generator()
    if window.kind == "ball":
        flats = _sample_flats_hitting_ball(gen, t, k, window)
        return FlatSample(flats=flats, k=k, t=t, window=window)
    shell = ConvexBody.ball(window.center, window.circumradius())
    proposals = _sample_flats_hitting_ball(gen, t, k, shell)
    flats = [fl for fl in proposals if flat_hits_body(fl, window)]
    return FlatSample(flats=flats, k=k, t=t, window=window)


def sample_isotropic_hyperplanes(t: float, window: ConvexBody, stream: SeededStream) -> list:
    """Isotropic Poisson hyperplane process restricted to the window, as
    Hyperplane objects.  Same thinning construction as the flat sampler but in
    the (normal, offset) parametrisation, which downstream models consume."""
    d = window.dim
    if d < 2:
        raise ValueError("hyperplanes need d >= 2")
    if t <= 0:
        raise ValueError("intensity t must be positive")
    gen = stream.generator()
    rc = window.circumradius()
    # measure of hyperplanes hitting the circumscribed ball: u uniform
    # (probability), signed offset Lebesgue on an interval of length 2 rc
    n = int(gen.poisson(t * 2.0 * rc))
    raw = gen.standard_normal((n, d))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        raw[bad] = gen.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
    normals = raw / norms
    offsets = normals @ window.center + gen.uniform(-rc, rc, n)
    planes = [Hyperplane(normal=normals[i], offset=float(offsets[i])) for i in range(n)]
    if window.kind == "ball" and abs(rc - window.radius) < 1e-15:
        return planes
    kept = []
    for hp in planes:
        # hyperplane hits a box iff the support interval straddles the offset
        if window.kind == "box":
            half = float(np.abs(hp.normal) @ (window.sides / 2.0))
            mid = float(hp.normal @ window.center)
            if abs(hp.offset - mid) <= half:
                kept.append(hp)
        else:
            if abs(hp.offset - float(hp.normal @ window.center)) <= window.radius:
                kept.append(hp)
    return kept
