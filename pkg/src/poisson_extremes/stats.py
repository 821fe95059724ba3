"""Empirical verification layer: distribution distances and count checks.

Everything here treats replicated simulation output as data and the
limit law as the reference: Kolmogorov-Smirnov distances of order
statistics against the limit tails, per-interval count statistics of
the rescaled processes against the Poisson intensity, and total
variation between count histograms and Poisson laws.  Thresholds are
calibrated by simulating the exact limit process at matched sample
size, never taken from asymptotic tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .limits import LimitLaw, intensity_measure
from .sampling import SeededStream


@dataclass(frozen=True)
class EcdfReport:
    """KS comparison of a (possibly right-censored) sample against a cdf."""

    n_total: int
    n_used: int
    distance: float

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError("need at least one observation")
        if not 0 <= self.distance <= 1:
            raise ValueError("a KS distance lies in [0, 1]")

    @property
    def n_dropped(self) -> int:
        return self.n_total - self.n_used

    def to_dict(self) -> dict:
        return {"n": self.n_total, "dropped": self.n_dropped, "D": self.distance}


def _ks_from_sorted(xs: np.ndarray, cdf, n_total: int) -> float:
    # Exact sup norm for cadlag cdfs: compare the ecdf's right value
    # against F(x) and its left value against F(x-).  For continuous F
    # the two evaluation points coincide up to one ulp.
    right = np.asarray(cdf(xs), dtype=float)
    left = np.asarray(cdf(np.nextafter(xs, -np.inf)), dtype=float)
    upper = np.arange(1, xs.size + 1) / n_total
    lower = np.arange(0, xs.size) / n_total
    return float(np.max(np.maximum(np.abs(upper - right), np.abs(lower - left))))


def ks_distance(samples, cdf) -> float:
    """sup_x |ecdf - cdf| evaluated at the sample points (both jump sides)."""
    xs = np.sort(np.asarray(samples, dtype=float))
    if xs.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(xs)):
        raise ValueError("non-finite values; use ks_distance_censored")
    return _ks_from_sorted(xs, cdf, xs.size)


def ks_distance_censored(samples, cdf) -> EcdfReport:
    """KS distance when part of the sample is right-censored (stored as inf).

    The ecdf keeps the full sample size in the denominator and the
    supremum runs over the observed points only, so the statistic is
    exactly comparable across simulation and limit-law samples censored
    at the same point.
    """
    xs = np.asarray(samples, dtype=float)
    if xs.size == 0:
        raise ValueError("empty sample")
    finite = np.sort(xs[np.isfinite(xs)])
    if finite.size == 0:
        return EcdfReport(xs.size, 0, 1.0)
    return EcdfReport(xs.size, finite.size, _ks_from_sorted(finite, cdf, xs.size))


def calibrate_ks_threshold(
    sampler, cdf, reps: int, stream: SeededStream, quantile: float = 0.99
) -> float:
    """Null quantile of the censored KS distance under the exact reference law.

    sampler(stream) must return one replication's sample (inf marking
    censored entries) drawn from the reference distribution itself; the
    returned quantile is then an honest finite-sample threshold for the
    same statistic computed on simulation output.
    """
    if reps < 100:
        raise ValueError("calibration needs at least 100 replications")
    dists = np.empty(reps)
    for r in range(reps):
        dists[r] = ks_distance_censored(sampler(stream.child(r)), cdf).distance
    return float(np.quantile(dists, quantile))


@dataclass(frozen=True)
class IntervalCountRow:
    interval: tuple
    nu: float
    mean: float
    mean_se: float
    variance: float
    void_empirical: float
    void_expected: float
    multi_empirical: float
    multi_expected: float

    def to_dict(self) -> dict:
        return {
            "interval": list(self.interval),
            "nu": self.nu,
            "mean": self.mean,
            "mean_se": self.mean_se,
            "variance": self.variance,
            "void_empirical": self.void_empirical,
            "void_expected": self.void_expected,
            "multi_empirical": self.multi_empirical,
            "multi_expected": self.multi_expected,
        }


@dataclass(frozen=True)
class IntervalCountReport:
    reps: int
    rows: list = field(default_factory=list)
    correlations: np.ndarray = None

    def to_dict(self) -> dict:
        return {
            "reps": self.reps,
            "rows": [r.to_dict() for r in self.rows],
            "correlations": np.asarray(self.correlations).tolist(),
        }


def interval_count_test(point_sets, intervals, law: LimitLaw) -> IntervalCountReport:
    """Count statistics of rescaled point sets on disjoint intervals (a, b].

    Per interval: empirical mean, variance, void probability and
    probability of more than one point, next to the Poisson reference
    values under the limit intensity; plus pairwise count correlations,
    which vanish for a Poisson process.
    """
    if len(point_sets) < 100:
        raise ValueError("need at least 100 replications")
    ivs = [(float(a), float(b)) for a, b in intervals]
    for a, b in ivs:
        if not 0 <= a < b:
            raise ValueError("intervals must satisfy 0 <= a < b")
    for i, (a1, b1) in enumerate(ivs):
        for a2, b2 in ivs[i + 1 :]:
            if max(a1, a2) < min(b1, b2):
                raise ValueError("intervals must be disjoint")
    reps = len(point_sets)
    counts = np.empty((reps, len(ivs)), dtype=np.int64)
    for r, pts in enumerate(point_sets):
        pts = np.asarray(pts, dtype=float)
        pts = pts[np.isfinite(pts)]
        for c, (a, b) in enumerate(ivs):
            counts[r, c] = int(np.count_nonzero((pts > a) & (pts <= b)))
    rows = []
    for c, (a, b) in enumerate(ivs):
        nu = intensity_measure(a, b, law)
        col = counts[:, c]
        rows.append(
            IntervalCountRow(
                interval=(a, b),
                nu=nu,
                mean=float(col.mean()),
                mean_se=float(col.std(ddof=1) / math.sqrt(reps)),
                variance=float(col.var(ddof=1)),
                void_empirical=float(np.mean(col == 0)),
                void_expected=math.exp(-nu),
                multi_empirical=float(np.mean(col > 1)),
                multi_expected=1.0 - (1.0 + nu) * math.exp(-nu),
            )
        )
    if len(ivs) > 1 and np.all(counts.std(axis=0) > 0):
        corr = np.corrcoef(counts, rowvar=False)
    else:
        corr = np.eye(len(ivs))
    return IntervalCountReport(reps=reps, rows=rows, correlations=corr)


def tv_distance_counts(histogram, mean: float) -> float:
    """Total variation between a count histogram and the Poisson(mean) law.

    The Poisson mass beyond the histogram support counts in full, so the
    result is exact for the empirical distribution, not truncated.
    """
    h = np.asarray(histogram, dtype=float)
    if h.ndim != 1 or np.any(h < 0):
        raise ValueError("histogram must be a 1-d array of nonnegative counts")
    total = h.sum()
    if total < 1:
        raise ValueError("histogram must contain at least one observation")
    if not mean > 0:
        raise ValueError("mean must be positive")
    support = np.arange(h.size)
    pmf = sps.poisson.pmf(support, mean)
    tail = float(sps.poisson.sf(h.size - 1, mean))
    return float(0.5 * (np.abs(h / total - pmf).sum() + tail))


def counts_to_histogram(counts) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size == 0:
        raise ValueError("no counts")
    return np.bincount(counts)


def mc_mean_stderr(values) -> tuple[float, float]:
    """Sample mean and its standard error."""
    vals = np.asarray(values, dtype=float)
    if vals.size < 2:
        raise ValueError("need at least two values")
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))
