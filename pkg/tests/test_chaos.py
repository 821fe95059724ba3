"""Chaos kernels, variance identity, and the Poisson-approximation bound."""

import math

import numpy as np
import pytest

from poisson_extremes.chaos import (
    BoundIngredients,
    UStatSpec,
    dtv_bound,
    empirical_u_counts,
    kernel_h_q,
    rho_t,
    sigma_t,
    variance_u,
)
from poisson_extremes.geometry import ConvexBody
from poisson_extremes.limits import alpha_t
from poisson_extremes.models import ModelSpec
from poisson_extremes.sampling import SeededStream
from poisson_extremes.stats import counts_to_histogram, tv_distance_counts

SEGMENT = ModelSpec(kind="gilbert", d=1, window=ConvexBody.unit_cube(1), delta_expr="1.0")
SQUARE = ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2), delta_expr="1.0")
SPHERE3 = ModelSpec(kind="sphere_polytope", d=3)

U_SEG = UStatSpec(model=SEGMENT, s=0.1)
U_SQ = UStatSpec(model=SQUARE, s=0.1)
U_SPH = UStatSpec(model=SPHERE3, s=0.1)


def test_ustat_spec_validation():
    with pytest.raises(ValueError):
        UStatSpec(model=SEGMENT, s=0.0)
    assert U_SEG.arity == 2


def test_kernel_examples():
    # q = 1 at an interior point: t times the overlap of window and s-ball
    assert kernel_h_q(U_SEG, 1, (np.array([0.5]),), 10.0) == pytest.approx(2.0, rel=1e-13)
    # near the boundary the ball sticks out: only [0, 0.15] remains
    assert kernel_h_q(U_SEG, 1, (np.array([0.05]),), 10.0) == pytest.approx(1.5, rel=1e-13)
    # q = k is the indicator scaled by 1/k!
    close = (np.array([0.3]), np.array([0.35]))
    far = (np.array([0.3]), np.array([0.5]))
    assert kernel_h_q(U_SEG, 2, close, 10.0) == 0.5
    assert kernel_h_q(U_SEG, 2, far, 10.0) == 0.0
    for bad_q in (0, 3):
        with pytest.raises(ValueError):
            kernel_h_q(U_SEG, bad_q, close, 10.0)
    prox = ModelSpec(kind="proximity_flats", d=3, k=1, window=ConvexBody.unit_ball(3))
    with pytest.raises(NotImplementedError):
        kernel_h_q(UStatSpec(model=prox, s=0.1), 1, (None,), 10.0)


def test_sigma_t_matches_alpha_mean():
    # the U-statistic mean is the admissible-tuple mean at x = s t^gamma
    assert sigma_t(U_SEG, 10.0) == pytest.approx(9.5, rel=1e-13)
    for u in (U_SEG, U_SQ):
        x = u.s * 10.0**u.model.gamma
        assert sigma_t(u, 10.0) == alpha_t(u.model, x, 10.0).value
    assert sigma_t(U_SPH, 10.0) == pytest.approx(19.739208802178716, rel=1e-12)
    with pytest.raises(NotImplementedError):
        sigma_t(UStatSpec(model=SQUARE, s=2.0), 10.0)


def test_variance_frozen_values():
    # interval of length 1: sigma_t + t^3 (4 s^2 - 10 s^3 / 3)
    assert variance_u(U_SEG, 10.0) == pytest.approx(46.16666666666667, rel=1e-12)
    assert variance_u(U_SQ, 10.0) == pytest.approx(2.291009171421309, rel=1e-9)
    assert variance_u(U_SPH, 10.0) == pytest.approx(32.14171947429865, rel=1e-12)
    # the second chaos term is nonnegative, so the variance dominates the mean
    for u in (U_SEG, U_SQ, U_SPH):
        assert variance_u(u, 10.0) >= sigma_t(u, 10.0)
    with pytest.raises(NotImplementedError):
        variance_u(UStatSpec(model=SQUARE, s=0.6), 10.0)


def test_rho_examples():
    assert rho_t(U_SEG, 10.0) == pytest.approx(2.0, rel=1e-13)
    assert rho_t(U_SQ, 10.0) == pytest.approx(10.0 * math.pi * 0.01, rel=1e-13)
    assert rho_t(U_SPH, 10.0) == pytest.approx(10.0 * math.pi * 0.01, rel=1e-13)


def test_dtv_bound_examples():
    assert dtv_bound(BoundIngredients(1.0, 0.0, 1.0), 1.0) == 0.0
    assert dtv_bound(BoundIngredients(1.0, 0.0, 1.1), 1.0) == pytest.approx(0.1)
    frozen = (1.0 - math.exp(-1.0)) * 2.0 * math.sqrt(0.010001)
    assert dtv_bound(BoundIngredients(1.0, 0.01, 1.0), 1.0) == pytest.approx(frozen, rel=1e-14)
    with pytest.raises(ValueError):
        dtv_bound(BoundIngredients(1.0, 0.01, 1.0), 0.0)
    with pytest.raises(ValueError):
        dtv_bound(BoundIngredients(0.0, 0.01, 1.0), 1.0)
    with pytest.raises(ValueError):
        BoundIngredients(1.0, -0.1, 1.0)


def test_dtv_bound_monotonicity():
    base = BoundIngredients(2.0, 0.05, 2.0)
    more_dependence = BoundIngredients(2.0, 0.10, 2.0)
    worse_mean = BoundIngredients(2.0, 0.05, 2.5)
    assert dtv_bound(more_dependence, 1.0) > dtv_bound(base, 1.0)
    assert dtv_bound(worse_mean, 1.0) > dtv_bound(base, 1.0)


def _variance_z(counts: np.ndarray, target: float) -> float:
    v = counts.var(ddof=1)
    m4 = float(np.mean((counts - counts.mean()) ** 4))
    se = math.sqrt((m4 - v * v) / counts.size)
    return (v - target) / se


def test_empirical_variance_matches_identity():
    counts = empirical_u_counts(U_SEG, 10.0, 6000, SeededStream(41))
    assert abs(_variance_z(counts, variance_u(U_SEG, 10.0))) <= 3.0
    counts2 = empirical_u_counts(U_SQ, 10.0, 6000, SeededStream(42))
    assert abs(_variance_z(counts2, variance_u(U_SQ, 10.0))) <= 3.0
    # means while we are at it
    for c, u in ((counts, U_SEG), (counts2, U_SQ)):
        se = c.std(ddof=1) / math.sqrt(c.size)
        assert abs(c.mean() - sigma_t(u, 10.0)) <= 3 * se


def test_empirical_tv_within_bound():
    counts = empirical_u_counts(U_SQ, 10.0, 6000, SeededStream(42))
    st = sigma_t(U_SQ, 10.0)
    tv = tv_distance_counts(counts_to_histogram(counts), st)
    bound = dtv_bound(BoundIngredients(st, rho_t(U_SQ, 10.0), st), 10.0)
    assert 0.0 <= tv <= bound
