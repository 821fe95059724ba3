"""End-to-end statistical acceptance checks for the six models.

Every check pins its seeds, sample sizes, and tolerances, so a run is
reproducible bit for bit.  Kolmogorov-Smirnov thresholds are calibrated
as the 99th percentile of the same statistic under the exact limit law
at the same sample size (calibration seed tree 777); fixed bands are
spelled out inline.  Each test prints one summary line, so

    pytest tests/test_acceptance.py -v -s

gives a per-criterion PASS/FAIL table.
"""

import math
import time

import numpy as np
import pytest

from poisson_extremes.chaos import (
    BoundIngredients,
    UStatSpec,
    dtv_bound,
    empirical_u_counts,
    rho_t,
    sigma_t,
    variance_u,
)
from poisson_extremes.geometry import ConvexBody
from poisson_extremes.limits import (
    LimitLaw,
    alpha_t_mc,
    alpha_t_mc_conditional,
    beta_numeric,
    limit_params,
    limit_tail,
    weibull_order_stats,
)
from poisson_extremes.models import ModelSpec, draw_sample, run_model
from poisson_extremes.orderstats import EnumerationStrategy
from poisson_extremes.sampling import SeededStream
from poisson_extremes.stats import (
    calibrate_ks_threshold,
    interval_count_test,
    ks_distance_censored,
    counts_to_histogram,
    tv_distance_counts,
)

SEED = 20260815
CAL_SEED = 777
CAL_REPS = 200

SQUARE = ConvexBody.unit_cube(2)
BALL3 = ConvexBody.unit_ball(3)


def _report(num: int, ok: bool, text: str) -> None:
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}  {text}")
    assert ok, f"criterion {num:02d}: {text}"


def _simulate(spec, t, reps, x_max, m_max, child, keep_all=False):
    stream = SeededStream(SEED).child(child)
    out = np.full((reps, m_max), np.inf)
    clouds = []
    for r in range(reps):
        run = run_model(spec, t, x_max, m_max, stream=stream.child(r))
        out[r] = run.order_stats
        if keep_all:
            clouds.append(run.rescaled)
    return out, clouds


def _calibrated_threshold(law, reps, x_max, child):
    sampler = lambda st: weibull_order_stats(law, 1, x_max, reps, st)[:, 0]
    cdf = lambda x: 1.0 - limit_tail(1, x, law)
    thr = calibrate_ks_threshold(sampler, cdf, CAL_REPS, SeededStream(CAL_SEED).child(child))
    return thr, cdf


@pytest.fixture(scope="module")
def gilbert_state():
    # one 2000-replication run feeds criteria 1, 2, and 8
    spec = ModelSpec(kind="gilbert", d=2, window=SQUARE, delta_expr="t**-0.5")
    law = limit_params(spec)
    t0 = time.time()
    order_stats, clouds = _simulate(spec, 200.0, 2000, 1.2, 3, 1, keep_all=True)
    return spec, law, order_stats, clouds, time.time() - t0


def test_criterion_01_gilbert_smallest_edge_law(gilbert_state):
    spec, law, order_stats, _, sim_s = gilbert_state
    thr, cdf = _calibrated_threshold(law, 2000, 1.2, 1)
    d = ks_distance_censored(order_stats[:, 0], cdf).distance
    _report(1, d <= thr,
            f"smallest rescaled edge vs Weibull(pi/2, 2): D={d:.4f} thr={thr:.4f} sim={sim_s:.0f}s")


def test_criterion_02_gilbert_order_statistic_tails(gilbert_state):
    _, law, order_stats, _, _ = gilbert_state
    worst = 0.0
    for m in (2, 3):
        for x in (0.3, 0.6, 1.0):
            emp = float(np.mean(order_stats[:, m - 1] > x))
            worst = max(worst, abs(emp - limit_tail(m, x, law)))
    _report(2, worst <= 0.03,
            f"2nd/3rd order-statistic tails at x in (0.3, 0.6, 1.0): worst gap {worst:.4f} band 0.03")


def test_criterion_03_sphere_facet_diameter_law():
    spec = ModelSpec(kind="sphere_polytope", d=3)
    law = limit_params(spec)
    order_stats, _ = _simulate(spec, 100.0, 1000, 1.2, 1, 3)
    thr, cdf = _calibrated_threshold(law, 1000, 1.2, 3)
    d = ks_distance_censored(order_stats[:, 0], cdf).distance
    _report(3, d <= thr,
            f"smallest rescaled spherical edge vs Weibull(2 pi^2, 2): D={d:.4f} thr={thr:.4f}")


def test_criterion_04_line_pair_distance_law():
    spec = ModelSpec(kind="proximity_flats", d=3, k=1, window=BALL3)
    law = limit_params(spec)
    order_stats, _ = _simulate(spec, 50.0, 1000, 3.0, 1, 4)
    thr, cdf = _calibrated_threshold(law, 1000, 3.0, 4)
    d = ks_distance_censored(order_stats[:, 0], cdf).distance
    _report(4, d <= thr,
            f"smallest rescaled line-pair distance vs Exp(pi^2/3): D={d:.4f} thr={thr:.4f}")


def test_criterion_05_plane_pair_intersection_law_with_mc_gate():
    spec = ModelSpec(kind="intersecting_flats", d=3, k=2, ell=2, j=1)
    law = limit_params(spec)
    # the mean-count oracle arbitrates the constant before the law test:
    # at t=400 the estimate must sit within 3 SE of pi^2/32 and more than
    # 3 SE away from the rival value pi/64
    est = alpha_t_mc(spec, 1.0, 400.0, 400, SeededStream(SEED).child(50))
    z_ours = abs(est.mean - law.beta) / est.stderr
    z_rival = abs(est.mean - math.pi / 64.0) / est.stderr
    gate = z_ours <= 3.0 and z_rival > 3.0
    assert law.beta == pytest.approx(math.pi**2 / 32.0, rel=1e-12)
    order_stats, _ = _simulate(spec, 60.0, 1000, 4.0, 1, 5)
    thr, cdf = _calibrated_threshold(law, 1000, 4.0, 5)
    d = ks_distance_censored(order_stats[:, 0], cdf).distance
    _report(5, gate and d <= thr,
            f"plane-pair intersection length: gate z(pi^2/32)={z_ours:.2f} z(pi/64)={z_rival:.2f}, "
            f"law D={d:.4f} thr={thr:.4f}")


def test_criterion_06_point_triangle_area_law():
    spec = ModelSpec(kind="point_simplices", d=2, window=SQUARE)
    law = limit_params(spec)
    order_stats, _ = _simulate(spec, 100.0, 1000, 4.0, 1, 6)
    thr, cdf = _calibrated_threshold(law, 1000, 4.0, 6)
    d = ks_distance_censored(order_stats[:, 0], cdf).distance
    _report(6, d <= thr,
            f"smallest rescaled point-triangle area vs Exp(2): D={d:.4f} thr={thr:.4f}")


def test_criterion_07_line_triangle_area_law():
    spec = ModelSpec(kind="hyperplane_simplices", d=2, window=SQUARE)
    one = beta_numeric(spec, 8192, SeededStream(SEED).child(70))
    two = beta_numeric(spec, 8192, SeededStream(15))
    combined = math.hypot(one.stderr, two.stderr)
    gate = (not one.diverged and not two.diverged
            and abs(one.estimate - two.estimate) <= 3.0 * combined)
    law = LimitLaw(6.0, one.estimate, 0.5, "numeric", one.stderr)
    order_stats, _ = _simulate(spec, 40.0, 500, 1000.0, 1, 7)
    cdf = lambda x: 1.0 - limit_tail(1, x, law)
    d = ks_distance_censored(order_stats[:, 0], cdf).distance
    # Fixed tolerance: this family converges slowest of the six. At t=40
    # the minimum's law still sits about 0.04 from its limit (the small
    # triangles arrive in clumps around near-degenerate line triples, so
    # voids are over-represented), which puts the 500-replication KS
    # statistic right at the 0.08 band: independent seeds land on either
    # side of it, and the frozen stream lands above. By t=80 the same
    # statistic is down at the pure-noise level. Reported as measured.
    _report(7, gate and d <= 0.08,
            f"smallest rescaled line-triangle area vs survival "
            f"exp(-{one.estimate:.4f} sqrt(x)): gate z={abs(one.estimate - two.estimate) / combined:.2f}, "
            f"D={d:.4f} fixed thr 0.08")


def test_criterion_08_interval_counts_match_poisson_limit(gilbert_state):
    _, law, _, clouds, _ = gilbert_state
    report = interval_count_test(clouds, [(0.0, 0.4), (0.4, 0.8), (0.8, 1.2)], law)
    z_worst = max(abs(r.mean - r.nu) / r.mean_se for r in report.rows)
    ratios = [r.variance / r.mean for r in report.rows]
    void = max(abs(r.void_empirical - r.void_expected) for r in report.rows)
    multi = max(abs(r.multi_empirical - r.multi_expected) for r in report.rows)
    off_diag = report.correlations[~np.eye(3, dtype=bool)]
    corr = float(np.max(np.abs(off_diag)))
    ok = (z_worst <= 3.0 and min(ratios) >= 0.9 and max(ratios) <= 1.1
          and corr <= 0.05 and void <= 0.03 and multi <= 0.03)
    _report(8, ok,
            f"interval counts: max|z|={z_worst:.2f} var/mean in [{min(ratios):.3f}, {max(ratios):.3f}] "
            f"max|corr|={corr:.4f} void gap {void:.4f} multi gap {multi:.4f}")


def test_criterion_09_mean_count_gap_shrinks_with_t():
    spec = ModelSpec(kind="gilbert", d=2, window=SQUARE, delta_expr="t**-0.5")
    law = limit_params(spec)
    base = SeededStream(SEED).child(9)
    a_lo = alpha_t_mc_conditional(spec, 1.0, 100.0, 20000, base.child(0))
    a_hi = alpha_t_mc_conditional(spec, 1.0, 400.0, 20000, base.child(1))
    gap_lo = abs(a_lo.mean - law.beta)
    gap_hi = abs(a_hi.mean - law.beta)
    ratio = gap_hi / gap_lo
    _report(9, ratio <= 0.75,
            f"mean-count gap at x=1: t=100 gap {gap_lo:.5f}, t=400 gap {gap_hi:.5f}, ratio {ratio:.3f}")


def test_criterion_10_pair_count_variance_identity():
    details = []
    ok = True
    for d, analytic in ((1, 277.0 / 6.0), (2, 2.291009171421309)):
        spec = ModelSpec(kind="gilbert", d=d, window=ConvexBody.unit_cube(d), delta_expr="1e300")
        u = UStatSpec(model=spec, s=0.1)
        value = variance_u(u, 10.0)
        counts = empirical_u_counts(u, 10.0, 5000, SeededStream(SEED).child(10).child(d))
        v_emp = float(np.var(counts, ddof=1))
        m4 = float(np.mean((counts - counts.mean()) ** 4))
        se = math.sqrt((m4 - v_emp**2) / counts.size)
        z = (v_emp - value) / se
        ok = ok and abs(value - analytic) <= 1e-9 and abs(z) <= 3.0
        details.append(f"d={d}: var={value:.6f} (ref {analytic:.6f}) emp z={z:+.2f}")
    _report(10, ok, "pair-count variance: " + "; ".join(details))


def test_criterion_11_poisson_approximation_tightens():
    spec = ModelSpec(kind="gilbert", d=1, window=ConvexBody.unit_cube(1), delta_expr="1e300")
    base = SeededStream(SEED).child(11)
    x = 3.0
    tvs, bounds = [], []
    for i, t in enumerate((10.0, 40.0, 160.0)):
        u = UStatSpec(model=spec, s=x / t**2)
        mean = sigma_t(u, t)
        counts = empirical_u_counts(u, t, 10000, base.child(i))
        tvs.append(tv_distance_counts(counts_to_histogram(counts), mean))
        ingredients = BoundIngredients(sigma_t=mean, rho_t=rho_t(u, t), sigma=mean)
        bounds.append(dtv_bound(ingredients, 10.0))
    ok = tvs[0] > tvs[1] > tvs[2] and all(tv <= b for tv, b in zip(tvs, bounds))
    _report(11, ok,
            "total variation to the Poisson count at t=(10, 40, 160): "
            + ", ".join(f"{tv:.4f}" for tv in tvs)
            + " (bounds " + ", ".join(f"{b:.2f}" for b in bounds) + ")")


def test_criterion_12_numeric_beta_recovers_closed_form():
    spec = ModelSpec(kind="point_simplices", d=2, window=SQUARE)
    est = beta_numeric(spec, 8192, SeededStream(SEED).child(12))
    gap = abs(est.estimate - 2.0)
    ok = not est.diverged and gap <= 3.0 * est.stderr and gap <= 0.02
    _report(12, ok,
            f"numeric triangle-area constant: {est.estimate:.6f} +- {est.stderr:.6f} vs 2.0")


def test_criterion_13_enumeration_engines_agree():
    brute = EnumerationStrategy(kind="brute_force")
    cases = [
        ("gilbert", ModelSpec(kind="gilbert", d=2, window=SQUARE, delta_expr="0.4"),
         (20.0, 120.0), 1.5, True),
        ("sphere", ModelSpec(kind="sphere_polytope", d=3), (2.0, 8.0), 1.5, True),
        ("proximity", ModelSpec(kind="proximity_flats", d=3, k=1, window=BALL3),
         (5.0, 25.0), 3.0, True),
        ("intersecting", ModelSpec(kind="intersecting_flats", d=3, k=2, ell=2, j=1),
         (10.0, 60.0), 4.0, False),
        ("point-simplex", ModelSpec(kind="point_simplices", d=2, window=SQUARE),
         (5.0, 35.0), 5.0, True),
        ("line-simplex", ModelSpec(kind="hyperplane_simplices", d=2, window=SQUARE),
         (5.0, 28.0), 2000.0, False),
    ]
    root = SeededStream(SEED).child(13)
    summary = []
    ok = True
    for idx, (name, spec, (t_lo, t_hi), x_max, want_exact) in enumerate(cases):
        worst = 0.0
        exact = True
        prefix = True
        for r in range(100):
            st = root.child(idx).child(r)
            t = t_lo + (t_hi - t_lo) * st.child(999).generator().random()
            sample = draw_sample(spec, t, st)
            fast = run_model(spec, t, x_max, 5, sample=sample)
            slow = run_model(spec, t, x_max, 5, sample=sample, strategy=brute)
            ok = ok and fast.values.size == slow.values.size
            if fast.values.size != slow.values.size:
                continue
            if not np.array_equal(fast.values, slow.values):
                exact = False
                if fast.values.size:
                    rel = np.max(np.abs(fast.values - slow.values)
                                 / np.maximum(np.abs(slow.values), 1e-300))
                    worst = max(worst, rel)
            rescaled = np.sort(fast.values) * t**spec.gamma
            take = min(5, rescaled.size)
            prefix = prefix and np.array_equal(fast.order_stats[:take], rescaled[:take]) \
                and bool(np.all(np.isinf(fast.order_stats[take:])))
        if want_exact:
            ok = ok and exact and prefix
            summary.append(f"{name} exact" if exact else f"{name} NOT EXACT")
        else:
            # linear solves differ between the pruned and brute routes, so
            # these two families agree to rounding, not bit for bit
            ok = ok and worst <= 1e-9 and prefix
            summary.append(f"{name} rel {worst:.1e}")
        ok = ok and prefix
    _report(13, ok, "fast vs brute-force enumeration on 100 instances each: " + "; ".join(summary))
