import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cvfscreen.stats import (AnovaError, anova_oneway, betainc_reg, f_cdf, f_sf, select_features)


def f_density(t, d1, d2):
    if t <= 0:
        return 0.0
    logc = (math.lgamma((d1 + d2) / 2) - math.lgamma(d1 / 2) - math.lgamma(d2 / 2)
            + (d1 / 2) * math.log(d1 / d2))
    return math.exp(logc + (d1 / 2 - 1) * math.log(t) - ((d1 + d2) / 2) * math.log1p(d1 * t / d2))


def cdf_by_quadrature(x, d1, d2):
    # substitute t = u^2 to remove the integrable singularity at 0 when d1 = 1
    val, _ = integrate.quad(lambda u: 2 * u * f_density(u * u, d1, d2), 0, math.sqrt(x),
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


GRID_X = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


@pytest.mark.parametrize("d1", range(1, 11))
def test_f_cdf_matches_quadrature(d1):
    for d2 in range(1, 11):
        for x in GRID_X:
            assert abs(f_cdf(x, d1, d2) - cdf_by_quadrature(x, d1, d2)) <= 1e-6, (x, d1, d2)


@pytest.mark.parametrize("d", range(1, 11))
def test_f_cdf_median_at_one(d):
    assert abs(f_cdf(1.0, d, d) - 0.5) <= 1e-10


def test_f_cdf_limits_and_reference_point():
    assert f_cdf(0.0, 3, 5) == 0.0
    assert f_cdf(1e12, 3, 5) == pytest.approx(1.0, abs=1e-9)
    assert abs(f_cdf(1.5, 1, 4) - cdf_by_quadrature(1.5, 1, 4)) <= 1e-6
    assert f_cdf(1.5, 1, 4) == pytest.approx(0.7120, abs=5e-4)


def test_upper_tail_is_accurate_far_out():
    x, d1, d2 = 200.0, 2, 50
    ref, _ = integrate.quad(lambda t: f_density(t, d1, d2), x, np.inf, epsabs=0, epsrel=1e-10)
    assert f_sf(x, d1, d2) == pytest.approx(ref, rel=1e-6)
    assert f_sf(x, d1, d2) + f_cdf(x, d1, d2) == pytest.approx(1.0, abs=1e-12)


def test_betainc_symmetry():
    for a, b, x in ((0.5, 2.0, 0.3), (3.0, 7.0, 0.8), (10.0, 1.5, 0.05)):
        assert betainc_reg(a, b, x) + betainc_reg(b, a, 1 - x) == pytest.approx(1.0, abs=1e-12)
    assert betainc_reg(2, 3, 0.0) == 0.0 and betainc_reg(2, 3, 1.0) == 1.0


def test_hand_decomposition():
    r = anova_oneway([[1, 2, 3], [2, 3, 4]])
    assert r.ssb == 1.5 and r.ssw == 4.0
    assert r.F == 1.5 and (r.d1, r.d2) == (1, 4)
    # F(1, 4) = t(4)^2: two-sided t tail at sqrt(1.5), closed form for 4 dof
    t = math.sqrt(1.5)
    p_t = 1 - (t * (t * t + 6)) / (t * t + 4) ** 1.5
    assert r.p == pytest.approx(p_t, abs=1e-12)
    assert abs(r.p - 0.288) < 1e-3


def test_identical_groups():
    r = anova_oneway([[1, 2, 3], [1, 2, 3]])
    assert r.F == 0.0 and r.p == 1.0


def test_perfect_separation():
    r = anova_oneway([[0, 0, 0, 0], [1, 1, 1, 1]])
    assert r.p == 0.0 and r.F == math.inf


def test_anova_errors():
    with pytest.raises(AnovaError):
        anova_oneway([[1, 2, 3]])
    with pytest.raises(AnovaError):
        anova_oneway([[1], [2, 3]])
    with pytest.raises(AnovaError):
        anova_oneway([[1, np.nan], [2, 3]])


def test_unbalanced_groups_match_scipy():
    from scipy.stats import f_oneway
    rng = np.random.default_rng(4)
    g = [rng.normal(0, 1, 7), rng.normal(0.5, 1, 13), rng.normal(1, 2, 4)]
    ref = f_oneway(*g)
    r = anova_oneway(g)
    assert r.F == pytest.approx(ref.statistic, rel=1e-10)
    assert r.p == pytest.approx(ref.pvalue, rel=1e-8)


def test_constant_column_never_retained():
    X = np.column_stack([np.full(20, 3.0), np.r_[np.zeros(10), np.ones(10)]])
    sel = select_features(X, ["CR"] * 10 + ["MCI"] * 10)
    assert sel.results[0].F == 0.0 and sel.results[0].p == 1.0
    assert sel.retained == (1,)


def test_noise_retention_rate():
    rng = np.random.default_rng(2718)
    labels = ["CR"] * 40 + ["MCI"] * 40
    kept_signal, kept_noise, total_noise = 0, 0, 0
    for _ in range(200):
        a = np.r_[rng.normal(0, 0.5, 40), rng.normal(1, 0.5, 40)]
        noise = rng.standard_normal((80, 40))
        sel = select_features(np.column_stack([a, noise]), labels, 0.05)
        kept = set(sel.retained)
        kept_signal += 0 in kept
        kept_noise += len(kept - {0})
        total_noise += 40
    assert kept_signal == 200
    assert abs(kept_noise / total_noise - 0.05) <= 0.03


def test_all_noise_reduces_over_90_percent():
    rng = np.random.default_rng(8)
    sel = select_features(rng.standard_normal((100, 80)), ["CR"] * 50 + ["MCI"] * 50)
    assert 100 * (80 - len(sel.retained)) / 80 > 90


def test_alpha_bounds_and_strictness():
    X = np.array([[1.0], [2], [3], [2], [3], [4]])
    y = ["a"] * 3 + ["b"] * 3
    with pytest.raises(ValueError):
        select_features(X, y, 1.0)
    p = select_features(X, y, 0.5).results[0].p
    assert select_features(X, y, p).retained == ()
    assert select_features(X, y, np.nextafter(p, 1)).retained == (0,)


def test_table_sorted_by_p():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((30, 5))
    X[:15, 2] += 3
    sel = select_features(X, ["CR"] * 15 + ["MCI"] * 15, 0.05, [f"f{i}" for i in range(5)])
    lines = sel.to_table().splitlines()
    assert lines[0] == "feature_name\tF\tp\tretained"
    assert lines[1].startswith("f2\t") and lines[1].endswith("yes")
    ps = [float(l.split("\t")[2]) for l in lines[1:]]
    assert ps == sorted(ps)


@settings(max_examples=40, deadline=None)
@given(st.floats(-100, 100).filter(lambda a: abs(a) > 1e-2), st.floats(-1e3, 1e3),
       st.integers(0, 10_000))
def test_affine_invariance(a, b, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((30, 6))
    X[:12, :2] += 1.0
    y = ["CR"] * 12 + ["MCI"] * 18
    s1 = select_features(X, y)
    s2 = select_features(a * X + b, y)
    for r1, r2 in zip(s1.results, s2.results):
        assert r2.F == pytest.approx(r1.F, rel=1e-6)
    assert s1.retained == s2.retained or any(
        abs(r.p - 0.05) < 1e-6 for r in s1.results)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_row_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((25, 5))
    y = np.array(["CR"] * 10 + ["MCI"] * 15)
    perm = rng.permutation(25)
    s1, s2 = select_features(X, y), select_features(X[perm], y[perm])
    assert s1.retained == s2.retained
    assert [r.F for r in s1.results] == [r.F for r in s2.results]
    assert [r.p for r in s1.results] == [r.p for r in s2.results]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(1, 30), st.floats(0.01, 50), st.floats(0.01, 50))
def test_p_decreases_with_f(d1, d2, x1, x2):
    lo, hi = sorted((x1, x2))
    assert f_sf(hi, d1, d2) <= f_sf(lo, d1, d2) + 1e-15
