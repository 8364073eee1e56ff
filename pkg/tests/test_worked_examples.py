"""Small closed-form examples, one block per module."""

import math

import numpy as np
import pytest
from scipy import stats

from isolines.diagnose import (
    binomial_interval,
    block_indices,
    diagnostic_report,
    exceedance_count,
    exceedance_counts,
)
from isolines.ingest import BivariateSample, subset_months
from isolines.marginal import fit_gpd, fit_marginal, gpd_cdf, gpd_ppf
from isolines.project import scale_ad, scale_ai, smoothed_exponents
from isolines.surface import Isoline, SurvivalGrid, extract_isoline, nrd_bandwidth, survival_grid
from isolines.synth import SynthModel, brute_survival, generate
from isolines.taildep import chi_curve, hill_estimate


# ---------------------------------------------------------------- ingest

def _daily_year():
    t = np.arange("2021-01-01", "2022-01-01", dtype="datetime64[D]")
    x = np.arange(t.size, dtype=float)
    return BivariateSample(t, x, -x)


def test_autumn_months_of_a_common_year():
    s = subset_months(_daily_year(), {9, 10, 11})
    assert s.n == 30 + 31 + 30
    assert (np.diff(s.x1) > 0).all()


def test_all_months_is_identity():
    s = _daily_year()
    assert subset_months(s, range(1, 13)) is s


# ---------------------------------------------------------------- marginal

def test_gpd_cdf_endpoints():
    for xi in (0.0, 0.3):
        assert gpd_cdf(0.0, 2.0, xi) == 0.0
        assert gpd_cdf(np.inf, 2.0, xi) == 1.0


def test_exponential_case_median():
    sigma = 1.7
    assert gpd_ppf(0.5, sigma, 0.0) == pytest.approx(sigma * math.log(2), rel=1e-14)


def test_fit_gpd_exponential_excesses():
    y = np.random.default_rng(3).standard_exponential(100_000) * 2.0
    fit = fit_gpd(y)
    assert abs(fit.xi) < 0.05
    assert fit.sigma == pytest.approx(2.0, rel=0.03)


def test_uniform_median_probability():
    u = np.random.default_rng(4).uniform(size=10_000)
    mt = fit_marginal(u)
    assert abs(mt.cdf(np.median(u)).item() - 0.5) < 0.02


def test_frechet_unit_values():
    x = np.random.default_rng(6).gumbel(size=2000)
    mt = fit_marginal(x)
    for z, f in ((1.0, math.exp(-1.0)), (2.0, math.exp(-0.5))):
        xz = mt.from_frechet(z).item()
        assert mt.cdf(xz).item() == pytest.approx(f, rel=1e-9)
        assert mt.to_frechet(xz).item() == pytest.approx(z, rel=1e-9)


def test_blend_is_continuous_at_the_threshold():
    x = np.random.default_rng(8).gumbel(size=5000)
    mt = fit_marginal(x)
    eps = 1e-9 * max(1.0, abs(mt.x_thold))
    below, above = mt.cdf(np.array([mt.x_thold - eps, mt.x_thold + eps]))
    assert abs(above - below) < 1e-6


# ---------------------------------------------------------------- surface

def test_bandwidth_reference_numbers():
    # sd 1, IQR exactly 1.34 is not reachable with a real sample, so check
    # the rule's arithmetic at n=1024 directly
    assert 4 * 1.06 * 1.0 * 1024 ** (-0.2) == pytest.approx(1.06, rel=1e-12)


def test_bandwidth_normal_sample():
    x = np.random.default_rng(9).standard_normal(10_000)
    q1, q3 = np.quantile(x, [0.25, 0.75])
    ref = 4.24 * 10_000 ** (-0.2) * min(x.std(ddof=1), (q3 - q1) / 1.34)
    assert nrd_bandwidth(x) == pytest.approx(ref, rel=0.05)


def test_single_point_at_a_node():
    g = np.linspace(-1.0, 1.0, 21)
    grid = survival_grid([0.0], [0.0], (0.5, 0.5), x_coords=g, y_coords=g)
    assert grid.values[10, 10] == pytest.approx(0.25, abs=1e-15)


def test_far_node_is_negligible(rng):
    x1, x2 = rng.standard_normal((2, 500))
    h = (nrd_bandwidth(x1), nrd_bandwidth(x2))
    gx = np.linspace(x1.min(), x1.max() + 10.5 * h[0], 30)
    gy = np.linspace(x2.min(), x2.max() + 10.5 * h[1], 30)
    grid = survival_grid(x1, x2, h, x_coords=gx, y_coords=gy)
    assert grid.values[-1, -1] < 1e-6


def test_analytic_exponential_level_set():
    g = np.linspace(0.0, 4.0, 81)
    values = np.exp(-g[:, None] - g[None, :])
    iso = extract_isoline(SurvivalGrid(g, g, values, (1.0, 1.0)), math.exp(-3.0))
    diag = math.hypot(g[1] - g[0], g[1] - g[0])
    dist = np.abs(iso.x + iso.y - 3.0) / math.sqrt(2.0)
    assert dist.max() < diag


# ---------------------------------------------------------------- taildep

def test_hill_unit_log_ratios():
    n, k = 1000, 20
    z = np.ones(n)
    z[:k] = math.e
    est = hill_estimate(z, 1 - k / n)
    assert est.k_exceed == k
    assert est.eta_hat == 1.0


def test_chi_independent_uniforms():
    u1, u2 = np.random.default_rng(10).uniform(size=(2, 100_000))
    assert chi_curve(u1, u2, [0.9]).chi_hat[0] == pytest.approx(0.1, abs=0.01)


# ---------------------------------------------------------------- project

def _frechet_line(points):
    return Isoline(0.01, np.asarray(points, dtype=float), scale="frechet")


def test_ad_single_point():
    iso = scale_ad(_frechet_line([(2.0, 3.0), (1.0, 4.0)]), 10.0)
    np.testing.assert_array_equal(iso.points[0], [20.0, 30.0])


def test_symmetric_point_exponents():
    ex = smoothed_exponents([3.0, 3.0], 0.4, 1.0)
    assert ex.m1[0] == ex.m2[0] == 0.5
    assert ex.eta1[0] == pytest.approx(0.5 * 0.4 + 0.5, rel=1e-15)


def test_ai_three_point_example():
    iso = scale_ai(_frechet_line([(10.0, 0.0), (5.0, 5.0), (0.0, 10.0)]), 10.0, 0.2, 1e6)
    expected = [(100.0, 0.0), (7.924, 7.924), (0.0, 100.0)]
    np.testing.assert_allclose(iso.points, expected, atol=5e-4)


# ---------------------------------------------------------------- diagnose

def test_exceedance_count_extremes_and_enumeration(rng):
    x1, x2 = rng.standard_normal((2, 300))
    assert exceedance_count(x1, x2, (x1.min() - 1, x2.min() - 1)) == 300
    assert exceedance_count(x1, x2, (x1.max() + 1, x2.max() + 1)) == 0
    assert exceedance_count([1, 2, 3], [1, 3, 2], (2, 2)) == 2


def test_binomial_interval_examples():
    assert binomial_interval(1, 0.01) == (0, 0)
    # the shortest interval has an even number of values, so it sits one
    # step off centre; its mirror image is equally short and the lower wins
    lo, hi = binomial_interval(100, 0.5)
    assert (lo, hi) == (40, 59)
    mass = stats.binom.pmf(np.arange(101), 100, 0.5)
    assert mass[lo:hi + 1].sum() == pytest.approx(mass[100 - hi:100 - lo + 1].sum(), rel=1e-12)
    assert mass[lo + 1:hi + 1].sum() < 0.95


def test_isoline_above_the_data(rng):
    x1, x2 = rng.standard_normal((2, 1000))
    top = max(x1.max(), x2.max()) + 1
    iso = Isoline(0.01, np.column_stack([np.linspace(top + 5, top, 30), np.linspace(top, top + 5, 30)]))
    rep = diagnostic_report(x1, x2, iso)
    assert (rep.counts == 0).all()
    assert rep.interval[0] > 0
    assert (rep.flags == "below").all()


def test_full_length_block_reproduces_sample(rng):
    n = 400
    x1, x2 = rng.standard_normal((2, n))
    s = BivariateSample(np.arange(n), x1, x2)
    idx = block_indices(n, n, starts=[0])
    np.testing.assert_array_equal(idx, np.arange(n))
    rep = s.take(idx, reindex=True)
    a = extract_isoline(survival_grid(s.x1, s.x2, resolution=80), 0.05)
    b = extract_isoline(survival_grid(rep.x1, rep.x2, resolution=80), 0.05)
    np.testing.assert_array_equal(a.points, b.points)


# ---------------------------------------------------------------- synth

def test_independent_chi():
    s = generate(SynthModel("independent_frechet"), 100_000, seed=21)
    assert chi_curve(s.x1, s.x2, [0.95]).chi_hat[0] == pytest.approx(0.05, abs=0.01)


def test_gaussian_zero_correlation_uniform_margins():
    s = generate(SynthModel("gaussian_copula", 0.0, "uniform"), 100_000, seed=22)
    for x in (s.x1, s.x2):
        assert stats.kstest(x, "uniform").statistic < 0.01


@pytest.mark.slow
def test_logistic_chi_large_sample():
    s = generate(SynthModel("bivariate_logistic", 0.5), 1_000_000, seed=23)
    chi = chi_curve(s.x1, s.x2, [0.99]).chi_hat[0]
    assert abs(chi - (2 - math.sqrt(2))) < 0.05


def test_brute_survival_matches_exceedance_count(rng):
    x1, x2 = rng.standard_normal((2, 2000))
    assert brute_survival(x1, x2, (x1.min() - 1, x2.min() - 1)) == 1.0
    assert brute_survival(x1, x2, (x1.max() + 1, x2.max() + 1)) == 0.0
    probes = np.vstack([rng.uniform(-3, 3, (900, 2)), np.column_stack([x1, x2])[:100]])
    counts = exceedance_counts(x1, x2, probes)
    for p, c in zip(probes, counts):
        assert brute_survival(x1, x2, p) == c / x1.size
