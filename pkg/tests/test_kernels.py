"""The numba kernels and the pure-numpy fallbacks must agree."""

import numpy as np
import pytest

from isolines import kernels
from isolines._backend import HAVE_NUMBA
from isolines.marginal import fit_marginal

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture(scope="module")
def backends():
    return kernels.get_kernels("numba"), kernels.get_kernels("numpy")


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_kernels("fortran")


def test_marching_squares_agree(backends, rng):
    jit, ref = backends
    gx = np.linspace(0, 1, 37)
    gy = np.linspace(-1, 2, 29)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    values = np.exp(-X) * np.exp(-(Y + 1)) + 0.01 * rng.random(X.shape)
    for level in (0.05, 0.2, 0.5):
        p1, s1 = jit.marching_squares(values, gx, gy, level)
        p2, s2 = ref.marching_squares(values, gx, gy, level)
        np.testing.assert_array_equal(np.isnan(p1), np.isnan(p2))
        np.testing.assert_allclose(p1, p2, rtol=0, atol=1e-15)
        assert sorted(map(tuple, s1)) == sorted(map(tuple, s2))


def test_marching_squares_crossings_on_level(backends):
    # on a plane x + y the interpolated crossings are exact
    jit, _ = backends
    gx = np.linspace(0, 1, 11)
    gy = np.linspace(0, 1, 11)
    values = -(gx[:, None] + gy[None, :])
    pts, segs = jit.marching_squares(values, gx, gy, -0.73)
    hit = pts[~np.isnan(pts[:, 0])]
    np.testing.assert_allclose(hit.sum(axis=1), 0.73, atol=1e-14)
    assert len(segs) > 0


def test_exceedance_counts_agree(backends, rng):
    jit, ref = backends
    x1 = rng.normal(size=5000)
    x2 = np.round(rng.normal(size=5000), 1)  # ties exercise >=
    px = rng.normal(size=40)
    py = np.round(rng.normal(size=40), 1)
    c1 = jit.exceedance_counts(x1, x2, px, py)
    c2 = ref.exceedance_counts(x1, x2, px, py)
    brute = [np.count_nonzero((x1 >= a) & (x2 >= b)) for a, b in zip(px, py)]
    np.testing.assert_array_equal(c1, brute)
    np.testing.assert_array_equal(c2, brute)


def test_blend_kernels_agree(backends, rng):
    jit, ref = backends
    m = fit_marginal(rng.gumbel(size=3000))
    args = m._params
    x = np.concatenate([np.linspace(m.knots_x[0] - 3, m.knots_x[-1] + 5, 4000), m.knots_x[::7]])
    f1, s1 = jit.blend_eval(x, *args)
    f2, s2 = ref.blend_eval(x, *args)
    np.testing.assert_allclose(f1, f2, rtol=1e-14, atol=1e-300)
    np.testing.assert_allclose(s1, s2, rtol=1e-14, atol=1e-300)

    target = np.linspace(0.01, 0.975, 50)
    use_cdf = np.ones(50, dtype=np.bool_)
    lo, hi = float(m.knots_x[0]), float(m.x_thold_plus)
    r1 = jit.blend_invert(target, use_cdf, lo, hi, *args)
    r2 = ref.blend_invert(target, use_cdf, lo, hi, *args)
    np.testing.assert_allclose(r1, r2, rtol=1e-13)
    np.testing.assert_allclose(m.cdf(r1), target, rtol=1e-9)


def test_shortest_interval_agree(backends):
    from scipy.stats import binom

    jit, ref = backends
    for n, p in [(10, 0.3), (100, 0.01), (250, 0.5), (1000, 0.001)]:
        pmf = binom.pmf(np.arange(n + 1), n, p)
        assert tuple(jit.shortest_interval(pmf, 0.95)) == tuple(ref.shortest_interval(pmf, 0.95))
