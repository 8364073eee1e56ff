import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isolines.errors import ProjectError
from isolines.marginal import fit_marginals
from isolines.project import (
    ProjectionConfig,
    isoline_from_frechet,
    isoline_to_frechet,
    project_pipeline,
    scale_ad,
    scale_ai,
    smoothed_exponents,
)
from isolines.surface import Isoline, extract_isoline, has_negative_slopes, survival_grid


@st.composite
def frechet_polylines(draw, min_size=2, max_size=40):
    m = draw(st.integers(min_size, max_size))
    steps = st.floats(1e-6, 5.0, allow_nan=False)
    dx = np.array(draw(st.lists(steps, min_size=m - 1, max_size=m - 1)))
    dy = np.array(draw(st.lists(steps, min_size=m - 1, max_size=m - 1)))
    x0 = draw(st.floats(1e-3, 50.0))
    y0 = draw(st.floats(1e-3, 50.0))
    x = x0 + np.r_[0.0, np.cumsum(dx)][::-1]
    y = y0 + np.r_[0.0, np.cumsum(dy)]
    return Isoline(0.01, np.column_stack([x, y]), "frechet")


@settings(max_examples=300, deadline=None)
@given(frechet_polylines(), st.floats(1.0 + 1e-6, 1e5), st.floats(0.01, 1.0), st.floats(1e-2, 1e6))
def test_ai_projection_keeps_negative_slopes(iso, s, eta, beta):
    out = scale_ai(iso, s, eta, beta)
    assert has_negative_slopes(out.points)
    assert out.level == pytest.approx(iso.level / s)


@settings(max_examples=100, deadline=None)
@given(frechet_polylines(), st.floats(1.0 + 1e-6, 1e5), st.floats(1e-2, 1e6))
def test_ai_collapses_to_ad_at_eta_one(iso, s, beta):
    np.testing.assert_array_equal(scale_ai(iso, s, 1.0, beta).points, scale_ad(iso, s).points)


@settings(max_examples=100, deadline=None)
@given(frechet_polylines(), st.floats(1.0 + 1e-6, 1e5), st.floats(0.01, 1.0), st.floats(1e-2, 1e6))
def test_ai_between_eta_and_one(iso, s, eta, beta):
    # each coordinate is scaled by a factor in [s**eta, s]
    out = scale_ai(iso, s, eta, beta)
    ratio = out.points / iso.points
    assert (ratio <= s * (1 + 1e-12)).all()
    assert (ratio >= s**eta * (1 - 1e-12)).all()


def test_ad_exact():
    pts = np.column_stack([np.linspace(9, 1, 30), np.geomspace(0.5, 20, 30)])
    iso = Isoline(0.01, pts, "frechet")
    out = scale_ad(iso, 7.3)
    np.testing.assert_array_equal(out.points, pts * 7.3)
    assert out.level == 0.01 / 7.3
    assert out.provenance == "projected_ad"
    twice = scale_ad(scale_ad(iso, 4.0), 0.5 * 5)
    np.testing.assert_array_equal(twice.points, pts * 10.0)


def test_axis_points_map_exactly():
    pts = np.array([[5.0, 0.0], [2.0, 1.0], [0.0, 3.0]])
    iso = Isoline(0.01, pts, "frechet")
    for beta in (0.5, 1.0, 200.0, 1e6):
        out = scale_ai(iso, 10.0, 0.3, beta)
        assert tuple(out.points[0]) == (50.0, 0.0)
        assert tuple(out.points[-1]) == (0.0, 30.0)


def test_smoothed_exponents_formula():
    z = np.array([[1.0, 3.0], [2.0, 2.0], [9.0, 1.0]])
    ex = smoothed_exponents(z, 0.4, 3.0)
    r = z / z.sum(axis=1, keepdims=True)
    m = 1 - r**3.0
    np.testing.assert_allclose(ex.m1, m[:, 0])
    np.testing.assert_allclose(ex.eta1, m[:, 0] * 0.4 + (1 - m[:, 0]), rtol=1e-15)
    np.testing.assert_allclose(ex.eta2, m[:, 1] * 0.4 + (1 - m[:, 1]), rtol=1e-15)
    with pytest.raises(ProjectError):
        smoothed_exponents([[0.0, 0.0]], 0.4, 3.0)
    with pytest.raises(ProjectError):
        smoothed_exponents([[1.0, 1.0]], 0.4, 0.0)


def test_projection_validation():
    iso = Isoline(0.01, [[2.0, 1.0], [1.0, 2.0]], "frechet")
    with pytest.raises(ProjectError):
        scale_ad(iso, 1.0)
    with pytest.raises(ProjectError):
        scale_ai(iso, 2.0, 1.5, 10)
    with pytest.raises(ProjectError):
        scale_ad(Isoline(0.01, [[2.0, 1.0], [1.0, 2.0]]), 2.0)
    with pytest.raises(ProjectError):
        ProjectionConfig(0.01, (0.02,))
    with pytest.raises(ProjectError):
        ProjectionConfig(0.01, (0.001,), mode="ai")
    with pytest.raises(ProjectError):
        ProjectionConfig(0.01, (0.001,), mode="xx")
    assert ProjectionConfig(0.01, [0.01, 0.001]).p_proj == (0.01, 0.001)


@pytest.fixture(scope="module")
def base_and_margins(logistic_gumbel):
    s = logistic_gumbel
    margins = fit_marginals(s)
    base = extract_isoline(survival_grid(s.x1, s.x2, resolution=150), 0.01)
    return base, margins


def test_pipeline_ladder(base_and_margins):
    base, margins = base_and_margins
    lines = project_pipeline(base, margins, ProjectionConfig(0.01, (0.01, 0.001, 0.0001)))
    assert [l.level for l in lines] == [0.01, 0.001, 0.0001]
    np.testing.assert_allclose(lines[0].points, base.points, rtol=1e-9, atol=1e-9)
    assert lines[0].provenance == "base_nonparametric"
    # AD: the Fréchet-scale lines are exact multiples of the base
    zb = isoline_to_frechet(base, margins)
    z1 = isoline_to_frechet(lines[1], margins)
    np.testing.assert_allclose(z1.points, 10 * zb.points, rtol=1e-7)
    # nested: smaller levels lie further out in both coordinates
    for lo, hi in zip(lines[:-1], lines[1:]):
        assert (hi.x > lo.x).all() and (hi.y > lo.y).all()


def test_pipeline_ai(base_and_margins):
    base, margins = base_and_margins
    ad, = project_pipeline(base, margins, ProjectionConfig(0.01, (0.001,)))
    ai, = project_pipeline(base, margins, ProjectionConfig(0.01, (0.001,), "ai", 200.0, 0.6))
    assert ai.provenance == "projected_ai"
    zb = isoline_to_frechet(base, margins).points
    za = isoline_to_frechet(ai, margins).points
    assert ((za / zb) <= 10 * (1 + 1e-7)).all()
    assert (ai.x <= ad.x + 1e-9).all()


class _ClippingMargin:
    """Stand-in margin with an endpoint at z > 100."""

    def from_frechet(self, z, return_clipped=False):
        z = np.asarray(z, dtype=float)
        clipped = z > 100
        x = np.minimum(z, 100.0)
        return (x, clipped) if return_clipped else x


def test_from_frechet_drops_beyond_endpoint():
    pts = np.array([[300.0, 1.0], [150.0, 2.0], [50.0, 3.0], [10.0, 4.0]])
    iso = Isoline(0.001, pts, "frechet", "projected_ad", (False, False))
    out = isoline_from_frechet(iso, (_ClippingMargin(), _ClippingMargin()))
    np.testing.assert_array_equal(out.points, pts[2:])
    assert out.clipped == (True, False)
    assert out.meta["dropped_beyond_endpoint"] == 2
    bad = Isoline(0.001, pts[:3], "frechet", "projected_ad")
    with pytest.raises(ProjectError) as e:
        isoline_from_frechet(bad, (_ClippingMargin(), _ClippingMargin()))
    assert e.value.code == "project.beyond_support"


def test_to_frechet_drops_vertices_past_finite_endpoint(gaussian_uniform):
    s = gaussian_uniform
    margins = fit_marginals(s)
    assert np.isfinite(margins[0].upper_endpoint)
    base = extract_isoline(survival_grid(s.x1, s.x2, resolution=120), 0.01)
    assert base.x.max() > margins[0].upper_endpoint  # the smoother leaks past the support
    z = isoline_to_frechet(base, margins)
    assert np.isfinite(z.points).all() and z.clipped[0]
    assert z.meta["dropped_beyond_endpoint"] >= 1
