"""Hot numeric kernels, each in two flavours.

The ``*_loop`` functions are plain scalar loops written in the numba
nopython subset; under the numba backend they are compiled with ``njit``.
The ``*_np`` functions are vectorised numpy equivalents used when numba is
absent or disabled through ``ISOLINES_PURE_NUMPY``. Both flavours must
agree; ``tests/test_kernels.py`` checks them against each other.

Module-level names (``marching_squares``, ``exceedance_counts``,
``blend_eval``, ``blend_invert``, ``shortest_interval``) dispatch to the
active backend.
"""

from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np

from ._backend import HAVE_NUMBA, USE_NUMBA

# --------------------------------------------------------------------------
# marching squares
# --------------------------------------------------------------------------


def _edge_point(va, vb, level, xa, ya, xb, yb):
    t = (va - level) / (va - vb)
    return xa + t * (xb - xa), ya + t * (yb - ya)


def marching_squares_loop(values, gx, gy, level):
    """Level-set segments of a gridded surface.

    ``values[i, j]`` is the surface at ``(gx[i], gy[j])``. Edges are
    numbered horizontally first (``i * ny + j`` joins ``(i, j)``-``(i+1, j)``)
    then vertically (``H + i * (ny - 1) + j`` joins ``(i, j)``-``(i, j+1)``).

    Returns ``(points, segments)``: crossing coordinates per edge (NaN when
    the edge is not crossed) and an ``(m, 2)`` array of edge-id pairs.
    """
    nx, ny = values.shape
    n_h = (nx - 1) * ny
    n_v = nx * (ny - 1)
    pts = np.full((n_h + n_v, 2), np.nan)
    for i in range(nx - 1):
        for j in range(ny):
            va = values[i, j]
            vb = values[i + 1, j]
            if (va >= level) != (vb >= level):
                px, py = _edge_point(va, vb, level, gx[i], gy[j], gx[i + 1], gy[j])
                pts[i * ny + j, 0] = px
                pts[i * ny + j, 1] = py
    for i in range(nx):
        for j in range(ny - 1):
            va = values[i, j]
            vb = values[i, j + 1]
            if (va >= level) != (vb >= level):
                px, py = _edge_point(va, vb, level, gx[i], gy[j], gx[i], gy[j + 1])
                k = n_h + i * (ny - 1) + j
                pts[k, 0] = px
                pts[k, 1] = py

    segs = np.empty((2 * (nx - 1) * (ny - 1), 2), dtype=np.int64)
    m = 0
    edges = np.empty(4, dtype=np.int64)
    found = np.empty(4, dtype=np.int64)
    for i in range(nx - 1):
        for j in range(ny - 1):
            # order: bottom, right, top, left
            edges[0] = i * ny + j
            edges[1] = n_h + (i + 1) * (ny - 1) + j
            edges[2] = i * ny + j + 1
            edges[3] = n_h + i * (ny - 1) + j
            c = 0
            for e in range(4):
                if not np.isnan(pts[edges[e], 0]):
                    found[c] = edges[e]
                    c += 1
            if c == 2:
                segs[m, 0] = found[0]
                segs[m, 1] = found[1]
                m += 1
            elif c == 4:
                center = 0.25 * (
                    values[i, j] + values[i + 1, j] + values[i, j + 1] + values[i + 1, j + 1]
                )
                if (center >= level) == (values[i, j] >= level):
                    segs[m, 0] = edges[0]
                    segs[m, 1] = edges[1]
                    segs[m + 1, 0] = edges[2]
                    segs[m + 1, 1] = edges[3]
                else:
                    segs[m, 0] = edges[3]
                    segs[m, 1] = edges[0]
                    segs[m + 1, 0] = edges[1]
                    segs[m + 1, 1] = edges[2]
                m += 2
    return pts, segs[:m].copy()


def marching_squares_np(values, gx, gy, level):
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    n_h = (nx - 1) * ny
    high = values >= level

    def crossings(va, vb, ha, hb, xa, ya, xb, yb):
        hit = ha != hb
        with np.errstate(invalid="ignore", divide="ignore"):
            t = (va - level) / (va - vb)
            px = np.where(hit, xa + t * (xb - xa), np.nan)
            py = np.where(hit, ya + t * (yb - ya), np.nan)
        return np.stack([px.ravel(), py.ravel()], axis=1)

    gxx, gyy = np.meshgrid(gx, gy, indexing="ij")
    h_pts = crossings(
        values[:-1, :], values[1:, :], high[:-1, :], high[1:, :],
        gxx[:-1, :], gyy[:-1, :], gxx[1:, :], gyy[1:, :],
    )
    v_pts = crossings(
        values[:, :-1], values[:, 1:], high[:, :-1], high[:, 1:],
        gxx[:, :-1], gyy[:, :-1], gxx[:, 1:], gyy[:, 1:],
    )
    pts = np.concatenate([h_pts, v_pts])

    ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    edges = np.stack(
        [
            ii * ny + jj,
            n_h + (ii + 1) * (ny - 1) + jj,
            ii * ny + jj + 1,
            n_h + ii * (ny - 1) + jj,
        ],
        axis=1,
    )
    crossed = ~np.isnan(pts[edges, 0])
    count = crossed.sum(axis=1)

    two = count == 2
    order = np.argsort(~crossed[two], axis=1, kind="stable")[:, :2]
    seg2 = np.take_along_axis(edges[two], order, axis=1)

    four = count == 4
    e4 = edges[four]
    i4, j4 = ii[four], jj[four]
    center = 0.25 * (
        values[i4, j4] + values[i4 + 1, j4] + values[i4, j4 + 1] + values[i4 + 1, j4 + 1]
    )
    same = (center >= level) == high[i4, j4]
    first = np.where(same[:, None], e4[:, [0, 1]], e4[:, [3, 0]])
    second = np.where(same[:, None], e4[:, [2, 3]], e4[:, [1, 2]])
    segs = np.concatenate([seg2, first, second]).astype(np.int64)
    return pts, segs


# --------------------------------------------------------------------------
# componentwise exceedance counts
# --------------------------------------------------------------------------


def exceedance_counts_loop(x1, x2, px, py):
    """Number of observations with ``x1 >= px[k]`` and ``x2 >= py[k]``."""
    out = np.zeros(px.shape[0], dtype=np.int64)
    for k in range(px.shape[0]):
        a = px[k]
        b = py[k]
        c = 0
        for t in range(x1.shape[0]):
            if x1[t] >= a and x2[t] >= b:
                c += 1
        out[k] = c
    return out


def exceedance_counts_np(x1, x2, px, py, chunk=1 << 22):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    px = np.atleast_1d(np.asarray(px, dtype=float))
    py = np.atleast_1d(np.asarray(py, dtype=float))
    out = np.zeros(px.shape[0], dtype=np.int64)
    step = max(1, chunk // max(1, px.shape[0]))
    for start in range(0, x1.shape[0], step):
        a = x1[start:start + step, None]
        b = x2[start:start + step, None]
        out += ((a >= px[None, :]) & (b >= py[None, :])).sum(axis=0)
    return out


# --------------------------------------------------------------------------
# blended marginal distribution: evaluation and inversion
# --------------------------------------------------------------------------
#
# Parameters shared by both flavours:
#   kx, kp        ECDF knots (strictly increasing) and their probabilities
#   lower_scale   e-folding length of the exponential extension below kx[0]
#   a, b          blend window; the GPD threshold is ``a``
#   s_u           empirical survival at ``a``
#   sigma, xi     GPD scale and shape


def _gpd_sf_scalar(y, sigma, xi):
    if y <= 0.0:
        return 1.0
    if abs(xi) < 1e-12:
        return math.exp(-y / sigma)
    t = xi * y / sigma
    if t <= -1.0:
        return 0.0
    return math.exp(-math.log1p(t) / xi)


def _blend_scalar(x, kx, kp, lower_scale, a, b, s_u, sigma, xi):
    n = kx.shape[0]
    if x < kx[0]:
        f_emp = kp[0] * math.exp((x - kx[0]) / lower_scale)
    elif x >= kx[n - 1]:
        f_emp = kp[n - 1]
    else:
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if kx[mid] <= x:
                lo = mid
            else:
                hi = mid
        f_emp = kp[lo] + (kp[hi] - kp[lo]) * (x - kx[lo]) / (kx[hi] - kx[lo])
    s_emp = 1.0 - f_emp
    if x <= a:
        return f_emp, s_emp
    s_gpd = s_u * _gpd_sf_scalar(x - a, sigma, xi)
    f_gpd = 1.0 - s_gpd
    if x >= b:
        return f_gpd, s_gpd
    w = 0.5 * (math.sin(math.pi * (x - a) / (b - a) - 0.5 * math.pi) + 1.0)
    return (1.0 - w) * f_emp + w * f_gpd, (1.0 - w) * s_emp + w * s_gpd


def blend_eval_loop(x, kx, kp, lower_scale, a, b, s_u, sigma, xi):
    """Blended CDF and survival at each ``x``; returns ``(F, S)``."""
    f = np.empty(x.shape[0])
    s = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        fi, si = _blend_scalar(x[i], kx, kp, lower_scale, a, b, s_u, sigma, xi)
        f[i] = fi
        s[i] = si
    return f, s


def _gpd_sf_np(y, sigma, xi):
    y = np.maximum(y, 0.0)
    if abs(xi) < 1e-12:
        return np.exp(-y / sigma)
    t = xi * y / sigma
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.exp(-np.log1p(t) / xi)
    return np.where(t <= -1.0, 0.0, out)


def blend_eval_np(x, kx, kp, lower_scale, a, b, s_u, sigma, xi):
    x = np.asarray(x, dtype=float)
    f_emp = np.interp(x, kx, kp)
    below = x < kx[0]
    f_emp = np.where(below, kp[0] * np.exp(np.minimum(x - kx[0], 0.0) / lower_scale), f_emp)
    s_emp = 1.0 - f_emp
    s_gpd = s_u * _gpd_sf_np(x - a, sigma, xi)
    f_gpd = 1.0 - s_gpd
    rel = np.clip((x - a) / (b - a), 0.0, 1.0)
    w = 0.5 * (np.sin(np.pi * rel - 0.5 * np.pi) + 1.0)
    w = np.where(x <= a, 0.0, np.where(x >= b, 1.0, w))
    f = np.where(w == 0.0, f_emp, np.where(w == 1.0, f_gpd, (1.0 - w) * f_emp + w * f_gpd))
    s = np.where(w == 0.0, s_emp, np.where(w == 1.0, s_gpd, (1.0 - w) * s_emp + w * s_gpd))
    return f, s


def blend_invert_loop(target, use_cdf, lo, hi, kx, kp, lower_scale, a, b, s_u, sigma, xi):
    """Bisection for ``x`` in ``[lo, hi]`` with ``F(x) = target`` (or ``S(x)``).

    Iterates until the bracket collapses to adjacent floating-point numbers.
    """
    out = np.empty(target.shape[0])
    for i in range(target.shape[0]):
        l = lo
        h = hi
        for _ in range(200):
            mid = 0.5 * (l + h)
            if mid <= l or mid >= h:
                break
            f, s = _blend_scalar(mid, kx, kp, lower_scale, a, b, s_u, sigma, xi)
            if use_cdf[i]:
                below = f < target[i]
            else:
                below = s > target[i]
            if below:
                l = mid
            else:
                h = mid
        out[i] = 0.5 * (l + h)
    return out


def blend_invert_np(target, use_cdf, lo, hi, kx, kp, lower_scale, a, b, s_u, sigma, xi):
    target = np.asarray(target, dtype=float)
    use_cdf = np.asarray(use_cdf, dtype=bool)
    l = np.full(target.shape, float(lo))
    h = np.full(target.shape, float(hi))
    for _ in range(200):
        mid = 0.5 * (l + h)
        active = (mid > l) & (mid < h)
        if not active.any():
            break
        f, s = blend_eval_np(mid, kx, kp, lower_scale, a, b, s_u, sigma, xi)
        below = np.where(use_cdf, f < target, s > target)
        l = np.where(active & below, mid, l)
        h = np.where(active & ~below, mid, h)
    return 0.5 * (l + h)


# --------------------------------------------------------------------------
# shortest interval of a discrete distribution
# --------------------------------------------------------------------------


def shortest_interval_loop(pmf, coverage):
    """Narrowest ``[lo, hi]`` with ``pmf[lo:hi+1].sum() >= coverage``.

    Two-pointer sweep; among equally narrow intervals the lowest wins.
    Returns ``(-1, -1)`` if the total mass falls short.
    """
    n = pmf.shape[0]
    cum = np.empty(n + 1)
    cum[0] = 0.0
    for k in range(n):
        cum[k + 1] = cum[k] + pmf[k]
    best_lo = -1
    best_hi = -1
    best_w = n + 1
    hi = 0
    for lo in range(n):
        if hi < lo:
            hi = lo
        while hi < n and cum[hi + 1] - cum[lo] < coverage:
            hi += 1
        if hi >= n:
            break
        if hi - lo < best_w:
            best_w = hi - lo
            best_lo = lo
            best_hi = hi
    return best_lo, best_hi


def shortest_interval_np(pmf, coverage):
    pmf = np.asarray(pmf, dtype=float)
    n = pmf.shape[0]
    cum = np.concatenate([[0.0], np.cumsum(pmf)])
    lo = np.arange(n)
    base = cum[:-1]
    # first j with cum[j] - cum[lo] >= coverage; searchsorted lands within one
    # slot of it, the loop below settles rounding with the loop's arithmetic
    guess = np.searchsorted(cum, base + coverage, side="left")
    j = np.full(n, n + 1)
    for cand in (guess + 1, guess, guess - 1):
        c = np.clip(cand, 0, n)
        ok = (cand >= lo + 1) & (cand <= n) & (cum[c] - base >= coverage)
        j = np.where(ok, np.minimum(j, cand), j)
    valid = j <= n
    if not valid.any():
        return -1, -1
    width = np.where(valid, j - 1 - lo, n + 1)
    best = int(np.argmin(width))
    return best, int(j[best] - 1)


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

_NAMES = ("marching_squares", "exceedance_counts", "blend_eval", "blend_invert", "shortest_interval")
_cache: dict[str, SimpleNamespace] = {}


def get_kernels(backend: str) -> SimpleNamespace:
    """Return a namespace of kernels for ``"numba"`` or ``"numpy"``."""
    if backend in _cache:
        return _cache[backend]
    if backend == "numpy":
        ns = SimpleNamespace(**{name: globals()[f"{name}_np"] for name in _NAMES})
    elif backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        from numba import njit

        jit = njit(cache=True, nogil=True)
        # scalar helpers are compiled as dependencies of the kernels
        g = globals()
        for helper in ("_edge_point", "_gpd_sf_scalar", "_blend_scalar"):
            if not hasattr(g[helper], "py_func"):
                g[helper] = jit(g[helper])
        ns = SimpleNamespace(**{name: jit(g[f"{name}_loop"]) for name in _NAMES})
    else:
        raise ValueError(f"unknown backend {backend!r}")
    _cache[backend] = ns
    return ns


_active = get_kernels("numba" if USE_NUMBA else "numpy")

marching_squares = _active.marching_squares
exceedance_counts = _active.exceedance_counts
blend_eval = _active.blend_eval
blend_invert = _active.blend_invert
shortest_interval = _active.shortest_interval
