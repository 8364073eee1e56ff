"""Univariate margins: interpolated ECDF spliced into a generalized Pareto tail.

The blended distribution function moves from the ECDF to the GPD tail over
a window ``[x_thold, x_thold_plus]`` with a half-period sine weight. Its
unit-Fréchet transform ``z = -1 / log F(x)`` puts both coordinates on a
common heavy-tailed scale.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import MarginalError
from .ingest import BivariateSample

log = logging.getLogger(__name__)

XI_BOUNDS = (-0.9, 1.0)
MIN_EXCEED = 10
CHECK_POINTS = 10_000


# --------------------------------------------------------------------------
# generalized Pareto distribution
# --------------------------------------------------------------------------


def gpd_sf(y, sigma: float, xi: float) -> np.ndarray:
    """Survival function of the GPD for excesses ``y``."""
    y = np.maximum(np.asarray(y, dtype=float), 0.0)
    if abs(xi) < 1e-12:
        return np.exp(-y / sigma)
    t = xi * y / sigma
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.exp(-np.log1p(t) / xi)
    return np.where(t <= -1.0, 0.0, out)


def gpd_cdf(y, sigma: float, xi: float) -> np.ndarray:
    return 1.0 - gpd_sf(y, sigma, xi)


def gpd_isf(s, sigma: float, xi: float) -> np.ndarray:
    """Excess with survival probability ``s``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        log_s = np.log(s)
    if abs(xi) < 1e-12:
        return -sigma * log_s
    return sigma * np.expm1(-xi * log_s) / xi


def gpd_ppf(q, sigma: float, xi: float) -> np.ndarray:
    return gpd_isf(1.0 - np.asarray(q, dtype=float), sigma, xi)


def gpd_neg_log_lik(sigma: float, xi: float, y: np.ndarray) -> float:
    if sigma <= 0:
        return math.inf
    n = y.size
    if abs(xi) < 1e-12:
        return n * math.log(sigma) + float(y.sum()) / sigma
    t = xi * y / sigma
    if t.min() <= -1.0:
        return math.inf
    return n * math.log(sigma) + (1.0 + 1.0 / xi) * float(np.log1p(t).sum())


def _pwm(y: np.ndarray) -> tuple[float, float]:
    """Probability-weighted-moment estimates (Hosking & Wallis plotting positions)."""
    ys = np.sort(y)
    n = ys.size
    p = (np.arange(1, n + 1) - 0.35) / n
    a0 = ys.mean()
    a1 = float(np.mean((1.0 - p) * ys))
    k = a0 / (a0 - 2.0 * a1) - 2.0
    sigma = 2.0 * a0 * a1 / (a0 - 2.0 * a1)
    return sigma, -k


@dataclass(frozen=True)
class GpdFit:
    threshold: float
    sigma: float
    xi: float
    n_exceed: int
    neg_log_lik: float
    method: str = "mle"
    at_bound: bool = False

    @property
    def upper_endpoint(self) -> float:
        if self.xi < 0:
            return self.threshold - self.sigma / self.xi
        return math.inf


def fit_gpd(
    excesses,
    threshold: float = 0.0,
    *,
    min_exceed: int = MIN_EXCEED,
    xi_bounds: tuple[float, float] = XI_BOUNDS,
) -> GpdFit:
    """Maximum-likelihood GPD fit to positive excesses over ``threshold``.

    Searches ``(log sigma, xi)`` with ``xi`` boxed to ``xi_bounds``, started
    from probability-weighted moments. If the optimiser fails, the PWM
    estimate is used instead and ``method`` records ``"pwm"``.
    """
    y = np.asarray(excesses, dtype=float)
    if y.size < min_exceed:
        raise MarginalError("too_few_exceedances", f"need at least {min_exceed} exceedances, got {y.size}")
    if not (np.isfinite(y).all() and (y > 0).all()):
        raise MarginalError("bad_excesses", "excesses must be finite and strictly positive")
    lo, hi = xi_bounds

    s0, xi0 = _pwm(y)
    if not (np.isfinite(s0) and s0 > 0):
        s0, xi0 = float(y.mean()), 0.0
    xi0 = float(np.clip(xi0, lo + 1e-3, hi - 1e-3))
    if xi0 < 0:
        s0 = max(s0, -xi0 * y.max() * 1.01)

    def objective(theta):
        return gpd_neg_log_lik(math.exp(theta[0]), theta[1], y)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            objective,
            x0=[math.log(s0), xi0],
            method="Nelder-Mead",
            bounds=[(None, None), (lo, hi)],
            options={"xatol": 1e-9, "fatol": 1e-10, "maxiter": 5000},
        )
    if res.success and np.isfinite(res.fun):
        sigma, xi = math.exp(res.x[0]), float(res.x[1])
        method = "mle"
    else:
        log.warning("GPD likelihood search did not converge (%s); using PWM", res.message)
        sigma, xi = _pwm(y)
        method = "pwm"
        if not (np.isfinite(sigma) and sigma > 0) or (xi < 0 and sigma <= -xi * y.max()):
            raise MarginalError(
                "gpd_nonconvergence",
                f"GPD fit failed: optimiser said {res.message!r} and the PWM fallback is invalid",
            )
        xi = float(np.clip(xi, lo, hi))
    at_bound = min(abs(xi - lo), abs(xi - hi)) < 1e-4
    return GpdFit(
        threshold=float(threshold),
        sigma=float(sigma),
        xi=float(xi),
        n_exceed=int(y.size),
        neg_log_lik=float(gpd_neg_log_lik(sigma, xi, y)),
        method=method,
        at_bound=bool(at_bound),
    )


# --------------------------------------------------------------------------
# blended margin
# --------------------------------------------------------------------------


def blend_weight(x, x_thold: float, x_thold_plus: float) -> np.ndarray:
    """Sine ramp: 0 at or below ``x_thold``, 1 at or above ``x_thold_plus``."""
    x = np.asarray(x, dtype=float)
    rel = np.clip((x - x_thold) / (x_thold_plus - x_thold), 0.0, 1.0)
    return 0.5 * (np.sin(np.pi * rel - 0.5 * np.pi) + 1.0)


@dataclass(frozen=True, eq=False)
class MarginalTransform:
    """Fitted blended margin for one coordinate.

    Below the smallest observation the ECDF is continued by
    ``F(x) = F(x_min) * exp((x - x_min) / lower_scale)`` so the transform
    stays strictly increasing (and invertible) on the whole real line.
    """

    knots_x: np.ndarray
    knots_p: np.ndarray
    gpd: GpdFit
    x_thold: float
    x_thold_plus: float
    n: int
    lower_scale: float
    q_thold: float = 0.97
    q_thold_plus: float = 0.98
    monotone_verified: bool = False
    label: str = ""
    s_u: float = field(init=False)

    def __post_init__(self):
        kx = np.asarray(self.knots_x, dtype=float)
        kp = np.asarray(self.knots_p, dtype=float)
        for name, arr in (("knots_x", kx), ("knots_p", kp)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.x_thold < self.x_thold_plus:
            raise MarginalError("window", "x_thold must be below x_thold_plus")
        s_u = 1.0 - float(np.interp(self.x_thold, kx, kp))
        object.__setattr__(self, "s_u", s_u)

    @property
    def _params(self):
        g = self.gpd
        return (self.knots_x, self.knots_p, self.lower_scale, self.x_thold,
                self.x_thold_plus, self.s_u, g.sigma, g.xi)

    @property
    def upper_endpoint(self) -> float:
        return self.gpd.upper_endpoint

    def cdf_sf(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Blended CDF and survival, each computed without cancellation."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return kernels.blend_eval(np.ascontiguousarray(x), *self._params)

    def cdf(self, x) -> np.ndarray:
        return self.cdf_sf(x)[0]

    def sf(self, x) -> np.ndarray:
        return self.cdf_sf(x)[1]

    def empirical_cdf(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.knots_x, self.knots_p)

    def gpd_tail_cdf(self, x) -> np.ndarray:
        """GPD conditional tail above ``x_thold``, levelled to the ECDF there."""
        y = np.asarray(x, dtype=float) - self.x_thold
        return 1.0 - self.s_u * gpd_sf(y, self.gpd.sigma, self.gpd.xi)

    def log_cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        f, s = self.cdf_sf(x)
        with np.errstate(divide="ignore"):
            out = np.where(f < 0.5, np.log(f), np.log1p(-s))
        # exact below the data, where F itself underflows
        below = x < self.knots_x[0]
        out[below] = math.log(self.knots_p[0]) + (x[below] - self.knots_x[0]) / self.lower_scale
        return out

    def to_frechet(self, x) -> np.ndarray:
        """``z = -1 / log F(x)``."""
        with np.errstate(divide="ignore"):
            return -1.0 / self.log_cdf(x)

    def from_frechet(self, z, *, return_clipped: bool = False):
        """Inverse of :meth:`to_frechet`.

        Targets beyond a finite upper endpoint (``xi < 0``) are clipped to the
        endpoint; ``return_clipped=True`` also returns the clip mask.
        """
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if not (z > 0).all():
            raise MarginalError("domain", "from_frechet needs strictly positive z")
        log_f = -1.0 / z
        use_cdf = log_f < math.log(0.5)
        target = np.where(use_cdf, np.exp(log_f), -np.expm1(log_f))

        kx, kp = self.knots_x, self.knots_p
        g = self.gpd
        x = np.empty_like(z)
        clipped = np.zeros(z.shape, dtype=bool)

        low = use_cdf & (log_f <= math.log(kp[0]))
        x[low] = kx[0] + self.lower_scale * (log_f[low] - math.log(kp[0]))

        s_b = self.s_u * float(gpd_sf(self.x_thold_plus - self.x_thold, g.sigma, g.xi))
        high = ~use_cdf & (target <= s_b)
        if high.any():
            rel = target[high] / self.s_u
            xh = self.x_thold + gpd_isf(rel, g.sigma, g.xi)
            bad = ~np.isfinite(xh) | (xh > self.upper_endpoint)
            if bad.any():
                clipped_idx = np.flatnonzero(high)[bad]
                clipped[clipped_idx] = True
                xh = np.where(bad, self.upper_endpoint, xh)
            x[high] = xh

        mid = ~low & ~high
        if mid.any():
            x[mid] = kernels.blend_invert(
                np.ascontiguousarray(target[mid]),
                np.ascontiguousarray(use_cdf[mid]),
                float(kx[0]),
                float(self.x_thold_plus),
                *self._params,
            )
        if clipped.any():
            log.warning("%d Fréchet values lie beyond the fitted upper endpoint; clipped", clipped.sum())
        return (x, clipped) if return_clipped else x

    def check_grid(self, points: int = CHECK_POINTS) -> np.ndarray:
        """``points`` equally spaced values from the data minimum to
        ``max(data max, 1 - 1e-6 quantile)``."""
        g = self.gpd
        rel = 1e-6 / self.s_u
        top = self.x_thold + float(gpd_isf(rel, g.sigma, g.xi)) if rel < 1 else self.knots_x[-1]
        top = max(float(self.knots_x[-1]), top)
        if np.isfinite(self.upper_endpoint):
            top = min(top, self.upper_endpoint)
        return np.linspace(self.knots_x[0], top, points)

    def verify_monotone(self, points: int = CHECK_POINTS) -> bool:
        f, s = self.cdf_sf(self.check_grid(points))
        return bool((np.diff(f) >= 0).all() and (np.diff(s) < 0).all())

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "knots_x": self.knots_x.tolist(),
            "knots_p": self.knots_p.tolist(),
            "lower_scale": self.lower_scale,
            "x_thold": self.x_thold,
            "x_thold_plus": self.x_thold_plus,
            "q_thold": self.q_thold,
            "q_thold_plus": self.q_thold_plus,
            "gpd": asdict(self.gpd),
            "monotone_verified": self.monotone_verified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalTransform":
        return cls(
            knots_x=np.asarray(d["knots_x"], dtype=float),
            knots_p=np.asarray(d["knots_p"], dtype=float),
            gpd=GpdFit(**d["gpd"]),
            x_thold=float(d["x_thold"]),
            x_thold_plus=float(d["x_thold_plus"]),
            n=int(d["n"]),
            lower_scale=float(d["lower_scale"]),
            q_thold=float(d.get("q_thold", 0.97)),
            q_thold_plus=float(d.get("q_thold_plus", 0.98)),
            monotone_verified=bool(d.get("monotone_verified", False)),
            label=d.get("label", ""),
        )


def fit_marginal(
    values,
    q_thold: float = 0.97,
    q_thold_plus: float = 0.98,
    *,
    min_exceed: int = MIN_EXCEED,
    label: str = "",
    check_points: int = CHECK_POINTS,
) -> MarginalTransform:
    """Fit the blended ECDF/GPD margin of ``values``.

    ECDF plotting positions are ``i / (n + 1)`` (tied values share the
    highest rank). The GPD is fitted to excesses over the empirical
    ``q_thold`` quantile and the blend runs up to the ``q_thold_plus``
    quantile. Raises :class:`MarginalError` if the blend is not strictly
    increasing on the check grid.
    """
    if not 0.5 < q_thold < q_thold_plus < 1.0:
        raise MarginalError(
            "bad_quantiles", f"need 0.5 < q_thold < q_thold_plus < 1, got {q_thold}, {q_thold_plus}"
        )
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or not np.isfinite(x).all():
        raise MarginalError("bad_values", "values must be a finite 1-d array")
    n = x.size
    kx, counts = np.unique(x, return_counts=True)
    if kx.size < 3:
        raise MarginalError("degenerate", "need at least 3 distinct values")
    kp = np.cumsum(counts) / (n + 1.0)

    x_thold, x_thold_plus = (float(v) for v in np.quantile(x, [q_thold, q_thold_plus]))
    if not x_thold < x_thold_plus:
        raise MarginalError(
            "window", f"empirical quantiles {q_thold} and {q_thold_plus} coincide ({x_thold}); widen the window"
        )
    exc = x[x > x_thold] - x_thold
    if exc.size < min_exceed:
        raise MarginalError(
            "too_few_exceedances", f"only {exc.size} values above the {q_thold} quantile (need {min_exceed})"
        )
    gpd = fit_gpd(exc, x_thold, min_exceed=min_exceed)

    mt = MarginalTransform(
        knots_x=kx,
        knots_p=kp,
        gpd=gpd,
        x_thold=x_thold,
        x_thold_plus=x_thold_plus,
        n=n,
        lower_scale=float(kx[1] - kx[0]),
        q_thold=q_thold,
        q_thold_plus=q_thold_plus,
        label=label,
    )
    if not mt.verify_monotone(check_points):
        raise MarginalError(
            "not_monotone",
            f"blended CDF{f' for {label}' if label else ''} is not strictly increasing after smoothing; "
            "try a wider blend window (q_thold, q_thold_plus)",
        )
    object.__setattr__(mt, "monotone_verified", True)
    return mt


def fit_marginals(sample: BivariateSample, q_thold: float = 0.97, q_thold_plus: float = 0.98,
                  **kw) -> tuple[MarginalTransform, MarginalTransform]:
    return (
        fit_marginal(sample.x1, q_thold, q_thold_plus, label=sample.labels[0], **kw),
        fit_marginal(sample.x2, q_thold, q_thold_plus, label=sample.labels[1], **kw),
    )


def to_frechet_sample(sample: BivariateSample, marginals) -> BivariateSample:
    """Coordinate-wise transform ``Z_t = T(X_t)``."""
    m1, m2 = marginals
    z1 = m1.to_frechet(sample.x1)
    z2 = m2.to_frechet(sample.x2)
    if not (np.isfinite(z1).all() and np.isfinite(z2).all() and (z1 > 0).all() and (z2 > 0).all()):
        raise MarginalError("transform", "transformed sample has non-positive or non-finite values")
    return sample.with_values(z1, z2, scale_tag="frechet")
