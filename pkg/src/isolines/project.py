"""Projecting a base isoline to smaller exceedance probabilities.

On the unit-Fréchet scale, asymptotic dependence gives the exact scaling
``z -> s z`` with ``s = p_base / p_proj``. Under asymptotic independence
each point is scaled by ``s**eta_i`` where the exponent moves from the
coefficient of tail dependence in the interior to 1 on the axes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ProjectError
from .surface import Isoline, has_negative_slopes

log = logging.getLogger(__name__)

DEFAULT_BETA = 200.0
BETA_SEARCH_GRID = (10.0, 50.0, 100.0, 200.0, 500.0, 1000.0)


@dataclass(frozen=True)
class ProjectionConfig:
    p_base: float
    p_proj: tuple[float, ...]
    mode: str = "ad"
    beta: float = DEFAULT_BETA
    eta_hat: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "p_proj", tuple(float(p) for p in self.p_proj))
        if not 0 < self.p_base < 1:
            raise ProjectError("bad_level", f"p_base must lie in (0, 1), got {self.p_base}")
        if any(not 0 < p <= self.p_base for p in self.p_proj):
            raise ProjectError("bad_level", "every projected level must lie in (0, p_base]")
        if self.mode not in ("ad", "ai"):
            raise ProjectError("bad_mode", f"mode must be 'ad' or 'ai', got {self.mode!r}")
        if self.mode == "ai":
            if not self.beta > 0:
                raise ProjectError("bad_beta", f"beta must be positive, got {self.beta}")
            if self.eta_hat is None or not 0 < self.eta_hat <= 1:
                raise ProjectError("bad_eta", f"eta_hat must lie in (0, 1], got {self.eta_hat}")


@dataclass(frozen=True, eq=False)
class ScalingExponents:
    m1: np.ndarray
    m2: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray


def smoothed_exponents(z_base, eta_hat: float, beta: float) -> ScalingExponents:
    """Per-point scaling exponents for the smoothed projection.

    ``m_i = 1 - (z_i / (z_1 + z_2))**beta`` and
    ``eta_i = m_i * eta_hat + (1 - m_i)``, evaluated as
    ``1 - m_i * (1 - eta_hat)`` so that ``eta_hat = 1`` gives exactly 1.
    Accepts one point or an ``(m, 2)`` array.
    """
    z = np.atleast_2d(np.asarray(z_base, dtype=float))
    if (z < 0).any():
        raise ProjectError("domain", "Fréchet-scale points must be nonnegative")
    total = z.sum(axis=1)
    if (total <= 0).any():
        raise ProjectError("domain", "a base point has both coordinates zero")
    if not beta > 0:
        raise ProjectError("bad_beta", f"beta must be positive, got {beta}")
    r = z / total[:, None]
    m = 1.0 - r**beta
    eta = 1.0 - m * (1.0 - eta_hat)
    return ScalingExponents(m[:, 0], m[:, 1], eta[:, 0], eta[:, 1])


def _require_frechet(iso: Isoline) -> None:
    if iso.scale != "frechet":
        raise ProjectError("scale", "projection operates on Fréchet-scale isolines")


def _check_s(s: float) -> None:
    if not s > 1:
        raise ProjectError("bad_scale_factor", f"scale factor must exceed 1, got {s}")


def scale_ad(isoline: Isoline, s: float) -> Isoline:
    """Multiply every vertex by ``s``; the level becomes ``level / s``."""
    _require_frechet(isoline)
    _check_s(s)
    return Isoline(
        level=isoline.level / s,
        points=isoline.points * s,
        scale="frechet",
        provenance="projected_ad",
        clipped=isoline.clipped,
        meta=dict(isoline.meta, scale_factor=float(s)),
    )


def scale_ai(isoline: Isoline, s: float, eta_hat: float, beta: float) -> Isoline:
    """Map each vertex to ``(s**eta_1 z_1, s**eta_2 z_2)`` with its own exponents."""
    _require_frechet(isoline)
    _check_s(s)
    if not 0 < eta_hat <= 1:
        raise ProjectError("bad_eta", f"eta_hat must lie in (0, 1], got {eta_hat}")
    ex = smoothed_exponents(isoline.points, eta_hat, beta)
    pts = np.column_stack([s**ex.eta1 * isoline.x, s**ex.eta2 * isoline.y])
    if not has_negative_slopes(pts):
        raise ProjectError(
            "slope", "projected isoline lost its negative slope; is the base line monotone?"
        )
    return Isoline(
        level=isoline.level / s,
        points=pts,
        scale="frechet",
        provenance="projected_ai",
        clipped=isoline.clipped,
        meta=dict(isoline.meta, scale_factor=float(s), beta=float(beta), eta_hat=float(eta_hat)),
    )


def isoline_to_frechet(isoline: Isoline, marginals) -> Isoline:
    """Forward transform; vertices at or past a finite marginal endpoint
    (where ``F = 1``) are dropped, as the smoothed surface can leak there."""
    m1, m2 = marginals
    pts = np.column_stack([m1.to_frechet(isoline.x), m2.to_frechet(isoline.y)])
    if (pts <= 0).any() or np.isnan(pts).any():
        raise ProjectError("transform", "base isoline leaves the domain of the marginal transform")
    ok = np.isfinite(pts).all(axis=1)
    clipped = list(isoline.clipped)
    meta = dict(isoline.meta)
    if not ok.all():
        keep = np.flatnonzero(ok)
        if keep.size < 2:
            raise ProjectError("beyond_support", "isoline lies beyond the fitted marginal support")
        clipped[0] = clipped[0] or not ok[0]
        clipped[1] = clipped[1] or not ok[-1]
        pts = pts[keep]
        meta["dropped_beyond_endpoint"] = meta.get("dropped_beyond_endpoint", 0) + int((~ok).sum())
        log.info("dropped %d isoline vertices beyond the fitted support", int((~ok).sum()))
    return Isoline(isoline.level, pts, "frechet", isoline.provenance, tuple(clipped), meta)


def isoline_from_frechet(isoline: Isoline, marginals) -> Isoline:
    """Back-transform; vertices beyond a finite marginal endpoint are dropped."""
    m1, m2 = marginals
    x1, c1 = m1.from_frechet(isoline.x, return_clipped=True)
    x2, c2 = m2.from_frechet(isoline.y, return_clipped=True)
    bad = c1 | c2
    pts = np.column_stack([x1, x2])
    clipped = list(isoline.clipped)
    meta = dict(isoline.meta)
    if bad.any():
        keep = np.flatnonzero(~bad)
        if keep.size < 2:
            raise ProjectError(
                "beyond_support", f"isoline at level {isoline.level:g} lies beyond the fitted support"
            )
        if bad[0]:
            clipped[0] = True
        if bad[-1]:
            clipped[1] = True
        pts = pts[keep]
        meta["dropped_beyond_endpoint"] = meta.get("dropped_beyond_endpoint", 0) + int(bad.sum())
    return Isoline(isoline.level, pts, "original", isoline.provenance, tuple(clipped), meta)


def project_pipeline(base: Isoline, marginals, config: ProjectionConfig) -> list[Isoline]:
    """Project an original-scale base isoline to each level in ``config.p_proj``.

    A level equal to ``p_base`` returns the base line after a round trip
    through the marginal transforms.
    """
    if base.scale != "original":
        raise ProjectError("scale", "base isoline must be on the original scale")
    zbase = isoline_to_frechet(base, marginals)
    out = []
    for p in config.p_proj:
        s = config.p_base / p
        if s == 1.0:
            zp = zbase
        elif config.mode == "ad":
            zp = scale_ad(zbase, s)
        else:
            zp = scale_ai(zbase, s, config.eta_hat, config.beta)
        xp = isoline_from_frechet(zp, marginals)
        out.append(Isoline(p, xp.points, "original", zp.provenance, xp.clipped, xp.meta))
    return out
