"""Extremal dependence summaries: the chi curve and the Hill estimate of eta."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import TailDepError
from .ingest import BivariateSample

log = logging.getLogger(__name__)

MIN_K = 10
AUTO_CHI_U = 0.98
AUTO_CHI_CUTOFF = 0.05


@dataclass(frozen=True, eq=False)
class ChiCurve:
    """``chi_hat[k]`` estimates ``P(U1 > u_k | U2 > u_k)``; NaN where undefined."""

    u_grid: np.ndarray
    chi_hat: np.ndarray
    joint: np.ndarray
    marginal: np.ndarray

    def at(self, u: float) -> float:
        return float(np.interp(u, self.u_grid, self.chi_hat))

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "chi", "joint_count", "marginal_count"])
            for row in zip(self.u_grid, self.chi_hat, self.joint, self.marginal):
                w.writerow([f"{row[0]:.17g}", "" if np.isnan(row[1]) else f"{row[1]:.17g}", row[2], row[3]])


def chi_curve(x1, x2, u_grid=None) -> ChiCurve:
    """Rank-based chi estimate over a grid of probability levels.

    Ranks are scaled by ``n + 1`` so no observation reaches 1.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n = x1.size
    if n < 20:
        raise TailDepError("too_few_points", f"chi needs at least 20 observations, got {n}")
    if u_grid is None:
        u_grid = np.linspace(0.5, 0.995, 100)
    u = np.asarray(u_grid, dtype=float)
    if not ((u > 0) & (u < 1)).all() or (np.diff(u) <= 0).any():
        raise TailDepError("bad_grid", "u_grid must be increasing probabilities in (0, 1)")
    r1 = rankdata(x1) / (n + 1.0)
    r2 = rankdata(x2) / (n + 1.0)
    # counts at every u via sorting: #{r2 > u} and #{min(r1, r2) > u}
    rmin = np.sort(np.minimum(r1, r2))
    r2s = np.sort(r2)
    joint = n - np.searchsorted(rmin, u, side="right")
    marg = n - np.searchsorted(r2s, u, side="right")
    with np.errstate(invalid="ignore", divide="ignore"):
        chi = np.where(marg > 0, joint / np.maximum(marg, 1), np.nan)
    return ChiCurve(u, chi, joint.astype(np.int64), marg.astype(np.int64))


@dataclass(frozen=True, eq=False)
class TailDependenceEstimate:
    eta_hat: float
    threshold_quantile: float
    threshold: float
    k_exceed: int
    hill_k: np.ndarray
    hill_eta: np.ndarray

    @property
    def hill_trace(self) -> list[tuple[int, float]]:
        return list(zip(self.hill_k.tolist(), self.hill_eta.tolist()))

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "eta"])
            for k, e in zip(self.hill_k, self.hill_eta):
                w.writerow([int(k), f"{e:.17g}"])


def hill_trace(z, k_max: int, k_min: int = MIN_K) -> tuple[np.ndarray, np.ndarray]:
    """Hill estimates for ``k = k_min..k_max`` top order statistics.

    ``eta_k = mean(log z_(n-i+1), i = 1..k) - log z_(n-k)``.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    k_max = min(int(k_max), n - 1)
    if k_max < k_min:
        raise TailDepError("too_few_exceedances", f"need at least {k_min} exceedances, have {k_max}")
    logs = np.log(np.sort(z)[::-1])
    csum = np.cumsum(logs)
    k = np.arange(k_min, k_max + 1)
    eta = csum[k - 1] / k - logs[k]
    return k, eta


def hill_estimate(
    z,
    threshold_quantile: float = 0.98,
    *,
    trace_quantile: float = 0.90,
    k_min: int = MIN_K,
) -> TailDependenceEstimate:
    """Hill estimate of the tail index of positive values ``z``.

    The threshold is the order statistic ``z_(n-k)`` with
    ``k = floor((1 - threshold_quantile) * n)`` exceedances above it. The
    trace covers ``k_min`` up to the count above the ``trace_quantile``.
    """
    z = np.asarray(z, dtype=float)
    if not (z > 0).all():
        raise TailDepError("domain", "Hill estimation needs strictly positive values")
    if not 0 < threshold_quantile < 1:
        raise TailDepError("bad_quantile", f"threshold quantile must lie in (0, 1), got {threshold_quantile}")
    n = z.size
    k = int(np.floor((1.0 - threshold_quantile) * n + 1e-9))
    if k < k_min:
        raise TailDepError(
            "too_few_exceedances",
            f"only {k} exceedances above the {threshold_quantile} quantile (need {k_min})",
        )
    k_top = max(k, int(np.floor((1.0 - trace_quantile) * n + 1e-9)))
    ks, etas = hill_trace(z, k_top, k_min)
    eta = float(etas[k - k_min])
    thr = float(np.sort(z)[n - k - 1])
    return TailDependenceEstimate(eta, threshold_quantile, thr, k, ks, etas)


def hill_eta(sample: BivariateSample, threshold_quantile: float = 0.98, **kw) -> TailDependenceEstimate:
    """Coefficient of tail dependence from ``min(z1, z2)`` of a Fréchet-scale sample."""
    if sample.scale_tag != "frechet":
        raise TailDepError("scale", "hill_eta expects a Fréchet-scale sample")
    return hill_estimate(np.minimum(sample.x1, sample.x2), threshold_quantile, **kw)


def choose_mode(mode: str, x1, x2) -> str:
    """Resolve ``ad``/``ai``/``auto``.

    ``auto`` picks ``ai`` when chi at u=0.98 is below 0.05; the curve
    should still be inspected.
    """
    mode = mode.lower()
    if mode in ("ad", "ai"):
        return mode
    if mode != "auto":
        raise TailDepError("bad_mode", f"mode must be ad, ai or auto, got {mode!r}")
    chi = chi_curve(x1, x2, [AUTO_CHI_U]).chi_hat[0]
    picked = "ai" if (np.isnan(chi) or chi < AUTO_CHI_CUTOFF) else "ad"
    log.warning("auto mode: chi(%.2f) = %.3f, using %s; inspect the chi curve", AUTO_CHI_U, chi, picked)
    return picked
