"""Empirical checks of projected isolines and block-bootstrap uncertainty."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import binom

from . import kernels
from .errors import DiagnoseError, IsolineError
from .ingest import BivariateSample
from .surface import Isoline

log = logging.getLogger(__name__)

DEFAULT_PROBES = 20
DEPENDENCE_CAVEAT = (
    "probe regions overlap, so neighbouring counts are dependent; "
    "the binomial band ignores this"
)


def exceedance_count(x1, x2, point) -> int:
    """Number of observations with ``x1 >= point[0]`` and ``x2 >= point[1]``."""
    return int(exceedance_counts(x1, x2, np.atleast_2d(point))[0])


def exceedance_counts(x1, x2, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return kernels.exceedance_counts(
        np.ascontiguousarray(x1, dtype=float), np.ascontiguousarray(x2, dtype=float),
        np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
    )


def binomial_interval(n: int, p: float, coverage: float = 0.95) -> tuple[int, int]:
    """Narrowest integer interval holding at least ``coverage`` Binomial(n, p) mass.

    Ties in width go to the lower interval.
    """
    if n < 1:
        raise DiagnoseError("bad_n", f"n must be at least 1, got {n}")
    if not 0 < p < 1:
        raise DiagnoseError("bad_p", f"p must lie in (0, 1), got {p}")
    if not 0 < coverage < 1:
        raise DiagnoseError("bad_coverage", f"coverage must lie in (0, 1), got {coverage}")
    # restrict to the support carrying all but ~1e-14 of the mass for large n
    if n <= 20_000:
        lo_k, hi_k = 0, n
    else:
        lo_k = int(max(0, binom.ppf(1e-15, n, p) - 1))
        hi_k = int(min(n, binom.isf(1e-15, n, p) + 1))
    pmf = binom.pmf(np.arange(lo_k, hi_k + 1), n, p)
    a, b = kernels.shortest_interval(np.ascontiguousarray(pmf), float(coverage))
    if a < 0:
        raise DiagnoseError("no_interval", f"could not reach coverage {coverage} for n={n}, p={p}")
    return int(a) + lo_k, int(b) + lo_k


@dataclass(frozen=True, eq=False)
class DiagnosticReport:
    level: float
    n: int
    probe_index: np.ndarray
    points: np.ndarray
    counts: np.ndarray
    interval: tuple[int, int]
    caveat: str = DEPENDENCE_CAVEAT

    @property
    def emp_prob(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def bounds(self) -> tuple[float, float]:
        return self.interval[0] / self.n, self.interval[1] / self.n

    @property
    def flags(self) -> np.ndarray:
        """``below``, ``inside`` or ``above`` the binomial band, per probe."""
        lo, hi = self.interval
        return np.where(self.counts < lo, "below", np.where(self.counts > hi, "above", "inside"))

    @property
    def n_inside(self) -> int:
        return int((self.flags == "inside").sum())

    def to_csv(self, path: str | Path) -> None:
        lo, hi = self.bounds
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["probe_index", "x", "y", "count", "emp_prob", "lower", "upper", "flag"])
            for k, (x, y), c, f in zip(self.probe_index, self.points, self.counts, self.flags):
                w.writerow([int(k), f"{x:.17g}", f"{y:.17g}", int(c), f"{c / self.n:.17g}",
                            f"{lo:.17g}", f"{hi:.17g}", f])


def probe_indices(isoline: Isoline, n_probes: int = DEFAULT_PROBES) -> np.ndarray:
    """Vertex indices evenly spaced along the polyline, skipping clipped ends."""
    if n_probes < 3:
        raise DiagnoseError("bad_probes", "need at least 3 probes")
    first = 1 if isoline.clipped[0] else 0
    last = len(isoline) - 2 if isoline.clipped[1] else len(isoline) - 1
    if last < first:
        raise DiagnoseError("fully_clipped", "isoline has no unclipped vertices to probe")
    idx = np.unique(np.round(np.linspace(first, last, n_probes)).astype(int))
    if idx.size < n_probes:
        log.warning("isoline has only %d usable vertices for %d probes", idx.size, n_probes)
    return idx


def diagnostic_report(x1, x2, isoline: Isoline, n_probes: int = DEFAULT_PROBES,
                      coverage: float = 0.95) -> DiagnosticReport:
    """Empirical survival at probes along ``isoline`` against the binomial band."""
    if isoline.scale != "original":
        raise DiagnoseError("scale", "diagnostics compare against original-scale data")
    x1 = np.asarray(x1, dtype=float)
    n = x1.size
    idx = probe_indices(isoline, n_probes)
    pts = isoline.points[idx]
    counts = exceedance_counts(x1, x2, pts)
    return DiagnosticReport(
        level=isoline.level, n=n, probe_index=idx, points=pts, counts=counts,
        interval=binomial_interval(n, isoline.level, coverage),
    )


# --------------------------------------------------------------------------
# block bootstrap
# --------------------------------------------------------------------------


def block_indices(n: int, b: int, rng: np.random.Generator | None = None, starts=None) -> np.ndarray:
    """Indices of a circular block resample of length ``n``.

    ``ceil(n / b)`` blocks of length ``b`` start at uniform positions in
    ``0..n-1`` (or at ``starts``), wrap around the end, and the
    concatenation is cut to ``n``.
    """
    if not 1 <= b <= n:
        raise DiagnoseError("bad_block", f"block length must satisfy 1 <= b <= n, got b={b}, n={n}")
    n_blocks = math.ceil(n / b)
    if starts is None:
        starts = rng.integers(0, n, size=n_blocks)
    starts = np.asarray(starts, dtype=np.int64)
    if starts.shape != (n_blocks,):
        raise DiagnoseError("bad_starts", f"expected {n_blocks} block starts")
    idx = (starts[:, None] + np.arange(b)[None, :]) % n
    return idx.ravel()[:n]


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    level: float
    block_length: int
    iterations: int
    seed: int | None
    replicates: list  # Isoline or None per replicate
    errors: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(r is None for r in self.replicates)

    @property
    def isolines(self) -> list[Isoline]:
        return [r for r in self.replicates if r is not None]

    def to_csv(self, path: str | Path) -> None:
        from .surface import write_isolines_csv

        ok = [(k, r) for k, r in enumerate(self.replicates) if r is not None]
        write_isolines_csv([r for _, r in ok], path, replicate_col=True, replicates=[k for k, _ in ok])


def block_bootstrap(
    sample: BivariateSample,
    b: int,
    R: int,
    estimator: Callable[[BivariateSample], Isoline],
    seed: int | None = None,
    level: float | None = None,
    n_jobs: int = 1,
) -> BootstrapResult:
    """Run ``estimator`` on ``R`` circular block resamples of ``sample``.

    Replicate ``k`` draws from its own stream ``SeedSequence(seed).spawn(R)[k]``,
    so results do not depend on ``n_jobs``. Estimator failures are recorded
    and the replicate left as ``None``.
    """
    if R < 1:
        raise DiagnoseError("bad_iterations", f"R must be at least 1, got {R}")
    n = sample.n
    if not 1 <= b <= n:
        raise DiagnoseError("bad_block", f"block length must satisfy 1 <= b <= n, got b={b}, n={n}")
    streams = np.random.SeedSequence(seed).spawn(R)

    def one(k: int):
        rng = np.random.default_rng(streams[k])
        idx = block_indices(n, b, rng)
        resample = sample.take(idx, reindex=True)
        try:
            return estimator(resample), None
        except (IsolineError, FloatingPointError, ValueError) as exc:
            return None, f"{getattr(exc, 'code', type(exc).__name__)}: {exc}"

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, range(R)))
    else:
        results = [one(k) for k in range(R)]
    reps = [r for r, _ in results]
    errors = {k: e for k, (_, e) in enumerate(results) if e is not None}
    if errors:
        log.warning("%d of %d bootstrap replicates failed", len(errors), R)
    if level is None:
        level = next((r.level for r in reps if r is not None), float("nan"))
    return BootstrapResult(level, b, R, seed, reps, errors)
