"""Kernel-smoothed joint survival surface and its level sets."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import kernels
from .errors import SurfaceError

log = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 400
MIN_RESOLUTION = 16
KERNEL_DIVISOR = 4.0
PROVENANCES = ("base_nonparametric", "projected_ad", "projected_ai")


def nrd_bandwidth(values) -> float:
    """Normal-reference bandwidth ``4 * 1.06 * min(sd, IQR / 1.34) * n**(-1/5)``.

    Same rule as ``MASS::bandwidth.nrd``. The survival smoother uses a
    Gaussian kernel with standard deviation ``h / 4``, as ``kde2d`` does.
    """
    x = np.asarray(values, dtype=float)
    if x.size < 4:
        raise SurfaceError("too_few_points", "bandwidth selection needs at least 4 values")
    q1, q3 = np.quantile(x, [0.25, 0.75])
    spread = min(float(np.std(x, ddof=1)), float(q3 - q1) / 1.34)
    if not spread > 0:
        raise SurfaceError("zero_spread", "cannot choose a bandwidth: zero spread in the data")
    return 4.0 * 1.06 * spread * x.size ** (-0.2)


@dataclass(frozen=True, eq=False)
class SurvivalGrid:
    """``values[i, j]`` estimates ``P(X1 > x_coords[i], X2 > y_coords[j])``."""

    x_coords: np.ndarray
    y_coords: np.ndarray
    values: np.ndarray
    bandwidths: tuple[float, float]

    def interpolate(self, points) -> np.ndarray:
        """Bilinear interpolation of the surface at ``(m, 2)`` points."""
        from scipy.interpolate import RegularGridInterpolator

        f = RegularGridInterpolator((self.x_coords, self.y_coords), self.values,
                                    bounds_error=False, fill_value=None)
        return f(np.atleast_2d(points))

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "survival"])
            for i, x in enumerate(self.x_coords):
                for j, y in enumerate(self.y_coords):
                    w.writerow([f"{x:.17g}", f"{y:.17g}", f"{self.values[i, j]:.17g}"])


def default_axis(values, h: float, resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """Grid lines over ``[min - h, max + 3h]``."""
    v = np.asarray(values, dtype=float)
    return np.linspace(v.min() - h, v.max() + 3.0 * h, resolution)


def survival_grid(
    x1,
    x2,
    bandwidths: tuple[float, float] | None = None,
    resolution: int = DEFAULT_RESOLUTION,
    *,
    x_coords=None,
    y_coords=None,
    chunk: int = 20_000,
) -> SurvivalGrid:
    """Product-Gaussian smoothed survival function on a grid.

    ``values[i, j] = mean_t Phi((x1_t - x_i) / k1) * Phi((x2_t - y_j) / k2)``
    with kernel standard deviation ``k = h / 4``. Each factor is monotone in
    the grid coordinate, so the surface is non-increasing along both axes.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n = x1.size
    if n < 50:
        log.warning("survival surface from only %d points", n)
    if bandwidths is None:
        bandwidths = (nrd_bandwidth(x1), nrd_bandwidth(x2))
    h1, h2 = (float(b) for b in bandwidths)
    if not (h1 > 0 and h2 > 0):
        raise SurfaceError("bad_bandwidth", f"bandwidths must be positive, got {(h1, h2)}")
    gx = default_axis(x1, h1, resolution) if x_coords is None else np.asarray(x_coords, dtype=float)
    gy = default_axis(x2, h2, resolution) if y_coords is None else np.asarray(y_coords, dtype=float)
    if min(gx.size, gy.size) < MIN_RESOLUTION:
        raise SurfaceError("coarse_grid", f"grid resolution must be at least {MIN_RESOLUTION}")
    if not ((np.diff(gx) > 0).all() and (np.diff(gy) > 0).all()):
        raise SurfaceError("grid_order", "grid lines must be strictly increasing")

    k1, k2 = h1 / KERNEL_DIVISOR, h2 / KERNEL_DIVISOR
    acc = np.zeros((gx.size, gy.size))
    for start in range(0, n, chunk):
        a = ndtr((x1[start:start + chunk, None] - gx[None, :]) / k1)
        b = ndtr((x2[start:start + chunk, None] - gy[None, :]) / k2)
        acc += a.T @ b
    values = np.clip(acc / n, 0.0, 1.0)
    # BLAS summation order can leave ulp-level bumps; the estimator itself is monotone
    values = np.minimum.accumulate(np.minimum.accumulate(values, axis=0), axis=1)
    return SurvivalGrid(gx, gy, values, (h1, h2))


@dataclass(frozen=True, eq=False)
class Isoline:
    """Polyline of constant joint survival, ordered with x descending.

    ``clipped`` flags whether the first/last vertex sits on the boundary of
    the grid (or the support) rather than being a genuine curve end.
    """

    level: float
    points: np.ndarray
    scale: str = "original"
    provenance: str = "base_nonparametric"
    clipped: tuple[bool, bool] = (False, False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise SurfaceError("shape", "isoline points must be an (m, 2) array")
        if pts.shape[0] < 2:
            raise SurfaceError("too_few_points", "an isoline needs at least 2 points")
        if self.provenance not in PROVENANCES:
            raise SurfaceError("provenance", f"unknown provenance {self.provenance!r}")
        if self.scale not in ("original", "frechet"):
            raise SurfaceError("scale", f"unknown scale {self.scale!r}")
        if not has_negative_slopes(pts):
            raise SurfaceError("slope", "isoline does not have strictly negative slopes")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "clipped", (bool(self.clipped[0]), bool(self.clipped[1])))

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def __len__(self) -> int:
        return self.points.shape[0]


def has_negative_slopes(points) -> bool:
    """True if every consecutive pair steps strictly left and strictly up."""
    d = np.diff(np.asarray(points, dtype=float), axis=0)
    return bool(((d[:, 0] < 0) & (d[:, 1] > 0)).all())


def _chain(pts: np.ndarray, segs: np.ndarray) -> list[list[int]]:
    """Join segments sharing an edge into ordered edge-id chains."""
    adj: dict[int, list[int]] = {}
    for k, (a, b) in enumerate(segs):
        adj.setdefault(int(a), []).append(k)
        adj.setdefault(int(b), []).append(k)
    used = np.zeros(len(segs), dtype=bool)
    chains = []

    def walk(start: int) -> list[int]:
        chain = [start]
        cur = start
        while True:
            nxt = [k for k in adj[cur] if not used[k]]
            if not nxt:
                return chain
            k = nxt[0]
            used[k] = True
            a, b = int(segs[k, 0]), int(segs[k, 1])
            cur = b if a == cur else a
            chain.append(cur)

    for e, ks in adj.items():
        if len(ks) == 1 and not used[ks[0]]:
            chains.append(walk(e))
    for k in range(len(segs)):
        if not used[k]:
            chains.append(walk(int(segs[k, 0])))
    return chains


def _prune_to_monotone(points: np.ndarray, tol_x: float = 0.0, tol_y: float = 0.0) -> np.ndarray:
    """Drop vertices that do not step left by more than ``tol_x`` and up by
    more than ``tol_y`` from the last kept vertex."""
    keep = [0]
    for k in range(1, points.shape[0]):
        last = points[keep[-1]]
        if points[k, 0] < last[0] - tol_x and points[k, 1] > last[1] + tol_y:
            keep.append(k)
    end = points.shape[0] - 1
    if keep[-1] != end and len(keep) > 1:
        # keep the true curve end in place of the last interior vertex
        prev = points[keep[-2]]
        if points[end, 0] < prev[0] - tol_x and points[end, 1] > prev[1] + tol_y:
            keep[-1] = end
    return points[keep]


def extract_isoline(grid: SurvivalGrid, p: float) -> Isoline:
    """Level set ``{S = p}`` by marching squares, as one ordered polyline.

    Crossing points are interpolated linearly along cell edges. Far outside
    the data the kernel factors round to exactly 1, so the curve's
    asymptotic tails come out exactly vertical/horizontal; such runs (and any
    vertex interpolation pushes out of strict down-right order) are collapsed,
    with the count kept in ``meta["pruned"]``.
    """
    v = grid.values
    lo, hi = float(v.min()), float(v.max())
    if not lo < p < hi:
        raise SurfaceError(
            "empty_level_set",
            f"level {p} is outside the achievable range ({lo:.6g}, {hi:.6g}) of the grid",
        )
    nx, ny = v.shape
    pts, segs = kernels.marching_squares(
        np.ascontiguousarray(v), np.ascontiguousarray(grid.x_coords),
        np.ascontiguousarray(grid.y_coords), float(p),
    )
    if len(segs) == 0:
        raise SurfaceError("empty_level_set", f"no level set at {p} on the grid")
    chains = _chain(pts, segs)
    if len(chains) != 1 or chains[0][0] == chains[0][-1]:
        raise SurfaceError(
            "fragmented",
            f"level {p} yields {len(chains)} separate contour pieces; use a larger bandwidth",
        )
    chain = chains[0]
    poly = pts[chain]

    n_h = (nx - 1) * ny

    def on_boundary(e: int) -> bool:
        if e < n_h:
            j = e % ny
            return j == 0 or j == ny - 1
        i = (e - n_h) // (ny - 1)
        return i == 0 or i == nx - 1

    flags = [on_boundary(chain[0]), on_boundary(chain[-1])]
    if poly[0, 0] < poly[-1, 0]:
        poly = poly[::-1]
        flags.reverse()
    m0 = poly.shape[0]
    # steps below a millionth of a cell do not survive the marginal transforms
    tol_x = 1e-6 * float(np.min(np.diff(grid.x_coords)))
    tol_y = 1e-6 * float(np.min(np.diff(grid.y_coords)))
    poly = _prune_to_monotone(poly, tol_x, tol_y)
    pruned = m0 - poly.shape[0]
    if pruned:
        log.debug("pruned %d non-monotone vertices from level %g", pruned, p)
    if poly.shape[0] < 2:
        raise SurfaceError("degenerate", f"level {p} collapses to fewer than 2 monotone vertices")
    return Isoline(
        level=float(p),
        points=poly,
        scale="original",
        provenance="base_nonparametric",
        clipped=tuple(flags),
        meta={"pruned": pruned},
    )


def write_isolines_csv(isolines, path: str | Path, *, replicate_col: bool = False,
                       replicates=None) -> None:
    """``level,scale,x,y,provenance`` rows in polyline order.

    With ``replicate_col`` a leading ``replicate`` column is written, taking
    values from ``replicates`` (one per isoline).
    """
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["level", "scale", "x", "y", "provenance"]
        w.writerow(["replicate", *head] if replicate_col else head)
        for k, iso in enumerate(isolines):
            for x, y in iso.points:
                row = [f"{iso.level:.17g}", iso.scale, f"{x:.17g}", f"{y:.17g}", iso.provenance]
                if replicate_col:
                    row.insert(0, str(replicates[k] if replicates is not None else k))
                w.writerow(row)


def read_isolines_csv(path: str | Path) -> list[Isoline]:
    """Inverse of :func:`write_isolines_csv`.

    Endpoint clip flags are not part of the CSV; both ends are marked clipped.
    """
    groups: dict[tuple, list] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row.get("replicate"), float(row["level"]), row["scale"], row.get("provenance", "base_nonparametric"))
            groups.setdefault(key, []).append((float(row["x"]), float(row["y"])))
    return [
        Isoline(level=k[1], points=np.asarray(p), scale=k[2], provenance=k[3], clipped=(True, True))
        for k, p in groups.items()
    ]
