"""End-to-end isoline estimation from a sample."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ingest import BivariateSample
from .marginal import MarginalTransform, fit_marginals, to_frechet_sample
from .project import DEFAULT_BETA, ProjectionConfig, project_pipeline
from .surface import DEFAULT_RESOLUTION, Isoline, SurvivalGrid, extract_isoline, survival_grid
from .taildep import TailDependenceEstimate, choose_mode, hill_eta

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IsolineConfig:
    """Estimation settings; defaults follow the Santa Ana configuration."""

    q_thold: float = 0.97
    q_thold_plus: float = 0.98
    bandwidths: tuple[float, float] | None = None
    resolution: int = DEFAULT_RESOLUTION
    p_base: float = 0.01
    mode: str = "ad"
    beta: float = DEFAULT_BETA
    eta_quantile: float = 0.98


@dataclass(eq=False)
class IsolineFit:
    marginals: tuple[MarginalTransform, MarginalTransform]
    grid: SurvivalGrid
    base: Isoline
    mode: str
    eta: TailDependenceEstimate | None
    isolines: list[Isoline] = field(default_factory=list)
    frechet: BivariateSample | None = None

    def level(self, p: float) -> Isoline:
        for iso in self.isolines:
            if np.isclose(iso.level, p, rtol=1e-12, atol=0):
                return iso
        raise KeyError(p)


def fit_isolines(
    sample: BivariateSample,
    levels,
    config: IsolineConfig = IsolineConfig(),
    marginals: tuple[MarginalTransform, MarginalTransform] | None = None,
) -> IsolineFit:
    """Fit margins, estimate the base isoline and project it to ``levels``.

    Pre-fitted ``marginals`` are reused as given (e.g. loaded from JSON).
    """
    if marginals is None:
        marginals = fit_marginals(sample, config.q_thold, config.q_thold_plus)
    grid = survival_grid(sample.x1, sample.x2, config.bandwidths, config.resolution)
    base = extract_isoline(grid, config.p_base)
    mode = choose_mode(config.mode, sample.x1, sample.x2)
    eta = None
    zs = None
    if mode == "ai":
        zs = to_frechet_sample(sample, marginals)
        eta = hill_eta(zs, config.eta_quantile)
    pcfg = ProjectionConfig(
        p_base=config.p_base,
        p_proj=tuple(levels),
        mode=mode,
        beta=config.beta,
        eta_hat=min(eta.eta_hat, 1.0) if eta is not None else None,
    )
    isolines = project_pipeline(base, marginals, pcfg)
    return IsolineFit(marginals, grid, base, mode, eta, isolines, zs)


def single_level_estimator(level: float, config: IsolineConfig = IsolineConfig()):
    """Callable re-running the full pipeline on a resample (for the bootstrap)."""

    def estimate(resample: BivariateSample) -> Isoline:
        return fit_isolines(resample, [level], config).isolines[0]

    return estimate
