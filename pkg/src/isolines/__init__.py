"""Bivariate isolines of exceedance probability with tail projection."""

from ._backend import BACKEND
from .diagnose import BootstrapResult, DiagnosticReport, binomial_interval, block_bootstrap, diagnostic_report
from .errors import IsolineError
from .ingest import BivariateSample, IngestReport, load_series, subset_months
from .marginal import GpdFit, MarginalTransform, fit_gpd, fit_marginal, fit_marginals, to_frechet_sample
from .pipeline import IsolineConfig, IsolineFit, fit_isolines, single_level_estimator
from .project import ProjectionConfig, project_pipeline, scale_ad, scale_ai, smoothed_exponents
from .surface import Isoline, SurvivalGrid, extract_isoline, read_isolines_csv, survival_grid, write_isolines_csv
from .synth import SynthModel, brute_survival, generate
from .taildep import ChiCurve, TailDependenceEstimate, chi_curve, choose_mode, hill_estimate, hill_eta

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BivariateSample", "BootstrapResult", "ChiCurve", "DiagnosticReport", "GpdFit",
    "IngestReport", "Isoline", "IsolineConfig", "IsolineError", "IsolineFit", "MarginalTransform",
    "ProjectionConfig", "SurvivalGrid", "SynthModel", "TailDependenceEstimate", "binomial_interval",
    "block_bootstrap", "brute_survival", "chi_curve", "choose_mode", "diagnostic_report",
    "extract_isoline", "fit_gpd", "fit_isolines", "fit_marginal", "fit_marginals", "generate",
    "hill_estimate", "hill_eta", "load_series", "project_pipeline", "read_isolines_csv", "scale_ad",
    "scale_ai", "single_level_estimator", "smoothed_exponents", "subset_months", "survival_grid",
    "to_frechet_sample", "write_isolines_csv",
]
