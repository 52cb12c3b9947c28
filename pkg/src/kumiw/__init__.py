"""Kumaraswamy inverse Weibull lifetime distribution toolkit."""

from .distribution import (
    KumIwParams,
    SubModel,
    cdf,
    hazard,
    log_pdf,
    make_submodel,
    pdf,
    quantile,
    sample,
    survival,
)
from .errors import DataError, MomentNotDefinedError, NumericError
from .measures import (
    SeriesConfig,
    bonferroni,
    expanded_pdf,
    lorenz,
    mean_deviation_about_mean,
    mean_deviation_about_median,
    mgf_truncated,
    moment,
    order_stat_moment,
    order_stat_pdf,
    renyi_entropy,
    shannon_entropy,
)
from .mle import FitResult, LrTestResult, censored_loglik, fit_mle, lr_test, observed_information, wald_ci
from .bayes import McmcChain, McmcConfig, PriorSpec, log_posterior, run_mcmc, summarize
from .survdata import (
    CensoredDataset,
    CensoredObs,
    KmCurve,
    Status,
    kaplan_meier,
    km_vs_parametric,
    load_csv,
    simulate_censored,
)

__version__ = "0.1.0"

__all__ = [
    "KumIwParams",
    "SubModel",
    "pdf",
    "log_pdf",
    "cdf",
    "survival",
    "hazard",
    "quantile",
    "sample",
    "make_submodel",
    "SeriesConfig",
    "moment",
    "mgf_truncated",
    "mean_deviation_about_mean",
    "mean_deviation_about_median",
    "bonferroni",
    "lorenz",
    "order_stat_pdf",
    "order_stat_moment",
    "shannon_entropy",
    "renyi_entropy",
    "expanded_pdf",
    "CensoredObs",
    "CensoredDataset",
    "KmCurve",
    "Status",
    "load_csv",
    "kaplan_meier",
    "km_vs_parametric",
    "simulate_censored",
    "censored_loglik",
    "fit_mle",
    "observed_information",
    "wald_ci",
    "lr_test",
    "FitResult",
    "LrTestResult",
    "PriorSpec",
    "McmcConfig",
    "McmcChain",
    "log_posterior",
    "run_mcmc",
    "summarize",
    "NumericError",
    "DataError",
    "MomentNotDefinedError",
    "__version__",
]
