"""Bayes estimation of a regression curve for one-parameter Bayesian models.

The Bayes estimator of the regression curve r_theta(x1) = E_theta(X2 | X1 = x1)
under squared-error loss is the regression curve of the posterior predictive
distribution.  This package computes it in closed form for three conjugate
models (:mod:`.conjugate`) and by quadrature for any model
(:mod:`.grid`), and checks its optimality, consistency and risk decay by
seeded Monte Carlo (:mod:`.risk`).
"""

from .baseline import NWConfig, nadaraya_watson
from .conjugate import (
    Example1Hyper,
    Example2Hyper,
    Example3Hyper,
    closed_form_regression,
    empty_stats,
    stats_from_data,
    update_stats,
)
from .errors import (
    BayesRegressError,
    ConfigError,
    DegeneratePosteriorError,
    DomainError,
    ExperimentError,
    NoMassError,
    NoPredictiveMassError,
    UsageError,
)
from .grid import build_grid, curve_estimate, predictive_regression, predictive_statistic_mean
from .kernels import BACKEND
from .models import (
    BivariateNormalModel,
    CrossedCoinModel,
    Dataset,
    ExponentialPrior,
    GammaExponentialModel,
    NormalPrior,
    ObsPair,
    UniformPrior,
    grow_dataset,
    regression_truth,
    sample_pair,
)
from .risk import bayes_risk, compare_estimators, consistency_paths

__version__ = "0.1.0"
