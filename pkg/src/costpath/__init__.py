"""Cost-penalized Bayesian variable selection for logistic regression with
full model-space enumeration and inclusion paths."""

from .data_io import PredictorSpec, SimulationConfig, grow_dataset, load_cleveland, load_dataset, simulate_dataset
from .inclusion_path import BGrid, PathResult, compute_path
from .laplace import DesignData, ModelFit, fit_model, log_marginal_laplace
from .metrics import c_statistic, cv_cstatistic, kl_divergence, kl_vs_n_experiment, roc_curve
from .model_space import (
    PosteriorTable,
    bayes_factor,
    enumerate_posterior,
    fit_all_models,
    map_model,
    median_probability_model,
    model_cost,
    posterior_from_fits,
    posterior_inclusion_probabilities,
    summarize,
)
from .prior import CostSchedule, GKind, ModelIndicator, PriorSpec, cost_ratio_g, log_model_prior

__version__ = "0.1.0"
