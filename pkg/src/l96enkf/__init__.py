"""Perturbed-observation EnKF with projected additive inflation on Lorenz 96."""

from .model import BlowUpError, ModelParams, absorbing_radius, bilinear, flow, rhs, step_rk4
from .obs import ObservationOperator, build_observation_operator, observe, observe_exact, pnorm_sq
from .ensemble import covariance, ens_mean, ensemble_norm, perturbations
from .filtering import (
    FilterConfig,
    FilterState,
    analysis_gain_form,
    analysis_implicit,
    analysis_po,
    inflate,
    kalman_gain,
    perturb_observations,
    po_cycle,
)
from .theory import (
    BetaEstimate,
    BoundParams,
    a1,
    b1,
    b2,
    contraction_feasible,
    divergence_slope,
    error_bound_sequence,
    estimate_beta,
    shrink_norm,
    theta_analysis,
    theta_sweep,
    theta_total,
)
from .harness import ExperimentConfig, ExperimentResult, run_cell, run_experiment

__all__ = [
    "BlowUpError", "ModelParams", "absorbing_radius", "bilinear", "flow", "rhs", "step_rk4",
    "ObservationOperator", "build_observation_operator", "observe", "observe_exact", "pnorm_sq",
    "covariance", "ens_mean", "ensemble_norm", "perturbations",
    "FilterConfig", "FilterState", "analysis_gain_form", "analysis_implicit", "analysis_po",
    "inflate", "kalman_gain", "perturb_observations", "po_cycle",
    "BetaEstimate", "BoundParams", "a1", "b1", "b2", "contraction_feasible",
    "divergence_slope", "error_bound_sequence", "estimate_beta", "shrink_norm",
    "theta_analysis", "theta_sweep", "theta_total",
    "ExperimentConfig", "ExperimentResult", "run_cell", "run_experiment",
]
