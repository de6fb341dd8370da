"""Perturbed-observation EnKF: inflation, Kalman gain, analysis update, full cycle."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .ensemble import covariance
from .model import BlowUpError, ModelParams, absorbing_radius, flow
from .obs import ObservationOperator

logger = logging.getLogger(__name__)

INFLATION_MODES = ("none", "additive", "projected_additive")


@dataclass(frozen=True)
class FilterConfig:
    """Inflation mode/parameter, ensemble size, and RNG seed for one filter run."""

    inflation_mode: str = "none"
    alpha: float = 0.0
    m: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.inflation_mode not in INFLATION_MODES:
            raise ValueError(f"unknown inflation mode {self.inflation_mode!r}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if self.m < 2:
            raise ValueError(f"ensemble size must be at least 2, got {self.m}")


@dataclass
class FilterState:
    """Current analysis ensemble plus step counter and diagnostics."""

    ensemble: np.ndarray
    step: int = 0
    last_gain_norm: float = 0.0
    ball_violations: int = 0


def inflate(P: np.ndarray, cfg: FilterConfig, op: ObservationOperator) -> np.ndarray:
    """Inflated forecast covariance.

    additive:            P + alpha^2 I
    projected_additive:  Pi (P + alpha^2 I) Pi  (zero on unobserved rows/columns)
    none:                P unchanged.
    """
    P = np.asarray(P, dtype=float)
    if cfg.inflation_mode == "none":
        return P.copy()
    Pa = P + cfg.alpha**2 * np.eye(op.J)
    if cfg.inflation_mode == "projected_additive":
        mask = np.zeros(op.J, dtype=bool)
        mask[op.observed] = True
        Pa[~mask, :] = 0.0
        Pa[:, ~mask] = 0.0
    return Pa


def kalman_gain(P: np.ndarray, op: ObservationOperator) -> np.ndarray:
    """K = P H^T (H P H^T + r^2 I)^{-1} via a Cholesky solve of the Ny x Ny system."""
    P = np.asarray(P, dtype=float)
    oidx = op.observed
    S = P[np.ix_(oidx, oidx)] + op.r**2 * np.eye(op.Ny)
    try:
        cho = scipy.linalg.cho_factor(S)
    except scipy.linalg.LinAlgError as e:
        raise RuntimeError("innovation covariance is not positive definite") from e
    # P symmetric, so (P H^T)^T = P[observed, :]
    return scipy.linalg.cho_solve(cho, P[oidx, :]).T


def perturb_observations(
    y: np.ndarray, m: int, op: ObservationOperator, rng: np.random.Generator
) -> np.ndarray:
    """Per-member perturbed observations y + xi^(k), member-major draw order; (m, Ny)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (op.Ny,):
        raise ValueError(f"observation shape {y.shape} does not match Ny={op.Ny}")
    return y[None, :] + op.r * rng.standard_normal((m, op.Ny))


def analysis_gain_form(
    Zhat: np.ndarray, Ypert: np.ndarray, P: np.ndarray, op: ObservationOperator
) -> tuple[np.ndarray, np.ndarray]:
    """Gain-form analysis update for the whole ensemble; returns (V, K).

    P is the already-inflated covariance; Ypert holds one perturbed
    observation per member, row k for member k.
    """
    Zhat = np.asarray(Zhat, dtype=float)
    K = kalman_gain(P, op)
    innovation = Ypert.T - Zhat[op.observed, :]
    return Zhat + K @ innovation, K


def analysis_po(
    Zhat: np.ndarray,
    y: np.ndarray,
    P: np.ndarray,
    op: ObservationOperator,
    rng: np.random.Generator,
) -> np.ndarray:
    """Perturbed-observation analysis: draw per-member noise, then gain update."""
    Ypert = perturb_observations(y, Zhat.shape[1], op, rng)
    V, _ = analysis_gain_form(Zhat, Ypert, P, op)
    return V


def analysis_implicit(
    Zhat: np.ndarray, Ypert: np.ndarray, P: np.ndarray, op: ObservationOperator
) -> np.ndarray:
    """Implicit-form update: solve (I + P H^T R^{-1} H) v = vhat + P H^T R^{-1} y^(k).

    Algebraically identical to the gain form; used as its oracle.
    """
    Zhat = np.asarray(Zhat, dtype=float)
    P = np.asarray(P, dtype=float)
    rinv2 = 1.0 / op.r**2
    A = np.eye(op.J)
    A[:, op.observed] += rinv2 * P[:, op.observed]
    B = Zhat + rinv2 * P[:, op.observed] @ Ypert.T
    try:
        return scipy.linalg.solve(A, B)
    except scipy.linalg.LinAlgError as e:
        raise RuntimeError("implicit analysis system is singular") from e


def po_cycle(
    state: FilterState,
    y: np.ndarray,
    params: ModelParams,
    cfg: FilterConfig,
    op: ObservationOperator,
    rng: np.random.Generator,
    tau: float | None = None,
) -> FilterState:
    """One prediction + analysis cycle; tau defaults to one RK4 step (params.dt)."""
    if tau is None:
        tau = params.dt
    try:
        Zhat = flow(state.ensemble, tau, params)
    except BlowUpError as e:
        raise BlowUpError(f"blow-up at assimilation step {state.step + 1}: {e}") from e
    P = inflate(covariance(Zhat), cfg, op)
    Ypert = perturb_observations(y, Zhat.shape[1], op, rng)
    V, K = analysis_gain_form(Zhat, Ypert, P, op)

    rho = absorbing_radius(params.J, params.F)
    out_of_ball = int(np.count_nonzero(np.linalg.norm(V, axis=0) > rho))
    if out_of_ball:
        logger.debug(
            "step %d: %d member(s) outside the absorbing ball", state.step + 1, out_of_ball
        )
    return FilterState(
        ensemble=V,
        step=state.step + 1,
        last_gain_norm=float(np.linalg.norm(K, 2)),
        ball_violations=state.ball_violations + out_of_ball,
    )
