"""Error-bound machinery: prediction/analysis contraction factors and the bound recursion.

The uniform-in-time bound has the form

    E[|delta_n|_pi^2] <= theta^n E[|delta_0|_pi^2] + 4 N r^2 (1 - theta^n) / (1 - theta)

with theta = max{Theta a1(tau) + b1(tau), Theta + b2(tau)},
Theta = (r^2 / (r^2 + alpha^2))^2, and N = min(m - 1, Ny).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, absorbing_radius, flow


@dataclass(frozen=True)
class BoundParams:
    """Constants entering the bound: absorbing radius, divergence rate, etc.

    beta (exponential divergence rate) and c (advection estimate constant)
    are not derivable in closed form; defaults come from estimate_beta and
    the bound |B(u, v)| <= 2 |u| |v|.
    """

    rho: float
    beta: float
    c: float = 2.0
    r: float = 1.0
    alpha: float = 0.0
    tau: float = 0.01
    m: int = 10
    Ny: int = 40

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.r <= 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def n_effective(self) -> int:
        """N = min(m - 1, Ny), the effective noise rank in the bound."""
        return min(self.m - 1, self.Ny)


def a1(t: float, p: BoundParams) -> float:
    """Projected prediction growth factor (16 rho^2 / beta)(e^{2 beta t} - 1).

    For beta = 0 the analytic limit 32 rho^2 t is used.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if p.beta == 0.0:
        return 32.0 * p.rho**2 * t
    return 16.0 * p.rho**2 / p.beta * (math.exp(2.0 * p.beta * t) - 1.0)


def b1(t: float, p: BoundParams) -> float:
    """Full-state prediction factor; b1(0) = 1 and d/dt b1(0) = -1."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if 2.0 * p.beta + 1.0 == 0.0:
        raise ValueError("beta = -1/2 is a removable singularity; not supported")
    k = 16.0 * p.c**2 * p.rho**4 / p.beta
    emt = math.exp(-t)
    return k * ((math.exp(2.0 * p.beta * t) - emt) / (2.0 * p.beta + 1.0) - (1.0 - emt)) + emt


def b2(t: float, p: BoundParams) -> float:
    """Cross term c^2 rho^2 (1 - e^{-t}); b2(0) = 0."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return p.c**2 * p.rho**2 * (1.0 - math.exp(-t))


def theta_analysis(p: BoundParams) -> float:
    """Analysis contraction Theta = (r^2 / (r^2 + alpha^2))^2, in (0, 1]."""
    return (p.r**2 / (p.r**2 + p.alpha**2)) ** 2


def theta_total(p: BoundParams) -> float:
    """theta = max{Theta a1(tau) + b1(tau), Theta + b2(tau)}."""
    T = theta_analysis(p)
    return max(T * a1(p.tau, p) + b1(p.tau, p), T + b2(p.tau, p))


def contraction_feasible(p: BoundParams) -> bool:
    """Whether the bound contracts (theta < 1) at these parameters."""
    return theta_total(p) < 1.0


def first_contraction_time(p: BoundParams, t_max: float = 5.0, num: int = 2000) -> float | None:
    """First grid point t > 0 with b1(t) < 1, or None if the grid has none."""
    for t in np.linspace(t_max / num, t_max, num):
        if b1(float(t), p) < 1.0:
            return float(t)
    return None


def error_bound_sequence(
    n_max: int, e0: float, p: BoundParams
) -> tuple[np.ndarray, float]:
    """Closed-form bound sequence and its asymptote.

    Element n is theta^n e0 + 4 N r^2 (1 - theta^n)/(1 - theta), equal to
    n iterations of e <- theta e + 4 N r^2.  The asymptote 4 N r^2/(1 - theta)
    is inf when theta >= 1.
    """
    theta = theta_total(p)
    drive = 4.0 * p.n_effective * p.r**2
    n = np.arange(n_max + 1)
    if theta == 1.0:
        seq = e0 + drive * n.astype(float)
    else:
        tn = theta**n.astype(float)
        seq = tn * e0 + drive * (1.0 - tn) / (1.0 - theta)
    limit = drive / (1.0 - theta) if theta < 1.0 else math.inf
    return seq, limit


def shrink_norm(S: np.ndarray, assume_symmetric: bool = False) -> float:
    """Operator norm of (I + S)^{-1} S.

    At most 1 for symmetric PSD S; can exceed 1 for non-symmetric S with
    nonnegative spectrum, which is why the projected inflation matters.
    """
    S = np.asarray(S, dtype=float)
    if assume_symmetric and not np.allclose(S, S.T, atol=1e-10):
        raise ValueError("matrix is not symmetric")
    A = np.eye(S.shape[0]) + S
    return float(np.linalg.norm(np.linalg.solve(A, S), 2))


def theta_sweep(
    p: BoundParams,
    taus: np.ndarray | None = None,
    alphas: np.ndarray | None = None,
) -> list[dict]:
    """Evaluate (Theta, theta, feasible) on a (tau, alpha) grid.

    Defaults to a 50 x 50 log-spaced grid around the experiment scales.
    """
    if taus is None:
        taus = np.logspace(-6, 0, 50)
    if alphas is None:
        alphas = np.logspace(-2, 2, 50)
    rows = []
    for tau in taus:
        for alpha in alphas:
            q = BoundParams(
                rho=p.rho, beta=p.beta, c=p.c, r=p.r,
                alpha=float(alpha), tau=float(tau), m=p.m, Ny=p.Ny,
            )
            theta = theta_total(q)
            rows.append(
                {
                    "tau": float(tau),
                    "alpha": float(alpha),
                    "Theta": theta_analysis(q),
                    "theta": theta,
                    "feasible": theta < 1.0,
                }
            )
    return rows


def write_sweep_csv(rows: list[dict], path: str) -> None:
    """Write a theta_sweep result with header tau,alpha,Theta,theta,feasible."""
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["tau", "alpha", "Theta", "theta", "feasible"])
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def divergence_slope(
    u0: np.ndarray, v0: np.ndarray, params: ModelParams, horizon: float
) -> float:
    """Fitted exponential divergence rate of two nearby trajectories.

    Least-squares slope of log |u(t) - v(t)| over t in [0, horizon], sampled
    each dt step.  Rejects identical initial states.
    """
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    d0 = np.linalg.norm(u0 - v0)
    if d0 == 0.0:
        raise ValueError("initial perturbation is zero; divergence rate undefined")
    steps = int(round(horizon / params.dt))
    u, v = u0, v0
    ts = [0.0]
    logs = [math.log(d0)]
    for i in range(1, steps + 1):
        u = flow(u, params.dt, params)
        v = flow(v, params.dt, params)
        ts.append(i * params.dt)
        logs.append(math.log(np.linalg.norm(u - v)))
    slope, _ = np.polyfit(ts, logs, 1)
    return float(slope)


@dataclass(frozen=True)
class BetaEstimate:
    """Empirical divergence rate: max over trials, with the trial spread."""

    beta: float
    spread: float
    samples: tuple[float, ...]


def estimate_beta(
    params: ModelParams,
    trials: int = 10,
    horizon: float = 2.0,
    seed: int = 0,
    spin_up: float = 10.0,
    perturbation: float = 1e-8,
) -> BetaEstimate:
    """Estimate the divergence rate from perturbed in-ball trajectory pairs.

    Each trial spins a random initial state onto the attractor, perturbs it
    by a small random unit vector, and fits the slope of the log separation.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    rng = np.random.default_rng(seed)
    rho = absorbing_radius(params.J, params.F)
    samples = []
    for _ in range(trials):
        u0 = params.F + rng.standard_normal(params.J)
        u0 = flow(u0, round(spin_up / params.dt) * params.dt, params)
        if rho > 0 and np.linalg.norm(u0) > rho:
            raise RuntimeError("spin-up did not reach the absorbing ball")
        d = rng.standard_normal(params.J)
        d *= perturbation / np.linalg.norm(d)
        samples.append(divergence_slope(u0, u0 + d, params, horizon))
    return BetaEstimate(
        beta=max(samples), spread=max(samples) - min(samples), samples=tuple(samples)
    )
