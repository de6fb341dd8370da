"""Lorenz 96 dynamics: vector field, symmetrized advection form, RK4 flow map."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BlowUpError(RuntimeError):
    """Integration produced non-finite components (chaotic blow-up)."""


@dataclass(frozen=True)
class ModelParams:
    """Model dimension, forcing, and integrator step size."""

    J: int
    F: float
    dt: float = 0.01

    def __post_init__(self):
        if self.J < 4:
            raise ValueError(f"state dimension must be at least 4, got J={self.J}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


def rhs(u: np.ndarray, F: float) -> np.ndarray:
    """Time derivative du/dt = (u_{j+1} - u_{j-2}) u_{j-1} - u_j + F, cyclic in j.

    Works on a single state of shape (J,) or an ensemble of shape (J, m);
    the cyclic index runs along axis 0.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] < 4:
        raise ValueError(f"state dimension must be at least 4, got {u.shape[0]}")
    up1 = np.roll(u, -1, axis=0)
    um1 = np.roll(u, 1, axis=0)
    um2 = np.roll(u, 2, axis=0)
    return (up1 - um2) * um1 - u + F


def bilinear(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Symmetrized advection term: bilinear(u, u) is the quadratic part of rhs.

    Satisfies bilinear(u, v) = bilinear(v, u) and <bilinear(u, u), u> = 0,
    which is the energy conservation underlying the absorbing ball.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    up1 = np.roll(u, -1, axis=0)
    um1 = np.roll(u, 1, axis=0)
    um2 = np.roll(u, 2, axis=0)
    vp1 = np.roll(v, -1, axis=0)
    vm1 = np.roll(v, 1, axis=0)
    vm2 = np.roll(v, 2, axis=0)
    return 0.5 * (vm1 * up1 + um1 * vp1 - vm2 * um1 - um2 * vm1)


def step_rk4(u: np.ndarray, params: ModelParams) -> np.ndarray:
    """One classical RK4 step of du/dt = rhs(u, F) over params.dt."""
    u = np.asarray(u, dtype=float)
    h = params.dt
    F = params.F
    k1 = rhs(u, F)
    k2 = rhs(u + 0.5 * h * k1, F)
    k3 = rhs(u + 0.5 * h * k2, F)
    k4 = rhs(u + h * k3, F)
    out = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        if out.ndim == 2:
            bad = np.where(~np.all(np.isfinite(out), axis=0))[0]
            raise BlowUpError(f"non-finite state after RK4 step (members {bad.tolist()})")
        raise BlowUpError("non-finite state after RK4 step")
    return out


def flow(u: np.ndarray, t: float, params: ModelParams) -> np.ndarray:
    """Discrete flow map: t/dt composed RK4 steps; flow(u, 0) is u exactly.

    t must be a nonnegative integer multiple of params.dt (1e-9 relative).
    """
    if t < 0:
        raise ValueError(f"flow time must be nonnegative, got {t}")
    ratio = t / params.dt
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
        raise ValueError(f"t={t} is not an integer multiple of dt={params.dt}")
    out = np.asarray(u, dtype=float)
    for _ in range(n):
        out = step_rk4(out, params)
    return out


def absorbing_radius(J: int, F: float) -> float:
    """Radius sqrt(2J)*|F| of the ball every trajectory eventually stays in."""
    if J < 4:
        raise ValueError(f"state dimension must be at least 4, got J={J}")
    return np.sqrt(2.0 * J) * abs(F)
