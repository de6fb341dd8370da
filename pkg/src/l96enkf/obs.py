"""Partial observation operator: observe 2 of every 3 components, plus the pi-norm."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class ObservationOperator:
    """Selection operator H, its projection Pi = H^T H, and the noise level r.

    H picks components 1, 2, 4, 5, ..., 3J'-2, 3J'-1 (1-based) of a state of
    dimension J = 3J'; the observation dimension is Ny = 2J'.  H is stored
    implicitly as the sorted list of observed (0-based) indices.
    """

    J: int
    Jprime: int
    Ny: int
    r: float
    observed: np.ndarray = field(repr=False)

    def apply_H(self, u: np.ndarray) -> np.ndarray:
        """Hu: restriction to the observed components (axis 0)."""
        return np.asarray(u, dtype=float)[self.observed]

    def project(self, v: np.ndarray) -> np.ndarray:
        """Pi v: zero out the unobserved components."""
        out = np.zeros_like(np.asarray(v, dtype=float))
        out[self.observed] = v[self.observed]
        return out

    def H_matrix(self) -> np.ndarray:
        """Dense Ny x J materialization of H (for tests)."""
        H = np.zeros((self.Ny, self.J))
        H[np.arange(self.Ny), self.observed] = 1.0
        return H

    def Pi_matrix(self) -> np.ndarray:
        """Dense J x J diagonal projection Pi = H^T H."""
        d = np.zeros(self.J)
        d[self.observed] = 1.0
        return np.diag(d)


def build_observation_operator(J: int, r: float) -> ObservationOperator:
    """Construct the 2-of-3 observation pattern for dimension J = 3J'."""
    if J < 6 or J % 3 != 0:
        raise ValueError(f"J must be a multiple of 3 with J >= 6, got {J}")
    if r <= 0:
        raise ValueError(f"noise level r must be positive, got {r}")
    Jprime = J // 3
    observed = np.array([3 * b + k for b in range(Jprime) for k in (0, 1)])
    return ObservationOperator(J=J, Jprime=Jprime, Ny=2 * Jprime, r=r, observed=observed)


def observe(u: np.ndarray, op: ObservationOperator, rng: np.random.Generator) -> np.ndarray:
    """Noisy observation Hu + xi, xi ~ N(0, r^2 I_Ny), drawn from rng."""
    u = np.asarray(u, dtype=float)
    if u.shape != (op.J,):
        raise ValueError(f"state shape {u.shape} does not match J={op.J}")
    return op.apply_H(u) + op.r * rng.standard_normal(op.Ny)


def observe_exact(u: np.ndarray, op: ObservationOperator) -> np.ndarray:
    """Noiseless observation Hu."""
    u = np.asarray(u, dtype=float)
    if u.shape != (op.J,):
        raise ValueError(f"state shape {u.shape} does not match J={op.J}")
    return op.apply_H(u)


def pnorm_sq(v: np.ndarray, op: ObservationOperator) -> float:
    """Squared pi-norm ||v||^2 + ||Pi v||^2."""
    v = np.asarray(v, dtype=float)
    if v.shape != (op.J,):
        raise ValueError(f"vector shape {v.shape} does not match J={op.J}")
    return float(v @ v + v[op.observed] @ v[op.observed])
