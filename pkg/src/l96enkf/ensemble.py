"""Ensemble statistics: mean, perturbations, unbiased covariance, l2 ensemble norm.

An ensemble of m states of dimension J is a (J, m) array whose columns are
the members.
"""
from __future__ import annotations

import numpy as np


def _check(E: np.ndarray, min_members: int = 1) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    if E.ndim != 2:
        raise ValueError(f"ensemble must be a (J, m) array, got shape {E.shape}")
    if E.shape[1] < min_members:
        raise ValueError(f"need at least {min_members} members, got {E.shape[1]}")
    return E


def ens_mean(E: np.ndarray) -> np.ndarray:
    """Arithmetic mean over members."""
    return _check(E).mean(axis=1)


def perturbations(E: np.ndarray) -> np.ndarray:
    """Members with the ensemble mean removed; columns sum to zero."""
    E = _check(E)
    return E - E.mean(axis=1, keepdims=True)


def covariance(E: np.ndarray) -> np.ndarray:
    """Unbiased ensemble covariance dV dV^T / (m - 1), symmetrized."""
    E = _check(E, min_members=2)
    dV = perturbations(E)
    C = dV @ dV.T / (E.shape[1] - 1)
    return 0.5 * (C + C.T)


def ensemble_norm(E: np.ndarray) -> float:
    """Root-mean-square member norm: Frobenius norm divided by sqrt(m)."""
    E = _check(E)
    return float(np.linalg.norm(E) / np.sqrt(E.shape[1]))
