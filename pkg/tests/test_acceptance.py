"""Acceptance suite: one pass/fail line per criterion.

The twin-experiment criteria run the full reference setup (J=60, T=2000,
m=10, 5 paths, 6 cells) for five master seeds; each ordinal claim must hold
on at least 4 of the 5 to absorb sampling noise.
"""
import math

import numpy as np
import pytest

import l96enkf as lk
from l96enkf import rng as rngmod
from l96enkf.filtering import FilterConfig
from l96enkf.harness import ExperimentConfig, run_experiment, smoke_config
from l96enkf.model import ModelParams, flow
from l96enkf.obs import build_observation_operator

MASTER_SEEDS = (101, 102, 103, 104, 105)


def report(name: str, ok: bool):
    print(f"{'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


def test_equilibrium_fixed():
    ok = True
    for J in (4, 6, 60):
        for F in (0.0, 8.0):
            u = np.full(J, F)
            out = lk.step_rk4(u, ModelParams(J=J, F=F, dt=0.01))
            ok &= bool(np.abs(out - u).max() <= 1e-12)
    report("equilibrium (F,...,F) fixed by RK4 to 1e-12 per component", ok)


def test_energy_orthogonality():
    rng = np.random.default_rng(1000)
    ok = True
    for J in (4, 60):
        for _ in range(1000):
            u = rng.standard_normal(J) * 4.0
            nrm = np.linalg.norm(u)
            ok &= bool(abs(lk.bilinear(u, u) @ u) <= 1e-10 * max(nrm**3, 1e-30))
    report("energy orthogonality |<B(u,u),u>| <= 1e-10 ||u||^3", ok)


def test_rk4_order():
    J, F, t = 60, 8.0, 0.1
    u0 = F + np.random.default_rng(1001).standard_normal(J)
    ref = flow(u0, t, ModelParams(J, F, dt=0.000625))
    e1 = np.linalg.norm(flow(u0, t, ModelParams(J, F, dt=0.01)) - ref)
    e2 = np.linalg.norm(flow(u0, t, ModelParams(J, F, dt=0.005)) - ref)
    ratio = e1 / e2
    report(f"RK4 Richardson ratio {ratio:.2f} in [12, 20]", 12.0 <= ratio <= 20.0)


def test_update_form_equivalence():
    rng = np.random.default_rng(1002)
    op = build_observation_operator(12, 1.0)
    ok = True
    for _ in range(100):
        m = int(rng.choice([3, 10]))
        Zhat = rng.standard_normal((12, m)) * 3.0
        A = rng.standard_normal((12, int(rng.integers(2, 13))))
        P = A @ A.T / 12.0
        Ypert = rng.standard_normal((m, op.Ny))
        V1, _ = lk.analysis_gain_form(Zhat, Ypert, P, op)
        V2 = lk.analysis_implicit(Zhat, Ypert, P, op)
        ok &= bool(np.abs(V1 - V2).max() <= 1e-8 * max(1.0, np.abs(V1).max()))
    report("gain-form and implicit-form analyses agree to 1e-8 relative", ok)


def test_operator_norm_suite():
    rng = np.random.default_rng(1003)
    ok = True
    for _ in range(100):
        J = int(rng.integers(2, 21))
        A = rng.standard_normal((J, J))
        ok &= bool(lk.shrink_norm(A @ A.T, assume_symmetric=True) <= 1.0 + 1e-12)
    val = lk.shrink_norm(np.array([[1.0, 0.0], [2.0, 0.0]]))
    ok &= bool(abs(val - math.sqrt(5.0) / 2.0) <= 1e-12 and val > 1.0)
    report("shrink norm <= 1 on symmetric PSD; counter-example sqrt(5)/2 > 1", ok)


def test_bound_machinery():
    p = lk.BoundParams(rho=0.5, beta=0.5, c=0.5, r=1.0, alpha=2.0, tau=0.05, m=10, Ny=40)
    ok = lk.a1(0.0, p) == 0.0 and lk.b1(0.0, p) == 1.0 and lk.b2(0.0, p) == 0.0
    h = 1e-6
    slope = (4.0 * lk.b1(h, p) - lk.b1(2.0 * h, p) - 3.0 * lk.b1(0.0, p)) / (2.0 * h)
    ok &= bool(abs(slope + 1.0) <= 1e-4)
    theta = lk.theta_total(p)
    drive = 4.0 * p.n_effective * p.r**2
    seq, limit = lk.error_bound_sequence(10_000, 7.0, p)
    e = 7.0
    for n in range(1, 10_001):
        e = theta * e + drive
        ok &= bool(abs(seq[n] - e) <= 1e-12 * max(1.0, abs(e)))
    fp = drive / (1.0 - theta)
    seq_fp, _ = lk.error_bound_sequence(50, fp, p)
    ok &= bool(np.allclose(seq_fp, fp, rtol=1e-12))
    report("bound machinery: boundary values, slope -1, closed form = recursion", ok)


def test_projected_mode_locality():
    cfg = ExperimentConfig(seed=MASTER_SEEDS[0], T=200, n_paths=1)
    params = cfg.model
    op = build_observation_operator(cfg.J, cfg.r)
    truth = lk.harness.generate_truth(cfg, rngmod.substream(cfg.seed, rngmod.TRUTH_INIT))
    ys = lk.harness.generate_observations(truth, op, rngmod.substream(cfg.seed, rngmod.TRUTH_OBS))
    cell = FilterConfig(inflation_mode="projected_additive", alpha=2.0, m=cfg.m)
    rng = rngmod.substream(cfg.seed, rngmod.FILTER_PERT, 0, 0)
    E = truth[0][:, None] + rngmod.substream(cfg.seed, rngmod.FILTER_INIT, 0).standard_normal(
        (cfg.J, cfg.m)
    )
    unobserved = np.setdiff1d(np.arange(cfg.J), op.observed)
    worst = 0.0
    for n in range(len(ys)):
        Zhat = flow(E, cfg.tau, params)
        P = lk.inflate(lk.covariance(Zhat), cell, op)
        Ypert = lk.perturb_observations(ys[n], cfg.m, op, rng)
        E, _ = lk.analysis_gain_form(Zhat, Ypert, P, op)
        worst = max(worst, float(np.linalg.norm((E - Zhat)[unobserved])))
    report(f"projected-mode locality: max unobserved update {worst:.2e} <= 1e-10",
           worst <= 1e-10)


@pytest.fixture(scope="module")
def full_scale_runs():
    runs = {}
    for seed in MASTER_SEEDS:
        res = run_experiment(ExperimentConfig(seed=seed), write=False)
        runs[seed] = res.tail_means
    return runs


def _holds_on(runs, claim):
    return sum(claim(tails) for tails in runs.values())


def test_twin_experiment_proj_strong_inflation_below_bound(full_scale_runs):
    bound = ExperimentConfig().bound
    n = _holds_on(full_scale_runs, lambda t: t[("proj", 2.0)] < bound)
    report(f"twin (i): proj alpha=2.0 tail-mean < {bound:g} on {n}/5 seeds", n >= 4)


def test_twin_experiment_no_inflation_above_bound(full_scale_runs):
    bound = ExperimentConfig().bound
    n = _holds_on(
        full_scale_runs, lambda t: t[("add", 0.0)] > bound and t[("proj", 0.0)] > bound
    )
    report(f"twin (ii): both alpha=0.0 tail-means > {bound:g} on {n}/5 seeds", n >= 4)


def test_twin_experiment_small_inflation_beats_strong(full_scale_runs):
    n = _holds_on(
        full_scale_runs,
        lambda t: t[("add", 0.5)] < t[("add", 2.0)] and t[("proj", 0.5)] < t[("proj", 2.0)],
    )
    report(f"twin (iii): alpha=0.5 below alpha=2.0 within each mode on {n}/5 seeds", n >= 4)


def test_twin_experiment_modes_comparable(full_scale_runs):
    def comparable(t):
        for alpha in (0.5, 2.0):
            hi = max(t[("add", alpha)], t[("proj", alpha)])
            lo = min(t[("add", alpha)], t[("proj", alpha)])
            if hi > 3.0 * lo:
                return False
        return True

    n = _holds_on(full_scale_runs, comparable)
    report(f"twin (iv): add/proj tail-means within factor 3 at alpha > 0 on {n}/5 seeds",
           n >= 4)


def test_norm_sandwich_in_csv(tmp_path):
    cfg = smoke_config(ExperimentConfig(seed=MASTER_SEEDS[0],
                                        out_path=str(tmp_path / "mse.csv")))
    run_experiment(cfg)
    ok = True
    for line in (tmp_path / "mse.csv").read_text().strip().split("\n")[1:]:
        _, _, _, _, pn, st, _ = line.split(",")
        pn, st = float(pn), float(st)
        ok &= bool(st - 1e-12 <= pn <= 2.0 * st + 1e-12)
    report("norm sandwich mse_state <= mse_pnorm <= 2 mse_state in every record", ok)
