"""Command-line entry points: twin-experiment runs, bound sweeps, divergence-rate fits."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from . import harness, theory
from .model import ModelParams, absorbing_radius


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l96enkf",
        description="Perturbed-observation EnKF twin experiments on the Lorenz 96 model",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the twin experiment and write MSE CSVs")
    run.add_argument("--config", help="flat key=value config file")
    run.add_argument("--seed", type=int, help="master seed override")
    run.add_argument("--out", help="output CSV path override")
    run.add_argument("--mode", choices=["add", "proj", "none"], help="only cells with this mode")
    run.add_argument("--alpha", type=float, help="only cells with this inflation parameter")
    run.add_argument("--smoke", action="store_true", help="short sanity run (T=10, 1 path)")

    th = sub.add_parser("theory", help="sweep the contraction factor over (tau, alpha)")
    th.add_argument("--rho", type=float, help="absorbing radius (default sqrt(2J)|F|)")
    th.add_argument("--beta", type=float, required=True, help="divergence rate")
    th.add_argument("--c", type=float, default=2.0, help="advection estimate constant")
    th.add_argument("--r", type=float, default=1.0, help="observation noise std")
    th.add_argument("--m", type=int, default=10, help="ensemble size")
    th.add_argument("-J", type=int, default=60, help="model dimension")
    th.add_argument("-F", type=float, default=8.0, help="forcing")
    th.add_argument("--points", type=int, default=50, help="grid points per axis")
    th.add_argument("--out", default="theta_sweep.csv", help="output CSV path")

    eb = sub.add_parser("estimate-beta", help="fit the empirical divergence rate")
    eb.add_argument("-J", type=int, default=60, help="model dimension")
    eb.add_argument("-F", type=float, default=8.0, help="forcing")
    eb.add_argument("--dt", type=float, default=0.01, help="RK4 step size")
    eb.add_argument("--trials", type=int, default=10, help="perturbed trajectory pairs")
    eb.add_argument("--horizon", type=float, default=2.0, help="fit window length")
    eb.add_argument("--seed", type=int, default=0, help="RNG seed")
    return parser


def _cmd_run(args) -> int:
    cfg = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_path=args.out)
    if args.mode is not None or args.alpha is not None:
        cells = [
            (mode, alpha)
            for mode, alpha in cfg.cells
            if (args.mode is None or harness.MODE_LABELS[mode] == args.mode)
            and (args.alpha is None or alpha == args.alpha)
        ]
        if not cells:
            print("no cells match the given mode/alpha filter", file=sys.stderr)
            return 2
        cfg = replace(cfg, cells=tuple(cells))
    if args.smoke:
        cfg = harness.smoke_config(cfg)

    result = harness.run_experiment(cfg)
    print(f"wrote {cfg.out_path} and {harness._summary_path(cfg.out_path)}")
    print(f"bound 4*Ny*r^2 = {cfg.bound:g}")
    for (mode, alpha), tail in result.tail_means.items():
        print(f"  {mode} alpha={alpha:g}: tail-mean MSE = {tail:.4f}")
    return 0


def _cmd_theory(args) -> int:
    rho = args.rho if args.rho is not None else absorbing_radius(args.J, args.F)
    p = theory.BoundParams(
        rho=rho, beta=args.beta, c=args.c, r=args.r, m=args.m, Ny=2 * args.J // 3
    )
    taus = np.logspace(-6, 0, args.points)
    alphas = np.logspace(-2, 2, args.points)
    rows = theory.theta_sweep(p, taus, alphas)
    theory.write_sweep_csv(rows, args.out)
    feasible = sum(r["feasible"] for r in rows)
    print(f"wrote {args.out}: {feasible}/{len(rows)} grid points with theta < 1")
    return 0


def _cmd_estimate_beta(args) -> int:
    params = ModelParams(J=args.J, F=args.F, dt=args.dt)
    est = theory.estimate_beta(
        params, trials=args.trials, horizon=args.horizon, seed=args.seed
    )
    print(f"beta = {est.beta:.4f} (max over {args.trials} trials, spread {est.spread:.4f})")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "theory":
        return _cmd_theory(args)
    return _cmd_estimate_beta(args)


if __name__ == "__main__":
    sys.exit(main())
