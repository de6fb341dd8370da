"""Twin-experiment harness: truth generation, multi-cell filter runs, MSE CSV output."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import rng as rngmod
from .filtering import FilterConfig, FilterState, po_cycle
from .model import BlowUpError, ModelParams, absorbing_radius, step_rk4
from .obs import ObservationOperator, build_observation_operator, observe

logger = logging.getLogger(__name__)

MODE_LABELS = {"none": "none", "additive": "add", "projected_additive": "proj"}
LABEL_MODES = {v: k for k, v in MODE_LABELS.items()}

DEFAULT_CELLS = (
    ("additive", 0.0),
    ("additive", 0.5),
    ("additive", 2.0),
    ("projected_additive", 0.0),
    ("projected_additive", 0.5),
    ("projected_additive", 2.0),
)

CSV_HEADER = "mode,alpha,path,step,mse_pnorm,mse_state,mse_proj"
SUMMARY_HEADER = "mode,alpha,tail_mean_mse_pnorm,bound_4Nyr2"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full twin-experiment configuration; defaults are the reference setup."""

    J: int = 60
    F: float = 8.0
    dt: float = 0.01
    tau: float = 0.01
    r: float = 1.0
    m: int = 10
    T: int = 2000
    n_paths: int = 5
    spin_up_steps: int = 1000
    init_spread: float = 1.0
    tail_window: int = 500
    seed: int = 0
    cells: tuple[tuple[str, float], ...] = DEFAULT_CELLS
    out_path: str = "mse.csv"

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be at least 1, got {self.T}")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be at least 1, got {self.n_paths}")
        if self.F == 0.0:
            raise ValueError("F = 0 gives a zero absorbing radius; truth generation undefined")
        ratio = self.tau / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
            raise ValueError(f"tau={self.tau} must be an integer multiple of dt={self.dt}")

    @property
    def model(self) -> ModelParams:
        return ModelParams(J=self.J, F=self.F, dt=self.dt)

    @property
    def bound(self) -> float:
        """The reference bound 4 Ny r^2 (theta ignored, N reduced to Ny)."""
        return 4.0 * (2 * self.J // 3) * self.r**2


@dataclass
class CellPathResult:
    """Per-step MSEs of one (mode, alpha) cell on one sample path."""

    mode: str
    alpha: float
    path: int
    mse_pnorm: np.ndarray
    mse_state: np.ndarray
    mse_proj: np.ndarray
    blown_up: bool = False


def generate_truth(cfg: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    """Truth trajectory: spin up into the absorbing ball, then record T+1 states.

    Returns a (T+1, J) array sampled every tau; raises if any recorded state
    leaves the ball (spin-up too short).
    """
    params = cfg.model
    rho = absorbing_radius(cfg.J, cfg.F)
    u = cfg.F + rng.standard_normal(cfg.J)
    for _ in range(cfg.spin_up_steps):
        u = step_rk4(u, params)
    steps_per_obs = int(round(cfg.tau / cfg.dt))
    truth = np.empty((cfg.T + 1, cfg.J))
    truth[0] = u
    for n in range(1, cfg.T + 1):
        for _ in range(steps_per_obs):
            u = step_rk4(u, params)
        truth[n] = u
    norms = np.linalg.norm(truth, axis=1)
    if norms.max() > rho:
        bad = int(np.argmax(norms > rho))
        raise RuntimeError(
            f"truth left the absorbing ball at step {bad} "
            f"(|u|={norms[bad]:.3f} > rho={rho:.3f}); increase spin_up_steps"
        )
    return truth


def generate_observations(
    truth: np.ndarray, op: ObservationOperator, rng: np.random.Generator
) -> np.ndarray:
    """Noisy observations of truth states 1..T; shape (T, Ny)."""
    T = truth.shape[0] - 1
    ys = np.empty((T, op.Ny))
    for n in range(T):
        ys[n] = observe(truth[n + 1], op, rng)
    return ys


def _mse_triplet(E: np.ndarray, u: np.ndarray, op: ObservationOperator) -> tuple[float, float, float]:
    delta = E - u[:, None]
    sq_state = np.sum(delta**2, axis=0)
    sq_proj = np.sum(delta[op.observed] ** 2, axis=0)
    mse_state = float(sq_state.mean())
    mse_proj = float(sq_proj.mean())
    return mse_state + mse_proj, mse_state, mse_proj


def run_cell(
    cfg: ExperimentConfig,
    cell: FilterConfig,
    truth: np.ndarray,
    observations: np.ndarray,
    path: int,
    cell_index: int = 0,
) -> CellPathResult:
    """Run one filter cell over one sample path against a shared truth realization.

    The ensemble is initialized around the true initial state with isotropic
    spread; per-path randomness covers initialization and observation
    perturbations only.
    """
    params = cfg.model
    op = build_observation_operator(cfg.J, cfg.r)
    init_rng = rngmod.substream(cfg.seed, rngmod.FILTER_INIT, path)
    pert_rng = rngmod.substream(cfg.seed, rngmod.FILTER_PERT, cell_index, path)

    E0 = truth[0][:, None] + cfg.init_spread * init_rng.standard_normal((cfg.J, cfg.m))
    state = FilterState(ensemble=E0)

    T = observations.shape[0]
    mse_pnorm = np.full(T + 1, np.nan)
    mse_state = np.full(T + 1, np.nan)
    mse_proj = np.full(T + 1, np.nan)
    mse_pnorm[0], mse_state[0], mse_proj[0] = _mse_triplet(E0, truth[0], op)

    blown_up = False
    for n in range(1, T + 1):
        try:
            state = po_cycle(state, observations[n - 1], params, cell, op, pert_rng, tau=cfg.tau)
        except BlowUpError as e:
            logger.warning(
                "cell (%s, alpha=%g) path %d: %s", MODE_LABELS[cell.inflation_mode],
                cell.alpha, path, e,
            )
            blown_up = True
            mse_pnorm, mse_state, mse_proj = (a[:n] for a in (mse_pnorm, mse_state, mse_proj))
            break
        mse_pnorm[n], mse_state[n], mse_proj[n] = _mse_triplet(state.ensemble, truth[n], op)

    return CellPathResult(
        mode=MODE_LABELS[cell.inflation_mode],
        alpha=cell.alpha,
        path=path,
        mse_pnorm=mse_pnorm,
        mse_state=mse_state,
        mse_proj=mse_proj,
        blown_up=blown_up,
    )


@dataclass
class ExperimentResult:
    """All per-path series, per-cell path averages, and tail summaries."""

    cfg: ExperimentConfig
    results: list[CellPathResult]
    averages: dict[tuple[str, float], np.ndarray]
    tail_means: dict[tuple[str, float], float]


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run all cells x paths against one shared truth/observation realization.

    Writes the long-format MSE CSV plus a sidecar tail summary next to it
    (out_path with a `_summary` suffix) unless write=False.
    """
    truth = generate_truth(cfg, rngmod.substream(cfg.seed, rngmod.TRUTH_INIT))
    op = build_observation_operator(cfg.J, cfg.r)
    observations = generate_observations(truth, op, rngmod.substream(cfg.seed, rngmod.TRUTH_OBS))

    results: list[CellPathResult] = []
    for cell_index, (mode, alpha) in enumerate(cfg.cells):
        cell = FilterConfig(inflation_mode=mode, alpha=alpha, m=cfg.m, seed=cfg.seed)
        for path in range(cfg.n_paths):
            results.append(run_cell(cfg, cell, truth, observations, path, cell_index))

    averages: dict[tuple[str, float], np.ndarray] = {}
    tail_means: dict[tuple[str, float], float] = {}
    for mode, alpha in cfg.cells:
        label = MODE_LABELS[mode]
        series = [r.mse_pnorm for r in results if r.mode == label and r.alpha == alpha]
        n_min = min(len(s) for s in series)
        # fixed reduction order: sum over paths in path order, then divide
        avg = np.zeros(n_min)
        for s in series:
            avg += s[:n_min]
        avg /= len(series)
        averages[(label, alpha)] = avg
        window = min(cfg.tail_window, len(avg))
        tail_means[(label, alpha)] = float(avg[-window:].mean())

    out = ExperimentResult(cfg=cfg, results=results, averages=averages, tail_means=tail_means)
    if write:
        write_mse_csv(out, cfg.out_path)
        write_summary_csv(out, _summary_path(cfg.out_path))
    return out


def _summary_path(out_path: str) -> str:
    stem, dot, ext = out_path.rpartition(".")
    return f"{stem}_summary.{ext}" if dot else f"{out_path}_summary"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_mse_csv(result: ExperimentResult, path: str) -> None:
    """Long-format per-record CSV plus path-averaged rows (path = 'avg')."""
    lines = [CSV_HEADER]
    for r in result.results:
        for step in range(len(r.mse_pnorm)):
            lines.append(
                f"{r.mode},{r.alpha:g},{r.path},{step},"
                f"{_fmt(r.mse_pnorm[step])},{_fmt(r.mse_state[step])},{_fmt(r.mse_proj[step])}"
            )
    for (label, alpha), avg in result.averages.items():
        mses = [
            (r.mse_state, r.mse_proj)
            for r in result.results
            if r.mode == label and r.alpha == alpha
        ]
        n_min = len(avg)
        avg_state = np.zeros(n_min)
        avg_proj = np.zeros(n_min)
        for s, q in mses:
            avg_state += s[:n_min]
            avg_proj += q[:n_min]
        avg_state /= len(mses)
        avg_proj /= len(mses)
        for step in range(n_min):
            lines.append(
                f"{label},{alpha:g},avg,{step},"
                f"{_fmt(avg[step])},{_fmt(avg_state[step])},{_fmt(avg_proj[step])}"
            )
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")


def write_summary_csv(result: ExperimentResult, path: str) -> None:
    """Sidecar summary: tail-mean pi-norm MSE per cell plus the 4 Ny r^2 bound."""
    lines = [SUMMARY_HEADER]
    bound = result.cfg.bound
    for (mode, alpha), tail in result.tail_means.items():
        lines.append(f"{mode},{alpha:g},{_fmt(tail)},{_fmt(bound)}")
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")


# --- flat key-value config files -------------------------------------------

_SCALAR_FIELDS = {
    "J": int,
    "F": float,
    "dt": float,
    "tau": float,
    "r": float,
    "m": int,
    "T": int,
    "n_paths": int,
    "spin_up_steps": int,
    "init_spread": float,
    "tail_window": int,
    "seed": int,
    "out_path": str,
}


def parse_cells(text: str) -> tuple[tuple[str, float], ...]:
    """Parse a cell list like 'add:0.0,add:0.5,proj:2.0' into (mode, alpha) pairs."""
    cells = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        label, _, alpha = part.partition(":")
        if label not in LABEL_MODES:
            raise ValueError(f"unknown inflation mode label {label!r} (use add/proj/none)")
        cells.append((LABEL_MODES[label], float(alpha)))
    if not cells:
        raise ValueError("empty cell list")
    return tuple(cells)


def load_config(path: str) -> ExperimentConfig:
    """Read a flat `key = value` config file; unknown keys are rejected."""
    kwargs: dict = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, _, value = (s.strip() for s in line.partition("="))
            if key == "cells":
                kwargs["cells"] = parse_cells(value)
            elif key in _SCALAR_FIELDS:
                kwargs[key] = _SCALAR_FIELDS[key](value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return ExperimentConfig(**kwargs)


def smoke_config(base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Short sanity configuration: T=10, one path."""
    base = base or ExperimentConfig()
    return replace(base, T=10, n_paths=1, tail_window=5)
