"""Render MSE-vs-step figures from l96enkf twin-experiment CSVs.

Reads only the CSV outputs (long-format MSE records plus the tail summary);
nothing is recomputed from the model.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

MSE_COLUMNS = ["mode", "alpha", "path", "step", "mse_pnorm", "mse_state", "mse_proj"]
SUMMARY_COLUMNS = ["mode", "alpha", "tail_mean_mse_pnorm", "bound_4Nyr2"]

CELL_COLORS = {
    ("add", "0"): "tab:red",
    ("add", "0.5"): "tab:orange",
    ("add", "2"): "tab:brown",
    ("proj", "0"): "tab:blue",
    ("proj", "0.5"): "tab:cyan",
    ("proj", "2"): "tab:purple",
}
_FALLBACK_COLORS = ["tab:green", "tab:pink", "tab:olive", "tab:gray"]


class SchemaError(ValueError):
    """CSV does not match the harness output schema."""


@dataclass
class PlotSpec:
    """What to render: input CSVs, output image, and the bound line level."""

    mse_csv: str
    out_path: str
    summary_csv: str | None = None
    bound_value: float | None = None
    title: str | None = None


def _check_header(header: list[str], expected: list[str], path: str) -> None:
    missing = [c for c in expected if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")


def read_mse_csv(path: str) -> dict:
    """Group mse_pnorm series by (mode, alpha) cell and path label."""
    series: dict[tuple[str, str], dict[str, list[float]]] = defaultdict(dict)
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        _check_header(reader.fieldnames or [], MSE_COLUMNS, path)
        for row in reader:
            cell = (row["mode"], row["alpha"])
            series[cell].setdefault(row["path"], []).append(float(row["mse_pnorm"]))
    return dict(series)


def read_bound(path: str) -> float:
    """The bound_4Nyr2 constant from the summary CSV (identical on each row)."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        _check_header(reader.fieldnames or [], SUMMARY_COLUMNS, path)
        values = {float(row["bound_4Nyr2"]) for row in reader}
    if len(values) != 1:
        raise SchemaError(f"{path}: expected one bound value, found {sorted(values)}")
    return values.pop()


def build_figure(spec: PlotSpec):
    """Build the MSE figure: bold per-cell averages, translucent per-path
    traces, log-scale y-axis, and a black horizontal line at the bound."""
    series = read_mse_csv(spec.mse_csv)
    bound = spec.bound_value
    if bound is None and spec.summary_csv:
        bound = read_bound(spec.summary_csv)

    fig, ax = plt.subplots(figsize=(10, 6))
    fallback = iter(_FALLBACK_COLORS * 10)
    for cell in sorted(series):
        mode, alpha = cell
        color = CELL_COLORS.get(cell) or next(fallback)
        label = f"{mode} $\\alpha$={alpha}"
        for path, values in sorted(series[cell].items()):
            if path == "avg":
                ax.plot(values, color=color, linewidth=1.8, label=label)
            else:
                ax.plot(values, color=color, linewidth=0.6, alpha=0.25)
    if bound is not None:
        ax.axhline(bound, color="black", linewidth=1.5, label=f"bound {bound:g}")
    ax.set_yscale("log")
    ax.set_xlabel("observation step")
    ax.set_ylabel("MSE")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return fig, ax


def render(spec: PlotSpec) -> str:
    """Build the figure and write it to spec.out_path."""
    fig, _ = build_figure(spec)
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
    return spec.out_path
