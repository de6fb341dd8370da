"""CLI: render the MSE figure from harness CSV outputs."""
from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="l96plots", description="Render MSE-vs-step figures from l96enkf CSVs"
    )
    parser.add_argument("mse_csv", help="long-format MSE CSV from the run harness")
    parser.add_argument("-o", "--out", default="mse.png", help="output image path")
    parser.add_argument("--summary", help="summary CSV providing the bound line")
    parser.add_argument("--bound", type=float, help="bound line level (overrides summary)")
    parser.add_argument("--title", help="figure title")
    args = parser.parse_args(argv)

    spec = PlotSpec(
        mse_csv=args.mse_csv,
        out_path=args.out,
        summary_csv=args.summary,
        bound_value=args.bound,
        title=args.title,
    )
    try:
        out = render(spec)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
