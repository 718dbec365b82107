"""Render simulator CSV outputs into figure files.

Usage:
    esst-render --figure fig5 --in results/ --out fig5.png

Exit codes: 0 success, 2 schema/usage error.  Output bytes are deterministic
for identical inputs (fixed backend, no embedded timestamps).
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figplots"

from .figures import build_figure
from .schema import PlotJob, SchemaError

EXIT_OK = 0
EXIT_SCHEMA = 2


def render(job: PlotJob) -> str:
    """Build and save one figure; returns the output path."""
    fig = build_figure(job)
    metadata = None
    if job.output_path.lower().endswith(".svg"):
        metadata = {"Date": None}
    fig.savefig(job.output_path, dpi=150, metadata=metadata)
    return job.output_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esst-render", description="Render simulator CSVs into figures"
    )
    parser.add_argument("--figure", required=True, help="figure id (fig2 ... fig8)")
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="directory holding the figure's CSV files")
    parser.add_argument("--out", dest="output_path", required=True,
                        help="output image path (.png or .svg)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = PlotJob(args.figure, args.input_dir, args.output_path)
        path = render(job)
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
