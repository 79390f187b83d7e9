"""Command line entry point.

    ftfig <figure-id> --in DIR --out FILE.{png|svg}

Exit codes: 0 on success, 2 for bad arguments or unusable inputs
(missing directory, missing artifact, missing column, bad format).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import FigureInputError
from .figures import FIGURE_IDS, render
from .style import image_format, plt, save


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftfig", description="Render figures from an ftlab run directory."
    )
    parser.add_argument("figure", choices=FIGURE_IDS, help="which figure to render")
    parser.add_argument(
        "--in", dest="indir", required=True, metavar="DIR",
        help="run directory holding the scenario subdirectories",
    )
    parser.add_argument(
        "--out", dest="out", required=True, metavar="FILE",
        help="output image path ending in .png or .svg",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        image_format(out)  # reject bad extensions before doing any work
        fig = render(args.figure, Path(args.indir))
        save(fig, out)
        plt.close(fig)
    except FigureInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
