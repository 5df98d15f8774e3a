"""Command-line entry point: render one figure from a run directory."""

from __future__ import annotations

import argparse
import sys

from .contract import ContractError
from .figures import FIGURE_KINDS, FigureSpec, StyleOptions, render

EXIT_OK = 0
EXIT_ERROR = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtcfig",
        description="Render a figure from a simulator run directory.",
    )
    parser.add_argument("kind", choices=FIGURE_KINDS, help="figure kind")
    parser.add_argument("run_dir", help="run directory (holds manifest.json)")
    parser.add_argument("out", help="output image path (e.g. figure.png)")
    parser.add_argument(
        "--dome-scale",
        choices=("linear", "log"),
        default="linear",
        help="color scale for the dome figure (default: linear)",
    )
    parser.add_argument(
        "--style-seed",
        type=int,
        default=0,
        help="seed for randomized styling; fixing it pins the output bytes",
    )
    parser.add_argument(
        "--dpi", type=int, default=150, help="raster resolution (default: 150)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        run_dir=args.run_dir,
        out_path=args.out,
        style=StyleOptions(
            seed=args.style_seed, dome_scale=args.dome_scale, dpi=args.dpi
        ),
    )
    try:
        out = render(spec)
    except (ContractError, OSError) as exc:
        print(f"dtcfig: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
