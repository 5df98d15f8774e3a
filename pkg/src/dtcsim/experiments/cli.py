"""Command-line entry point.

    dtcsim run    --config cfg.toml --out rundir [--workers N] [--scale desk|full]
    dtcsim sweep  --config cfg.toml --out rundir ...
    dtcsim dome   --config cfg.toml --out rundir ...
    dtcsim noise  --config cfg.toml --out rundir ...
    dtcsim report --out rundir

The subcommand names the experiment family; the config's
``experiment.kind`` picks the member (``sweep`` covers phase,
amplitude, and frequency) and must belong to that family.  ``--scale
full`` raises the config to 15 spins and 50 samples per point; ``desk``
(the default) runs the config as written.

Exit codes: 0 success, 1 config error, 2 partial failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ConfigError, load_config
from .io import read_manifest
from .runner import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_PARTIAL,
    format_report,
    run_config,
)

_KINDS_BY_COMMAND = {
    "run": ("run",),
    "sweep": ("phase", "amplitude", "frequency"),
    "dome": ("dome",),
    "noise": ("noise",),
}

FULL_SCALE_SPINS = 15
FULL_SCALE_SAMPLES = 50


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtcsim",
        description="Simulate kicked spin-lock ensembles and their AC response.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, kinds in _KINDS_BY_COMMAND.items():
        p = sub.add_parser(
            name, help=f"execute a config with experiment.kind in {kinds}"
        )
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", required=True, help="run directory to write")
        p.add_argument(
            "--workers",
            type=int,
            default=None,
            help="process pool size (overrides the config)",
        )
        p.add_argument(
            "--scale",
            choices=("desk", "full"),
            default="desk",
            help="desk: config as written; full: "
            f"{FULL_SCALE_SPINS} spins, {FULL_SCALE_SAMPLES} samples",
        )

    report = sub.add_parser("report", help="summarize an existing run directory")
    report.add_argument("--out", required=True, help="run directory to read")
    return parser


def _report(out_dir: str) -> int:
    try:
        manifest = read_manifest(f"{out_dir}/manifest.json")
    except FileNotFoundError:
        print(f"error: no manifest.json under {out_dir}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    print(format_report(manifest))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "report":
        return _report(args.out)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    allowed = _KINDS_BY_COMMAND[args.command]
    if cfg.experiment_kind not in allowed:
        print(
            f"error: config key 'experiment.kind': '{cfg.experiment_kind}' "
            f"does not belong to '{args.command}' (expected one of {allowed})",
            file=sys.stderr,
        )
        return EXIT_CONFIG_ERROR

    if args.scale == "full":
        cfg = replace(
            cfg, n_spins=FULL_SCALE_SPINS, n_samples=FULL_SCALE_SAMPLES
        )

    try:
        output = run_config(cfg, args.out, workers=args.workers)
    except RuntimeError as exc:  # e.g. every sample of a dome failed
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL

    print(format_report(output.manifest))
    if output.exit_code == EXIT_PARTIAL:
        print("warning: some samples failed; see manifest.json", file=sys.stderr)
    return output.exit_code


if __name__ == "__main__":
    sys.exit(main())
