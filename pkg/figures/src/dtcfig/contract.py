"""Readers for the versioned run-directory file contract.

A run directory is the output of the simulator CLI: ``manifest.json``
plus one or more CSV files.  Every CSV starts with a ``# <format>``
line naming its format version, followed by ``# key = value`` metadata
lines and a column-name row.  This module parses those files from the
bytes alone; it has no in-process coupling to the simulator.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

MANIFEST_FORMAT = "dtc-run v1"
SUMMARY_FORMAT = "dtc-summary v1"
DEMOD_FORMAT = "dtc-demod v1"
TRACE_FORMAT = "dtc-trace v1"
DOME_FORMAT = "dtc-dome v1"


class ContractError(ValueError):
    """A run directory or file does not match the file contract."""


@dataclass
class Table:
    """One parsed contract CSV: format line, metadata, columns, rows."""

    path: Path
    format: str
    meta: dict[str, str] = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)

    def column(self, name: str) -> list[str]:
        """Raw cells of one column; raises naming the column if absent."""
        if name not in self.columns:
            raise ContractError(
                f"{self.path.name} is missing column {name!r}"
                f" (has: {', '.join(self.columns)})"
            )
        idx = self.columns.index(name)
        out = []
        for row in self.rows:
            if idx >= len(row):
                raise ContractError(
                    f"{self.path.name} has a short row: column {name!r} absent"
                )
            out.append(row[idx])
        return out

    def floats(self, name: str) -> list[float | None]:
        """One column as floats, with empty cells mapped to None."""
        out: list[float | None] = []
        for cell in self.column(name):
            if cell == "":
                out.append(None)
                continue
            try:
                out.append(float(cell))
            except ValueError as exc:
                raise ContractError(
                    f"{self.path.name}: column {name!r} holds"
                    f" non-numeric cell {cell!r}"
                ) from exc
        return out

    def strings(self, name: str) -> list[str]:
        return self.column(name)


def read_table(path: Path, expected_format: str) -> Table:
    """Parse one contract CSV and check its format line."""
    path = Path(path)
    if not path.is_file():
        raise ContractError(f"expected file {path} is missing")
    with path.open(newline="") as handle:
        lines = handle.read().splitlines()

    meta: dict[str, str] = {}
    body_start = 0
    fmt = None
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        text = line.lstrip("#").strip()
        if fmt is None:
            fmt = text
        elif " = " in text:
            key, value = text.split(" = ", 1)
            meta[key.strip()] = value.strip()
    else:
        body_start = len(lines)

    if fmt != expected_format:
        raise ContractError(
            f"{path.name}: format line says {fmt!r}, expected {expected_format!r}"
        )

    body = list(csv.reader(lines[body_start:]))
    if not body:
        raise ContractError(f"{path.name} has no column row")
    columns, rows = body[0], [row for row in body[1:] if row]
    return Table(path=path, format=fmt, meta=meta, columns=columns, rows=rows)


def load_manifest(run_dir: Path) -> dict:
    """Load and validate ``manifest.json`` from a run directory."""
    run_dir = Path(run_dir)
    path = run_dir / "manifest.json"
    if not path.is_file():
        raise ContractError(
            f"{run_dir} has no manifest.json; not a run directory"
        )
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path} is not valid JSON: {exc}") from exc
    fmt = manifest.get("format")
    if fmt != MANIFEST_FORMAT:
        raise ContractError(
            f"{path.name}: format says {fmt!r}, expected {MANIFEST_FORMAT!r}"
        )
    return manifest


def read_summary(run_dir: Path) -> Table:
    return read_table(Path(run_dir) / "summary.csv", SUMMARY_FORMAT)


def read_demod(run_dir: Path) -> Table:
    return read_table(Path(run_dir) / "demod.csv", DEMOD_FORMAT)


def read_trace(path: Path) -> Table:
    return read_table(Path(path), TRACE_FORMAT)


def read_dome(path: Path) -> Table:
    return read_table(Path(path), DOME_FORMAT)
