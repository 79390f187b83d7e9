"""Read-only access to the CSV and JSON artifacts of a run directory.

Numeric cells round-trip through repr() on the producing side, so float()
recovers them exactly.  Empty cells mark values the producer left unset
(for example the final-step harvest); floats() maps them to nan.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FigureInputError, MissingColumnError


@dataclass(frozen=True)
class Table:
    """One CSV artifact held as raw string columns with typed accessors."""

    path: Path
    columns: dict

    def __len__(self) -> int:
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))

    def _raw(self, name: str) -> list:
        if name not in self.columns:
            raise MissingColumnError(f"{self.path.name} is missing column {name!r}")
        return self.columns[name]

    def strings(self, name: str) -> np.ndarray:
        return np.array(self._raw(name), dtype=object)

    def floats(self, name: str) -> np.ndarray:
        raw = self._raw(name)
        out = np.empty(len(raw))
        for i, cell in enumerate(raw):
            out[i] = float(cell) if cell != "" else np.nan
        return out

    def ints(self, name: str) -> np.ndarray:
        return self.floats(name).astype(int)


def read_table(path: Path, required: tuple) -> Table:
    """Load a CSV artifact, checking the header for the required columns."""
    if not path.is_file():
        raise FigureInputError(f"missing artifact {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureInputError(f"{path.name} is empty") from None
        rows = list(reader)
    missing = [name for name in required if name not in header]
    if missing:
        raise MissingColumnError(
            f"{path.name} is missing column(s) {', '.join(repr(m) for m in missing)}"
        )
    columns = {name: [row[j] for row in rows] for j, name in enumerate(header)}
    return Table(path=path, columns=columns)


def read_json(path: Path, required: tuple) -> dict:
    if not path.is_file():
        raise FigureInputError(f"missing artifact {path}")
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    missing = [name for name in required if name not in obj]
    if missing:
        raise MissingColumnError(
            f"{path.name} is missing key(s) {', '.join(repr(m) for m in missing)}"
        )
    return obj


def scenario_dir(indir: Path, name: str) -> Path:
    """The per-scenario subdirectory of a run; error if it was never run."""
    sub = Path(indir) / name
    if not sub.is_dir():
        raise FigureInputError(
            f"no {name} directory under {indir}; produce it with ftlab run first"
        )
    return sub


def pick_replicates(all_reps: np.ndarray, wanted) -> np.ndarray:
    """Sorted replicate ids to draw; an empty or None filter keeps them all."""
    present = np.unique(all_reps)
    if wanted is None or len(tuple(wanted)) == 0:
        return present
    chosen = sorted({int(r) for r in wanted})
    missing = [r for r in chosen if r not in present]
    if missing:
        raise FigureInputError(f"replicate(s) {missing} not present in the artifact")
    return np.array(chosen, dtype=present.dtype)
