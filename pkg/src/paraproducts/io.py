"""Plain-text formats for matrices, symbols and step functions.

Matrix CSV
    ``rows,cols`` header, one line with the two dimensions, then one line per
    matrix row in row-major order.  Values are written with ``repr`` so they
    round-trip exactly.  Fine cells are ordered as in
    :meth:`.StepFunction.vector` (axis 0 slowest).

Symbol CSV
    Header ``level,position,value`` for one parameter and
    ``level1,position1,level2,position2,value`` (and so on) for several.
    Optional ``grid1, grid2, ...`` columns hold ``0``/``1``; G0 is assumed
    when they are absent.

Function CSV
    Header ``cell,value`` (or ``cell1,cell2,value``): fine-cell indices and
    the value on that cell.  Cells not listed are zero.
"""
from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from .dyadic_grid import DyadicInterval, DyadicRectangle, Grid, Window
from .errors import ParaproductError, WindowMismatchError
from .haar_system import StepFunction
from .symbols_besov import SymbolCoefficients

__all__ = [
    "write_matrix_csv",
    "read_matrix_csv",
    "write_symbol_csv",
    "read_symbol_csv",
    "write_function_csv",
    "read_function_csv",
]


class FormatError(ParaproductError):
    """A file does not follow the documented layout."""


def _fmt(x: float) -> str:
    return repr(float(x))


def matrix_to_csv(M) -> str:
    M = np.asarray(getattr(M, "matrix", M), dtype=float)
    lines = ["rows,cols", f"{M.shape[0]},{M.shape[1]}"]
    lines += [",".join(_fmt(x) for x in row) for row in M]
    return "\n".join(lines) + "\n"


def write_matrix_csv(path, M) -> None:
    Path(path).write_text(matrix_to_csv(M))


def read_matrix_csv(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 2 or lines[0].replace(" ", "") != "rows,cols":
        raise FormatError(f"{path}: missing 'rows,cols' header")
    try:
        rows, cols = (int(x) for x in lines[1].split(","))
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if data.shape != (rows, cols) and not (rows * cols == 0 and data.size == 0):
        raise FormatError(f"{path}: header says {rows}x{cols}, found {data.shape}")
    return data.reshape(rows, cols)


def write_symbol_csv(path, alpha: SymbolCoefficients) -> None:
    n = alpha.n
    with_grid = any(I.grid != Grid.G0 for R in alpha for I in R)
    header = []
    for j in range(n):
        sfx = "" if n == 1 else str(j + 1)
        header += [f"level{sfx}", f"position{sfx}"]
        if with_grid:
            header.append(f"grid{sfx}")
    header.append("value")
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for R in sorted(alpha):
        row = []
        for I in R:
            row += [I.level, I.position] + ([int(I.grid)] if with_grid else [])
        w.writerow(row + [_fmt(alpha[R])])
    Path(path).write_text(buf.getvalue())


def read_symbol_csv(path) -> SymbolCoefficients:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "value" not in fields:
            raise FormatError(f"{path}: no 'value' column")
        if "level" in fields:
            suffixes = [""]
        else:
            suffixes = []
            while f"level{len(suffixes) + 1}" in fields:
                suffixes.append(str(len(suffixes) + 1))
        if not suffixes:
            raise FormatError(f"{path}: no level columns")
        out = {}
        try:
            for row in reader:
                axes = []
                for s in suffixes:
                    grid = Grid(int(row.get(f"grid{s}") or 0))
                    axes.append(DyadicInterval(grid, int(row[f"level{s}"]), int(row[f"position{s}"])))
                out[DyadicRectangle(tuple(axes))] = float(row["value"])
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"{path}: bad row ({exc})") from None
    return SymbolCoefficients(out, n=len(suffixes))


def write_function_csv(path, f: StepFunction) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["cell"] if f.n == 1 else [f"cell{j + 1}" for j in range(f.n)]
    w.writerow(cols + ["value"])
    for idx in zip(*np.nonzero(f.values)):
        w.writerow([int(i) for i in idx] + [_fmt(f.values[idx])])
    Path(path).write_text(buf.getvalue())


def read_function_csv(path, windows) -> StepFunction:
    windows = (windows,) if isinstance(windows, Window) else tuple(windows)
    values = np.zeros(tuple(w.n_cells for w in windows))
    n = len(windows)
    cols = ["cell"] if n == 1 else [f"cell{j + 1}" for j in range(n)]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not set(cols + ["value"]) <= set(reader.fieldnames or []):
            raise FormatError(f"{path}: expected columns {cols + ['value']}")
        try:
            for row in reader:
                idx = tuple(int(row[c]) for c in cols)
                if any(not 0 <= i < s for i, s in zip(idx, values.shape)):
                    raise WindowMismatchError(f"{path}: cell {idx} outside the window")
                values[idx] = float(row["value"])
        except ValueError as exc:
            if isinstance(exc, ParaproductError):
                raise
            raise FormatError(f"{path}: bad row ({exc})") from None
    return StepFunction(windows, values)
