"""Plain-text artifacts: CSV, PGM and deterministic JSON."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .cross import ProductMask
from .extremal import ScalarField
from .geometry import Grid, Mask


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _grid_header(grid: Grid) -> str:
    return ",".join([str(grid.nx), str(grid.ny), _num(grid.lower.real), _num(grid.lower.imag),
                     _num(grid.upper.real), _num(grid.upper.imag)])


def field_to_csv(field: ScalarField, path) -> None:
    """Header ``nx,ny,x0,y0,x1,y1``, then one row of values per grid row (``nan`` outside)."""
    lines = ["nx,ny,x0,y0,x1,y1", _grid_header(field.grid)]
    lines += [",".join(_num(v) for v in row) for row in field.values]
    Path(path).write_text("\n".join(lines) + "\n")


def field_from_csv(path) -> tuple[Grid, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    nx, ny, x0, y0, x1, y1 = lines[1].split(",")
    grid = Grid(complex(float(x0), float(y0)), complex(float(x1), float(y1)), int(nx), int(ny))
    values = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    return grid, values


def _pgm(gray: np.ndarray, path) -> None:
    ny, nx = gray.shape
    rows = [" ".join(str(int(v)) for v in row) for row in gray[::-1]]
    Path(path).write_text(f"P2\n{nx} {ny}\n255\n" + "\n".join(rows) + "\n")


def field_to_pgm(field: ScalarField, path) -> None:
    """Plain PGM heatmap, ``value * 255``; nodes outside the domain are black."""
    v = np.nan_to_num(np.clip(field.values, 0.0, 1.0), nan=0.0)
    _pgm(np.rint(v * 255).astype(int), path)


def mask_to_csv(mask: Mask, path) -> None:
    lines = ["nx,ny", f"{mask.grid.nx},{mask.grid.ny}"]
    lines += [",".join("1" if f else "0" for f in row) for row in mask.flags]
    Path(path).write_text("\n".join(lines) + "\n")


def mask_to_pgm(mask: Mask, path) -> None:
    _pgm(mask.flags.astype(int) * 255, path)


def _runs(row: np.ndarray) -> list[int]:
    padded = np.concatenate([[0], row.astype(np.int8), [0]])
    edges = np.flatnonzero(np.diff(padded))
    starts, stops = edges[::2], edges[1::2]
    return np.column_stack([starts, stops - starts]).ravel().tolist()


def product_mask_to_rle(mask: ProductMask, path) -> None:
    """One line per w-node: ``j,start,length,start,length,...`` over flat z-indices."""
    lines = ["n_z,n_w", f"{mask.n_z},{mask.n_w}"]
    for j in range(mask.n_w):
        lines.append(",".join(str(v) for v in [j, *_runs(mask.row(j))]))
    Path(path).write_text("\n".join(lines) + "\n")


def product_mask_from_rle(path, grid_z: Grid, grid_w: Grid) -> ProductMask:
    lines = Path(path).read_text().splitlines()[2:]
    rows = {}
    for line in lines:
        vals = [int(v) for v in line.split(",")]
        row = np.zeros(grid_z.size, dtype=bool)
        for start, length in zip(vals[1::2], vals[2::2]):
            row[start:start + length] = True
        rows[vals[0]] = row
    return ProductMask.from_rows(grid_z, grid_w, rows.__getitem__)


def _encode(obj, indent: int) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _num(x) if math.isfinite(x) else json.dumps(_num(x))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent)
    return json.dumps(str(obj))


def dumps(obj) -> str:
    """JSON text with floats written to 17 significant digits and non-finite values as strings."""
    return _encode(obj, 0) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))
