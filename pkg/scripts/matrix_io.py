#!/usr/bin/env python3
"""
OpRange Matrix I/O
Reads and writes matrices as CSV, JSON or Matrix Market files.

Exact entries are written as "p/q" strings; float entries use the shortest
decimal that reads back to the same float64.
"""

import csv
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
import scipy.io

from core_linalg import EXACT, FLOAT, MODES, as_matrix, mode_of, to_fraction
from oprange_errors import InputFileError, MatrixParseError, ModeMismatch

logger = logging.getLogger(__name__)

# Configuration
FORMATS = ("csv", "json", "mtx")
SUFFIX_FORMATS = {".csv": "csv", ".json": "json", ".mtx": "mtx", ".mm": "mtx"}
MTX_BANNER = "%%MatrixMarket"


def format_entry(value: Any) -> Any:
    """JSON-ready scalar: "p/q" for rationals, the float itself otherwise"""
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def matrix_to_rows(matrix: np.ndarray) -> List[List[Any]]:
    return [[format_entry(x) for x in row] for row in matrix]


def matrix_payload(matrix: np.ndarray) -> dict:
    return {
        "rows": int(matrix.shape[0]),
        "cols": int(matrix.shape[1]),
        "mode": mode_of(matrix),
        "entries": matrix_to_rows(matrix),
    }


def detect_format(path: Path, fmt: Optional[str] = None) -> str:
    if fmt is not None:
        if fmt not in FORMATS:
            raise MatrixParseError(f"Unknown matrix format '{fmt}', expected one of {FORMATS}")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix not in SUFFIX_FORMATS:
        raise MatrixParseError(f"Cannot infer the format of '{path}' from its suffix")
    return SUFFIX_FORMATS[suffix]


def _token_mode(tokens: List[str]) -> str:
    # integers and p/q are exact; anything with a decimal point or exponent is float
    for token in tokens:
        if any(ch in token for ch in ".eE") or token.lower() in ("inf", "-inf", "nan"):
            return FLOAT
    return EXACT


def _read_text(path: Path) -> str:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return f.read()
    except FileNotFoundError as e:
        raise InputFileError(f"File not found: {path}") from e
    except OSError as e:
        raise InputFileError(f"Cannot read {path}: {e}") from e


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def parse_csv(text: str, mode: Optional[str] = None, source: str = "<csv>") -> np.ndarray:
    rows = [[cell.strip() for cell in row] for row in csv.reader(text.splitlines())]
    rows = [row for row in rows if any(row)]
    if not rows:
        raise MatrixParseError(f"{source}: no matrix rows found")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise MatrixParseError(f"{source}: rows have different lengths {sorted(widths)}")
    if any(cell == "" for row in rows for cell in row):
        raise MatrixParseError(f"{source}: empty cell")
    if mode is None:
        mode = _token_mode([cell for row in rows for cell in row])
    return as_matrix(rows, mode)


def render_csv(matrix: np.ndarray) -> str:
    lines = []
    for row in matrix:
        lines.append(",".join(str(x) if isinstance(x, Fraction) else repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def parse_json(text: str, mode: Optional[str] = None, source: str = "<json>") -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MatrixParseError(f"{source}: invalid JSON: {e}") from e
    if isinstance(data, list):
        data = {"entries": data}
    if not isinstance(data, dict) or "entries" not in data:
        raise MatrixParseError(f"{source}: expected an object with 'entries'")

    entries = data["entries"]
    rows = data.get("rows", len(entries))
    cols = data.get("cols", len(entries[0]) if entries else 0)
    if len(entries) != rows or any(not isinstance(row, list) or len(row) != cols for row in entries):
        raise MatrixParseError(f"{source}: entries do not form a {rows}x{cols} matrix")
    file_mode = data.get("mode")
    if file_mode is not None and file_mode not in MODES:
        raise MatrixParseError(f"{source}: unknown mode '{file_mode}'")
    mode = mode or file_mode
    if rows == 0 or cols == 0:
        return as_matrix(np.empty((rows, cols), dtype=object), mode or EXACT)
    return as_matrix(entries, mode)


def render_json(matrix: np.ndarray) -> str:
    return json.dumps(matrix_payload(matrix), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Matrix Market
# ---------------------------------------------------------------------------

def _mtx_header(lines: List[str], source: str) -> List[str]:
    header = lines[0].split()
    if len(header) != 5 or header[0] != MTX_BANNER or header[1].lower() != "matrix":
        raise MatrixParseError(f"{source}: missing '{MTX_BANNER} matrix' banner")
    layout, field, symmetry = (h.lower() for h in header[2:])
    if layout not in ("array", "coordinate"):
        raise MatrixParseError(f"{source}: unsupported layout '{layout}'")
    if field not in ("real", "integer", "pattern") or (field == "pattern" and layout == "array"):
        raise MatrixParseError(f"{source}: unsupported field '{field}'")
    if symmetry not in ("general", "symmetric"):
        raise MatrixParseError(f"{source}: unsupported symmetry '{symmetry}'")
    return [layout, field, symmetry]


def _parse_mtx_exact(text: str, source: str) -> np.ndarray:
    lines = [line.strip() for line in text.splitlines()]
    if not lines:
        raise MatrixParseError(f"{source}: empty file")
    layout, field, symmetry = _mtx_header(lines, source)
    body = [line for line in lines[1:] if line and not line.startswith("%")]
    if not body:
        raise MatrixParseError(f"{source}: missing size line")

    size = body[0].split()
    try:
        rows, cols = int(size[0]), int(size[1])
    except (IndexError, ValueError) as e:
        raise MatrixParseError(f"{source}: bad size line '{body[0]}'") from e
    out = as_matrix(np.full((rows, cols), 0, dtype=object), EXACT)

    if layout == "array":
        tokens = [t for line in body[1:] for t in line.split()]
        # column-major; symmetric files list the lower triangle only
        positions = [(i, j) for j in range(cols) for i in range(rows)
                     if symmetry == "general" or i >= j]
        if len(tokens) != len(positions):
            raise MatrixParseError(f"{source}: expected {len(positions)} entries, found {len(tokens)}")
        for (i, j), token in zip(positions, tokens):
            out[i, j] = to_fraction(token)
            if symmetry == "symmetric":
                out[j, i] = out[i, j]
        return out

    try:
        nnz = int(size[2])
    except (IndexError, ValueError) as e:
        raise MatrixParseError(f"{source}: coordinate size line needs three integers") from e
    entries = body[1:]
    if len(entries) != nnz:
        raise MatrixParseError(f"{source}: expected {nnz} entries, found {len(entries)}")
    for line in entries:
        parts = line.split()
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
        except (IndexError, ValueError) as e:
            raise MatrixParseError(f"{source}: bad entry line '{line}'") from e
        if not (0 <= i < rows and 0 <= j < cols):
            raise MatrixParseError(f"{source}: entry ({i + 1}, {j + 1}) outside {rows}x{cols}")
        if field == "pattern":
            value = Fraction(1)
        elif len(parts) == 3:
            value = to_fraction(parts[2])
        else:
            raise MatrixParseError(f"{source}: bad entry line '{line}'")
        out[i, j] = out[i, j] + value
        if symmetry == "symmetric" and i != j:
            out[j, i] = out[j, i] + value
    return out


def parse_mtx(path: Path, mode: Optional[str] = None) -> np.ndarray:
    """Matrix Market array or coordinate file; float unless exact mode is requested"""
    if mode == EXACT:
        return _parse_mtx_exact(_read_text(path), Path(path).name)
    if not Path(path).exists():
        raise InputFileError(f"File not found: {path}")
    try:
        matrix = scipy.io.mmread(str(path))
    except (ValueError, IndexError) as e:
        raise MatrixParseError(f"{Path(path).name}: {e}") from e
    if hasattr(matrix, "toarray"):
        matrix = matrix.toarray()
    matrix = np.asarray(matrix)
    if np.iscomplexobj(matrix):
        raise MatrixParseError(f"{Path(path).name}: complex matrices are not supported")
    return as_matrix(matrix.astype(float), FLOAT)


def render_mtx(matrix: np.ndarray) -> str:
    """Array format, column-major; exact matrices must have integer entries"""
    if mode_of(matrix) == EXACT:
        if any(x.denominator != 1 for x in matrix.flat):
            raise MatrixParseError("Matrix Market stores integer or real entries; use csv or json for rationals")
        field = "integer"
    else:
        field = "real"
    lines = [f"{MTX_BANNER} matrix array {field} general", f"{matrix.shape[0]} {matrix.shape[1]}"]
    for x in matrix.T.flat:
        lines.append(str(x) if field == "integer" else repr(float(x)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def read_matrix(path: Path, mode: Optional[str] = None, fmt: Optional[str] = None) -> np.ndarray:
    """Load a matrix; mode None keeps what the file implies"""
    if mode is not None and mode not in MODES:
        raise ModeMismatch(f"Unknown mode: {mode}")
    path = Path(path)
    fmt = detect_format(path, fmt)
    if fmt == "mtx":
        matrix = parse_mtx(path, mode)
    elif fmt == "csv":
        matrix = parse_csv(_read_text(path), mode, path.name)
    else:
        matrix = parse_json(_read_text(path), mode, path.name)
    logger.debug("read %s matrix %s from %s", mode_of(matrix), matrix.shape, path)
    return matrix


def write_matrix(path: Path, matrix: np.ndarray, fmt: Optional[str] = None) -> Path:
    path = Path(path)
    fmt = detect_format(path, fmt)
    renderers = {"csv": render_csv, "json": render_json, "mtx": render_mtx}
    text = renderers[fmt](matrix)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    logger.debug("wrote %s matrix %s to %s", mode_of(matrix), matrix.shape, path)
    return path
