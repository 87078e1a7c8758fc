#!/usr/bin/env python

"""Dense matrix files: CSV with ``a+bi`` complex entries, and MatrixMarket ``array`` format.

Both writers print 17 significant digits so that write-then-read reproduces every
entry exactly.
"""

import enum
import hashlib
import logging
import math
import re
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from hustab.numcore import Mat, as_mat

logger = logging.getLogger(__name__)

_FLOAT = r'(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?'
_ENTRY = re.compile(rf"^(?:([+-]?{_FLOAT})([+-]{_FLOAT})i|([+-]?{_FLOAT})i|([+-]?{_FLOAT}))$")


class ParseError(SyntaxError):
    """A malformed matrix file. Carries the file name, line, column and offending text."""


class MatrixFormat(enum.Enum):
    CSV = "csv"
    MM = "mm"

    @classmethod
    def infer(cls, path: Union[str, PathLike]) -> 'MatrixFormat':
        """MatrixMarket for ``.mtx`` and ``.mm`` files, CSV for anything else."""
        return cls.MM if Path(path).suffix.lower() in (".mtx", ".mm") else cls.CSV


def _error(message: str, path, line_num: int, column: int, text: str):
    raise ParseError(message, (str(path), line_num, column, text))


def parse_entry(text: str) -> complex:
    """``"1.5"``, ``"-2e-3+4i"``, ``"0.5-1i"`` or ``"3i"``; no spaces inside an entry.

    :raises ValueError: anything else
    """
    match = _ENTRY.match(text)
    if match is None:
        raise ValueError(f"Not a matrix entry: {text!r}")
    real, imag, pure_imag, pure_real = match.groups()
    if pure_real is not None:
        return complex(float(pure_real), 0.0)
    if pure_imag is not None:
        return complex(0.0, float(pure_imag))
    return complex(float(real), float(imag))


def format_entry(z: complex) -> str:
    """Inverse of :func:`parse_entry` at 17 significant digits, signed zeros included."""
    if z.imag == 0 and math.copysign(1.0, z.imag) > 0:
        return f"{z.real:.17g}"
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _read_csv(path: Path) -> Mat:
    rows: List[List[complex]] = []
    with open(path, "rt") as infh:
        for line_num, line in enumerate(infh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            row, column = [], 1
            for field in line.split(","):
                try:
                    row.append(parse_entry(field.strip()))
                except ValueError:
                    _error(f"Malformed entry {field.strip()!r}", path, line_num, column, line)
                column += len(field) + 1
            if rows and len(row) != len(rows[0]):
                _error(f"Row has {len(row)} entries, expected {len(rows[0])}", path, line_num, 1, line)
            rows.append(row)
    if not rows:
        _error("No matrix rows found", path, 1, 0, "")
    return as_mat(rows)


def _write_csv(path: Path, mat: Mat):
    if mat.size == 0:
        raise ValueError(f"CSV cannot hold an empty {mat.shape[0]}x{mat.shape[1]} matrix; use MatrixMarket")
    with open(path, "wt") as outfh:
        for row in mat:
            print(",".join(format_entry(z) for z in row), file=outfh)


def _read_mm(path: Path) -> Mat:
    with open(path, "rt") as infh:
        lines = list(enumerate(infh, start=1))
    if not lines:
        _error("Empty file", path, 1, 0, "")
    header = lines[0][1].strip()
    fields = header.lower().split()
    if len(fields) != 5 or fields[0] != "%%matrixmarket" or fields[1:3] != ["matrix", "array"] \
            or fields[3] not in ("real", "complex", "integer") or fields[4] != "general":
        _error("Expected '%%MatrixMarket matrix array real|complex|integer general'", path, 1, 0, header)
    is_complex = fields[3] == "complex"
    body = [(num, line.strip()) for num, line in lines[1:] if line.strip() and not line.lstrip().startswith("%")]
    if not body:
        _error("Missing size line", path, len(lines), 0, "")
    size_num, size_line = body[0]
    try:
        m, n = (int(x) for x in size_line.split())
    except ValueError:
        _error("Size line must hold two integers", path, size_num, 0, size_line)
    values = body[1:]
    if len(values) != m * n:
        _error(f"Expected {m * n} entries for a {m}x{n} matrix, found {len(values)}", path,
               values[-1][0] if values else size_num, 0, values[-1][1] if values else size_line)
    entries = np.zeros(m * n, dtype=complex)
    for k, (line_num, line) in enumerate(values):
        parts = line.split()
        if len(parts) != (2 if is_complex else 1):
            _error(f"Expected {2 if is_complex else 1} value(s) per line", path, line_num, 0, line)
        try:
            entries[k] = complex(float(parts[0]), float(parts[1]) if is_complex else 0.0)
        except ValueError:
            _error(f"Malformed value in {line!r}", path, line_num, 0, line)
    # array format is column-major
    return as_mat(entries.reshape((n, m)).T)


def _write_mm(path: Path, mat: Mat):
    m, n = mat.shape
    is_complex = bool(np.any((mat.imag != 0) | np.signbit(mat.imag)))
    with open(path, "wt") as outfh:
        print(f"%%MatrixMarket matrix array {'complex' if is_complex else 'real'} general", file=outfh)
        print(f"{m} {n}", file=outfh)
        for z in mat.T.reshape(-1):
            if is_complex:
                print(f"{z.real:.17g} {z.imag:.17g}", file=outfh)
            else:
                print(f"{z.real:.17g}", file=outfh)


def read_matrix(path: Union[str, PathLike], format: Optional[MatrixFormat] = None) -> Mat:
    """Read a dense matrix; ``format`` defaults to :meth:`MatrixFormat.infer`.

    :raises ParseError: malformed contents
    """
    path = Path(path)
    format = MatrixFormat(format) if format is not None else MatrixFormat.infer(path)
    mat = _read_mm(path) if format is MatrixFormat.MM else _read_csv(path)
    logger.debug("Read %dx%d matrix from %s", mat.shape[0], mat.shape[1], path)
    return mat


def write_matrix(path: Union[str, PathLike], mat, format: Optional[MatrixFormat] = None):
    """Write a dense matrix; ``format`` defaults to :meth:`MatrixFormat.infer`."""
    path = Path(path)
    mat = as_mat(mat)
    format = MatrixFormat(format) if format is not None else MatrixFormat.infer(path)
    if format is MatrixFormat.MM:
        _write_mm(path, mat)
    else:
        _write_csv(path, mat)


def digest(path: Union[str, PathLike]) -> str:
    """SHA-256 of the file contents, as recorded in reports."""
    with open(path, "rb") as infh:
        return hashlib.sha256(infh.read()).hexdigest()


@dataclass(frozen=True)
class MatrixFile:
    path: Path
    format: MatrixFormat

    @classmethod
    def of(cls, path: Union[str, PathLike], format: Optional[MatrixFormat] = None) -> 'MatrixFile':
        path = Path(path)
        return cls(path, MatrixFormat(format) if format is not None else MatrixFormat.infer(path))

    def read(self) -> Mat:
        return read_matrix(self.path, self.format)

    def write(self, mat):
        write_matrix(self.path, mat, self.format)

    def digest(self) -> str:
        return digest(self.path)
