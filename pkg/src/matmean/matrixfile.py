"""
Plain-text format for a pair of matrices.

::

    n 2 hermitian
    1+0i 0+0i
    0+0i -1+0i

    0+0i 1+0i
    1+0i 0+0i

The header gives the dimension and the kind. ``hermitian`` files hold H and
K directly; ``positive`` files hold positive definite X and Y, and the pair
handed to the checks is (log X, log Y). Tokens are complex numbers written as
``a+bi``; plain reals and ``i``/``j`` suffixes are accepted. The writer
emits shortest round-trip decimals, so writing and re-reading reproduces
every bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MatmeanError
from .linalg import HERMITIAN_RTOL, PD_THRESHOLD, dagger, eigvalsh, hermitian_part, mlog

KINDS = ("hermitian", "positive")


class MatrixFileError(MatmeanError, ValueError):
    """Malformed matrix file; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


@dataclass
class MatrixFile:
    n: int
    kind: str
    first: np.ndarray
    second: np.ndarray
    residuals: tuple[float, float]

    def hermitian_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """(H, K) for the checks: the symmetrized matrices, or their logarithms for ``positive`` files."""
        A = hermitian_part(self.first)
        B = hermitian_part(self.second)
        if self.kind == "positive":
            return mlog(A), mlog(B)
        return A, B


def _parse_token(tok: str, line: int, column: int) -> complex:
    text = tok[:-1] + "j" if tok[-1] in "iIjJ" else tok
    try:
        z = complex(text)
    except ValueError:
        raise MatrixFileError(f"not a complex number: {tok!r}", line, column) from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise MatrixFileError(f"non-finite entry {tok!r}", line, column)
    return z


def _tokens(line: str):
    """(1-based column, token) for each whitespace-separated token."""
    col = 0
    for tok in line.split():
        col = line.index(tok, col)
        yield col + 1, tok
        col += len(tok)


def _check_kind(M: np.ndarray, kind: str, name: str, line: int) -> float:
    residual = float(np.max(np.abs(M - dagger(M))))
    bound = HERMITIAN_RTOL * (1.0 + float(np.max(np.abs(M))))
    if residual > bound:
        raise MatrixFileError(f"matrix {name} is not Hermitian: asymmetry residual {residual:.3e}", line)
    if kind == "positive":
        w = eigvalsh(hermitian_part(M))
        if not w[-1] > PD_THRESHOLD * max(w[0], 0.0):
            raise MatrixFileError(f"matrix {name} is not positive definite: eigenvalue {float(w[-1])!r}", line)
    return residual


def parse_matrix_file(text: str) -> MatrixFile:
    """Parse the two-matrix format, validating the declared kind.

    Raises
    ------
    MatrixFileError
        On a bad header, a wrong row or column count, a non-numeric token or
        a matrix that violates its kind.
    """
    lines = text.splitlines()
    # skip leading blank lines but keep real line numbers
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx == len(lines):
        raise MatrixFileError("empty file: expected header 'n <dim> <kind>'", 1)
    header = lines[idx].split()
    hline = idx + 1
    if len(header) != 3 or header[0] != "n":
        raise MatrixFileError(f"header must be 'n <dim> <kind>', got {lines[idx].strip()!r}", hline)
    try:
        n = int(header[1])
    except ValueError:
        raise MatrixFileError(f"dimension must be an integer, got {header[1]!r}", hline) from None
    if n < 1:
        raise MatrixFileError(f"dimension must be positive, got {n}", hline)
    kind = header[2].lower()
    if kind not in KINDS:
        raise MatrixFileError(f"kind must be one of {', '.join(KINDS)}, got {header[2]!r}", hline)

    mats = []
    pos = idx + 1
    for name in ("H", "K") if kind == "hermitian" else ("X", "Y"):
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        M = np.empty((n, n), dtype=complex)
        first_line = pos + 1
        for row in range(n):
            if pos >= len(lines) or not lines[pos].strip():
                raise MatrixFileError(f"matrix {name} has {row} rows, expected {n}", pos + 1)
            toks = list(_tokens(lines[pos]))
            if len(toks) != n:
                raise MatrixFileError(f"matrix {name} row {row + 1} has {len(toks)} entries, expected {n}", pos + 1)
            for j, (col, tok) in enumerate(toks):
                M[row, j] = _parse_token(tok, pos + 1, col)
            pos += 1
        if pos < len(lines) and lines[pos].strip():
            raise MatrixFileError(f"matrix {name} has more than {n} rows", pos + 1)
        mats.append((M, name, first_line))
    rest = [k for k in range(pos, len(lines)) if lines[k].strip()]
    if rest:
        raise MatrixFileError("unexpected content after the second matrix", rest[0] + 1)

    residuals = tuple(_check_kind(M, kind, name, line) for M, name, line in mats)
    return MatrixFile(n, kind, mats[0][0], mats[1][0], residuals)


def read_matrix_file(path) -> MatrixFile:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix_file(fh.read())


def format_complex(z: complex) -> str:
    """``a+bi`` with shortest round-trip decimals for both parts."""
    re, im = repr(float(z.real)), repr(float(z.imag))
    sign = "" if im.startswith("-") else "+"
    return f"{re}{sign}{im}i"


def format_matrix_file(first, second, kind: str = "hermitian") -> str:
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {', '.join(KINDS)}")
    first = np.asarray(first, dtype=complex)
    second = np.asarray(second, dtype=complex)
    if first.shape != second.shape or first.ndim != 2 or first.shape[0] != first.shape[1]:
        raise DomainError(f"need two square matrices of equal size, got {first.shape} and {second.shape}")
    if not (np.all(np.isfinite(first)) and np.all(np.isfinite(second))):
        raise DomainError("matrix entries must be finite")
    n = first.shape[0]
    out = [f"n {n} {kind}"]
    for i, M in enumerate((first, second)):
        if i:
            out.append("")
        out.extend(" ".join(format_complex(z) for z in row) for row in M)
    return "\n".join(out) + "\n"


def write_matrix_file(path, first, second, kind: str = "hermitian") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix_file(first, second, kind))
