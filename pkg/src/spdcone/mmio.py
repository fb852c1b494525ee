"""Matrix Market reading and writing.

Sparse matrices travel as ``coordinate real symmetric`` files holding the
lower triangle; dense matrices as ``array real symmetric`` files holding
the lower triangle in column-major order. Values are printed with 17
significant digits so that write-then-read reproduces every float64 bit
for bit. The parser reports errors with 1-based line numbers.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .core import SpdMatrix
from .errors import ParseError

_HEADER_PREFIX = "%%MatrixMarket"


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def write_matrix(path, X: SpdMatrix) -> None:
    """Write an SPD matrix in Matrix Market format (symmetric, lower triangle)."""
    n = X.n
    with open(path, "w") as fh:
        if X.is_sparse:
            lower = X.raw().tocoo()
            mask = lower.row >= lower.col
            r, c, v = lower.row[mask], lower.col[mask], lower.data[mask]
            order = np.lexsort((r, c))
            fh.write(f"{_HEADER_PREFIX} matrix coordinate real symmetric\n")
            fh.write(f"{n} {n} {len(v)}\n")
            for i in order:
                fh.write(f"{r[i] + 1} {c[i] + 1} {_fmt(v[i])}\n")
        else:
            A = X.dense()
            fh.write(f"{_HEADER_PREFIX} matrix array real symmetric\n")
            fh.write(f"{n} {n}\n")
            for j in range(n):
                for i in range(j, n):
                    fh.write(f"{_fmt(A[i, j])}\n")


def write_symmetric(path, A) -> None:
    """Write a plain symmetric matrix (ndarray or sparse), no SPD requirement.

    Used for geodesic extrapolation outputs that may leave the cone.
    """
    n = A.shape[0]
    with open(path, "w") as fh:
        if sp.issparse(A):
            lower = sp.tril(A, format="coo")
            order = np.lexsort((lower.row, lower.col))
            fh.write(f"{_HEADER_PREFIX} matrix coordinate real symmetric\n")
            fh.write(f"{n} {n} {lower.nnz}\n")
            for i in order:
                fh.write(
                    f"{lower.row[i] + 1} {lower.col[i] + 1} {_fmt(lower.data[i])}\n"
                )
        else:
            fh.write(f"{_HEADER_PREFIX} matrix array real symmetric\n")
            fh.write(f"{n} {n}\n")
            for j in range(n):
                for i in range(j, n):
                    fh.write(f"{_fmt(A[i, j])}\n")


def read_matrix(path):
    """Read a Matrix Market file.

    Returns an ndarray for array format or a COO matrix for coordinate
    format, with symmetric/skew storage expanded to the full matrix.
    Raises :class:`ParseError` with the offending line number.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file")

    header = lines[0].split()
    if len(header) != 5 or header[0] != _HEADER_PREFIX:
        raise ParseError(path, 1, "malformed MatrixMarket header")
    _, obj, fmt, field, symmetry = (t.lower() for t in header)
    if obj != "matrix":
        raise ParseError(path, 1, f"unsupported object {obj!r}")
    if fmt not in ("coordinate", "array"):
        raise ParseError(path, 1, f"unsupported format {fmt!r}")
    if field not in ("real", "integer"):
        raise ParseError(path, 1, f"unsupported field {field!r} (need real/integer)")
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise ParseError(path, 1, f"unsupported symmetry {symmetry!r}")

    # first non-comment line after the header carries the sizes
    idx = 1
    while idx < len(lines) and (not lines[idx].strip() or lines[idx].lstrip().startswith("%")):
        idx += 1
    if idx >= len(lines):
        raise ParseError(path, len(lines), "missing size line")
    size_tokens = lines[idx].split()
    size_line = idx + 1

    if fmt == "coordinate":
        if len(size_tokens) != 3:
            raise ParseError(path, size_line, "coordinate size line needs 'rows cols nnz'")
        try:
            nrow, ncol, nnz = (int(t) for t in size_tokens)
        except ValueError:
            raise ParseError(path, size_line, "non-integer size entry") from None
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=float)
        count = 0
        for off, text in enumerate(lines[idx + 1:], start=size_line + 1):
            stripped = text.strip()
            if not stripped or stripped.startswith("%"):
                continue
            if count >= nnz:
                raise ParseError(path, off, f"more than the declared {nnz} entries")
            tokens = stripped.split()
            if len(tokens) != 3:
                raise ParseError(path, off, "entry needs 'row col value'")
            try:
                i, j = int(tokens[0]), int(tokens[1])
                v = float(tokens[2])
            except ValueError:
                raise ParseError(path, off, f"malformed entry {stripped!r}") from None
            if not (1 <= i <= nrow and 1 <= j <= ncol):
                raise ParseError(path, off, f"index ({i}, {j}) out of range")
            rows[count], cols[count], vals[count] = i - 1, j - 1, v
            count += 1
        if count != nnz:
            raise ParseError(path, len(lines), f"declared {nnz} entries, found {count}")
        A = sp.coo_matrix((vals, (rows, cols)), shape=(nrow, ncol))
        if symmetry == "symmetric":
            strict = sp.tril(A, k=-1, format="coo")
            A = (A + strict.T).tocoo()
        elif symmetry == "skew-symmetric":
            strict = sp.tril(A, k=-1, format="coo")
            A = (A - strict.T).tocoo()
        return A

    if len(size_tokens) != 2:
        raise ParseError(path, size_line, "array size line needs 'rows cols'")
    try:
        nrow, ncol = (int(t) for t in size_tokens)
    except ValueError:
        raise ParseError(path, size_line, "non-integer size entry") from None
    if symmetry == "general":
        expected = nrow * ncol
    else:
        if nrow != ncol:
            raise ParseError(path, size_line, "symmetric array must be square")
        expected = nrow * (nrow + 1) // 2
    values = np.empty(expected, dtype=float)
    count = 0
    for off, text in enumerate(lines[idx + 1:], start=size_line + 1):
        stripped = text.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if count >= expected:
            raise ParseError(path, off, f"more than the expected {expected} values")
        try:
            values[count] = float(stripped)
        except ValueError:
            raise ParseError(path, off, f"malformed value {stripped!r}") from None
        count += 1
    if count != expected:
        raise ParseError(path, len(lines), f"expected {expected} values, found {count}")
    A = np.zeros((nrow, ncol))
    pos = 0
    if symmetry == "general":
        for j in range(ncol):
            A[:, j] = values[pos:pos + nrow]
            pos += nrow
    else:
        sign = -1.0 if symmetry == "skew-symmetric" else 1.0
        for j in range(ncol):
            block = values[pos:pos + (nrow - j)]
            A[j:, j] = block
            A[j, j:] = sign * block
            pos += nrow - j
    return A


def read_spd(path) -> SpdMatrix:
    """Read a Matrix Market file and certify it as SPD."""
    return SpdMatrix(read_matrix(path))
