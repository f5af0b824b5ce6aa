"""Sparse CSR storage, matrix products, Matrix Market I/O and a test-problem
generator.

All scalars are complex double precision; real input embeds trivially.
Matrices are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import DimensionError, MatrixMarketError

COMPLEX = np.complex128


@dataclass(frozen=True)
class SparseMatrix:
    """Sparse matrix in compressed sparse row form over complex scalars.

    Column indices are strictly increasing within each row and duplicate
    entries have been summed; use :meth:`from_coo` to canonicalize
    arbitrary triplet input.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        offs = np.asarray(self.row_offsets, dtype=np.int64)
        cols = np.asarray(self.col_indices, dtype=np.int64)
        vals = np.asarray(self.values, dtype=COMPLEX)
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise DimensionError("matrix dimensions must be positive")
        if offs.shape != (self.n_rows + 1,):
            raise DimensionError("row_offsets must have length n_rows + 1")
        if offs[0] != 0 or offs[-1] != len(vals) or np.any(np.diff(offs) < 0):
            raise DimensionError("row_offsets must be non-decreasing from 0 to nnz")
        if len(cols) != len(vals):
            raise DimensionError("col_indices and values must have equal length")
        if len(cols) and (cols.min() < 0 or cols.max() >= self.n_cols):
            raise DimensionError("column index out of range")
        for r in range(self.n_rows):
            seg = cols[offs[r]:offs[r + 1]]
            if len(seg) > 1 and np.any(np.diff(seg) <= 0):
                raise DimensionError(f"row {r}: column indices not strictly increasing")
        object.__setattr__(self, "row_offsets", offs)
        object.__setattr__(self, "col_indices", cols)
        object.__setattr__(self, "values", vals)
        csr = scipy.sparse.csr_matrix(
            (vals, cols, offs), shape=(self.n_rows, self.n_cols))
        object.__setattr__(self, "_csr", csr)
        object.__setattr__(self, "_fro", float(np.linalg.norm(vals)))

    @property
    def nnz(self):
        return len(self.values)

    @property
    def frobenius_norm(self):
        return self._fro

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, vals):
        """Build from triplets; duplicates are summed, indices sorted."""
        coo = scipy.sparse.coo_matrix(
            (np.asarray(vals, dtype=COMPLEX),
             (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
            shape=(n_rows, n_cols))
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(n_rows, n_cols, csr.indptr.astype(np.int64),
                   csr.indices.astype(np.int64), csr.data.astype(COMPLEX))

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr, dtype=COMPLEX)
        rows, cols = np.nonzero(arr)
        return cls.from_coo(arr.shape[0], arr.shape[1], rows, cols, arr[rows, cols])

    @classmethod
    def identity(cls, n):
        return cls.diagonal(np.ones(n))

    @classmethod
    def diagonal(cls, diag):
        diag = np.asarray(diag, dtype=COMPLEX)
        n = len(diag)
        return cls.from_coo(n, n, np.arange(n), np.arange(n), diag)

    def to_dense(self):
        return np.asarray(self._csr.todense(), dtype=COMPLEX)


def matvec(a: SparseMatrix, x):
    """Sparse product ``y = A x`` with row-wise left-to-right accumulation."""
    x = np.asarray(x)
    if x.ndim != 1 or len(x) != a.n_cols:
        raise DimensionError(f"matvec: operand has length {x.shape}, "
                             f"matrix has {a.n_cols} columns")
    return a._csr @ x.astype(COMPLEX, copy=False)


def block_matvec(a: SparseMatrix, x):
    """Column-by-column sparse product of a block of vectors.

    Column i of the result is bit-identical to ``matvec(a, x[:, i])``.
    Counts as one block product and ``x.shape[1]`` single products in
    solver instrumentation.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != a.n_cols:
        raise DimensionError(f"block_matvec: block has shape {x.shape}, "
                             f"matrix has {a.n_cols} columns")
    out = np.empty((a.n_rows, x.shape[1]), dtype=COMPLEX)
    for i in range(x.shape[1]):
        out[:, i] = matvec(a, x[:, i])
    return out


def add_shift(a: SparseMatrix, sigma) -> SparseMatrix:
    """Return the explicitly shifted matrix ``A + sigma * I``."""
    if a.n_rows != a.n_cols:
        raise DimensionError("add_shift requires a square matrix")
    n = a.n_rows
    rows = np.concatenate([np.repeat(np.arange(n), np.diff(a.row_offsets)),
                           np.arange(n)])
    cols = np.concatenate([a.col_indices, np.arange(n)])
    vals = np.concatenate([a.values, np.full(n, sigma, dtype=COMPLEX)])
    return SparseMatrix.from_coo(n, n, rows, cols, vals)


@dataclass(frozen=True)
class ShiftedFamily:
    """A family of systems ``(A + sigma_i I) x_i = b_i`` sharing one matrix.

    ``shifts`` plays the role of the diagonal coupling of the equivalent
    Sylvester formulation ``A X + X diag(shifts) = B``.  Duplicate shifts
    are rejected: silently merging them would desynchronize the pairing of
    shifts with right-hand-side columns.
    """

    matrix: SparseMatrix
    shifts: np.ndarray
    rhs: np.ndarray
    initial_guess: np.ndarray

    def __post_init__(self):
        a = self.matrix
        if a.n_rows != a.n_cols:
            raise DimensionError("family matrix must be square")
        shifts = np.atleast_1d(np.asarray(self.shifts, dtype=COMPLEX))
        rhs = np.asarray(self.rhs, dtype=COMPLEX)
        if rhs.ndim == 1:
            rhs = rhs[:, None]
        ell = len(shifts)
        if ell < 1:
            raise DimensionError("at least one shift is required")
        if len(set(shifts.tolist())) != ell:
            raise DimensionError("duplicate shifts are rejected")
        if rhs.shape != (a.n_rows, ell):
            raise DimensionError(f"rhs must be {a.n_rows} x {ell}, got {rhs.shape}")
        x0 = self.initial_guess
        if x0 is None:
            x0 = np.zeros((a.n_rows, ell), dtype=COMPLEX)
        else:
            x0 = np.asarray(x0, dtype=COMPLEX)
            if x0.ndim == 1:
                x0 = x0[:, None]
            if x0.shape != rhs.shape:
                raise DimensionError("initial guess shape must match rhs")
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "initial_guess", x0)

    @property
    def n_shifts(self):
        return len(self.shifts)

    @property
    def n(self):
        return self.matrix.n_rows

    def residual_block(self, x):
        """``B - A X - X D`` for the current approximation block ``x``."""
        x = np.asarray(x, dtype=COMPLEX)
        return self.rhs - block_matvec(self.matrix, x) - x * self.shifts[None, :]


def generate_convection_diffusion(grid_m: int, convection: float) -> SparseMatrix:
    """Five-point finite differences for ``-laplace(u) + convection * u_x``
    on the unit square with homogeneous Dirichlet boundary.

    Returns the (grid_m**2) x (grid_m**2) operator on the interior grid,
    scaled by 1/h**2 with h = 1/(grid_m+1).  Nonsymmetric for nonzero
    convection (centered first-order differences), positive real for any
    convection strength since the convective part is skew-symmetric.
    """
    m = int(grid_m)
    if m < 2:
        raise DimensionError("grid_m must be at least 2")
    h_inv = float(m + 1)
    diag = 4.0 * h_inv * h_inv
    off = -h_inv * h_inv
    east = off + convection * h_inv / 2.0
    west = off - convection * h_inv / 2.0
    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    for i in range(m):          # grid row (y direction)
        for j in range(m):      # grid column (x direction)
            k = i * m + j
            put(k, k, diag)
            if j > 0:
                put(k, k - 1, west)
            if j < m - 1:
                put(k, k + 1, east)
            if i > 0:
                put(k, k - m, off)
            if i < m - 1:
                put(k, k + m, off)
    return SparseMatrix.from_coo(m * m, m * m, rows, cols, vals)


# ---------------------------------------------------------------------------
# Matrix Market exchange format
# ---------------------------------------------------------------------------

def _mm_header(line, path):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket":
        raise MatrixMarketError(f"{path}: not a Matrix Market header", line=1)
    obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object '{obj}'", line=1)
    if field == "pattern":
        raise MatrixMarketError("pattern field is not supported", line=1)
    if field not in ("real", "integer", "complex"):
        raise MatrixMarketError(f"unsupported field '{field}'", line=1)
    return fmt, field, symmetry


def _mm_data_lines(handle):
    """Yield (line_number, stripped_text) skipping comments and blanks.

    The header line has already been consumed, so numbering starts at 2.
    """
    for lineno, raw in enumerate(handle, start=2):
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        yield lineno, text


def _parse_value(tokens, field, lineno):
    try:
        if field == "complex":
            if len(tokens) != 2:
                raise ValueError
            return complex(float(tokens[0]), float(tokens[1]))
        if len(tokens) != 1:
            raise ValueError
        return complex(float(tokens[0]), 0.0)
    except ValueError:
        raise MatrixMarketError(
            f"expected a {field} value, got {' '.join(tokens)!r}", line=lineno)


def read_matrix_market(path) -> SparseMatrix:
    """Read a coordinate Matrix Market file.

    Symmetric storage is expanded to general, 1-based indices become
    0-based and duplicate entries are summed.  Malformed input raises
    :class:`MatrixMarketError` with the offending line number.
    """
    with open(path, "r", encoding="ascii") as handle:
        fmt, field, symmetry = _mm_header(handle.readline(), path)
        if fmt != "coordinate":
            raise MatrixMarketError(
                f"expected coordinate format, got '{fmt}'", line=1)
        if symmetry not in ("general", "symmetric"):
            raise MatrixMarketError(
                f"unsupported symmetry '{symmetry}'", line=1)
        lines = _mm_data_lines(handle)
        try:
            lineno, text = next(lines)
        except StopIteration:
            raise MatrixMarketError("missing size line", line=1)
        parts = text.split()
        if len(parts) != 3:
            raise MatrixMarketError("size line must be 'rows cols nnz'", line=lineno)
        try:
            n_rows, n_cols, nnz = (int(p) for p in parts)
        except ValueError:
            raise MatrixMarketError("size line must contain integers", line=lineno)
        if n_rows <= 0 or n_cols <= 0 or nnz < 0:
            raise MatrixMarketError("size line entries out of range", line=lineno)
        rows, cols, vals = [], [], []
        count = 0
        for lineno, text in lines:
            parts = text.split()
            if len(parts) < 3:
                raise MatrixMarketError("entry must be 'i j value'", line=lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise MatrixMarketError("indices must be integers", line=lineno)
            if not (1 <= i <= n_rows) or not (1 <= j <= n_cols):
                raise MatrixMarketError(
                    f"index ({i}, {j}) outside {n_rows} x {n_cols}", line=lineno)
            v = _parse_value(parts[2:], field, lineno)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            if symmetry == "symmetric" and i != j:
                rows.append(j - 1)
                cols.append(i - 1)
                vals.append(v)
            count += 1
        if count != nnz:
            raise MatrixMarketError(
                f"expected {nnz} entries, found {count}", line=lineno if count else 1)
    return SparseMatrix.from_coo(n_rows, n_cols, rows, cols, vals)


def _format_value(v, field):
    if field == "complex":
        return f"{v.real:.17g} {v.imag:.17g}"
    return f"{v.real:.17g}"


def write_matrix_market(path, a: SparseMatrix):
    """Write a matrix in coordinate general format (real if purely real)."""
    field = "real" if np.all(a.values.imag == 0.0) else "complex"
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"%%MatrixMarket matrix coordinate {field} general\n")
        handle.write(f"{a.n_rows} {a.n_cols} {a.nnz}\n")
        for r in range(a.n_rows):
            for p in range(a.row_offsets[r], a.row_offsets[r + 1]):
                handle.write(f"{r + 1} {a.col_indices[p] + 1} "
                             f"{_format_value(a.values[p], field)}\n")


def read_dense_matrix_market(path) -> np.ndarray:
    """Read a dense Matrix Market array file as an n x k complex block."""
    with open(path, "r", encoding="ascii") as handle:
        fmt, field, symmetry = _mm_header(handle.readline(), path)
        if fmt != "array":
            raise MatrixMarketError(f"expected array format, got '{fmt}'", line=1)
        if symmetry != "general":
            raise MatrixMarketError(
                f"unsupported symmetry '{symmetry}' for arrays", line=1)
        lines = _mm_data_lines(handle)
        try:
            lineno, text = next(lines)
        except StopIteration:
            raise MatrixMarketError("missing size line", line=1)
        parts = text.split()
        if len(parts) != 2:
            raise MatrixMarketError("size line must be 'rows cols'", line=lineno)
        n_rows, n_cols = int(parts[0]), int(parts[1])
        data = np.empty(n_rows * n_cols, dtype=COMPLEX)
        k = 0
        for lineno, text in lines:
            if k >= len(data):
                raise MatrixMarketError("more entries than rows * cols", line=lineno)
            data[k] = _parse_value(text.split(), field, lineno)
            k += 1
        if k != len(data):
            raise MatrixMarketError(
                f"expected {len(data)} entries, found {k}", line=lineno if k else 1)
    return data.reshape((n_cols, n_rows)).T  # file order is column major


def write_dense_matrix_market(path, x):
    """Write a dense block in array general format (column major)."""
    x = np.asarray(x, dtype=COMPLEX)
    if x.ndim == 1:
        x = x[:, None]
    field = "real" if np.all(x.imag == 0.0) else "complex"
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"%%MatrixMarket matrix array {field} general\n")
        handle.write(f"{x.shape[0]} {x.shape[1]}\n")
        for j in range(x.shape[1]):
            for i in range(x.shape[0]):
                handle.write(_format_value(x[i, j], field) + "\n")
