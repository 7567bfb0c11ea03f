"""Triplet-accumulating sparse matrix construction and small CSR algebra.

The constructor follows the semantics assembly codes rely on: triplets
with identical (row, col) are summed, input triplets whose value is
exactly 0.0 are skipped, and entries that cancel to exactly 0.0 are
dropped.  Duplicates are summed in order of appearance, which makes the
result deterministic for regression tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexRangeError, MatrixFormatError, ShapeMismatchError

_MAX_KEY = np.iinfo(np.int64).max


@dataclass
class TripletBatch:
    """Unordered (row, col, value) contributions to an nrows-by-ncols matrix."""

    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int64).ravel()
        self.cols = np.asarray(self.cols, dtype=np.int64).ravel()
        self.vals = np.asarray(self.vals, dtype=np.float64).ravel()
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ShapeMismatchError(
                f"triplet arrays have lengths {len(self.rows)}, "
                f"{len(self.cols)}, {len(self.vals)}"
            )


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Compressed sparse row matrix in canonical form.

    Within each row the column indices are strictly increasing and no
    stored value is exactly 0.0.  Instances are immutable; all operations
    return new matrices.
    """

    nrows: int
    ncols: int
    row_ptr: np.ndarray  # (nrows+1,) int64
    col_idx: np.ndarray  # (nnz,) int64
    vals: np.ndarray     # (nnz,) float64

    @property
    def nnz(self) -> int:
        return len(self.vals)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def row_indices(self) -> np.ndarray:
        """Expand row_ptr back to one row index per stored entry."""
        return np.repeat(np.arange(self.nrows, dtype=np.int64),
                         np.diff(self.row_ptr))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols))
        out[self.row_indices(), self.col_idx] = self.vals
        return out


def empty_matrix(nrows: int, ncols: int) -> SparseMatrix:
    return SparseMatrix(
        nrows, ncols,
        np.zeros(nrows + 1, dtype=np.int64),
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.float64),
    )


def _canonicalize(nrows, ncols, rows, cols, vals) -> SparseMatrix:
    """Merge unsorted triplets into canonical CSR.

    Assumes indices already validated.  Keeps only nonzero inputs, sums
    duplicates stably in order of appearance, drops exact-zero sums.
    """
    keep = vals != 0.0
    if not keep.all():
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    if len(vals) == 0:
        return empty_matrix(nrows, ncols)

    order = np.lexsort((cols, rows))  # stable: ties keep input order
    rows, cols, vals = rows[order], cols[order], vals[order]

    starts = np.empty(len(vals), dtype=bool)
    starts[0] = True
    np.logical_or(rows[1:] != rows[:-1], cols[1:] != cols[:-1], out=starts[1:])
    # bincount accumulates strictly left-to-right, so duplicates sum in
    # order of appearance with a reproducible association
    sums = np.bincount(np.cumsum(starts) - 1, weights=vals)
    starts = np.flatnonzero(starts)

    keep = sums != 0.0
    rows_u = rows[starts][keep]
    cols_u = cols[starts][keep]
    sums = sums[keep]

    row_ptr = np.zeros(nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows_u, minlength=nrows), out=row_ptr[1:])
    return SparseMatrix(nrows, ncols, row_ptr, cols_u, sums)


def sparse_from_triplets(batch: TripletBatch) -> SparseMatrix:
    """Build a canonical sparse matrix from a triplet batch."""
    bad = (batch.rows < 0) | (batch.rows >= batch.nrows)
    if bad.any():
        pos = int(np.flatnonzero(bad)[0])
        raise IndexRangeError(
            f"row index {batch.rows[pos]} at triplet {pos} outside [0, {batch.nrows})"
        )
    bad = (batch.cols < 0) | (batch.cols >= batch.ncols)
    if bad.any():
        pos = int(np.flatnonzero(bad)[0])
        raise IndexRangeError(
            f"col index {batch.cols[pos]} at triplet {pos} outside [0, {batch.ncols})"
        )
    return _canonicalize(batch.nrows, batch.ncols,
                         batch.rows, batch.cols, batch.vals)


def add(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """Entrywise sum, canonical output, exact-zero results dropped.

    Both operands are already canonical, so their (row, col) key sequences
    are sorted runs that can be merged without a fresh sort; repeated
    accumulation (matrix += batch) stays linear in the result size.
    """
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cannot add shapes {a.shape} and {b.shape}")
    if a.nnz == 0:
        return b
    if b.nnz == 0:
        return a
    if a.nrows and a.ncols > _MAX_KEY // a.nrows:
        return _canonicalize(
            a.nrows, a.ncols,
            np.concatenate([a.row_indices(), b.row_indices()]),
            np.concatenate([a.col_idx, b.col_idx]),
            np.concatenate([a.vals, b.vals]),
        )

    akey = a.row_indices() * a.ncols + a.col_idx
    bkey = b.row_indices() * b.ncols + b.col_idx
    total = a.nnz + b.nnz
    # stable merge positions: on equal keys the entries of `a` come first
    pos_a = np.arange(a.nnz, dtype=np.int64) + np.searchsorted(bkey, akey, "left")
    pos_b = np.arange(b.nnz, dtype=np.int64) + np.searchsorted(akey, bkey, "right")
    keys = np.empty(total, dtype=np.int64)
    vals = np.empty(total)
    keys[pos_a], keys[pos_b] = akey, bkey
    vals[pos_a], vals[pos_b] = a.vals, b.vals

    starts = np.empty(total, dtype=bool)
    starts[0] = True
    np.not_equal(keys[1:], keys[:-1], out=starts[1:])
    sums = np.bincount(np.cumsum(starts) - 1, weights=vals)
    keep = sums != 0.0
    keys = keys[np.flatnonzero(starts)][keep]
    sums = sums[keep]

    rows_u = keys // a.ncols
    row_ptr = np.zeros(a.nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows_u, minlength=a.nrows), out=row_ptr[1:])
    return SparseMatrix(a.nrows, a.ncols, row_ptr, keys - rows_u * a.ncols, sums)


def transpose(a: SparseMatrix) -> SparseMatrix:
    return _canonicalize(a.ncols, a.nrows, a.col_idx.copy(),
                         a.row_indices(), a.vals.copy())


def max_abs_diff(a: SparseMatrix, b: SparseMatrix) -> float:
    """max |a_ij - b_ij| over the union of both sparsity patterns."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cannot compare shapes {a.shape} and {b.shape}")
    diff = _canonicalize(
        a.nrows, a.ncols,
        np.concatenate([a.row_indices(), b.row_indices()]),
        np.concatenate([a.col_idx, b.col_idx]),
        np.concatenate([a.vals, -b.vals]),
    )
    if diff.nnz == 0:
        return 0.0
    return float(np.abs(diff.vals).max())


def max_abs(a: SparseMatrix) -> float:
    """Largest entry magnitude; 0.0 for an empty matrix."""
    return float(np.abs(a.vals).max()) if a.nnz else 0.0


# ---------------------------------------------------------------------------
# MatrixMarket coordinate I/O (real general, one-based indices on disk)

_MM_HEADER = "%%MatrixMarket matrix coordinate real general"


def write_matrixmarket(a: SparseMatrix, path) -> None:
    with open(path, "w") as f:
        f.write(_MM_HEADER + "\n")
        f.write(f"{a.nrows} {a.ncols} {a.nnz}\n")
        rows = a.row_indices()
        for i, j, v in zip(rows, a.col_idx, a.vals):
            f.write(f"{i + 1} {j + 1} {v:.17g}\n")


def read_matrixmarket(path) -> SparseMatrix:
    with open(path) as f:
        header = f.readline().strip()
        if header.split() != _MM_HEADER.split():
            raise MatrixFormatError(f"{path}: unsupported header {header!r}")
        size_line = None
        entries = []
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            if size_line is None:
                size_line = line.split()
                continue
            entries.append((lineno, line.split()))
    if size_line is None:
        raise MatrixFormatError(f"{path}: missing size line")
    try:
        nrows, ncols, nnz = (int(t) for t in size_line)
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: bad size line") from exc
    if len(entries) != nnz:
        raise MatrixFormatError(
            f"{path}: size line declares {nnz} entries, found {len(entries)}"
        )

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    for pos, (lineno, parts) in enumerate(entries):
        if len(parts) != 3:
            raise MatrixFormatError(f"{path}:{lineno}: expected 'i j value'")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise MatrixFormatError(f"{path}:{lineno}: bad record") from exc
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixFormatError(
                f"{path}:{lineno}: one-based index ({i}, {j}) outside "
                f"{nrows}x{ncols}"
            )
        rows[pos], cols[pos], vals[pos] = i - 1, j - 1, v
    return _canonicalize(nrows, ncols, rows, cols, vals)
