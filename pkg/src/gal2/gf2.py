"""Dense bit-packed linear algebra over GF(2).

Rows are packed little-endian into uint64 words (column j lives in word
j // 64, bit j % 64).  Elimination works word-wide: a row operation is a
single vectorized XOR across the packed row.  Pivoting is deterministic
(first nonzero column, lowest row), so echelon forms, kernel bases and
solutions are reproducible.

All BitMatrix values are treated as immutable after construction; every
public operation returns fresh storage.
"""

from __future__ import annotations

import numpy as np

WORD = 64


def _nwords(cols: int) -> int:
    return max(1, (cols + WORD - 1) // WORD)


def _pad_mask(cols: int) -> int:
    r = cols % WORD
    return (1 << r) - 1 if r else (1 << WORD) - 1


class BitMatrix:
    """A rows x cols matrix over GF(2), rows packed into uint64 words."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray):
        assert data.shape == (rows, _nwords(cols)) and data.dtype == np.uint64
        self.rows = rows
        self.cols = cols
        self.data = data

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zeros(rows: int, cols: int) -> "BitMatrix":
        return BitMatrix(rows, cols, np.zeros((rows, _nwords(cols)), dtype=np.uint64))

    @staticmethod
    def identity(n: int) -> "BitMatrix":
        m = BitMatrix.zeros(n, n)
        for i in range(n):
            m.data[i, i // WORD] = np.uint64(1) << np.uint64(i % WORD)
        return m

    @staticmethod
    def from_dense(arr) -> "BitMatrix":
        """Build from an array-like of 0/1 entries (shape rows x cols)."""
        a = np.asarray(arr, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        rows, cols = a.shape
        w = _nwords(cols)
        padded = np.zeros((rows, w * WORD), dtype=np.uint8)
        padded[:, :cols] = a
        packed = np.packbits(padded, axis=1, bitorder="little")
        return BitMatrix(rows, cols, packed.view(np.uint64).reshape(rows, w).copy())

    @staticmethod
    def from_rows(rows_as_ints, cols: int) -> "BitMatrix":
        """Build from an iterable of Python ints, bit j = entry j."""
        rows_as_ints = list(rows_as_ints)
        m = BitMatrix.zeros(len(rows_as_ints), cols)
        w = m.data.shape[1]
        for i, r in enumerate(rows_as_ints):
            if r < 0 or r >> cols:
                raise ValueError("row value out of range for given cols")
            for j in range(w):
                m.data[i, j] = (r >> (WORD * j)) & 0xFFFFFFFFFFFFFFFF
        return m

    @staticmethod
    def from_strings(rows: list[str]) -> "BitMatrix":
        """Build from '0'/'1' strings, one per row."""
        if not rows:
            return BitMatrix.zeros(0, 0)
        cols = len(rows[0])
        dense = [[1 if ch == "1" else 0 for ch in r] for r in rows]
        if any(len(r) != cols for r in dense):
            raise ValueError("ragged rows")
        return BitMatrix.from_dense(dense)

    # -- conversions -------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        bits = np.unpackbits(self.data.view(np.uint8), axis=1, bitorder="little")
        return bits[:, : self.cols].copy()

    def row_int(self, i: int) -> int:
        acc = 0
        for j in range(self.data.shape[1] - 1, -1, -1):
            acc = (acc << WORD) | int(self.data[i, j])
        return acc

    def row_ints(self) -> list[int]:
        return [self.row_int(i) for i in range(self.rows)]

    def get(self, i: int, j: int) -> int:
        return int((self.data[i, j // WORD] >> np.uint64(j % WORD)) & np.uint64(1))

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.data.copy())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols})"

    def padding_clean(self) -> bool:
        """True when all padding bits beyond `cols` are zero."""
        if self.cols % WORD == 0 and self.cols > 0:
            return True
        mask = np.uint64(_pad_mask(self.cols))
        if self.data.shape[1] == 0:
            return True
        return bool(np.all(self.data[:, -1] & ~mask == 0))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return BitMatrix(self.rows, self.cols, self.data ^ other.data)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        """Matrix product over GF(2)."""
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = np.zeros((self.rows, other.data.shape[1]), dtype=np.uint64)
        bits = self.to_dense()
        for i in range(self.rows):
            idx = np.nonzero(bits[i])[0]
            if idx.size:
                out[i] = np.bitwise_xor.reduce(other.data[idx], axis=0)
        return BitMatrix(self.rows, other.cols, out)

    def __matmul__(self, other):
        return self.matmul(other)

    def mul_vec(self, v: np.ndarray) -> np.ndarray:
        """Apply to a dense 0/1 column vector, returns dense 0/1 vector."""
        v = np.asarray(v, dtype=np.uint8) & 1
        if v.shape != (self.cols,):
            raise ValueError("vector length mismatch")
        dense = self.to_dense()
        return (dense @ v.astype(np.uint32)) % 2

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return BitMatrix(
            self.rows + other.rows, self.cols, np.vstack([self.data, other.data])
        )

    def hstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        a = self.to_dense()
        b = other.to_dense()
        return BitMatrix.from_dense(np.hstack([a, b]))

    def submatrix_rows(self, idx) -> "BitMatrix":
        idx = np.asarray(idx, dtype=np.intp)
        return BitMatrix(len(idx), self.cols, self.data[idx].copy())


# -- elimination core -------------------------------------------------------


def _column_bits(data: np.ndarray, col: int) -> np.ndarray:
    w, b = divmod(col, WORD)
    return (data[:, w] >> np.uint64(b)) & np.uint64(1)


def _eliminate(data: np.ndarray, ncols: int, start_row: int = 0):
    """In-place forward elimination on packed rows.

    Pivots: scan columns left to right, take the lowest remaining row with
    a 1 in that column.  Eliminates below only (row echelon).  Returns the
    list of (row, col) pivots; rows are permuted in place by swaps.
    """
    nrows = data.shape[0]
    pivots = []
    r = start_row
    for c in range(ncols):
        if r >= nrows:
            break
        colbits = _column_bits(data[r:], c)
        nz = np.nonzero(colbits)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            data[[r, p]] = data[[p, r]]
        if nz.size > 1:
            rows = r + nz[1:]
            data[rows] ^= data[r]
        pivots.append((r, c))
        r += 1
    return pivots


def rank(m: BitMatrix) -> int:
    """Row rank over GF(2)."""
    data = m.data.copy()
    return len(_eliminate(data, m.cols))


def left_kernel(m: BitMatrix) -> BitMatrix:
    """Basis (as rows) of {x : x^T m = 0}."""
    n = m.rows
    wl = _nwords(m.cols) if m.cols else 1
    if m.cols % WORD == 0 and m.cols > 0:
        # fast path: tracker block starts on a word boundary, stays packed
        wl = m.cols // WORD
        wr = _nwords(n)
        aug = np.zeros((n, wl + wr), dtype=np.uint64)
        aug[:, :wl] = m.data
        for i in range(n):
            aug[i, wl + i // WORD] |= np.uint64(1) << np.uint64(i % WORD)
        rk = len(_eliminate(aug, m.cols))
        return BitMatrix(n - rk, n, aug[rk:, wl:].copy())
    dense = np.zeros((n, m.cols + n), dtype=np.uint8)
    dense[:, : m.cols] = m.to_dense()
    dense[:, m.cols :] = np.eye(n, dtype=np.uint8)
    aug = BitMatrix.from_dense(dense)
    rk = len(_eliminate(aug.data, m.cols))
    tail = aug.to_dense()[rk:, m.cols :]
    return BitMatrix.from_dense(tail)


def kernel_basis(m: BitMatrix) -> BitMatrix:
    """Basis (as rows) of the right null space {v : m v = 0}."""
    return left_kernel(m.transpose())


def solve(m: BitMatrix, b) -> np.ndarray | None:
    """One solution x of m x = b, or None when inconsistent.

    Deterministic: reduces b against the echelon form of the columns of m,
    free coordinates are set to zero.
    """
    b = np.asarray(b, dtype=np.uint8) & 1
    if b.shape != (m.rows,):
        raise ValueError("rhs length mismatch")
    ech = Echelon(m.rows, track=True)
    cols = m.transpose()
    for i in range(cols.rows):
        ech.add_row(cols.data[i], i)
    residual, combo = ech.reduce(
        BitMatrix.from_dense(b.reshape(1, -1)).data[0]
    )
    if np.any(residual):
        return None
    x = np.zeros(m.cols, dtype=np.uint8)
    for i in combo:
        x[i] ^= 1
    return x


def kronecker(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Kronecker product: block (i,j) equals a[i,j] * b."""
    da, db = a.to_dense(), b.to_dense()
    return BitMatrix.from_dense(np.kron(da, db))


class Echelon:
    """Incremental row-echelon store with optional coefficient tracking.

    Rows are packed uint64 arrays of a fixed word width.  `add_row` reduces
    the incoming row against the current pivots; a surviving nonzero row
    becomes a new pivot.  With track=True each stored row remembers which
    original rows it is a combination of, and `reduce` reports the
    combination used, which is how row-space membership and linear solves
    are answered deterministically.
    """

    def __init__(self, ncols: int, track: bool = False):
        self.ncols = ncols
        self.nwords = _nwords(ncols)
        self.rows: list[np.ndarray] = []
        self.pivot_cols: list[int] = []
        self.track = track
        self.tags: list[set] = []

    def _leading(self, row: np.ndarray) -> int:
        for w in range(self.nwords):
            if row[w]:
                v = int(row[w])
                return w * WORD + (v & -v).bit_length() - 1
        return -1

    def reduce(self, row: np.ndarray):
        """Reduce a packed row; returns (residual_row, tag_set)."""
        row = row.copy()
        tag: set = set()
        for i, pc in enumerate(self.pivot_cols):
            w, b = divmod(pc, WORD)
            if (row[w] >> np.uint64(b)) & np.uint64(1):
                row ^= self.rows[i]
                if self.track:
                    tag ^= self.tags[i]
        return row, tag

    def add_row(self, row: np.ndarray, tag=None) -> bool:
        """Insert a row; returns True when it added a new pivot."""
        red, tg = self.reduce(row)
        if self.track and tag is not None:
            tg = tg ^ {tag}
        lead = self._leading(red)
        if lead < 0:
            return False
        pos = 0
        while pos < len(self.pivot_cols) and self.pivot_cols[pos] < lead:
            pos += 1
        self.rows.insert(pos, red)
        self.pivot_cols.insert(pos, lead)
        if self.track:
            self.tags.insert(pos, tg)
        return True

    def contains(self, row: np.ndarray) -> bool:
        red, _ = self.reduce(row)
        return not np.any(red)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def basis_matrix(self, cols: int | None = None) -> BitMatrix:
        cols = self.ncols if cols is None else cols
        m = BitMatrix.zeros(len(self.rows), cols)
        for i, r in enumerate(self.rows):
            m.data[i, : len(r)] = r
        return m


class Subspace:
    """A subspace of GF(2)^n with reduced coordinates on a complement.

    Wraps an Echelon of the spanning rows; `coords_mod` maps a vector to
    its coordinates on the non-pivot positions after reduction, i.e. the
    image in the quotient by the subspace, with a deterministic basis.
    """

    def __init__(self, n: int, spanning_rows: BitMatrix | None = None):
        self.n = n
        self.ech = Echelon(n)
        if spanning_rows is not None:
            for i in range(spanning_rows.rows):
                self.ech.add_row(spanning_rows.data[i])
        self._refresh()

    def _refresh(self):
        piv = set(self.ech.pivot_cols)
        self.free_cols = [c for c in range(self.n) if c not in piv]

    def add(self, row: np.ndarray) -> bool:
        changed = self.ech.add_row(row)
        if changed:
            self._refresh()
        return changed

    @property
    def dim(self) -> int:
        return self.ech.rank

    def contains(self, row: np.ndarray) -> bool:
        return self.ech.contains(row)

    def coords_mod(self, row: np.ndarray) -> np.ndarray:
        """Coordinates of row in the quotient (on free columns)."""
        red, _ = self.ech.reduce(row)
        dense = np.unpackbits(red.view(np.uint8), bitorder="little")[: self.n]
        return dense[self.free_cols]

    def basis_matrix(self) -> BitMatrix:
        return self.ech.basis_matrix()


# -- text format -------------------------------------------------------------


def format_matrix(m: BitMatrix) -> str:
    """Text form: 'rows cols' then one 0/1 line per row."""
    lines = [f"{m.rows} {m.cols}"]
    dense = m.to_dense()
    for i in range(m.rows):
        lines.append("".join("1" if x else "0" for x in dense[i]))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> BitMatrix:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    rows, cols = map(int, lines[0].split())
    body = lines[1:]
    if len(body) != rows or any(len(b) != cols for b in body):
        raise ValueError("matrix text dimensions do not match header")
    if rows == 0:
        return BitMatrix.zeros(0, cols)
    return BitMatrix.from_strings(body)


def popcount_rows(data: np.ndarray) -> np.ndarray:
    return np.bitwise_count(data).sum(axis=1)
