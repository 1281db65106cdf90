"""Exact linear algebra over the rationals.

Matrices are dense and immutable; elimination runs on sparse rows internally
because the action matrices that come out of multigraded modules are mostly
zeros.  Complexes use the cohomological convention: differential ``j`` maps
space ``j`` to space ``j + 1``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

__all__ = [
    "ChainMapError",
    "FiniteComplex",
    "Homology",
    "RatMatrix",
    "as_fraction",
    "homology",
    "induced_map",
    "kernel_basis",
    "rank",
    "rref",
    "solve_in_span",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point entries are not accepted")
    return Fraction(value)


class ChainMapError(ValueError):
    """A proposed chain map does not commute with the differentials."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"chain map square at index {index} does not commute")


class RatMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("rows", "cols", "_data", "__dict__")

    def __init__(self, rows: int, cols: int, data: Sequence[Sequence] | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix shape must be non-negative")
        self.rows = rows
        self.cols = cols
        if data is None:
            zero_row = (ZERO,) * cols
            self._data = (zero_row,) * rows
        else:
            if len(data) != rows or any(len(r) != cols for r in data):
                raise ValueError(f"data does not have shape {rows}x{cols}")
            self._data = tuple(tuple(as_fraction(x) for x in r) for r in data)

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RatMatrix":
        if cols is None:
            if not rows:
                raise ValueError("column count needed for a matrix with no rows")
            cols = len(rows[0])
        return cls(len(rows), cols, rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "RatMatrix":
        return cls(rows, len(columns), [[c[i] for c in columns] for i in range(rows)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls._raw(n, n, tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def scalar(cls, n: int, value) -> "RatMatrix":
        v = as_fraction(value)
        return cls._raw(n, n, tuple(tuple(v if i == j else ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def from_sparse(cls, rows: int, cols: int, entries: dict) -> "RatMatrix":
        """Build from ``{(i, j): value}``; zero values are dropped."""
        data = [[ZERO] * cols for _ in range(rows)]
        sparse: list[list] = [[] for _ in range(rows)]
        for (i, j), v in sorted(entries.items()):
            v = as_fraction(v)
            if v:
                data[i][j] = v
                sparse[i].append((j, v))
        obj = cls._raw(rows, cols, tuple(tuple(r) for r in data))
        obj.__dict__["sparse_rows"] = tuple(tuple(r) for r in sparse)
        return obj

    @classmethod
    def _raw(cls, rows: int, cols: int, data: tuple) -> "RatMatrix":
        obj = cls.__new__(cls)
        obj.rows = rows
        obj.cols = cols
        obj._data = data
        return obj

    # -- access ---------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def entries(self) -> tuple[Fraction, ...]:
        return tuple(x for r in self._data for x in r)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        return self._data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._data)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    @cached_property
    def sparse_rows(self) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
        return tuple(tuple((j, x) for j, x in enumerate(r) if x) for r in self._data)

    @cached_property
    def sparse_columns(self) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
        cols: list[list] = [[] for _ in range(self.cols)]
        for i, r in enumerate(self.sparse_rows):
            for j, x in r:
                cols[j].append((i, x))
        return tuple(tuple(c) for c in cols)

    def is_zero(self) -> bool:
        return not any(self.sparse_rows)

    # -- arithmetic -------------------------------------------------------------
    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        n = other.cols
        right = other.sparse_rows
        out = []
        for srow in self.sparse_rows:
            if not srow:
                out.append((ZERO,) * n)
                continue
            acc: dict[int, Fraction] = {}
            for k, a in srow:
                for j, b in right[k]:
                    acc[j] = acc.get(j, ZERO) + a * b
            row = [ZERO] * n
            for j, v in acc.items():
                row[j] = v
            out.append(tuple(row))
        return RatMatrix._raw(self.rows, n, tuple(out))

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._same_shape(other)
        return RatMatrix._raw(
            self.rows,
            self.cols,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)),
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._same_shape(other)
        return RatMatrix._raw(
            self.rows,
            self.cols,
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)),
        )

    def __neg__(self) -> "RatMatrix":
        return self.scale(-1)

    def scale(self, c) -> "RatMatrix":
        c = as_fraction(c)
        return RatMatrix._raw(self.rows, self.cols, tuple(tuple(c * x for x in r) for r in self._data))

    def apply(self, vector: Sequence) -> tuple[Fraction, ...]:
        if len(vector) != self.cols:
            raise ValueError("vector length does not match column count")
        v = [as_fraction(x) for x in vector]
        return tuple(sum((x * v[j] for j, x in r), ZERO) for r in self.sparse_rows)

    def transpose(self) -> "RatMatrix":
        if self.rows == 0:
            return RatMatrix._raw(self.cols, 0, tuple(() for _ in range(self.cols)))
        return RatMatrix._raw(self.cols, self.rows, tuple(zip(*self._data)))

    def select_columns(self, idx: Sequence[int]) -> "RatMatrix":
        return RatMatrix._raw(self.rows, len(idx), tuple(tuple(r[j] for j in idx) for r in self._data))

    def select_rows(self, idx: Sequence[int]) -> "RatMatrix":
        return RatMatrix._raw(len(idx), self.cols, tuple(self._data[i] for i in idx))

    def hstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.rows != other.rows:
            raise ValueError("row counts differ")
        return RatMatrix._raw(self.rows, self.cols + other.cols, tuple(r + s for r, s in zip(self._data, other._data)))

    def vstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.cols:
            raise ValueError("column counts differ")
        return RatMatrix._raw(self.rows + other.rows, self.cols, self._data + other._data)

    def power(self, k: int) -> "RatMatrix":
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        result = RatMatrix.identity(self.rows)
        for _ in range(k):
            result = result @ self
        return result

    def _same_shape(self, other: "RatMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    # -- comparison / display -----------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._data)
        return f"RatMatrix({self.rows}x{self.cols}: [{body}])"


# ---------------------------------------------------------------------------
# elimination


def _eliminate(rows: list[dict[int, Fraction]], ncols: int) -> tuple[list[dict[int, Fraction]], list[int]]:
    """Reduced row echelon form of sparse rows.

    Pivot rule: scan columns left to right; the pivot for a column is the
    topmost not-yet-used row with a nonzero entry there.  Returns the pivot
    rows (normalized, fully reduced) in pivot order and their pivot columns.
    """
    rows = [dict(r) for r in rows if r]
    used = [False] * len(rows)
    pivot_rows: list[int] = []
    pivots: list[int] = []
    for c in range(ncols):
        p = next((i for i, r in enumerate(rows) if not used[i] and r.get(c)), None)
        if p is None:
            continue
        used[p] = True
        prow = rows[p]
        inv = ONE / prow[c]
        if inv != ONE:
            for k in prow:
                prow[k] *= inv
        for i, r in enumerate(rows):
            if i == p:
                continue
            f = r.get(c)
            if not f:
                continue
            for k, v in prow.items():
                nv = r.get(k, ZERO) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
        pivot_rows.append(p)
        pivots.append(c)
        if len(pivots) == len(rows):
            break
    return [rows[p] for p in pivot_rows], pivots


def _sparse_rows(M: RatMatrix) -> list[dict[int, Fraction]]:
    return [dict(r) for r in M.sparse_rows]


def rref(M: RatMatrix) -> tuple[RatMatrix, tuple[int, ...]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    red, pivots = _eliminate(_sparse_rows(M), M.cols)
    return RatMatrix.from_sparse(len(red), M.cols, {(i, j): v for i, r in enumerate(red) for j, v in r.items()}), tuple(pivots)


def rank(M: RatMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    # eliminate on the smaller side
    if M.rows > M.cols:
        return len(_eliminate(_sparse_rows(M.transpose()), M.rows)[1])
    return len(_eliminate(_sparse_rows(M), M.cols)[1])


def _kernel_rows(M: RatMatrix) -> tuple[list[dict[int, Fraction]], list[int]]:
    """Canonical kernel basis as RREF rows, plus their pivot columns."""
    n = M.cols
    red, pivots = _eliminate(_sparse_rows(M), n)
    pivot_set = set(pivots)
    naive = []
    for f in range(n):
        if f in pivot_set:
            continue
        v = {f: ONE}
        for r, p in zip(red, pivots):
            x = r.get(f)
            if x:
                v[p] = -x
        naive.append(v)
    return _eliminate(naive, n)


def kernel_basis(M: RatMatrix) -> RatMatrix:
    """Columns form the reduced-echelon basis of ``ker(M)``."""
    rows, _ = _kernel_rows(M)
    return RatMatrix.from_sparse(M.cols, len(rows), {(j, i): v for i, r in enumerate(rows) for j, v in r.items()})


def solve_in_span(basis: RatMatrix, vectors: RatMatrix) -> RatMatrix | None:
    """Coefficients ``C`` with ``basis @ C == vectors``, or None if some column is outside the span.

    ``basis`` must have independent columns.
    """
    if basis.rows != vectors.rows:
        raise ValueError("row counts differ")
    k = basis.cols
    if k == 0:
        return RatMatrix.zeros(0, vectors.cols) if vectors.is_zero() else None
    # row-reduce [basis | vectors] on the row side
    aug = basis.hstack(vectors)
    red, pivots = _eliminate(_sparse_rows(aug), aug.cols)
    if any(p >= k for p in pivots):
        return None
    if len(pivots) != k:
        raise ValueError("basis columns are dependent")
    coeffs = {}
    for i in range(k):
        for j, v in red[i].items():
            if j >= k:
                coeffs[(i, j - k)] = v
    return RatMatrix.from_sparse(k, vectors.cols, coeffs)


# ---------------------------------------------------------------------------
# complexes


class Homology(NamedTuple):
    dimension: int
    cycle_reps: RatMatrix
    projection: RatMatrix


class FiniteComplex:
    """Finite cochain complex ``0 -> C^0 -> C^1 -> ... -> C^k -> 0`` over Q."""

    def __init__(self, spaces: Sequence[int], differentials: Sequence[RatMatrix]):
        spaces = tuple(int(d) for d in spaces)
        if not spaces:
            raise ValueError("a complex needs at least one space")
        if len(differentials) != len(spaces) - 1:
            raise ValueError("need exactly one differential between consecutive spaces")
        for j, d in enumerate(differentials):
            if d.shape != (spaces[j + 1], spaces[j]):
                raise ValueError(f"differential {j} has shape {d.shape}, expected {(spaces[j + 1], spaces[j])}")
        for j in range(len(differentials) - 1):
            if not (differentials[j + 1] @ differentials[j]).is_zero():
                raise ValueError(f"d{j + 1} o d{j} is not zero")
        self.spaces = spaces
        self.differentials = tuple(differentials)
        self._homology: dict[int, Homology] = {}

    def __len__(self) -> int:
        return len(self.spaces)

    def outgoing(self, j: int) -> RatMatrix:
        if j < len(self.differentials):
            return self.differentials[j]
        return RatMatrix.zeros(0, self.spaces[j])

    def incoming(self, j: int) -> RatMatrix:
        if j > 0:
            return self.differentials[j - 1]
        return RatMatrix.zeros(self.spaces[0], 0)

    def euler_characteristic(self) -> int:
        return sum((-1) ** j * d for j, d in enumerate(self.spaces))

    def homology(self, j: int) -> Homology:
        if not 0 <= j < len(self.spaces):
            raise IndexError(f"homology index {j} out of range 0..{len(self.spaces) - 1}")
        if j not in self._homology:
            self._homology[j] = _homology(self.outgoing(j), self.incoming(j), self.spaces[j])
        return self._homology[j]


def _homology(out: RatMatrix, inc: RatMatrix, n: int) -> Homology:
    zrows, zpiv = _kernel_rows(out)
    z = len(zrows)
    # boundary columns expressed in cycle coordinates (value at cycle pivots)
    bcoords = []
    for col in inc.sparse_columns:
        if not col:
            continue
        vec = dict(col)
        bcoords.append({i: vec[q] for i, q in enumerate(zpiv) if vec.get(q)})
    bred, bpiv = _eliminate(bcoords, z)
    bset = set(bpiv)
    keep = [k for k in range(z) if k not in bset]
    reps = RatMatrix.from_sparse(n, len(keep), {(j, c): v for c, k in enumerate(keep) for j, v in zrows[k].items()})
    proj: dict[tuple[int, int], Fraction] = {}
    for row, k in enumerate(keep):
        proj[(row, zpiv[k])] = ONE
        for r, p in zip(bred, bpiv):
            x = r.get(k)
            if x:
                key = (row, zpiv[p])
                proj[key] = proj.get(key, ZERO) - x
    projection = RatMatrix.from_sparse(len(keep), n, proj)
    return Homology(len(keep), reps, projection)


def homology(C: FiniteComplex, j: int) -> Homology:
    """Dimension, lifted cycle representatives and projection onto ``H^j(C)``."""
    return C.homology(j)


def check_chain_map(C: FiniteComplex, D: FiniteComplex, chain: Sequence[RatMatrix]) -> None:
    if len(C) != len(D) or len(chain) != len(C):
        raise ValueError("chain map length must match both complexes")
    for t, f in enumerate(chain):
        if f.shape != (D.spaces[t], C.spaces[t]):
            raise ValueError(f"chain map component {t} has shape {f.shape}")
    for t in range(len(C) - 1):
        if D.differentials[t] @ chain[t] != chain[t + 1] @ C.differentials[t]:
            raise ChainMapError(t)


def induced_map(C: FiniteComplex, D: FiniteComplex, chain: Sequence[RatMatrix], j: int) -> RatMatrix:
    """Matrix of ``H^j(C) -> H^j(D)`` in the canonical homology bases."""
    check_chain_map(C, D, chain)
    hc = C.homology(j)
    hd = D.homology(j)
    return hd.projection @ (chain[j] @ hc.cycle_reps)


def stack_columns(columns: Iterable[Sequence], rows: int) -> RatMatrix:
    cols = list(columns)
    return RatMatrix.from_columns(cols, rows)
