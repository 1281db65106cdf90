"""Graded Weyl-algebra modules presented on a finite degree window.

A :class:`WindowModule` stores finite-dimensional components ``M_n`` for
``lo <= n <= hi`` together with matrices for ``X_i: M_n -> M_{n+1}`` and
``d_i: M_n -> M_{n-1}``.  Components may be truncations of larger graded
pieces (a box of multidegrees); an action column whose image would leave the
truncation is stored as *undefined* rather than zero, and every check below
only quantifies over defined data.

Grading conventions: ``M(k)_n = M_{n+k}``; ``H_1(d_i; M) = ker(d_i) in M(1)``;
``H_1(X_i; M) = ker(X_i) in M(-1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence

from .exactlinalg import FiniteComplex, RatMatrix, kernel_basis, rank, solve_in_span

__all__ = [
    "BoundaryError",
    "DivisibilityReport",
    "EulerianReport",
    "ExtensionReport",
    "ModuleRelationError",
    "OpMatrix",
    "TorsionResult",
    "WindowModule",
    "check_divisibility",
    "check_extension",
    "check_generalized_eulerian",
    "euler_matrix",
    "fourier_module",
    "koszul_d",
    "koszul_x",
    "module_from_json",
    "module_to_json",
    "parse_word",
    "shift",
    "torsion",
]

SCHEMA_ID = "lcweyl.window-module/1"


class BoundaryError(ValueError):
    """The requested computation needs data outside the certified window."""


class ModuleRelationError(ValueError):
    """Action matrices violate a Weyl-algebra relation."""

    def __init__(self, relation: str, degree: int, columns: Sequence[int]):
        self.relation = relation
        self.degree = degree
        self.columns = tuple(columns)
        super().__init__(f"relation {relation} fails at degree {degree} on columns {list(columns)[:8]}")


# ---------------------------------------------------------------------------
# matrices with undefined columns


@dataclass(frozen=True)
class OpMatrix:
    matrix: RatMatrix
    defined: tuple[bool, ...]

    def __post_init__(self):
        if len(self.defined) != self.matrix.cols:
            raise ValueError("definedness mask must have one entry per column")

    @classmethod
    def full(cls, matrix: RatMatrix) -> "OpMatrix":
        return cls(matrix, (True,) * matrix.cols)

    @property
    def is_full(self) -> bool:
        return all(self.defined)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        product = self.matrix @ other.matrix
        cols = other.matrix.sparse_columns
        mask = tuple(
            other.defined[j] and all(self.defined[k] for k, _ in cols[j]) for j in range(other.matrix.cols)
        )
        return OpMatrix(product, mask)

    def __add__(self, other: "OpMatrix") -> "OpMatrix":
        return OpMatrix(self.matrix + other.matrix, tuple(a and b for a, b in zip(self.defined, other.defined)))

    def __sub__(self, other: "OpMatrix") -> "OpMatrix":
        return OpMatrix(self.matrix - other.matrix, tuple(a and b for a, b in zip(self.defined, other.defined)))

    def scale(self, c) -> "OpMatrix":
        return OpMatrix(self.matrix.scale(c), self.defined)

    @cached_property
    def column_maps(self) -> tuple[dict[int, Fraction], ...]:
        return tuple(dict(c) for c in self.matrix.sparse_columns)

    def disagreement(self, other: "OpMatrix") -> list[int]:
        """Columns defined in both where the two matrices differ."""
        mine, theirs = self.column_maps, other.column_maps
        return [j for j in range(self.matrix.cols) if self.defined[j] and other.defined[j] and mine[j] != theirs[j]]


_SparseOp = tuple[list, tuple]  # (column dicts, definedness mask)


def _sparse_compose(a: OpMatrix, b: OpMatrix | _SparseOp) -> _SparseOp:
    """``a @ b`` on column dicts, never materializing a dense product."""
    b_cols, b_mask = (b.column_maps, b.defined) if isinstance(b, OpMatrix) else b
    a_cols, a_mask = a.column_maps, a.defined
    out, mask = [], []
    for j, col in enumerate(b_cols):
        if not b_mask[j] or any(not a_mask[k] for k in col):
            out.append({})
            mask.append(False)
            continue
        acc: dict[int, Fraction] = {}
        for k, v in col.items():
            for r, w in a_cols[k].items():
                acc[r] = acc.get(r, 0) + v * w
        out.append({r: v for r, v in acc.items() if v})
        mask.append(True)
    return out, tuple(mask)


def _sparse_sum(parts: Sequence[_SparseOp], ncols: int) -> _SparseOp:
    cols = [dict() for _ in range(ncols)]
    mask = [True] * ncols
    for pc, pm in parts:
        for j in range(ncols):
            mask[j] = mask[j] and pm[j]
            for r, v in pc[j].items():
                cols[j][r] = cols[j].get(r, 0) + v
    return [{r: v for r, v in c.items() if v} for c in cols], tuple(mask)


def _sparse_to_op(sp: _SparseOp, rows: int) -> OpMatrix:
    cols, mask = sp
    entries = {(r, j): v for j, c in enumerate(cols) for r, v in c.items()}
    return OpMatrix(RatMatrix.from_sparse(rows, len(cols), entries), mask)


def _as_op(value) -> OpMatrix:
    return value if isinstance(value, OpMatrix) else OpMatrix.full(value)


def _zero_op(rows: int, cols: int) -> OpMatrix:
    return OpMatrix.full(RatMatrix.zeros(rows, cols))


# ---------------------------------------------------------------------------
# the module type


class WindowModule:
    """Finite presentation of a graded ``A_m(Q)``-module on ``[lo, hi]``.

    ``x[i]`` and ``d[i]`` (0-based axis ``i``) map a source degree to an
    :class:`OpMatrix`; public helpers take 1-based axes.  ``complete_below``
    (``complete_above``) asserts the module vanishes below (above) the
    window.  ``box_complete[n - lo]`` asserts ``M_n`` is the whole graded
    piece rather than a truncation.  ``injective_below`` lists 1-based axes
    ``i`` for which ``d_i`` is known injective on every ``M_k``, ``k <= lo``;
    ``injective_above`` likewise for ``X_i`` on ``M_k``, ``k >= hi``.
    """

    def __init__(
        self,
        m: int,
        lo: int,
        hi: int,
        dims: Sequence[int],
        x: Sequence[Mapping[int, object]] | None = None,
        d: Sequence[Mapping[int, object]] | None = None,
        *,
        labels: Sequence[Sequence[Sequence[int]]] | None = None,
        complete_below: bool = False,
        complete_above: bool = False,
        box_complete: Sequence[bool] | bool = True,
        injective_below: Iterable[int] = (),
        injective_above: Iterable[int] = (),
        validate: bool = True,
    ):
        if m < 0:
            raise ValueError("m must be non-negative")
        if lo > hi:
            raise ValueError(f"empty window [{lo}, {hi}]")
        dims = tuple(int(v) for v in dims)
        if len(dims) != hi - lo + 1 or min(dims) < 0:
            raise ValueError("need one non-negative dimension per window degree")
        self.m = m
        self.lo = lo
        self.hi = hi
        self.dims = dims
        self.complete_below = bool(complete_below)
        self.complete_above = bool(complete_above)
        if isinstance(box_complete, bool):
            box_complete = (box_complete,) * len(dims)
        self.box_complete = tuple(bool(b) for b in box_complete)
        if len(self.box_complete) != len(dims):
            raise ValueError("box_complete needs one flag per degree")
        self.injective_below = frozenset(injective_below)
        self.injective_above = frozenset(injective_above)
        if labels is not None:
            labels = tuple(tuple(tuple(a) for a in block) for block in labels)
            if len(labels) != len(dims) or any(len(b) != k for b, k in zip(labels, dims)):
                raise ValueError("labels must give one multidegree per basis vector")
            if any(len(a) != m for block in labels for a in block):
                raise ValueError("labels must have length m")
        self.labels = labels
        self.x = self._load_actions(x, +1)
        self.d = self._load_actions(d, -1)
        if validate:
            self.validate()

    def _load_actions(self, actions, step: int) -> tuple[dict[int, OpMatrix], ...]:
        actions = list(actions) if actions is not None else [{} for _ in range(self.m)]
        if len(actions) != self.m:
            raise ValueError(f"need one action table per variable ({self.m})")
        out = []
        for table in actions:
            loaded: dict[int, OpMatrix] = {}
            for n, mat in table.items():
                op = _as_op(mat)
                src, tgt = self.dim(n), self.dim(n + step)
                if src is None or tgt is None:
                    raise ValueError(f"action from degree {n} touches an unknown component")
                if op.shape != (tgt, src):
                    raise ValueError(f"action from degree {n} has shape {op.shape}, expected {(tgt, src)}")
                loaded[n] = op
            # maps from or to a known zero space carry no information
            for n in range(self.lo - 1, self.hi + 2):
                if n in loaded:
                    continue
                src, tgt = self.dim(n), self.dim(n + step)
                if src is not None and tgt is not None and (src == 0 or tgt == 0):
                    loaded[n] = _zero_op(tgt, src)
            out.append(loaded)
        return tuple(out)

    # -- access -------------------------------------------------------------------
    def dim(self, n: int) -> int | None:
        """Dimension of ``M_n``; 0 beyond a complete side; None if unknown."""
        if self.lo <= n <= self.hi:
            return self.dims[n - self.lo]
        if n < self.lo and self.complete_below:
            return 0
        if n > self.hi and self.complete_above:
            return 0
        return None

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def x_op(self, axis: int, n: int) -> OpMatrix | None:
        """``X_axis: M_n -> M_{n+1}`` (1-based axis)."""
        return self.x[axis - 1].get(n) if self.m else None

    def d_op(self, axis: int, n: int) -> OpMatrix | None:
        """``d_axis: M_n -> M_{n-1}`` (1-based axis)."""
        return self.d[axis - 1].get(n) if self.m else None

    def is_box_complete(self, n: int) -> bool:
        if self.lo <= n <= self.hi:
            return self.box_complete[n - self.lo]
        return self.dim(n) == 0

    @property
    def fully_box_complete(self) -> bool:
        return all(self.box_complete)

    def label_block(self, n: int) -> tuple[tuple[int, ...], ...] | None:
        if self.labels is None or not self.lo <= n <= self.hi:
            return None
        return self.labels[n - self.lo]

    def is_zero(self) -> bool:
        return not any(self.dims)

    # -- invariants ---------------------------------------------------------------
    def validate(self) -> None:
        m = self.m
        for n in range(self.lo - 1, self.hi + 2):
            for i in range(m):
                for j in range(m):
                    if i < j:
                        self._check_equal(f"X{i+1}X{j+1}=X{j+1}X{i+1}", n, self.x[i].get(n + 1), self.x[j].get(n), self.x[j].get(n + 1), self.x[i].get(n))
                        self._check_equal(f"d{i+1}d{j+1}=d{j+1}d{i+1}", n, self.d[i].get(n - 1), self.d[j].get(n), self.d[j].get(n - 1), self.d[i].get(n))
                    if i != j:
                        self._check_equal(f"d{i+1}X{j+1}=X{j+1}d{i+1}", n, self.d[i].get(n + 1), self.x[j].get(n), self.x[j].get(n - 1), self.d[i].get(n))
                dx = _scompose(self.d[i].get(n + 1), self.x[i].get(n))
                xd = _scompose(self.x[i].get(n - 1), self.d[i].get(n))
                if dx is not None and xd is not None:
                    bad = []
                    for j, (c1, c2) in enumerate(zip(dx[0], xd[0])):
                        if dx[1][j] and xd[1][j]:
                            diff = dict(c1)
                            for r, v in c2.items():
                                diff[r] = diff.get(r, 0) - v
                            if {r: v for r, v in diff.items() if v} != {j: 1}:
                                bad.append(j)
                    if bad:
                        raise ModuleRelationError(f"d{i+1}X{i+1}-X{i+1}d{i+1}=1", n, bad)
        if self.labels is not None:
            self._check_labels()

    def _check_equal(self, name, n, a1, a2, b1, b2) -> None:
        left = _scompose(a1, a2)
        right = _scompose(b1, b2)
        if left is None or right is None:
            return
        (lc, lm), (rc, rm) = left, right
        bad = [j for j in range(len(lc)) if lm[j] and rm[j] and lc[j] != rc[j]]
        if bad:
            raise ModuleRelationError(name, n, bad)

    def _check_labels(self) -> None:
        for step, tables in ((1, self.x), (-1, self.d)):
            for i, table in enumerate(tables):
                for n, op in table.items():
                    src = self.label_block(n)
                    tgt = self.label_block(n + step)
                    if src is None or tgt is None:
                        continue
                    for c, col in enumerate(op.matrix.sparse_columns):
                        want = list(src[c])
                        want[i] += step
                        for r, _ in col:
                            if list(tgt[r]) != want:
                                raise ModuleRelationError(f"multidegree homogeneity of axis {i+1}", n, [c])

    def __eq__(self, other) -> bool:
        if not isinstance(other, WindowModule):
            return NotImplemented
        return module_to_json(self) == module_to_json(other)

    def __repr__(self) -> str:
        return f"WindowModule(m={self.m}, window=[{self.lo}, {self.hi}], dims={self.dims})"


def _scompose(a: OpMatrix | None, b: OpMatrix | None) -> _SparseOp | None:
    if a is None or b is None:
        return None
    return _sparse_compose(a, b)


def _compose(a: OpMatrix | None, b: OpMatrix | None) -> OpMatrix | None:
    if a is None or b is None:
        return None
    return a @ b


# ---------------------------------------------------------------------------
# shifts and the Euler operator


def shift(M: WindowModule, k: int) -> WindowModule:
    """``M(k)``, with ``M(k)_n = M_{n+k}``."""
    if k == 0:
        return M
    return WindowModule(
        M.m,
        M.lo - k,
        M.hi - k,
        M.dims,
        [{n - k: op for n, op in t.items()} for t in M.x],
        [{n - k: op for n, op in t.items()} for t in M.d],
        labels=M.labels,
        complete_below=M.complete_below,
        complete_above=M.complete_above,
        box_complete=M.box_complete,
        injective_below=M.injective_below,
        injective_above=M.injective_above,
        validate=False,
    )


def _euler_op(M: WindowModule, n: int) -> OpMatrix:
    dim = M.dim(n)
    if dim is None:
        raise BoundaryError(f"degree {n} is outside the window")
    parts = []
    for i in range(M.m):
        term = _scompose(M.x[i].get(n - 1), M.d[i].get(n))
        if term is None:
            raise BoundaryError(f"euler operator at degree {n} needs X{i+1} from {n-1} and d{i+1} from {n}")
        parts.append(term)
    return _sparse_to_op(_sparse_sum(parts, dim), dim)


def euler_matrix(M: WindowModule, n: int) -> RatMatrix:
    """Matrix of ``sum_i X_i d_i`` on ``M_n``."""
    op = _euler_op(M, n)
    if not op.is_full:
        raise BoundaryError(f"euler operator at degree {n} is only partially defined (box truncation)")
    return op.matrix


@dataclass(frozen=True)
class DegreeEulerian:
    degree: int
    status: str  # "checked" | "skipped"
    index: int | None  # smallest a >= 1 with (eps - n)^a = 0 on the certified part; None = not nilpotent
    dim: int
    certified_dim: int


@dataclass(frozen=True)
class EulerianReport:
    entries: tuple[DegreeEulerian, ...]

    @property
    def checked(self) -> tuple[DegreeEulerian, ...]:
        return tuple(e for e in self.entries if e.status == "checked")

    @property
    def generalized(self) -> bool:
        return all(e.index is not None for e in self.checked)

    @property
    def eulerian(self) -> bool:
        return all(e.index is not None and e.index <= 1 for e in self.checked)

    @property
    def verdict(self) -> str:
        if self.eulerian:
            return "Eulerian"
        if self.generalized:
            return "generalized Eulerian on window"
        return "not generalized Eulerian"

    def failures(self) -> list[int]:
        return [e.degree for e in self.checked if e.index is None]

    def index_at(self, n: int) -> int | None:
        for e in self.entries:
            if e.degree == n:
                return e.index
        raise KeyError(n)


def _invariant_defined(op: OpMatrix) -> list[int]:
    """Largest set of defined columns whose span the matrix maps into itself."""
    keep = {j for j, ok in enumerate(op.defined) if ok}
    cols = op.matrix.sparse_columns
    changed = True
    while changed:
        changed = False
        for j in sorted(keep):
            if any(r not in keep for r, _ in cols[j]):
                keep.discard(j)
                changed = True
    return sorted(keep)


def nilpotency_index(N: RatMatrix) -> int | None:
    """Smallest a >= 1 with N^a = 0, deciding by the d-th power; None if not nilpotent."""
    d = N.rows
    power = N
    for a in range(1, max(d, 1) + 1):
        if power.is_zero():
            return a
        power = power @ N
    return None


def check_generalized_eulerian(M: WindowModule) -> EulerianReport:
    entries = []
    for n in M.degrees():
        dim = M.dim(n)
        try:
            op = _euler_op(M, n)
        except BoundaryError:
            entries.append(DegreeEulerian(n, "skipped", None, dim, 0))
            continue
        keep = _invariant_defined(op)
        if dim and not keep:
            entries.append(DegreeEulerian(n, "skipped", None, dim, 0))
            continue
        cols = op.column_maps
        if all(cols[j] == ({j: n} if n else {}) for j in keep):
            # eps acts as the scalar n: index 1 without forming dense matrices
            entries.append(DegreeEulerian(n, "checked", 1, dim, len(keep)))
            continue
        sub = op.matrix.select_rows(keep).select_columns(keep)
        shifted = sub - RatMatrix.scalar(len(keep), n)
        entries.append(DegreeEulerian(n, "checked", nilpotency_index(shifted), dim, len(keep)))
    return EulerianReport(tuple(entries))


# ---------------------------------------------------------------------------
# Koszul homology in one operator


def _require_full(op: OpMatrix | None, what: str) -> RatMatrix:
    if op is None:
        raise BoundaryError(f"{what} is not available")
    if not op.is_full:
        raise BoundaryError(f"{what} is only partially defined (box truncation)")
    return op.matrix


def _induced_op(target_proj: RatMatrix, op: OpMatrix, source_reps: RatMatrix) -> OpMatrix:
    return OpMatrix.full(target_proj) @ op @ OpMatrix.full(source_reps)


def _koszul(M: WindowModule, axis: int, letter: str) -> tuple[WindowModule, WindowModule]:
    if not 1 <= axis <= M.m:
        raise ValueError(f"axis {axis} outside 1..{M.m}")
    a = axis - 1
    # the operator goes from M_{n+off} to M_{n+off+step} and H_*(n) lives over that pair
    if letter == "d":
        off, table = 1, M.d[a]
    else:
        off, table = -1, M.x[a]
    degrees = [n for n in range(M.lo - 2, M.hi + 3) if M.dim(n + off) is not None and M.dim(n) is not None]
    degrees = [n for n in degrees if M.lo <= n + off <= M.hi or M.lo <= n <= M.hi]
    if not degrees:
        raise BoundaryError("window too small for Koszul homology")
    lo, hi = degrees[0], degrees[-1]
    if degrees != list(range(lo, hi + 1)):
        raise BoundaryError("Koszul degrees are not contiguous")
    complexes = {}
    for n in degrees:
        mat = _require_full(table.get(n + off), f"{letter}{axis} from degree {n + off}")
        complexes[n] = FiniteComplex([M.dim(n + off), M.dim(n)], [mat])
    others = [j for j in range(M.m) if j != a]
    h1_x: list[dict] = [{} for _ in others]
    h1_d: list[dict] = [{} for _ in others]
    h0_x: list[dict] = [{} for _ in others]
    h0_d: list[dict] = [{} for _ in others]
    for n in degrees:
        for k, j in enumerate(others):
            for out1, out0, tab, s in ((h1_x, h0_x, M.x[j], 1), (h1_d, h0_d, M.d[j], -1)):
                t = n + s
                if t not in complexes:
                    continue
                src, tgt = complexes[n], complexes[t]
                op_top = tab.get(n + off)
                if op_top is not None:
                    out1[k][n] = _induced_op(tgt.homology(0).projection, op_top, src.homology(0).cycle_reps)
                op_bot = tab.get(n)
                if op_bot is not None:
                    out0[k][n] = _induced_op(tgt.homology(1).projection, op_bot, src.homology(1).cycle_reps)
    flags = [M.is_box_complete(n) and M.is_box_complete(n + off) for n in degrees]
    common = dict(complete_below=M.complete_below, complete_above=M.complete_above, box_complete=flags)
    h0 = WindowModule(M.m - 1, lo, hi, [complexes[n].homology(1).dimension for n in degrees], h0_x, h0_d, **common)
    h1 = WindowModule(M.m - 1, lo, hi, [complexes[n].homology(0).dimension for n in degrees], h1_x, h1_d, **common)
    return h0, h1


def koszul_d(M: WindowModule, axis: int) -> tuple[WindowModule, WindowModule]:
    """``(H_0, H_1)`` of ``d_axis`` in the grading of ``0 -> H_1 -> M(1) -> M -> H_0 -> 0``.

    Both carry the induced actions of the other ``2(m-1)`` generators, with
    axes renumbered after removing ``axis``.
    """
    return _koszul(M, axis, "d")


def koszul_x(M: WindowModule, axis: int) -> tuple[WindowModule, WindowModule]:
    """``(H_0, H_1)`` of ``X_axis`` in the grading of ``0 -> H_1 -> M(-1) -> M -> H_0 -> 0``."""
    return _koszul(M, axis, "x")


# ---------------------------------------------------------------------------
# torsion submodules


Word = tuple[str, tuple[int, ...]]


def parse_word(text: str, m: int) -> Word:
    """``"x1*x2^2"`` -> ``("x", (1, 2))``; words use one letter kind only."""
    kinds = set()
    exps = [0] * m
    for part in text.replace(" ", "").split("*"):
        if not part:
            raise ValueError(f"malformed word {text!r}")
        base, _, power = part.partition("^")
        kind, idx = base[:1], base[1:]
        if kind not in ("x", "d") or not idx.isdigit():
            raise ValueError(f"malformed letter {part!r}")
        i = int(idx)
        if not 1 <= i <= m:
            raise ValueError(f"variable index {i} outside 1..{m}")
        kinds.add(kind)
        exps[i - 1] += int(power) if power else 1
    if len(kinds) != 1:
        raise ValueError(f"word {text!r} mixes X and d letters")
    return kinds.pop(), tuple(exps)


def _word_op(M: WindowModule, word: Word, n: int) -> OpMatrix | None:
    kind, exps = word
    tables = M.x if kind == "x" else M.d
    step = 1 if kind == "x" else -1
    dim = M.dim(n)
    if dim is None:
        return None
    op = OpMatrix.full(RatMatrix.identity(dim))
    cur = n
    final = n + step * sum(exps)
    for i, e in enumerate(exps):
        for _ in range(e):
            if M.dim(cur) == 0:
                # passing through a known zero space kills everything
                tdim = M.dim(final)
                return None if tdim is None else _zero_op(tdim, dim)
            nxt = tables[i].get(cur)
            if nxt is None:
                return None
            op = nxt @ op
            cur += step
    return op


def _word_product(words: Sequence[Word]) -> Word:
    kind = words[0][0]
    return kind, tuple(sum(col) for col in zip(*(w[1] for w in words)))


def _kernel_on_defined(op: OpMatrix) -> RatMatrix:
    keep = [j for j, ok in enumerate(op.defined) if ok]
    k = kernel_basis(op.matrix.select_columns(keep))
    entries = {(keep[r], c): k[r, c] for r in range(k.rows) for c in range(k.cols) if k[r, c]}
    return RatMatrix.from_sparse(op.matrix.cols, k.cols, entries)


def _intersect_kernels(ops: Sequence[OpMatrix], dim: int) -> RatMatrix:
    """Basis of the intersection of kernels, restricted to columns defined in every op."""
    keep = [j for j in range(dim) if all(op.defined[j] for op in ops)]
    if not ops:
        return RatMatrix.identity(dim)
    stacked = ops[0].matrix
    for op in ops[1:]:
        stacked = stacked.vstack(op.matrix)
    return _kernel_on_defined(OpMatrix(stacked, tuple(j in keep for j in range(dim))))


def _annihilator(basis: RatMatrix) -> RatMatrix:
    """Matrix whose kernel is exactly the column span of ``basis``."""
    return kernel_basis(basis.transpose()).transpose()


def _span_dim(basis: RatMatrix) -> int:
    return rank(basis) if basis.cols else 0


@dataclass(frozen=True)
class TorsionResult:
    generators: tuple[Word, ...]
    parent: WindowModule
    bases: dict  # degree -> RatMatrix (columns span the computed subspace of M_n)
    certified: dict  # degree -> bool

    def dim(self, n: int) -> int:
        return self.bases[n].cols

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.dim(n) for n in self.parent.degrees())

    def lower_bound_only(self) -> list[int]:
        return [n for n in self.parent.degrees() if not self.certified[n]]

    @property
    def module(self) -> WindowModule:
        """The torsion submodule with restricted actions.

        Columns whose image leaves a merely lower-bound target subspace are
        undefined; between certified degrees the restriction must exist.
        """
        M = self.parent
        tables = []
        for step, src_tables in ((1, M.x), (-1, M.d)):
            out = []
            for i, table in enumerate(src_tables):
                t: dict[int, OpMatrix] = {}
                for n in M.degrees():
                    tn = n + step
                    if tn not in self.bases or n not in table:
                        continue
                    S, T = self.bases[n], self.bases[tn]
                    image = table[n].matrix @ S
                    cols, mask = [], []
                    src_defined = [all(table[n].defined[r] for r, _ in S.sparse_columns[c]) for c in range(S.cols)]
                    for c in range(S.cols):
                        col = image.select_columns([c])
                        coeff = solve_in_span(T, col) if src_defined[c] else None
                        if coeff is None:
                            if src_defined[c] and self.certified[n] and self.certified[tn]:
                                raise ModuleRelationError(f"torsion closed under axis {i+1} action", n, [c])
                            cols.append((0,) * T.cols)
                            mask.append(False)
                        else:
                            cols.append(coeff.column(0))
                            mask.append(True)
                    t[n] = OpMatrix(RatMatrix.from_columns(cols, T.cols), tuple(mask))
                out.append(t)
            tables.append(out)
        return WindowModule(
            M.m,
            M.lo,
            M.hi,
            self.dims,
            tables[0],
            tables[1],
            complete_below=M.complete_below,
            complete_above=M.complete_above,
            box_complete=[M.box_complete[n - M.lo] and self.certified[n] for n in M.degrees()],
        )


def torsion(M: WindowModule, generators: Sequence[Word | str]) -> TorsionResult:
    """Per-degree torsion ``Gamma_I(M)`` for ``I`` generated by X-words or by d-words.

    A degree is certified when the computed subspace provably equals the
    torsion: either by recursion ``Gamma_n = {v : g v in Gamma_{n+deg g}}``
    from a side where the module is known, or because the kernel-chain lower
    bound meets an upper bound coming from ``injective_above`` /
    ``injective_below``.  Other degrees hold the lower bound only.
    """
    words = tuple(parse_word(g, M.m) if isinstance(g, str) else (g[0], tuple(g[1])) for g in generators)
    if not words:
        raise ValueError("need at least one generator")
    kinds = {w[0] for w in words}
    if len(kinds) != 1:
        raise ValueError("generators must be all X-words or all d-words")
    kind = kinds.pop()
    if any(sum(w[1]) == 0 for w in words):
        raise ValueError("generators must be non-constant words")
    step = 1 if kind == "x" else -1
    order = list(M.degrees())
    if kind == "x":
        order.reverse()
    bases: dict[int, RatMatrix] = {}
    certified: dict[int, bool] = {}

    def known_target(t: int):
        if M.lo <= t <= M.hi:
            if t in bases and certified[t]:
                return bases[t]
            return None
        if M.dim(t) == 0:
            return RatMatrix.zeros(0, 0)
        return None

    for n in order:
        dim = M.dims[n - M.lo]
        if dim == 0:
            bases[n] = RatMatrix.zeros(0, 0)
            certified[n] = True
            continue
        # recursion from a certified side
        conds = []
        for w in words:
            target = known_target(n + step * sum(w[1]))
            op = _word_op(M, w, n)
            if target is None or op is None or not op.is_full:
                conds = None
                break
            conds.append(OpMatrix.full(_annihilator(target) @ op.matrix) if target.cols else op)
        if conds is not None:
            bases[n] = _intersect_kernels(conds, dim)
            certified[n] = True
            continue
        lower = _lower_bound(M, words, n, dim)
        upper = _upper_bound(M, kind, words, n, dim)
        bases[n] = lower
        certified[n] = upper is not None and _span_dim(upper) == _span_dim(lower)
    # dims of zero components were stored as 0x0; give them the right row count
    for n in order:
        if bases[n].rows != M.dims[n - M.lo]:
            bases[n] = RatMatrix.zeros(M.dims[n - M.lo], 0)
    return TorsionResult(words, M, bases, certified)


def _lower_bound(M: WindowModule, words: Sequence[Word], n: int, dim: int) -> RatMatrix:
    best = RatMatrix.zeros(dim, 0)
    t = 1
    while True:
        ops = []
        for combo in combinations_with_replacement(words, t):
            op = _word_op(M, _word_product(combo), n)
            if op is None:
                return best
            ops.append(op)
        best = _intersect_kernels(ops, dim)
        if best.cols == dim:
            return best
        t += 1


def _upper_bound(M: WindowModule, kind: str, words: Sequence[Word], n: int, dim: int) -> RatMatrix | None:
    """Intersection of ``ker(g^k)`` over single-letter generators known injective past the window."""
    ops = []
    for w in words:
        letters = [i for i, e in enumerate(w[1]) if e]
        if len(letters) != 1 or w[1][letters[0]] != 1:
            continue
        axis = letters[0] + 1
        if kind == "x" and axis in M.injective_above:
            power = M.hi - n
        elif kind == "d" and axis in M.injective_below:
            power = n - M.lo
        else:
            continue
        exps = tuple(power if i == letters[0] else 0 for i in range(M.m))
        op = _word_op(M, (kind, exps), n)
        if op is None or not op.is_full:
            continue
        ops.append(op)
    if not ops:
        return None
    return _intersect_kernels(ops, dim)


# ---------------------------------------------------------------------------
# divisibility of torsion


@dataclass(frozen=True)
class DivisibilityReport:
    axis: int
    mode: str
    entries: tuple[tuple[int, str], ...]  # (degree, "surjective" | "not surjective" | "boundary")
    torsion_verified: bool | None = None

    @property
    def all_surjective(self) -> bool:
        return all(s != "not surjective" for _, s in self.entries)

    @property
    def interior(self) -> list[int]:
        return [n for n, s in self.entries if s != "boundary"]


def check_divisibility(M: WindowModule, axis: int, mode: str) -> DivisibilityReport:
    """Is ``op: M_{n-deg op} -> M_n`` onto for each interior degree ``n``?

    ``mode`` is ``"d"`` (op = d_axis) or ``"x"`` (op = X_axis).  ``M`` is meant
    to be op-torsion (pass ``torsion(M, ...).module``); ``torsion_verified``
    records whether the window confirms that, when it can.
    """
    if mode not in ("x", "d"):
        raise ValueError("mode must be 'x' or 'd'")
    if not 1 <= axis <= M.m:
        raise ValueError(f"axis {axis} outside 1..{M.m}")
    exps = tuple(1 if i == axis - 1 else 0 for i in range(M.m))
    tors = torsion(M, [(mode, exps)])
    checked = [n for n in M.degrees() if tors.certified[n]]
    verified = None if not checked else all(tors.dim(n) == M.dims[n - M.lo] for n in checked)
    table = M.x[axis - 1] if mode == "x" else M.d[axis - 1]
    step = 1 if mode == "x" else -1
    entries = []
    for n in M.degrees():
        src = n - step
        if M.dim(src) == 0 and M.is_box_complete(n):
            entries.append((n, "surjective" if M.dims[n - M.lo] == 0 else "not surjective"))
            continue
        op = table.get(src)
        if not M.lo <= src <= M.hi or op is None or not op.is_full or not M.is_box_complete(src):
            entries.append((n, "boundary"))
            continue
        ok = rank(op.matrix) == M.dims[n - M.lo]
        entries.append((n, "surjective" if ok else "not surjective"))
    return DivisibilityReport(axis, mode, tuple(entries), verified)


# ---------------------------------------------------------------------------
# extensions


@dataclass(frozen=True)
class ExtensionReport:
    sub: EulerianReport
    middle: EulerianReport
    quotient: EulerianReport

    @property
    def consistent(self) -> bool:
        return self.middle.generalized == (self.sub.generalized and self.quotient.generalized)


def check_extension(
    sub: WindowModule,
    middle: WindowModule,
    quotient: WindowModule,
    inclusion: Mapping[int, RatMatrix],
    projection: Mapping[int, RatMatrix],
) -> ExtensionReport:
    """Verify ``0 -> sub -> middle -> quotient -> 0`` degreewise, then report all three.

    Raises ValueError if the sequence is not exact or the maps are not
    module maps on the window.
    """
    if not (sub.lo == middle.lo == quotient.lo and sub.hi == middle.hi == quotient.hi):
        raise ValueError("all three modules must share a window")
    if not sub.m == middle.m == quotient.m:
        raise ValueError("variable counts differ")
    for n in middle.degrees():
        f, g = inclusion[n], projection[n]
        a, b, c = sub.dim(n), middle.dim(n), quotient.dim(n)
        if f.shape != (b, a) or g.shape != (c, b):
            raise ValueError(f"maps at degree {n} have wrong shapes")
        if rank(f) != a or rank(g) != c or not (g @ f).is_zero() or a + c != b:
            raise ValueError(f"sequence is not exact at degree {n}")
    for tables in ("x", "d"):
        step = 1 if tables == "x" else -1
        for i in range(middle.m):
            for n in middle.degrees():
                t = n + step
                if t not in inclusion:
                    continue
                for (src_mod, tgt_mod, maps) in ((sub, middle, inclusion), (middle, quotient, projection)):
                    a = getattr(src_mod, tables)[i].get(n)
                    b = getattr(tgt_mod, tables)[i].get(n)
                    if a is None or b is None:
                        continue
                    left = OpMatrix.full(maps[t]) @ a
                    right = b @ OpMatrix.full(maps[n])
                    if left.disagreement(right):
                        raise ValueError(f"map is not {tables}{i+1}-linear at degree {n}")
    return ExtensionReport(
        check_generalized_eulerian(sub), check_generalized_eulerian(middle), check_generalized_eulerian(quotient)
    )


# ---------------------------------------------------------------------------
# Fourier twist


def fourier_module(M: WindowModule) -> WindowModule:
    """The twist of ``M`` along ``X_i -> d_i``, ``d_i -> -X_i``, regraded so ``eps`` stays compatible.

    Component ``n`` of the result is ``M_{-n-m}``; multidegree labels ``a``
    become ``-a - 1``.
    """
    m = M.m
    lo, hi = -M.hi - m, -M.lo - m
    new_x = [{-n - m: op for n, op in t.items()} for t in M.d]
    new_d = [{-n - m: op.scale(-1) for n, op in t.items()} for t in M.x]
    labels = None
    if M.labels is not None:
        labels = [tuple(tuple(-v - 1 for v in a) for a in M.labels[(-n - m) - M.lo]) for n in range(lo, hi + 1)]
    return WindowModule(
        m,
        lo,
        hi,
        [M.dims[(-n - m) - M.lo] for n in range(lo, hi + 1)],
        new_x,
        new_d,
        labels=labels,
        complete_below=M.complete_above,
        complete_above=M.complete_below,
        box_complete=[M.box_complete[(-n - m) - M.lo] for n in range(lo, hi + 1)],
        injective_below=M.injective_above,
        injective_above=M.injective_below,
    )


# ---------------------------------------------------------------------------
# JSON


def _mat_to_json(mat: RatMatrix) -> list[list[str]]:
    return [[str(v) for v in mat.row(i)] for i in range(mat.rows)]


def _op_to_json(axis: int, n: int, op: OpMatrix) -> dict:
    out = {"axis": axis, "degree": n, "shape": list(op.shape), "matrix": _mat_to_json(op.matrix)}
    if not op.is_full:
        out["defined"] = list(op.defined)
    return out


def module_to_json(M: WindowModule) -> dict:
    """Plain-data form following ``schemas/window_module.schema.json``."""

    def actions(tables, step):
        out = []
        for i, t in enumerate(tables, start=1):
            for n in sorted(t):
                # zero maps to/from known-zero spaces are implied
                if M.lo <= n <= M.hi and M.lo <= n + step <= M.hi or (t[n].shape[0] and t[n].shape[1]):
                    out.append(_op_to_json(i, n, t[n]))
        return out

    return {
        "schema": SCHEMA_ID,
        "m": M.m,
        "lo": M.lo,
        "hi": M.hi,
        "dims": list(M.dims),
        "labels": None if M.labels is None else [[list(a) for a in b] for b in M.labels],
        "x_action": actions(M.x, 1),
        "d_action": actions(M.d, -1),
        "complete_below": M.complete_below,
        "complete_above": M.complete_above,
        "box_complete": list(M.box_complete),
        "injective_below": sorted(M.injective_below),
        "injective_above": sorted(M.injective_above),
    }


def module_from_json(data: Mapping | str) -> WindowModule:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("schema") != SCHEMA_ID:
        raise ValueError(f"unsupported schema {data.get('schema')!r}")
    m = data["m"]

    def load(entries):
        tables: list[dict[int, OpMatrix]] = [{} for _ in range(m)]
        for e in entries:
            rows, cols = e["shape"]
            mat = RatMatrix(rows, cols, [[Fraction(v) for v in r] for r in e["matrix"]])
            mask = tuple(e.get("defined", [True] * cols))
            tables[e["axis"] - 1][e["degree"]] = OpMatrix(mat, mask)
        return tables

    return WindowModule(
        m,
        data["lo"],
        data["hi"],
        data["dims"],
        load(data["x_action"]),
        load(data["d_action"]),
        labels=data.get("labels"),
        complete_below=data["complete_below"],
        complete_above=data["complete_above"],
        box_complete=data["box_complete"],
        injective_below=data.get("injective_below", ()),
        injective_above=data.get("injective_above", ()),
    )
