"""Local cohomology of monomial ideals, one multidegree at a time.

The Čech complex of ``I = (f_1, ..., f_s)`` is ``Z^m``-graded and every
localization ``R_{f_T}`` has graded pieces of dimension 0 or 1, so at a fixed
multidegree ``a`` it collapses to a complex of small 0/±1 matrices.  The piece
``(R_{f_T})_a`` is nonzero iff ``a_i >= 0`` for every variable ``i`` not
dividing ``f_T``; hence the slice only depends on the set of negative
coordinates of ``a`` (its sign pattern).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator, Sequence

from .exactlinalg import FiniteComplex, RatMatrix, induced_map, rank
from .gradedmod import OpMatrix, WindowModule

__all__ = [
    "LCQuery",
    "MonomialIdeal",
    "MultidegreeSlice",
    "ZStatus",
    "assemble_window_module",
    "component_dim",
    "default_box",
    "degree_statuses",
    "nonzero_patterns",
    "parse_ideal",
    "realizable",
    "slice",
    "top_lc_oracle",
    "zdegree_status",
]

Multidegree = tuple[int, ...]


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True)
class MonomialIdeal:
    m: int
    generators: tuple[tuple[int, ...], ...]

    def __init__(self, m: int, generators: Sequence[Sequence[int]]):
        gens = {tuple(int(e) for e in g) for g in generators}
        if not gens:
            raise ValueError("an ideal needs at least one generator")
        for g in gens:
            if len(g) != m:
                raise ValueError(f"generator {g} does not have {m} exponents")
            if min(g) < 0:
                raise ValueError(f"negative exponent in {g}")
            if not any(g):
                raise ValueError("the unit monomial is not allowed as a generator")
        minimal = [g for g in gens if not any(h != g and all(x <= y for x, y in zip(h, g)) for h in gens)]
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "generators", tuple(sorted(minimal, reverse=True)))

    @property
    def s(self) -> int:
        return len(self.generators)

    @property
    def supports(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(i for i, e in enumerate(g) if e) for g in self.generators)

    @property
    def squarefree(self) -> bool:
        return all(e <= 1 for g in self.generators for e in g)

    @property
    def max_degree(self) -> int:
        return max(sum(g) for g in self.generators)

    def __str__(self) -> str:
        return ", ".join(_format_monomial(g) for g in self.generators)


def _format_monomial(g: Sequence[int]) -> str:
    parts = []
    for i, e in enumerate(g, start=1):
        if e == 1:
            parts.append(f"x{i}")
        elif e:
            parts.append(f"x{i}^{e}")
    return "*".join(parts)


_LETTER = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def parse_ideal(text: str, m: int | None = None) -> MonomialIdeal:
    """Parse ``"x1*x2, x2^2*x3"``; ``m`` defaults to the largest index present."""
    pieces = [p.strip() for p in text.split(",")]
    if not text.strip() or any(not p for p in pieces):
        raise ValueError(f"malformed ideal {text!r}")
    monomials = []
    for p in pieces:
        exps: dict[int, int] = {}
        for letter in p.replace(" ", "").split("*"):
            match = _LETTER.match(letter)
            if not match:
                raise ValueError(f"malformed monomial {p!r}")
            i = int(match.group(1))
            if i < 1:
                raise ValueError("variable indices start at 1")
            exps[i] = exps.get(i, 0) + int(match.group(2) or 1)
        monomials.append(exps)
    top = max(i for e in monomials for i in e)
    if m is None:
        m = top
    elif top > m:
        raise ValueError(f"ideal mentions x{top} but m = {m}")
    return MonomialIdeal(m, [[e.get(i, 0) for i in range(1, m + 1)] for e in monomials])


# ---------------------------------------------------------------------------
# slices


def _subsets(s: int) -> tuple[tuple[int, ...], ...]:
    return tuple(T for k in range(s + 1) for T in combinations(range(s), k))


def _presence_key(ideal: MonomialIdeal, a: Multidegree) -> tuple[bool, ...]:
    negative = frozenset(i for i, v in enumerate(a) if v < 0)
    return _presence_for_pattern(ideal, negative)


@lru_cache(maxsize=None)
def _presence_for_pattern(ideal: MonomialIdeal, negative: frozenset[int]) -> tuple[bool, ...]:
    supports = ideal.supports
    key = []
    for T in _subsets(ideal.s):
        union = frozenset().union(*(supports[t] for t in T))
        key.append(negative <= union)
    return tuple(key)


@lru_cache(maxsize=None)
def _complex_for_key(s: int, key: tuple[bool, ...]) -> tuple[FiniteComplex, tuple[tuple[tuple[int, ...], ...], ...]]:
    subsets = _subsets(s)
    by_size = [[T for T, ok in zip(subsets, key) if ok and len(T) == j] for j in range(s + 1)]
    index = [{T: r for r, T in enumerate(level)} for level in by_size]
    diffs = []
    for j in range(s):
        entries = {}
        for c, T in enumerate(by_size[j]):
            for t in range(s):
                if t in T:
                    continue
                U = tuple(sorted(T + (t,)))
                r = index[j + 1].get(U)
                if r is not None:
                    entries[(r, c)] = -1 if sum(1 for u in T if u < t) % 2 else 1
        diffs.append(RatMatrix.from_sparse(len(by_size[j + 1]), len(by_size[j]), entries))
    spaces = [len(level) for level in by_size]
    return FiniteComplex(spaces, diffs), tuple(tuple(level) for level in by_size)


@dataclass(frozen=True)
class MultidegreeSlice:
    a: Multidegree
    subsets: tuple[tuple[int, ...], ...]
    present: tuple[bool, ...]
    complex: FiniteComplex = field(compare=False)
    basis: tuple[tuple[tuple[int, ...], ...], ...] = field(compare=False)


def slice(ideal: MonomialIdeal, a: Sequence[int]) -> MultidegreeSlice:  # noqa: A001 - domain name
    a = tuple(a)
    if len(a) != ideal.m:
        raise ValueError(f"multidegree needs {ideal.m} entries")
    key = _presence_key(ideal, a)
    cx, basis = _complex_for_key(ideal.s, key)
    return MultidegreeSlice(a, _subsets(ideal.s), key, cx, basis)


def component_dim(ideal: MonomialIdeal, i: int, a: Sequence[int]) -> int:
    """``dim_Q H^i_I(R)_a``."""
    if not 0 <= i <= ideal.s:
        raise ValueError(f"cohomological index {i} outside 0..{ideal.s}")
    if len(a) != ideal.m:
        raise ValueError(f"multidegree needs {ideal.m} entries")
    cx, _ = _complex_for_key(ideal.s, _presence_key(ideal, tuple(a)))
    return cx.homology(i).dimension


@lru_cache(maxsize=None)
def _inclusion_on_homology(s: int, src: tuple[bool, ...], tgt: tuple[bool, ...], i: int) -> RatMatrix:
    """Map on ``H^i`` induced by sending each present subset to itself."""
    C, cb = _complex_for_key(s, src)
    D, db = _complex_for_key(s, tgt)
    chain = []
    for j in range(s + 1):
        where = {T: r for r, T in enumerate(db[j])}
        entries = {}
        for c, T in enumerate(cb[j]):
            if T not in where:
                raise ValueError("source subset absent in target slice")
            entries[(where[T], c)] = 1
        chain.append(RatMatrix.from_sparse(len(db[j]), len(cb[j]), entries))
    return induced_map(C, D, chain, i)


def _pattern_dim(ideal: MonomialIdeal, i: int, negative: frozenset[int]) -> int:
    cx, _ = _complex_for_key(ideal.s, _presence_for_pattern(ideal, negative))
    return cx.homology(i).dimension


# ---------------------------------------------------------------------------
# sign patterns and certification


def _patterns(m: int) -> list[frozenset[int]]:
    return [frozenset(c) for k in range(m + 1) for c in combinations(range(m), k)]


def realizable(m: int, negative: frozenset[int], n: int) -> bool:
    """Is there ``a`` with ``|a| = n`` whose negative coordinates are exactly ``negative``?"""
    k = len(negative)
    if k == 0:
        return n >= 0
    if k == m:
        return n <= -m
    return True


def nonzero_patterns(ideal: MonomialIdeal, i: int) -> list[frozenset[int]]:
    return [p for p in _patterns(ideal.m) if _pattern_dim(ideal, i, p)]


def _box_points(m: int, B: int, n: int) -> Iterator[Multidegree]:
    """Points of ``[-B, B]^m`` with coordinate sum ``n`` in lexicographic order."""
    if m == 0:
        if n == 0:
            yield ()
        return
    for v in range(max(-B, n - (m - 1) * B), min(B, n + (m - 1) * B) + 1):
        for rest in _box_points(m - 1, B, n - v):
            yield (v,) + rest


def _pattern_in_box(m: int, B: int, negative: frozenset[int], n: int) -> bool:
    k = len(negative)
    return -k * B <= n <= (m - k) * B - k


@lru_cache(maxsize=None)
def _validate_patterns(ideal: MonomialIdeal, B: int) -> bool:
    """Check every box point has the slice of its sign pattern (the fast-path assumption)."""
    reference = {p: _presence_for_pattern(ideal, p) for p in _patterns(ideal.m)}
    for a in product(range(-B, B + 1), repeat=ideal.m):
        negative = frozenset(j for j, v in enumerate(a) if v < 0)
        if _presence_key_direct(ideal, a) != reference[negative]:
            return False
    return True


def _presence_key_direct(ideal: MonomialIdeal, a: Multidegree) -> tuple[bool, ...]:
    supports = ideal.supports
    out = []
    for T in _subsets(ideal.s):
        union = frozenset().union(*(supports[t] for t in T))
        out.append(all(v >= 0 for j, v in enumerate(a) if j not in union))
    return tuple(out)


def _certified(ideal: MonomialIdeal, B: int) -> bool:
    return ideal.squarefree and _validate_patterns(ideal, B)


def default_box(ideal: MonomialIdeal, window: tuple[int, int]) -> int:
    radius = max(abs(window[0]), abs(window[1]))
    return max(radius + ideal.max_degree, ideal.m + 2)


def _check_box(ideal: MonomialIdeal, n: int, B: int) -> None:
    if B < 1:
        raise ValueError("box bound must be at least 1")
    for p in _patterns(ideal.m):
        if realizable(ideal.m, p, n) and not _pattern_in_box(ideal.m, B, p, n):
            raise ValueError(f"box {B} has no representative of sign pattern {sorted(j + 1 for j in p)} at degree {n}")


@dataclass(frozen=True)
class ZStatus:
    kind: str  # "NONZERO" | "ZERO_IN_BOX" | "ZERO_CERTIFIED"
    witness: Multidegree | None = None

    @property
    def nonzero(self) -> bool:
        return self.kind == "NONZERO"


def _witness(m: int, B: int, negative: frozenset[int], n: int) -> Multidegree:
    """Lexicographically first point of minimal 1-norm with the given pattern and sum."""
    k = len(negative)
    p = max(k, -n) if k < m else -n  # magnitude of the negative part
    if k == 0:
        p = 0
    q = n + p

    def fill(i: int, neg_left: int, pos_left: int, negs: int, poss: int) -> Multidegree | None:
        if i == m:
            return () if neg_left == 0 and pos_left == 0 else None
        if i in negative:
            lo = -min(B, neg_left - (negs - 1))
            for v in range(lo, 0):
                rest = fill(i + 1, neg_left + v, pos_left, negs - 1, poss)
                if rest is not None:
                    return (v,) + rest
            return None
        for v in range(0, min(B, pos_left) + 1):
            rest = fill(i + 1, neg_left, pos_left - v, negs, poss - 1)
            if rest is not None:
                return (v,) + rest
        return None

    found = fill(0, p, q, k, m - k)
    if found is None:
        raise ValueError("no witness in box")
    return found


def zdegree_status(ideal: MonomialIdeal, i: int, n: int, box: int) -> ZStatus:
    """Is ``H^i_I(R)_n`` nonzero?  Witnesses minimize the 1-norm, then lexicographic order."""
    _check_box(ideal, n, box)
    best = None
    for p in nonzero_patterns(ideal, i):
        if realizable(ideal.m, p, n) and _pattern_in_box(ideal.m, box, p, n):
            a = _witness(ideal.m, box, p, n)
            cand = (sum(abs(v) for v in a), a)
            if best is None or cand < best:
                best = cand
    if best is not None:
        return ZStatus("NONZERO", best[1])
    return ZStatus("ZERO_CERTIFIED" if _certified(ideal, box) else "ZERO_IN_BOX")


def degree_statuses(ideal: MonomialIdeal, i: int, window: tuple[int, int], box: int | None = None) -> dict[int, ZStatus]:
    B = default_box(ideal, window) if box is None else box
    return {n: zdegree_status(ideal, i, n, B) for n in range(window[0], window[1] + 1)}


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class LCQuery:
    ideal: MonomialIdeal
    index: int
    window: tuple[int, int]
    box: int | None = None

    @property
    def box_bound(self) -> int:
        return default_box(self.ideal, self.window) if self.box is None else self.box


def assemble_window_module(q: LCQuery) -> WindowModule:
    """``H^i_I(R)`` on the window, truncated to multidegrees in ``[-B, B]^m``.

    Basis vectors are homology classes of slices, grouped by multidegree in
    lexicographic order and labelled by it.  Completeness flags and
    injectivity certificates come from the sign-pattern analysis and are only
    set when that analysis is certified (squarefree ideals).
    """
    I, i = q.ideal, q.index
    lo, hi = q.window
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    if not 0 <= i <= I.s:
        raise ValueError(f"cohomological index {i} outside 0..{I.s}")
    B, m, s = q.box_bound, I.m, I.s
    for n in range(lo, hi + 1):
        _check_box(I, n, B)

    def key(a):
        return _presence_key(I, a)

    blocks: dict[int, list[tuple[Multidegree, int, int]]] = {}  # n -> [(a, offset, dim)]
    where: dict[Multidegree, tuple[int, int]] = {}
    dims = []
    labels = []
    for n in range(lo, hi + 1):
        offset, block, lab = 0, [], []
        for a in _box_points(m, B, n):
            k = _complex_for_key(s, key(a))[0].homology(i).dimension
            if k:
                block.append((a, offset, k))
                where[a] = (n, offset)
                lab.extend([a] * k)
                offset += k
        blocks[n] = block
        dims.append(offset)
        labels.append(lab)

    def action(j: int, step: int) -> dict[int, OpMatrix]:
        table = {}
        for n in range(lo, hi + 1):
            t = n + step
            if not lo <= t <= hi:
                continue
            entries, mask = {}, [True] * dims[n - lo]
            for a, off, k in blocks[n]:
                b = list(a)
                b[j] += step
                b = tuple(b)
                if abs(b[j]) > B:
                    for c in range(k):
                        mask[off + c] = False
                    continue
                if b not in where:
                    continue  # target homology vanishes
                scale = 1 if step == 1 else a[j]
                if scale == 0:
                    continue
                _, toff = where[b]
                mat = _inclusion_on_homology(s, key(a), key(b), i)
                for (r, c), v in _nonzero_entries(mat):
                    entries[(toff + r, off + c)] = v * scale
            table[n] = OpMatrix(RatMatrix.from_sparse(dims[t - lo], dims[n - lo], entries), tuple(mask))
        return table

    x = [action(j, 1) for j in range(m)]
    d = [action(j, -1) for j in range(m)]

    flags = dict(complete_below=False, complete_above=False, box_complete=False)
    inj_below: set[int] = set()
    inj_above: set[int] = set()
    if _certified(I, B):
        Z = nonzero_patterns(I, i)
        flags["complete_below"] = not any(_realizable_beyond(m, p, lo, -1) for p in Z)
        flags["complete_above"] = not any(_realizable_beyond(m, p, hi, +1) for p in Z)
        flags["box_complete"] = [_piece_in_box(m, B, Z, n) for n in range(lo, hi + 1)]
        inj_below = {j + 1 for j in range(m) if all(j in p for p in Z)}
        inj_above = {j + 1 for j in range(m) if _x_injective_far_above(I, i, Z, j)}
    return WindowModule(
        m,
        lo,
        hi,
        dims,
        x,
        d,
        labels=labels,
        injective_below=inj_below,
        injective_above=inj_above,
        **flags,
    )


def _nonzero_entries(mat: RatMatrix):
    for r, row in enumerate(mat.sparse_rows):
        for c, v in row:
            yield (r, c), v


def _realizable_beyond(m: int, p: frozenset[int], edge: int, side: int) -> bool:
    """Is pattern ``p`` realizable at some degree strictly past ``edge`` on ``side``?"""
    k = len(p)
    if 0 < k < m:
        return True
    if k == 0:
        return side > 0 or edge > 0
    return side < 0 or edge < -m


def _piece_in_box(m: int, B: int, Z: list[frozenset[int]], n: int) -> bool:
    """Do all multidegrees of degree ``n`` carrying nonzero homology fit in the box?"""
    for p in Z:
        if not realizable(m, p, n):
            continue
        k = len(p)
        if 0 < k < m:
            return False  # infinitely many multidegrees
        if k == m and -n - (m - 1) > B:
            return False
        if k == 0 and n > B:
            return False
    return True


def _x_injective_far_above(I: MonomialIdeal, i: int, Z: list[frozenset[int]], j: int) -> bool:
    """``X_j`` is injective in all high degrees iff each pattern containing ``j`` maps injectively to the one without."""
    for p in Z:
        if j in p:
            src = _presence_for_pattern(I, p)
            tgt = _presence_for_pattern(I, p - {j})
            mat = _inclusion_on_homology(I.s, src, tgt, i)
            if rank(mat) != mat.cols:
                return False
    return True


# ---------------------------------------------------------------------------
# closed form for the top local cohomology of the maximal ideal


def top_lc_oracle(m: int, window: tuple[int, int]) -> WindowModule:
    """``H^m`` of the maximal monomial ideal from its monomial basis ``X^a``, ``a <= -1``."""
    lo, hi = window
    if m < 1:
        raise ValueError("m must be positive")
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    if hi > -m:
        raise ValueError(f"window must lie in degrees <= {-m}")

    def points(n):
        return [a for a in _box_points(m, max(-n, 1), n) if all(v <= -1 for v in a)]

    bases = {n: points(n) for n in range(lo, hi + 1)}
    index = {n: {a: r for r, a in enumerate(b)} for n, b in bases.items()}
    x: list[dict] = [{} for _ in range(m)]
    d: list[dict] = [{} for _ in range(m)]
    for j in range(m):
        for n in range(lo, hi + 1):
            for step, table in ((1, x[j]), (-1, d[j])):
                t = n + step
                if not lo <= t <= hi:
                    continue
                entries = {}
                for c, a in enumerate(bases[n]):
                    b = list(a)
                    b[j] += step
                    b = tuple(b)
                    if b in index[t]:
                        entries[(index[t][b], c)] = 1 if step == 1 else a[j]
                table[n] = RatMatrix.from_sparse(len(bases[t]), len(bases[n]), entries)
    return WindowModule(
        m,
        lo,
        hi,
        [len(bases[n]) for n in range(lo, hi + 1)],
        x,
        d,
        labels=[bases[n] for n in range(lo, hi + 1)],
        complete_above=hi == -m,
        box_complete=True,
        injective_below=range(1, m + 1),
    )
