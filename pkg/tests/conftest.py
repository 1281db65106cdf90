import json
from fractions import Fraction
from importlib import resources
from itertools import product

import pytest

from lcweyl.exactlinalg import RatMatrix
from lcweyl.gradedmod import WindowModule


def monomials(m: int, n: int) -> list[tuple[int, ...]]:
    """Exponent vectors of total degree n in lexicographic order."""
    return [a for a in product(range(n + 1), repeat=m) if sum(a) == n]


def polynomial_module(m: int, lo: int, hi: int) -> WindowModule:
    """K[x_1..x_m] on [lo, hi] with lo >= 0, built from its monomial basis."""
    bases = {n: monomials(m, n) for n in range(lo - 1, hi + 2)}
    index = {n: {a: r for r, a in enumerate(b)} for n, b in bases.items()}
    x = [{} for _ in range(m)]
    d = [{} for _ in range(m)]
    for j in range(m):
        for n in range(lo, hi + 1):
            if n + 1 <= hi:
                ent = {}
                for c, a in enumerate(bases[n]):
                    b = list(a)
                    b[j] += 1
                    ent[(index[n + 1][tuple(b)], c)] = 1
                x[j][n] = RatMatrix.from_sparse(len(bases[n + 1]), len(bases[n]), ent)
            if n - 1 >= lo:
                ent = {}
                for c, a in enumerate(bases[n]):
                    if a[j]:
                        b = list(a)
                        b[j] -= 1
                        ent[(index[n - 1][tuple(b)], c)] = a[j]
                d[j][n] = RatMatrix.from_sparse(len(bases[n - 1]), len(bases[n]), ent)
    return WindowModule(
        m,
        lo,
        hi,
        [len(bases[n]) for n in range(lo, hi + 1)],
        x,
        d,
        labels=[bases[n] for n in range(lo, hi + 1)],
        complete_below=lo == 0,
        injective_above=range(1, m + 1),
    )


def one_by_one(value) -> RatMatrix:
    return RatMatrix.from_rows([[value]])


@pytest.fixture
def poly1():
    """K[x1] on [0, 4]."""
    return polynomial_module(1, 0, 4)


@pytest.fixture
def top1():
    """H^1 of (x1) in K[x1] on [-4, -1]: basis x1^n."""
    x = {n: one_by_one(1) for n in range(-4, -1)}
    d = {n: one_by_one(n) for n in range(-3, 0)}
    return WindowModule(1, -4, -1, [1] * 4, [x], [d], complete_above=True, injective_below=[1])


@pytest.fixture
def log_module():
    """K[x, 1/x] + K[x, 1/x] log x on [-3, 3]; eps - n is a nonzero nilpotent."""
    x = {n: RatMatrix.identity(2) for n in range(-3, 3)}
    d = {n: RatMatrix.from_rows([[n, 1], [0, n]]) for n in range(-2, 4)}
    return WindowModule(1, -3, 3, [2] * 7, [x], [d])


@pytest.fixture
def shifted_poly():
    """Basis e_n = x^(n+1) in degree n: eps acts as n + 1, so nothing is nilpotent."""
    x = {n: one_by_one(1) for n in range(-1, 4)}
    d = {n: one_by_one(n + 1) for n in range(0, 5)}
    return WindowModule(1, -3, 4, [0, 0, 1, 1, 1, 1, 1, 1], [x], [d], complete_below=True)


@pytest.fixture(scope="session")
def schemas():
    base = resources.files("lcweyl") / "schemas"
    return {
        "module": json.loads((base / "window_module.schema.json").read_text()),
        "report": json.loads((base / "verification_report.schema.json").read_text()),
    }


def frac_matrix(rows):
    return RatMatrix.from_rows([[Fraction(v) for v in r] for r in rows])
