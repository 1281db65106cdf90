"""Executable checks of structural statements about graded Weyl-algebra modules.

Every check returns a :class:`CheckResult` with a three-valued verdict.  A
window only certifies finitely many degrees, so a statement quantified over
all of Z can fail on certified data (FAIL, with a witness), hold on all
certified data (PASS), or be blocked by missing data (INCONCLUSIVE, with the
reason).
"""

from __future__ import annotations

import configparser
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import Iterable, Sequence

from .cech import LCQuery, MonomialIdeal, ZStatus, assemble_window_module, degree_statuses, parse_ideal
from .exactlinalg import rank
from .gradedmod import (
    BoundaryError,
    WindowModule,
    check_generalized_eulerian,
    koszul_d,
    koszul_x,
    module_from_json,
    torsion,
)

REPORT_SCHEMA_ID = "lcweyl.verification-report/1"

CHECK_NAMES = (
    "generalized_eulerian",
    "vanishing",
    "tameness",
    "rigidity",
    "pattern_shape",
    "koszul_concentration",
    "torsion_vanishing",
    "injective_form_x",
    "injective_form_d",
)

STATEMENTS = {
    "generalized_eulerian": "each homogeneous element of degree n is killed by a power of (eps - n)",
    "vanishing": "a module whose components vanish in all large |n| is zero",
    "tameness": "M_n0 != 0 with n0 >= 1-m gives M_n != 0 for all n >= n0; M_n0 != 0 with n0 <= -1 gives M_n != 0 for all n <= n0",
    "rigidity": "some M_r != 0 with r <= -m iff all such; some M_s != 0 with s >= 0 iff all such; for m >= 2 some M_r != 0 with -m < r < 0 iff M_n != 0 for every n",
    "pattern_shape": "the support is empty, {n >= 0}, {n <= -m} or all of Z",
    "koszul_concentration": "for m = 1, homology of d_1 lives in degree -1 and homology of X_1 in degree 0",
    "torsion_vanishing": "X-torsion vanishes in degrees >= 1-m and d-torsion vanishes in degrees <= -m",
    "injective_form_x": "some linear form in the X_i acts injectively on M_n for n >= 1-m",
    "injective_form_d": "some linear form in the d_i acts injectively on M_n for n <= -m",
}


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class CheckResult:
    name: str
    verdict: Verdict
    evidence: dict = field(default_factory=dict)
    reason: str | None = None
    subject: str = ""
    runtime: float | None = None

    @property
    def statement(self) -> str:
        return STATEMENTS[self.name]

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "name": self.name,
            "statement": self.statement,
            "verdict": self.verdict.value,
            "evidence": _plain(self.evidence),
            "reason": self.reason,
            "runtime": self.runtime,
        }


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    return value


def _result(name, verdict, reason=None, **evidence) -> CheckResult:
    if verdict is Verdict.INCONCLUSIVE and not reason:
        raise ValueError("an inconclusive verdict needs a reason")
    return CheckResult(name, verdict, evidence, reason)


# ---------------------------------------------------------------------------
# degree patterns

NONZERO, ZERO, BOUNDARY = "NONZERO", "ZERO", "BOUNDARY"


@dataclass(frozen=True)
class DegreePattern:
    lo: int
    hi: int
    statuses: tuple[str, ...]
    complete_below: bool = False
    complete_above: bool = False

    def __post_init__(self):
        if len(self.statuses) != self.hi - self.lo + 1:
            raise ValueError("need one status per window degree")
        if any(s not in (NONZERO, ZERO, BOUNDARY) for s in self.statuses):
            raise ValueError("unknown status")

    @classmethod
    def from_dict(cls, statuses: dict[int, str], **flags) -> "DegreePattern":
        lo, hi = min(statuses), max(statuses)
        return cls(lo, hi, tuple(statuses[n] for n in range(lo, hi + 1)), **flags)

    @classmethod
    def from_zstatus(cls, statuses: dict[int, ZStatus]) -> "DegreePattern":
        table = {"NONZERO": NONZERO, "ZERO_CERTIFIED": ZERO, "ZERO_IN_BOX": BOUNDARY}
        return cls.from_dict({n: table[s.kind] for n, s in statuses.items()})

    @classmethod
    def from_module(cls, M: WindowModule) -> "DegreePattern":
        out = []
        for n in M.degrees():
            if M.dims[n - M.lo]:
                out.append(NONZERO)
            else:
                out.append(ZERO if M.is_box_complete(n) else BOUNDARY)
        return cls(M.lo, M.hi, tuple(out), M.complete_below, M.complete_above)

    def status(self, n: int) -> str:
        if self.lo <= n <= self.hi:
            return self.statuses[n - self.lo]
        if (n < self.lo and self.complete_below) or (n > self.hi and self.complete_above):
            return ZERO
        return BOUNDARY

    def degrees(self, status: str) -> list[int]:
        return [n for n in range(self.lo, self.hi + 1) if self.statuses[n - self.lo] == status]

    def __str__(self) -> str:
        abbrev = {NONZERO: "+", ZERO: "0", BOUNDARY: "?"}
        return f"[{self.lo}..{self.hi}] " + "".join(abbrev[s] for s in self.statuses)


# ---------------------------------------------------------------------------
# degree-pattern checks


def check_vanishing(P: DegreePattern) -> CheckResult:
    nonzero = P.degrees(NONZERO)
    if not nonzero:
        return _result("vanishing", Verdict.PASS, nonzero=[])
    if P.complete_below and P.complete_above:
        return _result("vanishing", Verdict.FAIL, nonzero=nonzero, witness=nonzero[0], bounded=True)
    left, right = P.statuses[0], P.statuses[-1]
    if NONZERO in (left, right):
        return _result("vanishing", Verdict.PASS, nonzero_edges=[e for e, s in ((P.lo, left), (P.hi, right)) if s == NONZERO])
    if left == ZERO and right == ZERO:
        return _result("vanishing", Verdict.FAIL, witness=nonzero[0], zero_edges=[P.lo, P.hi])
    return _result("vanishing", Verdict.INCONCLUSIVE, "window edge status is a boundary", nonzero=nonzero)


def _first_violation(P: DegreePattern, premises: Iterable[int], consequents) -> tuple[int, int] | None:
    for n0 in premises:
        for n in consequents(n0):
            if P.status(n) == ZERO:
                return n0, n
    return None


def check_tameness(P: DegreePattern, m: int) -> CheckResult:
    nonzero = P.degrees(NONZERO)
    up = _first_violation(P, [n for n in nonzero if n >= 1 - m], lambda n0: range(n0 + 1, P.hi + 1))
    if up:
        return _result("tameness", Verdict.FAIL, witness=list(up), direction="up")
    down = _first_violation(P, [n for n in nonzero if n <= -1], lambda n0: range(P.lo, n0))
    if down:
        return _result("tameness", Verdict.FAIL, witness=list(down), direction="down")
    return _result("tameness", Verdict.PASS, boundary=P.degrees(BOUNDARY))


def check_rigidity(P: DegreePattern, m: int) -> CheckResult:
    if m < 1:
        return _result("rigidity", Verdict.INCONCLUSIVE, "rigidity needs m >= 1")
    nonzero = P.degrees(NONZERO)
    window = range(P.lo, P.hi + 1)
    parts = [
        ("a", [n for n in nonzero if n <= -m], [n for n in window if n <= -m]),
        ("b", [n for n in nonzero if n >= 0], [n for n in window if n >= 0]),
    ]
    if m >= 2:
        parts.append(("c", [n for n in nonzero if -m < n < 0], list(window)))
    for part, premises, targets in parts:
        hit = _first_violation(P, premises, lambda _n0: targets)
        if hit:
            return _result("rigidity", Verdict.FAIL, part=part, witness=list(hit))
    return _result("rigidity", Verdict.PASS, parts=[p for p, _, _ in parts])


SHAPES = ("empty", "right_tail", "left_tail", "all")


def _shape_contains(shape: str, n: int, m: int) -> bool:
    return {"empty": False, "right_tail": n >= 0, "left_tail": n <= -m, "all": True}[shape]


def check_pattern_shape(P: DegreePattern, m: int) -> CheckResult:
    consistent = []
    for shape in SHAPES:
        ok = all(
            (s != NONZERO or _shape_contains(shape, n, m)) and (s != ZERO or not _shape_contains(shape, n, m))
            for n, s in zip(range(P.lo, P.hi + 1), P.statuses)
        )
        if ok:
            consistent.append(shape)
    if consistent:
        return _result("pattern_shape", Verdict.PASS, shapes=consistent, pattern=str(P))
    return _result("pattern_shape", Verdict.FAIL, pattern=str(P), nonzero=P.degrees(NONZERO), zero=P.degrees(ZERO))


# ---------------------------------------------------------------------------
# module checks


def check_eulerian(M: WindowModule) -> CheckResult:
    report = check_generalized_eulerian(M)
    checked = report.checked
    if not report.generalized:
        return _result("generalized_eulerian", Verdict.FAIL, witness=report.failures()[0], failures=report.failures())
    indices = sorted({e.index for e in checked})
    skipped = [e.degree for e in report.entries if e.status == "skipped"]
    partial = [e.degree for e in checked if e.certified_dim < e.dim]
    if not checked:
        return _result("generalized_eulerian", Verdict.INCONCLUSIVE, "no degree has the actions needed for eps")
    return _result(
        "generalized_eulerian", Verdict.PASS, indices=indices, eulerian=report.eulerian, skipped=skipped, partial=partial
    )


def _interior_support(H: WindowModule) -> list[int]:
    return [n for n in H.degrees() if H.dims[n - H.lo] and H.is_box_complete(n)]


def check_koszul_concentration(M: WindowModule) -> CheckResult:
    name = "koszul_concentration"
    if M.m != 1:
        return _result(name, Verdict.INCONCLUSIVE, f"applies to m = 1 only (m = {M.m})")
    if not check_generalized_eulerian(M).generalized:
        return _result(name, Verdict.INCONCLUSIVE, "module is not generalized Eulerian on the window")
    try:
        dh0, dh1 = koszul_d(M, 1)
        xh0, xh1 = koszul_x(M, 1)
    except BoundaryError as exc:
        return _result(name, Verdict.INCONCLUSIVE, str(exc))
    supports = {
        "d_H0": _interior_support(dh0),
        "d_H1": _interior_support(dh1),
        "x_H0": _interior_support(xh0),
        "x_H1": _interior_support(xh1),
    }
    for key, allowed in (("d_H0", -1), ("d_H1", -1), ("x_H0", 0), ("x_H1", 0)):
        bad = [n for n in supports[key] if n != allowed]
        if bad:
            return _result(name, Verdict.FAIL, witness=[key, bad[0]], supports=supports)
    return _result(name, Verdict.PASS, supports=supports)


def check_gtam(M: WindowModule) -> CheckResult:
    name = "torsion_vanishing"
    if M.m < 1:
        return _result(name, Verdict.INCONCLUSIVE, "needs m >= 1")
    if not M.fully_box_complete:
        return _result(name, Verdict.INCONCLUSIVE, "components are box truncations")
    if not check_generalized_eulerian(M).generalized:
        return _result(name, Verdict.INCONCLUSIVE, "module is not generalized Eulerian on the window")
    m = M.m
    evidence = {}
    tested = 0
    for side, letter, degrees in (
        ("x", "x", [n for n in M.degrees() if n >= 1 - m]),
        ("d", "d", [n for n in M.degrees() if n <= -m]),
    ):
        tors = torsion(M, [f"{letter}{j}" for j in range(1, m + 1)])
        certified = [n for n in degrees if tors.certified[n]]
        tested += len(certified)
        bad = [n for n in certified if tors.dim(n)]
        evidence[side] = {"certified": certified, "lower_bound_only": [n for n in degrees if not tors.certified[n]]}
        if bad:
            return _result(name, Verdict.FAIL, witness=[side, bad[0], tors.dim(bad[0])], **evidence)
    if not tested:
        return _result(name, Verdict.INCONCLUSIVE, "no torsion component could be certified", **evidence)
    return _result(name, Verdict.PASS, **evidence)


def candidate_ladder(m: int, height: int = 3) -> list[tuple[int, ...]]:
    """Unit vectors, the all-ones vector, then every coefficient vector by height."""
    seen: list[tuple[int, ...]] = []
    for i in range(m):
        seen.append(tuple(1 if j == i else 0 for j in range(m)))
    if m > 1:
        seen.append((1,) * m)
    order = [0]
    for h in range(1, height + 1):
        order += [h, -h]
    for h in range(1, height + 1):
        allowed = [c for c in order if abs(c) <= h]
        for vec in product(allowed, repeat=m):
            if max(abs(c) for c in vec) == h and vec not in seen:
                seen.append(vec)
    return seen


def _form_op(M: WindowModule, coeffs: Sequence[int], n: int, letter: str):
    tables = M.x if letter == "x" else M.d
    total = None
    for j, b in enumerate(coeffs):
        if not b:
            continue
        op = tables[j].get(n)
        if op is None:
            return None
        term = op.scale(b)
        total = term if total is None else total + term
    return total


def search_injective_form(
    M: WindowModule, letter: str = "x", candidates: Sequence[Sequence[int]] | None = None
) -> CheckResult:
    """First ladder candidate acting injectively on the relevant degrees.

    Injectivity is tested on the defined columns of each window degree whose
    target lies inside the known range; other degrees are reported as
    boundary.  Exhausting the ladder is INCONCLUSIVE, never FAIL.
    """
    name = f"injective_form_{letter}"
    m = M.m
    if m < 1:
        return _result(name, Verdict.INCONCLUSIVE, "needs m >= 1")
    if letter == "x":
        degrees = [n for n in M.degrees() if n >= 1 - m]
    else:
        degrees = [n for n in M.degrees() if n <= -m]
    degrees = [n for n in degrees if M.dims[n - M.lo]]
    candidates = candidate_ladder(m) if candidates is None else [tuple(c) for c in candidates]
    boundary: list[int] = []
    for coeffs in candidates:
        if not any(coeffs):
            continue
        ok = True
        boundary = []
        partial = []
        for n in degrees:
            op = _form_op(M, coeffs, n, letter)
            if op is None:
                boundary.append(n)
                continue
            keep = [j for j, d in enumerate(op.defined) if d]
            if len(keep) < len(op.defined):
                partial.append(n)
            sub = op.matrix.select_columns(keep)
            if rank(sub) != len(keep):
                ok = False
                break
        if ok:
            if degrees and len(boundary) == len(degrees):
                return _result(name, Verdict.INCONCLUSIVE, "every relevant degree is at the window boundary", boundary=boundary)
            return _result(name, Verdict.PASS, form=list(coeffs), tested=[n for n in degrees if n not in boundary], boundary=boundary, truncated=partial)
    return _result(name, Verdict.INCONCLUSIVE, "none found among candidates", tried=len(candidates))


# ---------------------------------------------------------------------------
# suites


@dataclass(frozen=True)
class IdealCase:
    name: str
    ideal: MonomialIdeal
    indices: tuple[int, ...]
    window: tuple[int, int]
    box: int | None = None


@dataclass(frozen=True)
class ModuleCase:
    name: str
    path: str


@dataclass
class SuiteConfig:
    cases: list = field(default_factory=list)
    checks: tuple[str, ...] = CHECK_NAMES
    timing: bool = False


def squarefree_ideals(m: int) -> list[MonomialIdeal]:
    """Every nonzero proper squarefree monomial ideal of K[x_1..x_m]."""
    faces = [frozenset(c) for k in range(1, m + 1) for c in combinations(range(m), k)]
    out = []
    for k in range(1, len(faces) + 1):
        for family in combinations(faces, k):
            if any(a < b for a in family for b in family):
                continue
            out.append(MonomialIdeal(m, [[1 if j in f else 0 for j in range(m)] for f in family]))
    out.sort(key=lambda I: (I.s, sorted(I.generators, reverse=True)))
    return out


def default_suite(max_m: int = 3, window: tuple[int, int] = (-8, 4)) -> SuiteConfig:
    cases = []
    for m in range(1, max_m + 1):
        for I in squarefree_ideals(m):
            cases.append(IdealCase(f"m={m} ({I})", I, tuple(range(I.s + 1)), window))
    return SuiteConfig(cases)


def parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.strip().partition(":")
    if not sep:
        raise ValueError(f"window must look like lo:hi, got {text!r}")
    lo_i, hi_i = int(lo), int(hi)
    if lo_i > hi_i:
        raise ValueError(f"empty window {text!r}")
    return lo_i, hi_i


def load_suite(path: str | os.PathLike) -> SuiteConfig:
    """Read an INI suite file (format documented in the README)."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    config = SuiteConfig()
    if parser.has_section("suite"):
        sec = parser["suite"]
        checks = sec.get("checks", "all").strip()
        if checks != "all":
            names = tuple(c.strip() for c in checks.split(",") if c.strip())
            unknown = [c for c in names if c not in CHECK_NAMES]
            if unknown:
                raise ValueError(f"unknown checks {unknown}")
            config.checks = names
        config.timing = sec.getboolean("timing", False)
        generate = sec.get("generate", "").strip()
        if generate:
            if generate != "squarefree":
                raise ValueError(f"unknown generator {generate!r}")
            window = parse_window(sec.get("window", "-8:4"))
            config.cases.extend(default_suite(sec.getint("max_m", 3), window).cases)
    for section in parser.sections():
        kind, _, name = section.partition(" ")
        sec = parser[section]
        if kind == "case":
            ideal = parse_ideal(sec["ideal"], sec.getint("m") if "m" in sec else None)
            raw = sec.get("indices", "all").strip()
            indices = tuple(range(ideal.s + 1)) if raw == "all" else tuple(int(v) for v in raw.split(","))
            box = sec.getint("box") if "box" in sec else None
            config.cases.append(IdealCase(name or str(ideal), ideal, indices, parse_window(sec["window"]), box))
        elif kind == "module":
            config.cases.append(ModuleCase(name or sec["path"], str((path.parent / sec["path"]).resolve())))
        elif kind != "suite":
            raise ValueError(f"unknown section [{section}]")
    return config


def run_module_checks(M: WindowModule, checks: Sequence[str], pattern: DegreePattern | None = None) -> list[CheckResult]:
    P = pattern if pattern is not None else DegreePattern.from_module(M)
    runners = {
        "generalized_eulerian": lambda: check_eulerian(M),
        "vanishing": lambda: check_vanishing(P),
        "tameness": lambda: check_tameness(P, M.m),
        "rigidity": lambda: check_rigidity(P, M.m),
        "pattern_shape": lambda: check_pattern_shape(P, M.m),
        "koszul_concentration": lambda: check_koszul_concentration(M),
        "torsion_vanishing": lambda: check_gtam(M),
        "injective_form_x": lambda: search_injective_form(M, "x"),
        "injective_form_d": lambda: search_injective_form(M, "d"),
    }
    out = []
    for name in checks:
        if name == "koszul_concentration" and M.m != 1:
            continue
        start = time.perf_counter()
        try:
            res = runners[name]()
        except Exception as exc:  # a crashing check is an engine bug; record it, keep going
            res = _result(name, Verdict.FAIL, error=f"{type(exc).__name__}: {exc}")
        res.runtime = time.perf_counter() - start
        out.append(res)
    return out


def _run_case(job) -> list[CheckResult]:
    case, index, checks = job
    if isinstance(case, ModuleCase):
        subject = f"module {case.name}"
        try:
            with open(case.path, encoding="utf-8") as fh:
                M = module_from_json(json.load(fh))
        except Exception as exc:
            return [CheckResult("generalized_eulerian", Verdict.FAIL, {"error": f"cannot load module: {exc}"}, subject=subject)]
        results = run_module_checks(M, checks)
    else:
        subject = f"H^{index}_I(R), I = ({case.ideal}), m = {case.ideal.m}, window [{case.window[0]}, {case.window[1]}]"
        try:
            M = assemble_window_module(LCQuery(case.ideal, index, case.window, case.box))
            P = DegreePattern.from_zstatus(degree_statuses(case.ideal, index, case.window, case.box))
        except Exception as exc:
            return [CheckResult("generalized_eulerian", Verdict.FAIL, {"error": f"assembly failed: {exc}"}, subject=subject)]
        results = run_module_checks(M, checks, P)
    for r in results:
        r.subject = subject
    return results


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("LCWEYL_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class VerificationReport:
    checks: list[CheckResult]
    timing: bool = False

    def count(self, verdict: Verdict) -> int:
        return sum(1 for c in self.checks if c.verdict is verdict)

    @property
    def failed(self) -> bool:
        return self.count(Verdict.FAIL) > 0

    def summary_line(self) -> str:
        p, f, i = (self.count(v) for v in Verdict)
        if not f:
            head = "all checks passed"
        else:
            head = f"{f} check(s) failed"
        return f"{head} ({p} pass, {f} fail, {i} inconclusive)"

    def to_json(self) -> dict:
        entries = []
        for c in self.checks:
            e = c.to_json()
            if not self.timing:
                e["runtime"] = None
            entries.append(e)
        return {
            "schema": REPORT_SCHEMA_ID,
            "summary": {
                "pass": self.count(Verdict.PASS),
                "fail": self.count(Verdict.FAIL),
                "inconclusive": self.count(Verdict.INCONCLUSIVE),
                "line": self.summary_line(),
            },
            "checks": entries,
        }


def run_suite(config: SuiteConfig) -> VerificationReport:
    """Run every configured check; results are ordered by case, index, check."""
    jobs = []
    for case in config.cases:
        if isinstance(case, ModuleCase):
            jobs.append((case, None, config.checks))
        else:
            jobs.extend((case, i, config.checks) for i in case.indices)
    workers = _thread_count()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_case, jobs))
    else:
        chunks = [_run_case(j) for j in jobs]
    return VerificationReport([r for chunk in chunks for r in chunk], config.timing)
