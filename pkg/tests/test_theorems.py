import json
from pathlib import Path

import jsonschema
import pytest

from lcweyl.cech import parse_ideal, top_lc_oracle
from lcweyl.theorems import (
    CHECK_NAMES,
    DegreePattern,
    IdealCase,
    ModuleCase,
    SuiteConfig,
    Verdict,
    _result,
    candidate_ladder,
    check_eulerian,
    check_gtam,
    check_koszul_concentration,
    check_pattern_shape,
    check_rigidity,
    check_tameness,
    check_vanishing,
    default_suite,
    load_suite,
    parse_window,
    run_module_checks,
    run_suite,
    search_injective_form,
    squarefree_ideals,
)

from conftest import polynomial_module

SUITES = Path(__file__).resolve().parent.parent / "suites"


def pattern(text, lo, **flags):
    codes = {"+": "NONZERO", "0": "ZERO", "?": "BOUNDARY"}
    return DegreePattern(lo, lo + len(text) - 1, tuple(codes[c] for c in text), **flags)


# -- degree patterns -------------------------------------------------------------------------


def test_pattern_round_trip():
    P = pattern("++0?", -2)
    assert str(P) == "[-2..1] ++0?"
    assert P.status(-3) == "BOUNDARY"
    assert pattern("+", 0, complete_below=True).status(-5) == "ZERO"
    with pytest.raises(ValueError):
        DegreePattern(0, 1, ("NONZERO",))


def test_vanishing_verdicts():
    assert check_vanishing(pattern("000", 0)).verdict is Verdict.PASS
    assert check_vanishing(pattern("0++", 0)).verdict is Verdict.PASS
    bad = check_vanishing(pattern("0+0", 0))
    assert bad.verdict is Verdict.FAIL and bad.evidence["witness"] == 1
    bounded = check_vanishing(pattern("++", 0, complete_below=True, complete_above=True))
    assert bounded.verdict is Verdict.FAIL
    unsure = check_vanishing(pattern("?+0", 0))
    assert unsure.verdict is Verdict.INCONCLUSIVE and unsure.reason


def test_tameness_witness():
    res = check_tameness(pattern("0++0", 0), 1)
    assert res.verdict is Verdict.FAIL
    assert res.evidence == {"witness": [1, 3], "direction": "up"}
    down = check_tameness(pattern("0+", -3), 1)
    assert down.verdict is Verdict.FAIL and down.evidence["witness"] == [-2, -3]
    assert check_tameness(pattern("+++?00", -5), 2).verdict is Verdict.PASS


def test_rigidity_parts():
    res = check_rigidity(pattern("+?????0", -1), 2)
    assert res.verdict is Verdict.FAIL
    assert res.evidence["part"] == "c" and res.evidence["witness"] == [-1, 5]
    # the same pattern says nothing in one variable since -1 <= -m there
    assert check_rigidity(pattern("+?????0", -1), 1).verdict is Verdict.PASS
    a = check_rigidity(pattern("0+", -4), 2)
    assert a.evidence["part"] == "a"
    b = check_rigidity(pattern("+0", 0), 1)
    assert b.evidence["part"] == "b"
    assert check_rigidity(pattern("+++", -5), 2).evidence["parts"] == ["a", "b", "c"]


def test_pattern_shapes():
    assert check_pattern_shape(pattern("+++0", -4), 2).evidence["shapes"] == ["left_tail"]
    assert check_pattern_shape(pattern("0000", -1), 1).evidence["shapes"] == ["empty"]
    assert check_pattern_shape(pattern("?+", -1), 1).evidence["shapes"] == ["right_tail", "all"]
    assert check_pattern_shape(pattern("00+", -2), 1).evidence["shapes"] == ["right_tail"]
    assert check_pattern_shape(pattern("+0", -1), 3).verdict is Verdict.FAIL


def test_inconclusive_needs_reason():
    with pytest.raises(ValueError):
        _result("vanishing", Verdict.INCONCLUSIVE)


# -- module checks ------------------------------------------------------------------------------


def test_eulerian_check(top1, log_module, shifted_poly):
    assert check_eulerian(top1).verdict is Verdict.PASS
    res = check_eulerian(log_module)
    assert res.verdict is Verdict.PASS and res.evidence["indices"] == [2]
    bad = check_eulerian(shifted_poly)
    assert bad.verdict is Verdict.FAIL and bad.evidence["witness"] == -1


def test_koszul_check(top1, shifted_poly, log_module):
    assert check_koszul_concentration(top1).verdict is Verdict.PASS
    assert check_koszul_concentration(shifted_poly).verdict is Verdict.INCONCLUSIVE
    assert check_koszul_concentration(polynomial_module(2, 0, 3)).verdict is Verdict.INCONCLUSIVE
    assert check_koszul_concentration(log_module).verdict is not Verdict.FAIL


def test_torsion_vanishing_check():
    assert check_gtam(top_lc_oracle(2, (-7, -2))).verdict is Verdict.PASS
    assert check_gtam(polynomial_module(2, 0, 4)).verdict is Verdict.PASS


def test_candidate_ladder():
    ladder = candidate_ladder(2)
    assert ladder[:3] == [(1, 0), (0, 1), (1, 1)]
    assert len(ladder) == len(set(ladder)) == 7**2 - 1
    assert candidate_ladder(1) == [(1,), (-1,), (2,), (-2,), (3,), (-3,)]
    assert (0, 0) not in ladder


def test_injective_form_search(top1):
    res = search_injective_form(polynomial_module(2, 0, 4), "x")
    assert res.verdict is Verdict.PASS and res.evidence["form"] == [1, 0]
    none = search_injective_form(polynomial_module(2, 0, 4), "x", candidates=[(0, 0)])
    assert none.verdict is Verdict.INCONCLUSIVE and none.reason == "none found among candidates"
    assert search_injective_form(top1, "d").verdict is Verdict.PASS


def test_crashing_check_is_a_failure(top1, monkeypatch):
    import lcweyl.theorems as th

    def boom(M):
        raise RuntimeError("engine bug")

    monkeypatch.setattr(th, "check_eulerian", boom)
    (res,) = run_module_checks(top1, ["generalized_eulerian"])
    assert res.verdict is Verdict.FAIL and "engine bug" in res.evidence["error"]


# -- suites and reports ------------------------------------------------------------------------


def test_squarefree_ideal_counts():
    # antichains of nonempty faces: 1, 4, 18 for m = 1, 2, 3
    assert [len(squarefree_ideals(m)) for m in (1, 2, 3)] == [1, 4, 18]


def test_parse_window():
    assert parse_window(" -6:3") == (-6, 3)
    for bad in ("3", "4:1", "a:b"):
        with pytest.raises(ValueError):
            parse_window(bad)


def test_load_suite(tmp_path):
    (tmp_path / "m.json").write_text((SUITES / "counterexample.json").read_text())
    ini = tmp_path / "s.ini"
    ini.write_text(
        "[suite]\nchecks = vanishing, tameness\n\n"
        "[case pair]\nideal = x1, x2\nindices = 2\nwindow = -5:1\nbox = 6\n\n"
        "[module extra]\npath = m.json\n"
    )
    cfg = load_suite(ini)
    assert cfg.checks == ("vanishing", "tameness")
    case, mod = cfg.cases
    assert isinstance(case, IdealCase) and case.indices == (2,) and case.box == 6 and case.window == (-5, 1)
    assert isinstance(mod, ModuleCase) and Path(mod.path) == (tmp_path / "m.json").resolve()


@pytest.mark.parametrize(
    "body", ["[suite]\nchecks = nonsense\n", "[suite]\ngenerate = everything\n", "[bogus]\nx = 1\n", "[case a]\nideal = x1\n"]
)
def test_load_suite_errors(tmp_path, body):
    ini = tmp_path / "bad.ini"
    ini.write_text(body)
    with pytest.raises((ValueError, KeyError)):
        load_suite(ini)


def test_empty_suite_report(schemas):
    report = run_suite(SuiteConfig([]))
    assert report.summary_line() == "all checks passed (0 pass, 0 fail, 0 inconclusive)"
    jsonschema.validate(report.to_json(), schemas["report"])


def test_counterexample_suite_fails(schemas):
    report = run_suite(load_suite(SUITES / "counterexample.ini"))
    failed = {c.name for c in report.checks if c.verdict is Verdict.FAIL}
    assert {"generalized_eulerian", "tameness", "rigidity", "pattern_shape"} <= failed
    assert all(c.subject.startswith("module") for c in report.checks if c.verdict is Verdict.FAIL)
    assert report.failed
    data = report.to_json()
    jsonschema.validate(data, schemas["report"])
    assert all(c["runtime"] is None for c in data["checks"])


def test_small_default_suite_is_deterministic(schemas):
    cfg = default_suite(max_m=2, window=(-5, 3))
    a = json.dumps(run_suite(cfg).to_json(), sort_keys=True)
    b = json.dumps(run_suite(cfg).to_json(), sort_keys=True)
    assert a == b
    report = json.loads(a)
    jsonschema.validate(report, schemas["report"])
    assert report["summary"]["fail"] == 0
    for c in report["checks"]:
        assert c["name"] in CHECK_NAMES
        if c["verdict"] == "INCONCLUSIVE":
            assert c["reason"]


def test_timing_is_recorded_only_on_request():
    cfg = SuiteConfig([IdealCase("x1", parse_ideal("x1"), (1,), (-3, 1))], ("vanishing",), timing=True)
    (entry,) = run_suite(cfg).to_json()["checks"]
    assert isinstance(entry["runtime"], float)
