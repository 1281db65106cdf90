import json

import jsonschema
import pytest

from lcweyl.cech import LCQuery, assemble_window_module, parse_ideal, top_lc_oracle
from lcweyl.exactlinalg import RatMatrix
from lcweyl.gradedmod import (
    BoundaryError,
    ModuleRelationError,
    WindowModule,
    check_divisibility,
    check_extension,
    check_generalized_eulerian,
    euler_matrix,
    fourier_module,
    koszul_d,
    koszul_x,
    module_from_json,
    module_to_json,
    parse_word,
    shift,
    torsion,
)

from conftest import one_by_one, polynomial_module


def support(M):
    return [n for n in M.degrees() if M.dims[n - M.lo]]


def zero_module(m=1):
    return WindowModule(m, -2, 2, [0] * 5, complete_below=True, complete_above=True)


# -- construction ------------------------------------------------------------------------


def test_weyl_relation_enforced():
    x = {n: one_by_one(1) for n in range(-4, -1)}
    bad = {n: one_by_one(n + 1) for n in range(-3, 0)}
    with pytest.raises(ModuleRelationError) as err:
        WindowModule(1, -4, -1, [1] * 4, [x], [bad], complete_above=True)
    assert "d1X1" in err.value.relation


def test_commutation_enforced():
    M = polynomial_module(2, 0, 2)
    x = [dict(M.x[0]), dict(M.x[1])]
    x[0][0] = x[0][0].matrix.scale(2)  # X1 from degree 0 doubled breaks X1X2 = X2X1
    with pytest.raises(ModuleRelationError):
        WindowModule(2, 0, 2, M.dims, x, M.d, complete_below=True)


def test_labels_must_be_homogeneous():
    with pytest.raises(ModuleRelationError):
        WindowModule(
            1, 0, 1, [1, 1], [{0: one_by_one(1)}], [{1: one_by_one(1)}], labels=[[(0,)], [(5,)]], complete_below=True
        )


def test_shape_checked():
    with pytest.raises(ValueError):
        WindowModule(1, 0, 1, [1, 2], [{0: one_by_one(1)}], [{}])


# -- Euler operator ------------------------------------------------------------------------


def test_euler_matrix_examples(top1):
    R2 = polynomial_module(2, 0, 3)
    assert euler_matrix(R2, 2) == RatMatrix.scalar(3, 2)
    assert euler_matrix(top1, -2) == one_by_one(-2)
    assert euler_matrix(zero_module(), 0).shape == (0, 0)


def test_euler_matrix_boundary(top1):
    with pytest.raises(BoundaryError):
        euler_matrix(top1, -4)


def test_eulerian_reports(poly1, top1, log_module, shifted_poly):
    rep = check_generalized_eulerian(polynomial_module(2, 0, 3))
    assert rep.verdict == "Eulerian"
    assert {e.index for e in rep.checked} == {1}
    top = check_generalized_eulerian(top_lc_oracle(2, (-5, -2)))
    assert top.eulerian and {e.index for e in top.checked} == {1}
    log = check_generalized_eulerian(log_module)
    assert log.generalized and not log.eulerian
    assert log.index_at(0) == 2
    bad = check_generalized_eulerian(shifted_poly)
    assert not bad.generalized and bad.failures()[0] == -1


def test_skipped_boundary_degree(top1):
    rep = check_generalized_eulerian(top1)
    assert rep.entries[0].status == "skipped"


def test_shift_moves_the_eigenvalue(top1):
    # relabelling degrees keeps eps but changes the scalar it must match
    assert check_generalized_eulerian(shift(top1, 0)).eulerian
    moved = check_generalized_eulerian(shift(top1, 1))
    assert not moved.generalized
    assert all(e.index is None for e in moved.checked)


@pytest.mark.parametrize("k", [-2, 1, 3])
def test_shift_preserves_dims_and_actions(log_module, k):
    moved = shift(log_module, k)
    for n in moved.degrees():
        assert moved.dim(n) == log_module.dim(n + k)
        if n + 1 <= moved.hi:
            assert moved.x_op(1, n) == log_module.x_op(1, n + k)


def test_shift_round_trip(top1):
    assert shift(shift(top1, 3), -3) == top1
    assert shift(top1, 0) is top1
    assert support(shift(top1, -1)) == [-3, -2, -1, 0]
    assert support(shift(top1, 1)) == [-5, -4, -3, -2]


# -- Koszul homology -----------------------------------------------------------------------


def test_koszul_d_examples(top1, poly1):
    h0, h1 = koszul_d(top1, 1)
    assert support(h0) == [-1] and h0.dims[h0.lo and -1 - h0.lo] == 1
    assert support(h1) == []
    h0, h1 = koszul_d(poly1, 1)
    assert support(h1) == [-1] and support(h0) == []
    z0, z1 = koszul_d(zero_module(), 1)
    assert z0.is_zero() and z1.is_zero()


def test_koszul_x_examples(top1, poly1):
    h0, h1 = koszul_x(top1, 1)
    assert support(h1) == [0] and support(h0) == []
    h0, h1 = koszul_x(poly1, 1)
    assert support(h0) == [0] and support(h1) == []
    z0, z1 = koszul_x(zero_module(), 1)
    assert z0.is_zero() and z1.is_zero()


def test_koszul_concentration_on_log_module(log_module):
    for h in koszul_d(log_module, 1):
        assert set(support(h)) <= {-1}
    for h in koszul_x(log_module, 1):
        assert set(support(h)) <= {0}


@pytest.mark.parametrize(
    "M",
    [
        lambda: polynomial_module(2, 0, 4),
        lambda: top_lc_oracle(2, (-7, -2)),
        lambda: assemble_window_module(LCQuery(parse_ideal("x1, x2"), 2, (-6, -1))),
        lambda: assemble_window_module(LCQuery(parse_ideal("x1, x2, x3"), 3, (-7, -2))),
    ],
)
def test_koszul_outputs_stay_generalized_eulerian(M):
    M = M()
    for axis in range(1, M.m + 1):
        try:
            outs_d = koszul_d(M, axis)
        except BoundaryError:
            outs_d = ()
        for h in outs_d:
            assert h.m == M.m - 1
            assert check_generalized_eulerian(shift(h, -1)).generalized
        try:
            outs_x = koszul_x(M, axis)
        except BoundaryError:
            outs_x = ()
        for h in outs_x:
            assert check_generalized_eulerian(h).generalized


def test_koszul_of_truncated_module_is_flagged():
    M = assemble_window_module(LCQuery(parse_ideal("x1", 2), 1, (-4, 3)))
    for h in koszul_x(M, 1):
        assert not any(h.is_box_complete(n) for n in h.degrees())


def test_koszul_needs_full_actions():
    M = assemble_window_module(LCQuery(parse_ideal("x1", 2), 1, (-4, 3)))
    with pytest.raises(BoundaryError):
        koszul_d(M, 1)


# -- torsion and divisibility ------------------------------------------------------------------


def test_parse_word():
    assert parse_word("x1*x2^2", 2) == ("x", (1, 2))
    with pytest.raises(ValueError):
        parse_word("x1*d1", 1)


def test_torsion_examples(top1, poly1):
    t = torsion(top1, ["x1"])
    assert t.dims == top1.dims and all(t.certified.values())
    t = torsion(poly1, ["x1"])
    assert t.dims == (0,) * 5 and all(t.certified.values())
    t = torsion(poly1, ["d1"])
    assert t.dims == poly1.dims and all(t.certified.values())


def test_torsion_rejects_mixed_generators(poly1):
    with pytest.raises(ValueError):
        torsion(poly1, ["x1", "d1"])


def test_torsion_lower_bound_flagged():
    # K[x1, 1/x1] has no X-torsion, but without certificates the window cannot prove it
    x = {n: one_by_one(1) for n in range(-2, 2)}
    d = {n: one_by_one(n) for n in range(-1, 3)}
    M = WindowModule(1, -2, 2, [1] * 5, [x], [d])
    t = torsion(M, ["x1"])
    assert t.dims == (0,) * 5
    assert t.lower_bound_only() == [-2, -1, 0, 1, 2]
    M2 = WindowModule(1, -2, 2, [1] * 5, [x], [d], injective_above=[1])
    assert torsion(M2, ["x1"]).lower_bound_only() == []


def test_torsion_submodule_is_a_module(top1):
    N = torsion(top1, ["x1"]).module
    assert N.dims == top1.dims
    assert check_generalized_eulerian(N).generalized


def test_divisibility_examples(top1):
    rep = check_divisibility(top1, 1, "d")
    # nothing reaches 1/x1 from the zero space above it, and E has no d-torsion
    assert dict(rep.entries) == {-4: "surjective", -3: "surjective", -2: "surjective", -1: "not surjective"}
    assert rep.torsion_verified is False
    rep = check_divisibility(top1, 1, "x")
    assert rep.all_surjective and rep.torsion_verified
    assert check_divisibility(zero_module(), 1, "x").all_surjective


def test_divisibility_detects_failure(poly1):
    # X1 is not onto K[x1]_0, and K[x1] is not X-torsion
    rep = check_divisibility(poly1, 1, "x")
    assert not rep.all_surjective
    assert rep.torsion_verified is False


def test_torsion_of_top_cohomology_is_divisible():
    M = top_lc_oracle(2, (-7, -2))
    for axis in (1, 2):
        N = torsion(M, [f"x{axis}"]).module
        assert check_divisibility(N, axis, "x").all_surjective


# -- extensions --------------------------------------------------------------------------------


def _log_pieces():
    x = {n: one_by_one(1) for n in range(-3, 3)}
    d = {n: one_by_one(n) for n in range(-2, 4)}
    laurent = WindowModule(1, -3, 3, [1] * 7, [x], [d])
    inc = {n: RatMatrix.from_rows([[1], [0]]) for n in range(-3, 4)}
    proj = {n: RatMatrix.from_rows([[0, 1]]) for n in range(-3, 4)}
    return laurent, inc, proj


def test_extension_closure(log_module):
    laurent, inc, proj = _log_pieces()
    rep = check_extension(laurent, log_module, laurent, inc, proj)
    assert rep.consistent
    assert rep.middle.generalized and not rep.middle.eulerian


def test_extension_rejects_non_exact(log_module):
    laurent, inc, proj = _log_pieces()
    with pytest.raises(ValueError):
        check_extension(laurent, log_module, laurent, inc, {n: RatMatrix.from_rows([[1, 0]]) for n in inc})


# -- Fourier twist and JSON ----------------------------------------------------------------------


def test_fourier_module_of_top_cohomology():
    M = top_lc_oracle(2, (-6, -2))
    F = fourier_module(M)
    assert (F.lo, F.hi) == (0, 4)
    assert F.dims == tuple(reversed(M.dims))
    assert check_generalized_eulerian(F).eulerian
    # the twist of H^m of the maximal ideal looks like the polynomial ring
    assert F.dims == polynomial_module(2, 0, 4).dims


def test_json_round_trip(schemas, top1, log_module):
    for M in (top1, log_module, assemble_window_module(LCQuery(parse_ideal("x1", 2), 1, (-2, 1), 3))):
        data = module_to_json(M)
        jsonschema.validate(data, schemas["module"])
        again = module_from_json(json.dumps(data))
        assert again == M
        assert again.labels == M.labels


def test_json_uses_rational_strings(log_module):
    text = json.dumps(module_to_json(shift(log_module, 0)))
    assert '"1"' in text and "." not in text.replace("lcweyl.window-module", "")
