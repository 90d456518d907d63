import math
import random

import pytest

from germ.exactfield import make_field
from germ.jets import (
    JetRing,
    JetError,
    SubspaceBasis,
    VectorContext,
    filtration_make,
    ideal_span,
    jet_from_json,
    jet_to_json,
    membership,
    nullspace,
    solve_columns,
)

Q = make_field("Q")
F3 = make_field("F3")


def test_truncated_arithmetic_and_printing():
    R = JetRing(Q, ["x"], 4)
    x = R.var("x")
    f = (x + x ** 2) ** 2
    assert str(f) == "x^2+2*x^3+x^4"
    assert str(R.from_expr("1/2*x^3 - x")) == "-x+(1/2)*x^3"
    assert (x ** 5).is_zero()
    assert (f - f).is_zero()
    assert f.degree_bound() == 4
    assert str(f.derivative("x")) == "2*x+6*x^2+4*x^3"


def test_printed_jets_reparse_to_themselves():
    R = JetRing(Q, ["x", "y"], 3)
    rng = random.Random(11)
    for _ in range(25):
        coeffs = {}
        for mon in R.monomials:
            if rng.random() < 0.3:
                coeffs[mon] = Q.from_int(rng.randrange(-6, 7))
        j = R.jet(coeffs)
        assert R.from_expr(str(j)) == j


def test_substitution_into_another_ring():
    R = JetRing(Q, ["x"], 4)
    R2 = JetRing(Q, ["x", "y"], 3)
    fx2 = R.from_expr("x^2")
    sub = fx2.substitute({"x": R2.from_expr("x + y^2")}, ring=R2)
    assert str(sub) == "x^2+2*x*y^2"


def test_substitution_rejects_constant_terms():
    R = JetRing(Q, ["x"], 4)
    R2 = JetRing(Q, ["x", "y"], 3)
    with pytest.raises(JetError, match="constant term"):
        R.from_expr("x^2").substitute({"x": R2.from_expr("1 + x")}, ring=R2)


def test_quotient_ring_reduction():
    RQ = JetRing(Q, ["x"], 3, ideal=[{(2,): Q.one}])
    assert RQ.ideal_basis.rank == 2
    x = RQ.var("x")
    assert (x * x).is_zero()
    assert str(RQ.from_expr("x + x^2 + x^3")) == "x"
    assert str(RQ.ideal_gen_jets()[0]) == "x^2"


def test_quotient_with_relation_between_variables():
    # ideal (x^2, y^2 - x): y^2 and x share one canonical form, x^2 dies
    RQ2 = JetRing(Q, ["x", "y"], 3,
                  ideal=[{(2, 0): Q.one}, {(0, 2): Q.one, (1, 0): Q.from_int(-1)}])
    u = RQ2.from_expr("y^2")
    assert u == RQ2.from_expr("x")
    assert (RQ2.from_expr("x") * RQ2.from_expr("x")).is_zero()


def test_span_and_membership():
    R = JetRing(Q, ["x"], 4)
    x = R.var("x")
    ctx = VectorContext(R, 1)
    span = SubspaceBasis.span(ctx, [ctx.to_vec(x + x ** 2),
                                    ctx.to_vec(x ** 2 + x ** 3)])
    assert span.rank == 2
    coords = membership(x - x ** 3, span)
    assert coords is not None
    v = ctx.to_vec(x - x ** 3)
    recon = [Q.zero] * len(v)
    for c, row in zip(coords, span.rows):
        recon = [a + c * b for a, b in zip(recon, row)]
    assert tuple(recon) == v
    assert membership(x, span) is None


def test_ideal_span_and_position_intersection():
    R = JetRing(Q, ["x"], 4)
    x = R.var("x")
    assert ideal_span([R.from_expr("x^2")], R).rank == 3  # x^2, x^3, x^4
    ctx = VectorContext(R, 1)
    span = SubspaceBasis.span(ctx, [ctx.to_vec(x + x ** 2),
                                    ctx.to_vec(x ** 2 + x ** 3)])
    inter = span.intersect_positions(ctx.positions_in({(2,), (3,), (4,)}))
    assert inter.rank == 1
    (row,) = inter.basis_jets()[0]
    assert str(row) == "x^2+x^3"


def test_nullspace_and_column_solving():
    R = JetRing(Q, ["x"], 4)
    x = R.var("x")
    rows = [[Q.one, Q.from_int(2), Q.from_int(3)]]
    ns = nullspace(rows, 3, Q)
    assert len(ns) == 2
    for vec in ns:
        assert (vec[0] + 2 * vec[1] + 3 * vec[2]).is_zero()
    ctx = VectorContext(R, 1)
    cols = [ctx.to_vec(x + x ** 2), ctx.to_vec(x ** 2 + x ** 3)]
    cs = solve_columns(cols, ctx.to_vec(x - x ** 3), Q)
    assert [str(c) for c in cs] == ["1", "-1"]
    assert solve_columns(cols, ctx.to_vec(x ** 4), Q) is None


def test_order_filtration():
    R = JetRing(Q, ["x"], 4)
    x = R.var("x")
    filt = filtration_make(R, "madic")
    assert filt.order_of(x ** 2 + x ** 3) == 2
    assert filt.order_of(R.zero) == math.inf
    assert filt.mon_order((4,)) == 4
    assert filt.vanishing_depth() == 5


def test_flag_chain_orders_differ_from_degree():
    RF = JetRing(Q, ["x1", "x2"], 2)
    flag = filtration_make(RF, [["x1", "x2"],
                                ["x2", "x1^2", "x1*x2", "x2^2"],
                                ["x1^2", "x1*x2", "x2^2"]])
    x1, x2 = RF.var("x1"), RF.var("x2")
    assert flag.order_of(x2) == 2
    assert flag.order_of(x1) == 1
    assert flag.order_of(x1 * x2) == 3
    assert filtration_make(RF, "madic").order_of(x2) == 1


def test_bad_chains_rejected():
    RF = JetRing(Q, ["x1", "x2"], 2)
    with pytest.raises(JetError, match="descending"):
        filtration_make(RF, [["x1^2"], ["x1"]])
    with pytest.raises(JetError, match="multiplicative"):
        filtration_make(RF, [["x1", "x2"], ["x1^2"]])


def test_family_ring_truncation_and_parameter_filtration():
    RT = JetRing(Q, ["x"], 3, tvars=["t"], torder=1)
    x, t = RT.var("x"), RT.var("t")
    assert (t * t).is_zero()
    ft = x ** 2 + t * x ** 3
    phi = x - t * x ** 2 / 2
    assert ft.substitute({"x": phi, "t": t}, ring=RT) == x ** 2
    tad = filtration_make(RT, "tadic")
    assert tad.order_of(t * x) == 1
    assert tad.order_of(x) == 0
    assert tad.vanishing_depth() == 2
    assert filtration_make(RT, "madic").order_of(t * x) == 2


def test_product_sets_for_the_order_filtration():
    R = JetRing(Q, ["x"], 4)
    filt = filtration_make(R, "madic")
    assert filt.product_set(2, 1) == frozenset({(2,), (3,), (4,)})
    assert filt.product_set(2, 2) == frozenset({(4,)})
    assert filt.product_set(3, 2) == frozenset()


def test_json_round_trip():
    R3 = JetRing(F3, ["x", "y"], 2)
    j = R3.from_expr("x + 2*x*y + y^2")
    data = jet_to_json(j)
    assert data == {"x": "1", "x*y": "2", "y^2": "1"}
    assert jet_from_json(R3, data) == j
