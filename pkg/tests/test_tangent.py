import pytest

from germ.exactfield import make_field
from germ.germs import (
    ContactLinPair,
    MapGerm,
    RightAut,
    product_ring,
)
from germ.jets import JetRing, filtration_make
from germ.tangent import (
    ContactVector,
    DerVector,
    MatVector,
    TangentError,
    TargetDerVector,
    comparison_bound,
    der_log,
    exp_combination,
    log_element,
    tangent_space,
    vector_level,
)

Q = make_field("Q")
F2 = make_field("F2")
F5 = make_field("F5")


def test_exp_of_a_quadratic_field_is_the_geometric_tail():
    X = JetRing(Q, ["x"], 4)
    e = DerVector(X, [X.from_expr("x^2")]).exp()
    assert str(e.comps[0]) == "x+x^2+x^3+x^4"


def test_log_of_near_identity_changes():
    X3 = JetRing(Q, ["x"], 3)
    lg = log_element(RightAut(X3, [X3.from_expr("x + x^2")]))["R"]
    assert str(lg.comps[0]) == "x^2-x^3"
    lg2 = log_element(RightAut(X3, [X3.from_expr("x + x^3")]))["R"]
    assert str(lg2.comps[0]) == "x^3"


@pytest.mark.parametrize("text", ["x + x^2", "x + x^3 - x^4", "x - 2*x^2 + x^3"])
def test_exp_log_round_trip(text):
    X = JetRing(Q, ["x"], 4)
    g = RightAut(X, [X.from_expr(text)])
    assert log_element(g)["R"].exp().comps == g.comps


def test_exp_agrees_with_the_derivation_to_first_order():
    X = JetRing(Q, ["x"], 4)
    Y = JetRing(Q, ["y"], 4)
    mad = filtration_make(X, "madic")
    f = MapGerm(X, Y, [X.from_expr("x^2")])
    v = DerVector(X, [X.from_expr("x^3")])
    moved = v.exp().act(f)
    first = v.apply(f)[0]
    diff = moved.components[0] - f.components[0] - first
    assert mad.order_of(diff) > mad.order_of(first)


def test_exp_rejects_non_unipotent_or_bad_characteristic():
    X = JetRing(Q, ["x"], 4)
    with pytest.raises(TangentError):
        DerVector(X, [X.one]).exp()
    X2f = JetRing(F2, ["x"], 5)
    with pytest.raises(TangentError, match="characteristic"):
        DerVector(X2f, [X2f.from_expr("x^3")]).exp()  # the tail needs 1/2
    # small characteristic is fine when the series stops early
    X5s = JetRing(F5, ["x"], 4)
    e5 = DerVector(X5s, [X5s.from_expr("x^2")]).exp()
    assert str(e5.comps[0]) == "x+x^2+x^3+x^4"


def test_derivations_preserving_a_principal_ideal():
    XI = JetRing(Q, ["x"], 3, ideal=[{(2,): Q.one}])
    coeffs = sorted(str(d.comps[0]) for d in der_log(XI))
    assert coeffs == ["x", "x^2", "x^3"]


def test_derivations_preserving_a_normal_crossing():
    XY = JetRing(Q, ["x", "y"], 2, ideal=[{(1, 1): Q.one}])
    reprs = sorted(repr(d) for d in der_log(XY))
    assert "(x) d/dx" in reprs
    assert "(y) d/dy" in reprs


@pytest.fixture(scope="module")
def cusp3():
    X3 = JetRing(Q, ["x"], 3)
    Y3 = JetRing(Q, ["y"], 3)
    mad3 = filtration_make(X3, "madic")
    f3 = MapGerm(X3, Y3, [X3.from_expr("x^2")])
    return X3, Y3, mad3, f3


def test_source_frame_at_the_squared_coordinate(cusp3):
    X3, _, mad3, f3 = cusp3
    fr0 = tangent_space("R", f3, 0, mad3)
    assert fr0.rank == 2
    jets = sorted(str(row[0]) for row in fr0.basis.basis_jets())
    assert jets == ["x^2", "x^3"]
    fr1 = tangent_space("R", f3, 1, mad3)
    assert fr1.rank == 1
    assert str(fr1.basis.basis_jets()[0][0]) == "x^3"


def test_contact_frame_matches_the_source_frame_here(cusp3):
    _, _, mad3, f3 = cusp3
    fK = tangent_space("K", f3, 0, mad3)
    jets = sorted(str(row[0]) for row in fK.basis.basis_jets())
    assert jets == ["x^2", "x^3"]


def test_matrix_frame_on_two_components(cusp3):
    X3, _, mad3, _ = cusp3
    YV = JetRing(Q, ["u", "v"], 3)
    fv = MapGerm(X3, YV, [X3.from_expr("x^2"), X3.from_expr("x^3")])
    frk = tangent_space("Klin", fv, 1, mad3)
    assert frk.rank >= 2


def test_frame_solving_and_element_realization(cusp3):
    X3, _, mad3, f3 = cusp3
    fr0 = tangent_space("R", f3, 0, mad3)
    target = fr0.context.to_vec((X3.from_expr("3*x^3"),))
    coeffs = fr0.solve(target)
    assert coeffs is not None
    combo = fr0.combination(coeffs)
    assert str(combo["R"].apply(f3)[0]) == "3*x^3"
    el = fr0.element_from(coeffs)
    d1 = el.act(f3).components[0] - f3.components[0]
    assert mad3.order_of(d1) >= 3


def test_vector_levels():
    X4 = JetRing(Q, ["x", "y"], 4)
    Y4 = JetRing(Q, ["u", "v"], 4)
    mad4 = filtration_make(X4, "madic")
    assert vector_level(DerVector(X4, [X4.from_expr("x^3"), X4.zero]),
                        X4, Y4, mad4) == 2
    assert vector_level(TargetDerVector(Y4, [Y4.from_expr("u*v"), Y4.zero]),
                        X4, Y4, mad4) == 1


def test_depth_comparison_bound_for_the_squared_coordinate(cusp3):
    _, _, mad3, f3 = cusp3
    cb = comparison_bound("R", f3, 1, mad3)
    assert cb.found
    assert cb.bound == 3


def test_comparison_bound_needs_positive_order_for_pairs(cusp3):
    X3, Y3, mad3, _ = cusp3
    unit_order = MapGerm(X3, Y3, [X3.from_expr("x")])
    comparison_bound("LR", unit_order, 1, mad3)  # order 1 is fine
    # order-0 data degenerates only through the filtration, not the map
    flat = filtration_make(X3, [["x"], ["x"], ["x^2", "x^3"]])
    assert flat.order_of(unit_order.components) >= 1


def test_log_and_exp_in_a_family_ring():
    XT = JetRing(Q, ["x"], 3, tvars=["t"], torder=1)
    gt = RightAut(XT, [XT.from_expr("x + t*x^2")])
    lgt = log_element(gt)["R"]
    assert lgt.exp().comps == gt.comps
    assert log_element(lgt.exp())["R"].comps == lgt.comps


def test_exp_combination_assembles_pairs():
    X3 = JetRing(Q, ["x"], 3)
    YT3 = JetRing(Q, ["y"], 3)
    ec = exp_combination(
        "LR",
        {"L": TargetDerVector(YT3, [YT3.from_expr("y^2")]),
         "R": DerVector(X3, [X3.from_expr("x^2")])},
        X3, YT3)
    assert ec.tag == "LR"
    assert str(ec.left.comps[0]) == "y+y^2+y^3"
    assert str(ec.right.comps[0]) == "x+x^2+x^3"


def test_matrix_log_recovers_the_matrix_vector():
    X = JetRing(Q, ["x"], 4)
    Y2 = JetRing(Q, ["u", "v"], 4)
    rows = [[X.from_expr("x^2"), X.zero], [X.from_expr("x^3"), X.zero]]
    mv = MatVector(X, Y2, rows)
    kl = mv.exp()
    assert isinstance(kl, ContactLinPair)
    parts = log_element(kl)
    assert "Mat" in parts
    back = parts["Mat"]
    for got, want in zip(back.rows, rows):
        assert [str(a) for a in got] == [str(b) for b in want]


def test_contact_vector_exponentiates_to_a_contact_element():
    X = JetRing(Q, ["x"], 3)
    Y = JetRing(Q, ["y"], 3)
    joint = product_ring(X, Y)
    cv = ContactVector(X, Y, [joint.from_expr("x*y")], joint=joint)
    C = cv.exp()
    back = log_element(C)["C"]
    assert [str(c) for c in back.comps] == ["x*y"]
