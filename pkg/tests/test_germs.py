import random

import pytest

from germ.exactfield import make_extension, make_field
from germ.germs import (
    Contact,
    ContactLinPair,
    ContactPair,
    GermError,
    LRPair,
    LeftAut,
    MapGerm,
    RightAut,
    extend_element,
    extend_map,
    extend_ring,
    group_level,
    identity_element,
    product_ring,
    restrict_map,
)
from germ.jets import JetRing, filtration_make

Q = make_field("Q")


@pytest.fixture(scope="module")
def line4():
    X = JetRing(Q, ["x"], 4)
    Y = JetRing(Q, ["y"], 4)
    return X, Y, MapGerm(X, Y, [X.from_expr("x^2")])


def test_source_change_substitutes_into_the_map(line4):
    X, Y, f = line4
    phi = RightAut(X, [X.from_expr("x + x^2")])
    assert str(phi.act(f).components[0]) == "x^2+2*x^3+x^4"


def test_source_change_inverse_is_the_reverted_series(line4):
    X, _, _ = line4
    phi = RightAut(X, [X.from_expr("x + x^2")])
    inv = phi.inverse()
    assert str(inv.comps[0]) == "x-x^2+2*x^3-5*x^4"
    assert phi.compose(inv).is_identity()
    assert inv.compose(phi).is_identity()


def test_composition_is_an_action(line4):
    X, _, f = line4
    phi = RightAut(X, [X.from_expr("x + x^2")])
    psi = RightAut(X, [X.from_expr("x - x^3")])
    assert phi.compose(psi).act(f) == phi.act(psi.act(f))


def test_target_change_acts_by_postcomposition(line4):
    _, Y, f = line4
    lam = LeftAut(Y, [Y.from_expr("y + y^2")])
    assert str(lam.act(f).components[0]) == "x^2+x^4"
    lam2 = LeftAut(Y, [Y.from_expr("y - y^2")])
    assert lam.compose(lam2).act(f) == lam.act(lam2.act(f))
    assert lam.compose(lam.inverse()).is_identity()


def test_target_changes_compose_in_action_order():
    # a non-commuting pair: either composition order moves the map, and
    # only one of them matches the nested action
    Y = JetRing(Q, ["u", "v"], 4)
    X = JetRing(Q, ["x"], 4)
    f = MapGerm(X, Y, [X.from_expr("x"), X.from_expr("x^2")])
    lam = LeftAut(Y, [Y.from_expr("u+v^2"), Y.from_expr("v")])
    mu = LeftAut(Y, [Y.from_expr("u"), Y.from_expr("v+u^2")])
    assert lam.act(mu.act(f)) != mu.act(lam.act(f))
    assert lam.compose(mu).act(f) == lam.act(mu.act(f))
    assert mu.compose(lam).act(f) == mu.act(lam.act(f))


def test_paired_changes(line4):
    X, Y, f = line4
    lam = LeftAut(Y, [Y.from_expr("y + y^2")])
    phi = RightAut(X, [X.from_expr("x + x^2")])
    pair = LRPair(lam, phi)
    assert pair.act(f) == lam.act(phi.act(f))
    assert pair.compose(pair.inverse()).is_identity()
    pair2 = LRPair(LeftAut(Y, [Y.from_expr("y - y^2")]),
                   RightAut(X, [X.from_expr("x - x^3")]))
    assert pair.compose(pair2).act(f) == pair.act(pair2.act(f))


def test_two_variable_change_over_a_number_field():
    K = make_extension(Q, "a^2 - 2")
    QA = K.top
    X2 = JetRing(QA, ["x", "y"], 3)
    Y2 = JetRing(QA, ["u", "v"], 3)
    f2 = MapGerm(X2, Y2, [X2.from_expr("x + y^2"), X2.from_expr("y")])
    rot = RightAut(X2, [X2.from_expr("x + y^2"), X2.from_expr("y + a*y^3")])
    assert str(rot.act(f2).components[0]) == "x+2*y^2"
    assert rot.compose(rot.inverse()).is_identity()
    assert rot.inverse().compose(rot).is_identity()


def test_matrix_pair_acts_composes_and_inverts():
    X = JetRing(Q, ["x"], 4)
    Y2 = JetRing(Q, ["u", "v"], 4)
    M = [[X.from_expr("1 + x"), X.from_expr("x^2")],
         [X.zero, X.from_expr("1 - x")]]
    kl = ContactLinPair(X, Y2, M, RightAut(X, [X.from_expr("x + x^3")]))
    fv = MapGerm(X, Y2, [X.from_expr("x^2"), X.from_expr("x^3")])
    out = kl.act(fv)
    assert str(out.components[0]) == "x^2+x^3+2*x^4"
    assert str(out.components[1]) == "x^3-x^4"
    assert kl.inverse().act(out) == fv
    kl2 = ContactLinPair(X, Y2,
                         [[X.one, X.from_expr("x")], [X.from_expr("x^2"), X.one]],
                         RightAut(X, [X.from_expr("x - x^2")]))
    assert kl.compose(kl2).act(fv) == kl.act(kl2.act(fv))


def test_contact_element_on_a_smooth_target():
    XC = JetRing(Q, ["x"], 3)
    YC = JetRing(Q, ["y"], 3)
    joint = product_ring(XC, YC)
    C = Contact(XC, YC, [joint.from_expr("y + x*y + y^2")])
    fc = MapGerm(XC, YC, [XC.from_expr("x^2")])
    cf = C.act(fc)
    assert str(cf.components[0]) == "x^2+x^3"
    D = C.fiber_inverse()
    assert C.compose(D).is_identity()
    assert D.compose(C).is_identity()
    assert D.act(cf) == fc


def test_contact_must_vanish_on_the_zero_section():
    XC = JetRing(Q, ["x"], 3)
    YC = JetRing(Q, ["y"], 3)
    joint = product_ring(XC, YC)
    with pytest.raises(GermError, match="zero section"):
        Contact(XC, YC, [joint.from_expr("x + y")])


def test_contact_pair_round_trip():
    XC = JetRing(Q, ["x"], 3)
    YC = JetRing(Q, ["y"], 3)
    joint = product_ring(XC, YC)
    C = Contact(XC, YC, [joint.from_expr("y + x*y + y^2")])
    fc = MapGerm(XC, YC, [XC.from_expr("x^2")])
    kp = ContactPair(C, RightAut(XC, [XC.from_expr("x + x^2")]))
    assert kp.inverse().act(kp.act(fc)) == fc
    kp2 = ContactPair(Contact(XC, YC, [joint.from_expr("y - x^2*y")]),
                      RightAut(XC, [XC.from_expr("x - x^3")]))
    assert kp.compose(kp2).act(fc) == kp.act(kp2.act(fc))
    assert kp.compose(kp.inverse()).is_identity()


def test_contact_on_a_singular_target():
    YS = JetRing(Q, ["y"], 3, ideal=[{(2,): Q.one}])
    XS = JetRing(Q, ["x"], 3)
    fS = MapGerm(XS, YS, [XS.from_expr("x^2")])
    jointS = product_ring(XS, YS)
    CS = Contact(XS, YS, [jointS.from_expr("y + x*y")])
    assert str(CS.act(fS).components[0]) == "x^2+x^3"


def test_maps_must_respect_the_target_ideal():
    YS = JetRing(Q, ["y"], 3, ideal=[{(2,): Q.one}])
    XS = JetRing(Q, ["x"], 3)
    with pytest.raises(GermError, match="target ideal"):
        MapGerm(XS, YS, [XS.from_expr("x")])
    # out of a singular source the pullback dies in the quotient
    XQ = JetRing(Q, ["x"], 3, ideal=[{(2,): Q.one}])
    fq = MapGerm(XQ, YS, [XQ.from_expr("x")])
    assert fq.pullback(YS.ideal_gen_jets()[0]).is_zero()


def test_source_changes_must_preserve_the_ideal():
    XW = JetRing(Q, ["x", "y"], 3, ideal=[{(2, 0): Q.one}])
    RightAut(XW, [XW.from_expr("x + x*y"), XW.from_expr("y + y^2")])
    with pytest.raises(GermError, match="preserve"):
        RightAut(XW, [XW.from_expr("y"), XW.from_expr("x")])


def test_inverses_inside_a_quotient_ring():
    XQ3 = JetRing(Q, ["x", "y"], 3, ideal=[{(2, 0): Q.one}])
    aut = RightAut(XQ3, [XQ3.from_expr("x + x*y"), XQ3.from_expr("y + y^2")])
    assert aut.compose(aut.inverse()).is_identity()
    assert aut.inverse().compose(aut).is_identity()


def test_group_levels_for_the_order_filtration():
    X4 = JetRing(Q, ["x"], 4)
    Y4 = JetRing(Q, ["y"], 4)
    mad = filtration_make(X4, "madic")
    assert group_level(identity_element("R", X4, Y4), X4, Y4, mad) == 4
    assert group_level(RightAut(X4, [X4.from_expr("x + x^3")]), X4, Y4, mad) == 2
    assert group_level(RightAut(X4, [X4.from_expr("x + x^2")]), X4, Y4, mad) == 1
    assert group_level(RightAut(X4, [X4.from_expr("2*x")]), X4, Y4, mad) == 0


def test_group_level_sees_target_side_moves():
    Y22 = JetRing(Q, ["u", "v"], 3)
    X22 = JetRing(Q, ["x", "y"], 3)
    mad22 = filtration_make(X22, "madic")
    lam = LeftAut(Y22, [Y22.from_expr("u + u*v"), Y22.from_expr("v")])
    assert group_level(lam, X22, Y22, mad22) == 1
    X4 = JetRing(Q, ["x"], 4)
    Y4 = JetRing(Q, ["y"], 4)
    mad = filtration_make(X4, "madic")
    kl = ContactLinPair(X4, Y4, [[X4.from_expr("1 + x^2")]])
    assert group_level(kl, X4, Y4, mad) == 2


def test_group_level_in_a_family_with_the_parameter_filtration():
    XT = JetRing(Q, ["x"], 3, tvars=["t"], torder=1)
    YT = JetRing(Q, ["y"], 3, tvars=["t"], torder=1)
    tad = filtration_make(XT, "tadic")
    assert group_level(RightAut(XT, [XT.from_expr("x + t*x^2")]), XT, YT, tad) == 1
    assert group_level(RightAut(XT, [XT.from_expr("x + x^2")]), XT, YT, tad) == 0


def test_scalar_extension_and_restriction(line4):
    X, Y, f = line4
    K = make_extension(Q, "a^2 - 2")
    XK = extend_ring(X, K)
    YK = extend_ring(Y, K)
    fK = extend_map(f, K, XK, YK)
    assert str(fK.components[0]) == "x^2"
    phi = RightAut(X, [X.from_expr("x + x^2")])
    phiK = extend_element(phi, K, XK, YK)
    down = restrict_map(phiK.act(fK), K, X, Y)
    assert down == phi.act(f)
    sq2 = RightAut(XK, [XK.from_expr("x + a*x^2")])
    assert restrict_map(sq2.act(fK), K, X, Y) is None


def _random_jet(rng, ring, min_deg, max_terms=3):
    coeffs = {}
    mons = [m for m in ring.monomials if sum(m) >= min_deg]
    for mon in rng.sample(mons, min(max_terms, len(mons))):
        coeffs[mon] = ring.field.from_int(rng.randrange(-3, 4))
    return ring.jet(coeffs)


def _random_right(rng, ring):
    comps = []
    for name in ring.xvars:
        comps.append(ring.var(name) + _random_jet(rng, ring, 2))
    return RightAut(ring, comps, validate=False)


@pytest.mark.parametrize("seed", range(6))
def test_action_axioms_hold_for_random_pairs(seed):
    rng = random.Random(seed)
    X = JetRing(Q, ["x", "y"], 3)
    Y = JetRing(Q, ["u"], 3)
    f = MapGerm(X, Y, [X.from_expr("x^2 + y^3")])
    g1, g2 = _random_right(rng, X), _random_right(rng, X)
    assert g1.compose(g2).act(f) == g1.act(g2.act(f))
    assert g1.compose(g1.inverse()).is_identity()
    l1 = LeftAut(Y, [Y.var("u") + _random_jet(rng, Y, 2)], validate=False)
    p1 = LRPair(l1, g1)
    assert p1.inverse().act(p1.act(f)) == f
