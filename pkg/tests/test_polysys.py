import json

from germ.exactfield import is_pth_power, make_extension, make_field
from germ.jets import JetRing, filtration_make
from germ.germs import (
    MapGerm,
    extend_map,
    extend_ring,
    group_level,
    restrict_map,
)
from germ.descent import verify_witness
from germ.polysys import (
    PolyRing,
    assemble_witness,
    brute_solve,
    compile_system,
    enumerate_group,
    extend_system,
    groebner_inconsistent,
    orbit_split,
    system_from_json,
)

F3 = make_field("F3")
Q = make_field("Q")


def germ_map(ring, target, *exprs):
    return MapGerm(ring, target, [ring.from_expr(e) for e in exprs])


def eq_set(system):
    return {e.key() for e in system.equations}


def expected(system, *texts):
    return {system.ring.from_expr(t).key() for t in texts}


def squash_system():
    R2 = JetRing(F3, ["x"], 2)
    T2 = JetRing(F3, ["y"], 2)
    f = germ_map(R2, T2, "x^2")
    ft = germ_map(R2, T2, "2*x^2")
    return compile_system("R", f, ft)


def test_compiled_equations_for_a_quadratic_squash():
    S = squash_system()
    assert S.unknowns == ("a1", "a2", "z")
    # keys, not strings: -1 prints as 2 over F3
    assert eq_set(S) == expected(S, "2*a1^2-1", "a1*z-1")


def test_compiling_a_map_against_itself_pins_the_identity():
    R1 = JetRing(F3, ["x"], 1)
    T1 = JetRing(F3, ["y"], 1)
    fid = germ_map(R1, T1, "x")
    Sid = compile_system("R", fid, fid)
    assert eq_set(Sid) == expected(Sid, "a1-1", "a1*z-1")


def test_brute_search_moves_to_the_quadratic_extension():
    S = squash_system()
    assert brute_solve(S) == []
    extF9 = make_extension(F3, "b^2+1")
    sols = brute_solve(S, field=extF9.top)
    assert len(sols) >= 1
    SK = extend_system(S, extF9)
    w, rep = assemble_witness(SK, sols[0])
    assert rep["ok"]
    assert verify_witness(w, SK.layout["f"], SK.layout["f_tilde"])["ok"]


def test_groebner_verdicts():
    S = squash_system()
    # consistent over the closure, so no inconsistency certificate exists
    assert groebner_inconsistent(S).inconsistent is False
    PRq = PolyRing(Q, ["a"])
    gq = groebner_inconsistent([PRq.from_expr("a-1"), PRq.from_expr("a-2")])
    assert gq.inconsistent is True
    assert gq.certificate is not None
    pr3 = PolyRing(F3, ["a"])
    assert groebner_inconsistent([pr3.from_expr("a^2+1")]).inconsistent is False


def test_system_json_round_trip():
    S = squash_system()
    data = json.loads(json.dumps(S.describe()))
    S2 = system_from_json(data, F3)
    assert [str(e) for e in S2.equations] == [str(e) for e in S.equations]
    assert (json.dumps(S2.describe(), sort_keys=True)
            == json.dumps(S.describe(), sort_keys=True))


def test_level_one_systems_only_produce_level_one_witnesses():
    R3 = JetRing(F3, ["x"], 3)
    T3 = JetRing(F3, ["y"], 3)
    fl = germ_map(R3, T3, "x^2")
    Sl = compile_system("R", fl, fl, level=1)
    assert Sl.ring.from_expr("a1-1").key() in eq_set(Sl)
    madic = filtration_make(R3, "madic")
    sols = brute_solve(Sl)
    assert sols
    for sol in sols:
        wl, repl = assemble_witness(Sl, sol)
        assert repl["ok"]
        assert group_level(wl, R3, T3, madic) >= 1


def test_inseparable_direction_over_a_non_perfect_field():
    F3s = make_field("F3(s)")
    R6 = JetRing(F3s, ["x"], 6)
    T6 = JetRing(F3s, ["y"], 6)
    f3 = germ_map(R6, T6, "x^3")
    ft3 = germ_map(R6, T6, "x^3+s*x^6")
    S3 = compile_system("R", f3, ft3)
    shapes = [{S3.ring.mon_str(m): str(c) for m, c in eq.coeffs.items()}
              for eq in S3.equations]
    # the obstruction pairs a bare cube against an s-multiple, so any
    # solution would exhibit a cube root of s
    assert {"a2^3": "1", "a1^6": "s"} in shapes
    assert is_pth_power(F3s.generator_env()["s"], 3) is None


def test_finite_surrogate_solves_only_upstairs():
    ext27 = make_extension(F3, "c^3+2*c+1")
    F27 = ext27.top
    R6c = JetRing(F27, ["x"], 6)
    T6c = JetRing(F27, ["y"], 6)
    fc = germ_map(R6c, T6c, "x^3")
    ftc = germ_map(R6c, T6c, "x^3+c*x^6")
    Sc = compile_system("R", fc, ftc)
    embedded = [ext27.embed(e) for e in F3.elements()]
    assert brute_solve(Sc, domain=embedded) == []
    full = brute_solve(Sc, limit=1)
    assert len(full) == 1
    wc, repc = assemble_witness(Sc, full[0])
    assert repc["ok"]


def test_orbit_split_of_the_quadratic_over_f3():
    sq_src = JetRing(F3, ["x"], 2)
    sq_tgt = JetRing(F3, ["y"], 2)
    sq = germ_map(sq_src, sq_tgt, "x^2")
    census = orbit_split("R", sq, make_extension(F3, "b^2+1"))
    assert census.extension_orbit_size == 4
    assert census.orbits == [[("2*x^2",)], [("x^2",)]]


def test_orbit_split_of_the_quadratic_over_f5():
    F5 = make_field("F5")
    ext25 = make_extension(F5, "b^2+2")
    p_src = JetRing(F5, ["x"], 2)
    p_tgt = JetRing(F5, ["y"], 2)
    p = germ_map(p_src, p_tgt, "x^2")
    census5 = orbit_split("R", p, ext25)
    assert census5.extension_orbit_size == 12
    assert sorted(len(o) for o in census5.orbits) == [2, 2]
    members = sorted(k for o in census5.orbits for k in o)
    assert members == [("2*x^2",), ("3*x^2",), ("4*x^2",), ("x^2",)]


def test_orbit_split_agrees_with_direct_group_enumeration():
    F2 = make_field("F2")
    ext4 = make_extension(F2, "b^2+b+1")
    m_src = JetRing(F2, ["x"], 2)
    m_tgt = JetRing(F2, ["y"], 2)
    mf = germ_map(m_src, m_tgt, "x^2")
    census2 = orbit_split("R", mf, ext4)
    m_srcK = extend_ring(m_src, ext4)
    m_tgtK = extend_ring(m_tgt, ext4)
    mfK = extend_map(mf, ext4, m_srcK, m_tgtK)
    seen = set()
    for g in enumerate_group("R", m_srcK, m_tgtK):
        down = restrict_map(g.act(mfK), ext4, m_src, m_tgt)
        if down is not None:
            seen.add(tuple(str(c) for c in down.components))
    assert seen == {k for o in census2.orbits for k in o}
