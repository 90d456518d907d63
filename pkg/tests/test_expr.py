from fractions import Fraction

import pytest

from germ.expr import ExprError, eval_str, names_in, parse, parse_tuple


def _eval(text, env=None):
    return eval_str(text, env or {}, Fraction)


def test_precedence_and_parentheses():
    assert _eval("1+2*3") == 7
    assert _eval("(1+2)*3") == 9
    assert _eval("2^3^2") == 64  # chained powers bind left to right
    assert _eval("-2^2") == -4
    assert _eval("6/4") == Fraction(3, 2)


def test_names_resolve_through_the_environment():
    assert _eval("x*y + 2", {"x": Fraction(3), "y": Fraction(5)}) == 17
    node = parse("a*b + c^2")
    assert sorted(names_in(node)) == ["a", "b", "c"]


def test_unknown_name_is_an_error():
    with pytest.raises(ExprError):
        _eval("nope + 1")


def test_error_positions_are_one_based():
    with pytest.raises(ExprError) as info:
        parse("1 + * 2")
    assert info.value.line == 1
    assert info.value.col == 5
    with pytest.raises(ExprError) as info:
        parse("(1 + 2")
    assert "line 1" in str(info.value)


def test_division_by_zero_reported_with_position():
    with pytest.raises(ExprError):
        _eval("1/0")
    with pytest.raises(ExprError):
        _eval("1/(2-2)")


def test_power_needs_a_literal_integer_exponent():
    with pytest.raises(ExprError):
        _eval("x^y", {"x": Fraction(2), "y": Fraction(2)})


def test_tuple_parsing_backtracks_from_grouping():
    nodes = parse_tuple("(x, y+1, 2*z)")
    assert len(nodes) == 3
    single = parse_tuple("(x+1)")
    assert len(single) == 1
