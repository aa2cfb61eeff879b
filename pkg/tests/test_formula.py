import pytest
from hypothesis import given, settings

from helpers import formulas
from nestproof import formula as F
from nestproof.formula import And, Atom, Box, Dia, Implies, Or, ParseError

a, b, c = Atom("a"), Atom("b"), Atom("c")


@pytest.mark.parametrize("text, expected", [
    ("a", a),
    ("[]a -> <>a", Implies(Box(a), Dia(a))),
    ("[](a -> b) -> ([]a -> []b)", Implies(Box(Implies(a, b)), Implies(Box(a), Box(b)))),
    ("a -> b -> c", Implies(a, Implies(b, c))),
    ("a | b | c", Or(Or(a, b), c)),
    ("a & b | c", Or(And(a, b), c)),
    ("top", F.TOP),
    ("[]<>bot", Box(Dia(F.BOT))),
])
def test_parse(text, expected):
    assert F.parse(text) == expected


@pytest.mark.parametrize("f, text", [
    (a, "a"),
    (Implies(Box(a), Dia(a)), "[]a -> <>a"),
    (Or(And(a, b), c), "a & b | c"),
    (And(a, Or(b, c)), "a & (b | c)"),
    (Implies(Implies(a, b), c), "(a -> b) -> c"),
    (Box(And(a, b)), "[](a & b)"),
])
def test_show(f, text):
    assert F.show(f) == text


@pytest.mark.parametrize("f, d", [(a, 1), (F.BOT, 1), (Box(a), 2), (And(a, Dia(b)), 3),
                                  (Implies(Box(Box(a)), b), 4)])
def test_depth(f, d):
    assert F.depth(f) == d


@pytest.mark.parametrize("bad", ["", "a ->", "(a", "a b", "[a", "A", "a & & b", "<>"])
def test_parse_errors_carry_offset(bad):
    with pytest.raises(ParseError) as e:
        F.parse(bad)
    assert e.value.offset >= 0


@settings(max_examples=300, deadline=None)
@given(formulas(max_leaves=20))
def test_round_trip(f):
    assert F.parse(F.show(f)) == f


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_depth_bounded_by_size(f):
    assert 1 <= F.depth(f) <= F.size(f)
