import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import bracket_nodes, rand_sequent
from nestproof import formula as F
from nestproof.sequent import (
    EMPTY, FULL, LHS, Bracket, Fml, Invalid, Path, Sequent, canonical_form, classify, context_depth,
    corresponding_formula, make_context, output_prune, output_prune_seq, parse_context, parse_sequent as P,
    plug, show, split, walk,
)

G1D1 = "c, [a, [@b], [b, c]]"
G2D2 = "c, [a, [b], [b, @c]]"


def test_classify():
    assert classify(P("c, [[b, c]]")) == LHS
    assert classify(P("c, [[b, @c]]")) == FULL
    assert classify(P("@a, @b")) == Invalid(2)


def test_example_formulas():
    assert corresponding_formula(P(G1D1)) == F.parse("c -> [](a & <>(b & c) -> []b)")
    assert corresponding_formula(P(G2D2)) == F.parse("c -> [](a & <>b -> [](b -> c))")
    assert corresponding_formula(EMPTY) == F.TOP


def test_fold_order_is_right_nested():
    assert corresponding_formula(P("a, b, c, @d")) == F.parse("a & (b & c) -> d")


def test_split_and_plug_example():
    ctx, filler = split(P("a, @b"), Path((), 0))
    assert show(ctx.skeleton) == "{ }, @b"
    assert filler == Fml(F.Atom("a"))
    # Γ1{Δ1}: Δ1 is the bracket [@b] inside the top bracket
    s = P(G1D1)
    g1, d1 = split(s, Path((1,), 1))
    assert d1 == Bracket(P("@b"))
    assert plug(g1, EMPTY) == P("c, [a, [b, c]]")
    assert plug(g1, d1) == s


def test_plug_examples():
    g1 = parse_context("c, [a, { }, [b, c]]")
    g2 = parse_context("c, [a, [b], { }]")
    assert plug(g1) == P("c, [a, [b, c]]")
    assert plug(parse_context("{ }"), Fml(F.Atom("a"), True)) == P("@a")
    assert plug(g2, P("[b, @c]").items[0]) == P(G2D2)


def test_output_pruning_examples():
    # Γ1{ } = c, [{ }, [b, c]] keeps everything; Γ2{ } loses the output bracket
    g1 = parse_context("c, [{ }, [b, c]]")
    g2 = parse_context("c, [{ }, [b, @c]]")
    assert output_prune(g1).skeleton == P("c, [{ }, [b, c]]", allow_hole=True)
    assert output_prune(g2).skeleton == P("c, [{ }]", allow_hole=True)
    assert output_prune_seq(P("c, [[b, @c]]")) == P("c")
    assert output_prune_seq(P("c, [[b, c]]")) == P("c, [[b, c]]")


def test_context_depth():
    assert context_depth(parse_context("{ }")) == 0
    assert context_depth(parse_context("c, [{ }, [b, c]]")) == 1
    assert context_depth(parse_context("[[{ }]]")) == 2


def test_canonical_form():
    assert canonical_form(P("b, a")) == canonical_form(P("a, b"))
    assert show(canonical_form(P("b, a"))) == "a, b"
    assert show(canonical_form(P("[b], a"))) == show(canonical_form(P("a, [b]")))


@pytest.mark.parametrize("text", ["a, [b, [@c]], <>d", "[]a -> b, [[]], @bot", "[[@a & b]], c | d"])
def test_show_parse_round_trip(text):
    s = P(text)
    assert P(show(s)) == s


def _shuffled(s: Sequent, rng: random.Random) -> Sequent:
    items = [Bracket(_shuffled(it.child, rng)) if isinstance(it, Bracket) else it for it in s.items]
    rng.shuffle(items)
    return Sequent(tuple(items))


def test_canonical_form_ignores_order_500_permutations():
    rng = random.Random(3)
    for _ in range(500):
        s = rand_sequent(rng)
        t = _shuffled(s, rng)
        assert show(canonical_form(s)) == show(canonical_form(t))
        assert s == t


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_split_plug_round_trip(seed):
    rng = random.Random(seed)
    s = rand_sequent(rng)
    paths = [Path(node, i) for node, i, _ in walk(s)] + [Path(n, None) for n in bracket_nodes(s)]
    p = rng.choice(paths)
    ctx, filler = split(s, p)
    assert plug(ctx, filler) == s


def test_split_plug_round_trip_1000_pairs():
    rng = random.Random(11)
    for _ in range(1000):
        s = rand_sequent(rng)
        paths = [Path(node, i) for node, i, _ in walk(s)]
        p = rng.choice(paths)
        ctx, filler = split(s, p)
        assert plug(ctx, filler) == s


def test_fm_of_invalid_sequent_is_an_error():
    with pytest.raises(ValueError):
        corresponding_formula(P("@a, @b"))


def test_context_needs_one_hole():
    with pytest.raises(ValueError):
        make_context(P("a, [b]"))
