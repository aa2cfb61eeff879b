import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import bracket_nodes, formulas, insert_at, rand_lhs, rand_sequent
from nestproof import formula as F
from nestproof.calculus import (
    LOGICS, DisabledRule, NoRedex, R, RuleInstance, SchemaMismatch, SideConditionViolation, SystemConfig,
    apply, check_instance, enumerate_applicable, is_safe, logic,
)
from nestproof.derivation import check, derive_id
from nestproof.sequent import Fml, Path, canonical_form, parse_sequent as P

PRIME = SystemConfig()


def inst(rule, concl, *prems, principal=None, params=None):
    return RuleInstance(rule, P(concl), tuple(P(p) for p in prems), principal, params or {})


def test_id_instance():
    assert check_instance(inst(R.ID, "b, [c, a, @a]"), PRIME) is None


def test_bot_l_needs_the_output_below():
    err = check_instance(inst(R.BOT_L, "[bot], @b"), PRIME)
    assert isinstance(err, SchemaMismatch)
    assert check_instance(inst(R.BOT_L, "[bot, @b]"), PRIME) is None
    assert check_instance(inst(R.BOT_L, "bot, [@b]"), PRIME) is None


def test_imp_l_prunes_the_left_premise():
    ok = inst(R.IMP_L, "c, [a -> b, @d]", "c, [@a]", "c, [b, @d]")
    assert check_instance(ok, PRIME) is None
    unpruned = inst(R.IMP_L, "c, [a -> b, [e, @d]]", "c, [@a, [e]]", "c, [b, [e, @d]]")
    assert isinstance(check_instance(unpruned, PRIME), SideConditionViolation)


def test_apply_examples():
    assert apply(P("@(a & b)"), R.AND_R, Path((), 0)) == [P("@a"), P("@b")]
    assert apply(P("<>a, @b"), R.DIA_L_HAT, Path((), 0)) == [P("[a], @b")]
    assert apply(P("@x, [d]"), R.B_DOT, Path((), None), {"items": (0,), "bracket": 1}) == [P("[[@x], d]")]


def test_apply_respects_cfg():
    with pytest.raises(DisabledRule):
        apply(P("<>a, @b"), R.DIA_L, Path((), 0), cfg=PRIME)
    with pytest.raises(NoRedex):
        apply(P("[a | b], @c"), R.OR_L, Path((0,), 0))


def test_enumerate_examples():
    rules = [i.rule for i in enumerate_applicable(P("@(a -> b)"), PRIME)]
    assert rules == [R.IMP_R]
    assert R.ID in [i.rule for i in enumerate_applicable(P("a, @a"), PRIME)]
    assert R.BOT_L in [i.rule for i in enumerate_applicable(P("bot, @b"), PRIME)]


@pytest.mark.parametrize("X, Y, safe", [
    ({"t", "4"}, {"b", "5"}, True), ((), {"b"}, False), ((), (), True), ({"4"}, {"5"}, True),
    ({"t", "4"}, {"5"}, False), ({"d"}, (), False), ((), {"d"}, True),
])
def test_is_safe(X, Y, safe):
    assert is_safe(X, Y) is safe


def test_named_logics():
    assert set(LOGICS) >= {"CK", "CD", "CT", "CK4", "CS4", "CS5"}
    cs5 = logic("CS5")
    assert cs5.X == {"t", "4"} and cs5.Y == {"b", "5"}
    with pytest.raises(ValueError):
        logic("nope")


def test_rule_availability():
    assert PRIME.enabled(R.DIA_L_HAT) and not PRIME.enabled(R.DIA_L)
    nck = SystemConfig(base="NCK")
    assert nck.enabled(R.DIA_L) and not nck.enabled(R.DIA_L_HAT)
    sup = logic("CS5", super_rules=True)
    assert sup.enabled(R.S4_L) and not sup.enabled(R.FOUR_L)
    assert not PRIME.enabled(R.CUT) and not PRIME.enabled(R.WEAK)


def test_proper_axiom_only_when_declared():
    s = P("[@a -> b]")
    assert isinstance(check_instance(RuleInstance(R.PROPER, s), PRIME), DisabledRule)
    cfg = PRIME.with_(proper_axioms={F.parse("a -> b")})
    assert check_instance(RuleInstance(R.PROPER, s), cfg) is None


def test_or_l_rejected_unless_output_below_principal():
    rng = random.Random(5)
    for _ in range(200):
        ctx = rand_lhs(rng)
        nodes = bracket_nodes(ctx)
        n_or, n_out = rng.choice(nodes), rng.choice(nodes)
        s = insert_at(insert_at(ctx, n_or, [Fml(F.parse("a | b"))]), n_out, [Fml(F.parse("c"), True)])
        p = Path(n_or, len(_node(ctx, n_or).items))
        below = n_out[:len(n_or)] == n_or
        try:
            prems = apply(s, R.OR_L, p)
        except NoRedex:
            assert not below
            continue
        assert below
        assert check_instance(RuleInstance(R.OR_L, s, tuple(prems)), PRIME) is None


def _node(s, node):
    for i in node:
        s = s.items[i].child
    return s


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9), st.sampled_from(["CK", "CD", "CT", "CK4", "CS5"]), st.booleans())
def test_generator_checker_agreement(seed, name, sup):
    cfg = logic(name, super_rules=sup)
    s = rand_sequent(random.Random(seed))
    for i in enumerate_applicable(s, cfg):
        assert check_instance(i, cfg) is None, (i.rule, str(s))
        # the checker must also find the instance without being told where it is
        bare = RuleInstance(i.rule, i.conclusion, i.premises)
        assert check_instance(bare, cfg) is None, (i.rule, str(s))


@settings(max_examples=150, deadline=None)
@given(formulas(max_leaves=8), st.integers(0, 10 ** 6), st.sampled_from(["NCK", "NCKPrime"]))
def test_general_identity(a, seed, base):
    rng = random.Random(seed)
    ctx = rand_lhs(rng, depth=1)
    s = insert_at(ctx, rng.choice(bracket_nodes(ctx)), [Fml(a), Fml(a, True)])
    d = derive_id(s, base)
    assert check(d, SystemConfig(base=base)) is None
    assert canonical_form(d.conclusion) == canonical_form(s)
