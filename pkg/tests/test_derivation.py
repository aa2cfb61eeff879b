import itertools
import json
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from nestproof import formula as F
from nestproof.calculus import R, SystemConfig
from nestproof.corpus import CORPUS, GOLDEN, ax_d, atomic_cut, gid, k5_from_b, N
from nestproof.derivation import (
    CutValue, check, classify_cuts, cut_value, flow_graph, from_json, height, is_anchored, located,
    multiset_less, render, to_json,
)

CUT = SystemConfig(cut_enabled=True)


@pytest.mark.parametrize("name", GOLDEN)
def test_golden_corpus_checks(name):
    e = CORPUS[name]
    assert check(e.make(), e.cfg) is None


def test_k5_needs_b_dot():
    e = CORPUS["k5_b"]
    err = check(k5_from_b(), e.cfg.with_(Y=frozenset()))
    assert err is not None and err.error.kind == "disabled-rule"
    assert located(k5_from_b(), e.cfg).subderivation(err.at).rule is R.B_DOT


def test_heights():
    assert height(N(R.ID, "a, @a")) == 0
    assert height(ax_d()) == 3
    both = N(R.AND_R, "a, @a & a", N(R.ID, "a, @a"), gid("a, @a"))
    assert height(both) == 1


def test_cut_values():
    assert cut_value(located(ax_d(), CORPUS["axiom_d"].cfg)) == Counter()
    # the right premise decomposes the cut copy of []a right away
    left = N(R.BOX_R, "[]a, @[]a", N(R.BOX_L, "[]a, [@a]", N(R.ID, "[a, @a]")))
    right = N(R.BOX_L, "[]a, [@a], []a", N(R.ID, "[]a, [a, @a]"))
    boxed = located(N(R.CUT, "[]a, [@a]", left, right), CUT)
    assert cut_value(boxed) == Counter({CutValue(2, 0): 1})
    # and_r is not black-destructing, so this atomic cut is not anchored
    right = N(R.AND_R, "a, a, @a & a", N(R.ID, "a, a, @a"), N(R.ID, "a, a, @a"))
    atomic = located(N(R.CUT, "a, @a & a", N(R.ID, "a, @a"), right), CUT)
    assert cut_value(atomic) == Counter({CutValue(1, 1): 1})


def test_multiset_examples():
    assert multiset_less([1, 2, 3, 4, 4, 5], [2, 5, 5])
    assert multiset_less([1, 1, 2, 2, 2, 2], [1, 2, 3])
    assert not multiset_less([1, 2], [1, 2])
    assert multiset_less([], [1])
    assert not multiset_less([1], [])


def test_cut_value_order_is_lexicographic():
    assert CutValue(1, 1) < CutValue(2, 0)
    assert CutValue(2, 0) < CutValue(2, 1)


ms = st.lists(st.integers(1, 5), max_size=6)


@settings(max_examples=300, deadline=None)
@given(ms)
def test_irreflexive(m):
    assert not multiset_less(m, m)


@settings(max_examples=300, deadline=None)
@given(ms, ms, ms)
def test_transitive(a, b, c):
    if multiset_less(a, b) and multiset_less(b, c):
        assert multiset_less(a, c)


@settings(max_examples=300, deadline=None)
@given(ms, ms)
def test_total_and_asymmetric(a, b):
    lt, gt = multiset_less(a, b), multiset_less(b, a)
    assert not (lt and gt)
    if Counter(a) != Counter(b):
        assert lt or gt


def _bag(c) -> tuple:
    return tuple(sorted(c))


def reachability_oracle(universe=(1, 2, 3, 4), small=4, bound=8) -> dict:
    """m -> set of multisets reachable in >= 1 step, where a step replaces one
    element by any multiset of strictly smaller elements. Intermediate
    multisets up to size `bound` suffice for targets of size <= `small`."""
    bags = [b for n in range(bound + 1) for b in itertools.combinations_with_replacement(universe, n)]
    succ = {}
    for b in bags:
        out = set()
        for i, x in enumerate(b):
            if i and b[i - 1] == x:
                continue
            rest = b[:i] + b[i + 1:]
            lower = [y for y in universe if y < x]
            for k in range(bound - len(rest) + 1):
                for rep in itertools.combinations_with_replacement(lower, k):
                    out.add(_bag(rest + rep))
        succ[b] = out
    reach = {}
    for b in bags:
        if len(b) > small:
            continue
        seen, todo = set(), list(succ[b])
        while todo:
            y = todo.pop()
            if y not in seen:
                seen.add(y)
                todo.extend(succ[y])
        reach[b] = {y for y in seen if len(y) <= small}
    return reach


def test_exhaustive_against_reachability():
    reach = reachability_oracle()
    small = list(reach)
    assert len(small) == 70
    for m, n in itertools.product(small, small):
        assert multiset_less(list(m), list(n)) == (m in reach[n]), (m, n)


def test_flow_example_before_and_after():
    before = {r.formula: r for r in classify_cuts(located(CORPUS["flow"].make(), CUT))}
    after = {r.formula: r for r in classify_cuts(located(CORPUS["flow_permuted"].make(), CUT))}
    db, a, e = F.parse("d & b"), F.parse("a"), F.parse("e")
    assert [p.length for p in before[db].paths] == [1] and not before[db].anchored
    assert [p.length for p in after[db].paths] == [0] and after[db].anchored
    for reports in (before, after):
        assert not reports[a].relevant and not reports[e].relevant
        assert reports[db].relevant and reports[db].left_free


def test_id_right_premise_is_anchored():
    d = located(atomic_cut(), CUT)
    [r] = classify_cuts(d)
    assert r.anchored and r.relevant


def test_flow_graph_single_rule():
    d = located(N(R.AND_L, "c, a & b, @a", N(R.ID, "c, a, b, @a")), SystemConfig())
    g = flow_graph(d)
    # c is the only context input carried unaltered from premise to conclusion
    assert len(g.edges) == 1


def test_json_round_trip():
    for name in GOLDEN:
        e = CORPUS[name]
        d = located(e.make(), e.cfg)
        back = from_json(json.loads(json.dumps(to_json(d))))
        assert check(back, e.cfg) is None
        assert render(back) == render(d)
