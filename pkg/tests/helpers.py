"""Shared generators for the test suite."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from nestproof import formula as F
from nestproof.calculus import R, apply, logic
from nestproof.derivation import Derivation, derive_id
from nestproof.search import Found, SearchBudget, prove_sequent
from nestproof.sequent import Bracket, Fml, Path, Sequent, item_at, output_path

ATOMS = ("a", "b", "c")


def formulas(max_leaves: int = 8, atoms=ATOMS):
    leaf = st.one_of(st.sampled_from([F.Atom(x) for x in atoms]), st.just(F.BOT))

    def extend(sub):
        return st.one_of(
            st.builds(F.And, sub, sub), st.builds(F.Or, sub, sub), st.builds(F.Implies, sub, sub),
            st.builds(F.Box, sub), st.builds(F.Dia, sub))
    return st.recursive(leaf, extend, max_leaves=max_leaves)


def rand_formula(rng: random.Random, depth: int = 2, atoms=ATOMS) -> F.Formula:
    if depth == 0 or rng.random() < 0.3:
        return F.BOT if rng.random() < 0.05 else F.Atom(rng.choice(atoms))
    k = rng.choice(("and", "or", "imp", "box", "dia"))
    if k == "box":
        return F.Box(rand_formula(rng, depth - 1, atoms))
    if k == "dia":
        return F.Dia(rand_formula(rng, depth - 1, atoms))
    ctor = {"and": F.And, "or": F.Or, "imp": F.Implies}[k]
    return ctor(rand_formula(rng, depth - 1, atoms), rand_formula(rng, depth - 1, atoms))


def rand_lhs(rng: random.Random, depth: int = 2, width: int = 2) -> Sequent:
    items = [Fml(rand_formula(rng, 2)) for _ in range(rng.randint(0, width))]
    if depth and rng.random() < 0.6:
        items += [Bracket(rand_lhs(rng, depth - 1, width)) for _ in range(rng.randint(1, 2))]
    rng.shuffle(items)
    return Sequent(tuple(items))


def bracket_nodes(s: Sequent, node: tuple = ()) -> list:
    out = [node]
    for i, it in enumerate(s.items):
        if isinstance(it, Bracket):
            out += bracket_nodes(it.child, node + (i,))
    return out


def insert_at(s: Sequent, node: tuple, new) -> Sequent:
    if not node:
        return Sequent(s.items + tuple(new))
    i, rest = node[0], node[1:]
    items = list(s.items)
    items[i] = Bracket(insert_at(items[i].child, rest, new))
    return Sequent(tuple(items))


def rand_sequent(rng: random.Random, depth: int = 2) -> Sequent:
    """A random full sequent: an LHS tree with one output somewhere."""
    s = rand_lhs(rng, depth)
    return insert_at(s, rng.choice(bracket_nodes(s)), [Fml(rand_formula(rng, 2), True)])


def identity_instance(rng: random.Random, base: str = "NCKPrime") -> Derivation:
    """Γ{A•, A∘} with random Γ and A, proved by the general identity builder."""
    s = rand_lhs(rng)
    a = rand_formula(rng, rng.randint(1, 3))
    s = insert_at(s, rng.choice(bracket_nodes(s)), [Fml(a), Fml(a, True)])
    return derive_id(s, base)


def searched_instance(rng: random.Random, cfg, tries: int = 40, height: int = 6):
    """A cut-free proof of some random sequent found by search, or None."""
    for _ in range(tries):
        s = rand_sequent(rng, 1)
        r = prove_sequent(s, cfg, SearchBudget(max_height=height, fuel=5000))
        if isinstance(r, Found):
            return r.derivation
    return None


def cut_between(s: Sequent, a: F.Formula, node: tuple, cfg, height: int = 10):
    """A cut on `a` at `node` whose premises are proved by search."""
    q = {"formula": a}
    premises = apply(s, R.CUT, Path(tuple(node), None), q)
    nocut = cfg.with_(cut_enabled=False)
    kids = []
    for p in premises:
        r = prove_sequent(p, nocut, SearchBudget(max_height=height, fuel=20000))
        if not isinstance(r, Found):
            return None
        kids.append(r.derivation)
    return Derivation(R.CUT, s, tuple(kids), Path(tuple(node), None), q)


def identity_cut(p: Derivation, base: str = "NCKPrime") -> Derivation:
    """Cut the output C of p's conclusion Γ{C∘} against the identity proof of
    Γ{C•, C∘}; the right proof decomposes the (unique) cut copy of C."""
    s = p.conclusion
    op = output_path(s)
    c = item_at(s, op).formula
    q = {"formula": c}
    left, right = apply(s, R.CUT, Path(op.node, None), q)
    return Derivation(R.CUT, s, (p, derive_id(right, base)), Path(op.node, None), q)


def provable_sequent(rng: random.Random, cfg, height: int = 6, fuel: int = 5000, tries: int = 200,
                     accept=None):
    """(sequent, cut-free proof) for a random sequent provable in cfg."""
    for _ in range(tries):
        s = rand_sequent(rng, 1)
        if not isinstance(item_at(s, output_path(s)).formula, F.Atom) or rng.random() < 0.2:
            r = prove_sequent(s, cfg, SearchBudget(max_height=height, fuel=fuel))
            if isinstance(r, Found) and (accept is None or accept(r.derivation)):
                return r.derivation
    raise RuntimeError("no provable sequent found")
