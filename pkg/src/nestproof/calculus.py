"""Rule catalog, system configurations, bottom-up rule application and instance checking.

Every rule is implemented once, as a generator: given a conclusion and a
location it builds the premises. The checker regenerates premises and
compares them up to multiset equality, so the two can never disagree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Optional

from . import formula as F
from .formula import Formula
from .sequent import (
    EMPTY, FULL, HOLE, Bracket, Fml, Invalid, Path, Sequent, classify, has_output, is_lhs,
    make_context, node_at, nodes, output_path, plug, prune_node, tag_addresses, update_node, walk,
)


class RuleId(str, Enum):
    ID = "id"
    BOT_L = "bot_l"
    AND_L = "and_l"
    AND_R = "and_r"
    OR_L = "or_l"
    OR_R1 = "or_r1"
    OR_R2 = "or_r2"
    IMP_L = "imp_l"
    IMP_R = "imp_r"
    BOX_L = "box_l"
    BOX_R = "box_r"
    DIA_L = "dia_l"
    DIA_L_HAT = "dia_l_hat"
    DIA_R = "dia_r"
    CONT = "cont"
    WEAK = "weak"
    NEC = "nec"
    CUT = "cut"
    DIA_CUT = "dia_cut"
    BOX_CUT = "box_cut"
    D_R = "d_r"
    D_L = "d_l"
    T_R = "t_r"
    T_L = "t_l"
    FOUR_R = "four_r"
    FOUR_L = "four_l"
    S4_R = "s4_r"
    S4_L = "s4_l"
    S4_R_DIA = "s4_r_dia"
    S4_L_BOX = "s4_l_box"
    D_DOT = "d_dot"
    T_DOT = "t_dot"
    B_DOT = "b_dot"
    FOUR_DOT = "four_dot"
    FIVE_DOT = "five_dot"
    SB_DOT = "sb_dot"
    S5_DOT = "s5_dot"
    S5B_DOT = "s5b_dot"
    SB5_DOT = "sb5_dot"
    PROPER = "proper_axiom"

    def __str__(self):
        return self.value


R = RuleId

ARITY = {r: 1 for r in R}
ARITY.update({R.ID: 0, R.BOT_L: 0, R.PROPER: 0})
ARITY.update({r: 2 for r in (R.AND_R, R.OR_L, R.IMP_L, R.CUT, R.DIA_CUT, R.BOX_CUT)})

CUTS = frozenset({R.CUT, R.DIA_CUT, R.BOX_CUT})
STRUCTURAL = frozenset({R.D_DOT, R.T_DOT, R.B_DOT, R.FOUR_DOT, R.FIVE_DOT,
                        R.SB_DOT, R.S5_DOT, R.S5B_DOT, R.SB5_DOT})
SUPER = frozenset({R.S4_R, R.S4_L, R.S4_R_DIA, R.S4_L_BOX, R.SB_DOT, R.S5_DOT, R.S5B_DOT, R.SB5_DOT})
BLACK_DESTRUCTING = frozenset({R.ID, R.BOT_L, R.AND_L, R.OR_L, R.IMP_L, R.BOX_L, R.DIA_L,
                               R.DIA_L_HAT, R.T_L, R.S4_L_BOX})


# ---------------------------------------------------------------- configurations


def is_safe(X, Y) -> bool:
    X, Y = set(X), set(Y)
    if not X <= {"t", "4"} or not Y <= {"d", "b", "5"}:
        return False
    if "t" in X and "5" in Y and "b" not in Y:
        return False
    if ("b" in Y or "5" in Y) and "4" not in X:
        return False
    return True


@dataclass(frozen=True)
class SystemConfig:
    base: str = "NCKPrime"
    X: frozenset = frozenset()
    Y: frozenset = frozenset()
    super_rules: bool = False
    cut_enabled: bool = False
    proper_axioms: frozenset = frozenset()
    # weak and nec are admissible; they are only accepted when asked for
    admissible: bool = False

    def __post_init__(self):
        object.__setattr__(self, "X", frozenset(self.X))
        object.__setattr__(self, "Y", frozenset(self.Y))
        object.__setattr__(self, "proper_axioms", frozenset(self.proper_axioms))
        if self.base not in ("NCK", "NCKPrime"):
            raise ValueError(f"unknown base system {self.base!r}")
        if not self.X <= {"d", "t", "4"}:
            raise ValueError("logical axioms must be among d, t, 4")
        if not self.Y <= {"d", "t", "b", "4", "5"}:
            raise ValueError("structural axioms must be among d, t, b, 4, 5")

    def with_(self, **kw) -> "SystemConfig":
        d = dict(base=self.base, X=self.X, Y=self.Y, super_rules=self.super_rules,
                 cut_enabled=self.cut_enabled, proper_axioms=self.proper_axioms,
                 admissible=self.admissible)
        d.update(kw)
        return SystemConfig(**d)

    def enabled(self, rule: RuleId, formula: Optional[Formula] = None) -> bool:
        X, Y, sup = self.X, self.Y, self.super_rules
        if rule is R.DIA_L:
            return self.base == "NCK"
        if rule is R.DIA_L_HAT:
            return self.base == "NCKPrime"
        if rule in (R.WEAK, R.NEC):
            return self.admissible
        if rule is R.CUT:
            return self.cut_enabled
        if rule in (R.DIA_CUT, R.BOX_CUT):
            return self.cut_enabled and "4" in X
        if rule in (R.D_R, R.D_L):
            return "d" in X
        if rule in (R.T_R, R.T_L):
            return "t" in X
        if rule in (R.FOUR_R, R.FOUR_L):
            return "4" in X and not sup
        if rule in (R.S4_R, R.S4_L, R.S4_R_DIA, R.S4_L_BOX):
            return "4" in X and sup
        if rule is R.D_DOT:
            return "d" in Y
        if rule is R.T_DOT:
            return "t" in Y
        if rule is R.FOUR_DOT:
            return "4" in Y
        b, five = "b" in Y, "5" in Y
        if rule is R.B_DOT:
            return b and not sup
        if rule is R.FIVE_DOT:
            return five and not sup
        if rule is R.SB_DOT:
            return sup and b and not five
        if rule is R.S5_DOT:
            return sup and five and not b
        if rule in (R.S5B_DOT, R.SB5_DOT):
            return sup and b and five
        if rule is R.PROPER:
            return formula is not None and formula in self.proper_axioms
        return True

    def rules(self) -> list[RuleId]:
        return [r for r in R if r is not R.PROPER and self.enabled(r)]


LOGICS = {
    "CK": ((), ()),
    "CD": (("d",), ()),
    "CT": (("t",), ()),
    "CK4": (("4",), ()),
    "CK45": (("4",), ("5",)),
    "CD4": (("d", "4"), ()),
    "CD45": (("d", "4"), ("5",)),
    "CS4": (("t", "4"), ()),
    "CS5": (("t", "4"), ("b", "5")),
    # not safe: accepted for checking and search, refused by cut elimination
    "CKB": ((), ("b",)),
    "CK5": ((), ("5",)),
    "CKB5": ((), ("b", "5")),
    "CD5": (("d",), ("5",)),
    "CDB": (("d",), ("b",)),
    "CTB": (("t",), ("b",)),
}


def logic(name: str, **kw) -> SystemConfig:
    try:
        X, Y = LOGICS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown logic {name!r}; known: {', '.join(LOGICS)}") from None
    return SystemConfig(X=frozenset(X), Y=frozenset(Y), **kw)


# ---------------------------------------------------------------- errors


class RuleError(Exception):
    kind = "rule-error"

    def __init__(self, message: str, detail=None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_json(self):
        return {"error": self.kind, "message": self.message}


class DisabledRule(RuleError):
    kind = "disabled-rule"


class SchemaMismatch(RuleError):
    kind = "schema-mismatch"


class SideConditionViolation(RuleError):
    kind = "side-condition-violation"


class PolarityViolation(RuleError):
    kind = "polarity-violation"


class NoRedex(RuleError):
    kind = "no-redex"


class InvalidParams(NoRedex):
    kind = "invalid-params"


# ---------------------------------------------------------------- instances


@dataclass(frozen=True)
class RuleInstance:
    rule: RuleId
    conclusion: Sequent
    premises: tuple = ()
    principal: Optional[Path] = None
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "rule", RuleId(self.rule))
        object.__setattr__(self, "premises", tuple(self.premises))


# ---------------------------------------------------------------- primitive edits


def _node_items(s: Sequent, node: tuple) -> list:
    try:
        return list(node_at(s, node).items)
    except (IndexError, AttributeError):
        raise NoRedex(f"no node at {list(node)}") from None


def _set(s: Sequent, node: tuple, items) -> Sequent:
    return update_node(s, node, lambda _: Sequent(tuple(items)))


def _edit(s: Sequent, node: tuple, fn) -> Sequent:
    return update_node(s, node, lambda n: Sequent(tuple(fn(list(n.items)))))


def _principal(s: Sequent, p: Path, out: bool, ctor=None) -> Fml:
    if p is None or p.slot is None:
        raise NoRedex("rule needs a principal formula")
    items = _node_items(s, p.node)
    if not 0 <= p.slot < len(items):
        raise NoRedex(f"no item {p.slot} at node {list(p.node)}")
    it = items[p.slot]
    if not isinstance(it, Fml) or it.out != out:
        raise NoRedex(f"item {p.slot} is not an {'output' if out else 'input'} formula")
    if ctor is not None and not isinstance(it.formula, ctor):
        raise NoRedex(f"principal {F.show(it.formula)} is not a {ctor.__name__}")
    return it


def _replace(s: Sequent, p: Path, new_items) -> Sequent:
    return _edit(s, p.node, lambda its: its[:p.slot] + list(new_items) + its[p.slot + 1:])


def _bracket_index(s: Sequent, node: tuple, j, exclude=()) -> int:
    items = _node_items(s, node)
    if not isinstance(j, int) or not 0 <= j < len(items) or not isinstance(items[j], Bracket) or j in exclude:
        raise NoRedex(f"item {j} at node {list(node)} is not a usable bracket")
    return j


def _check_target(s: Sequent, node: tuple, target, min_len: int = 1, avoid=()) -> tuple:
    target = tuple(target or ())
    if len(target) < min_len:
        raise InvalidParams(f"target must have at least {min_len} bracket(s)")
    if target and target[0] in avoid:
        raise InvalidParams("target passes through a bracket moved by the rule")
    try:
        node_at(s, node + target)
    except (IndexError, AttributeError):
        raise NoRedex(f"no node at {list(node + target)}") from None
    return target


def _move_then_remove(s: Sequent, node: tuple, remove, dest: tuple, new_items) -> Sequent:
    """Append new_items at dest, then drop the `remove` indices at node.
    dest must not run through a removed item."""
    s = _edit(s, dest, lambda its: its + list(new_items))
    drop = set(remove)
    return _edit(s, node, lambda its: [it for i, it in enumerate(its) if i not in drop])


def _wrap(items, k: int, tag=None) -> list:
    """k nested brackets around items; the innermost one carries `tag`."""
    out = list(items)
    for n in range(k):
        out = [Bracket(Sequent(tuple(out)), tag if n == 0 else None)]
    return out


def _pruned_with(s: Sequent, node: tuple, new_items) -> Sequent:
    """↓Γ{new_items} where Γ{ } has its hole at `node` and Γ{∅} = s."""
    skel = _edit(s, node, lambda its: its + [HOLE])
    skel = prune_node(skel, node)
    return plug(make_context(skel), new_items)


def _unpruned_with(s: Sequent, node: tuple, new_items) -> Sequent:
    skel = _drop_output(_edit(s, node, lambda its: its + [HOLE]))
    return plug(make_context(skel), new_items)


def _pruned_replace(s: Sequent, p: Path, new_items) -> Sequent:
    skel = _replace(s, p, [HOLE])
    skel = prune_node(skel, p.node)
    return plug(make_context(skel), new_items)


def _drop_output(s: Sequent) -> Sequent:
    """Remove only the output formula, leaving its subtree in place (the
    relaxed reading that the checker reports as a missing pruning)."""
    op = output_path(s)
    if op is None:
        return s
    return _edit(s, op.node, lambda its: its[:op.slot] + its[op.slot + 1:])


def _output_below(s: Sequent, node: tuple) -> bool:
    op = output_path(s)
    return op is not None and op.node[:len(node)] == node


def _items_param(s: Sequent, node: tuple, params, exclude=()) -> list:
    idx = params.get("items")
    if idx is None:
        raise InvalidParams("rule needs an 'items' parameter")
    idx = sorted(set(int(i) for i in idx))
    items = _node_items(s, node)
    if any(not 0 <= i < len(items) or i in exclude for i in idx):
        raise InvalidParams("item index out of range")
    return idx


# ---------------------------------------------------------------- generators


def _mk(f: Formula, out: bool = False) -> Fml:
    return Fml(f, out)


def g_id(s, p, q):
    a = _principal(s, p, False, F.Atom)
    if not any(isinstance(it, Fml) and it.out and it.formula == a.formula for it in _node_items(s, p.node)):
        raise NoRedex("no matching output atom at the principal's node")
    return []


def g_bot_l(s, p, q):
    _principal(s, p, False, F.Bottom)
    if not _output_below(s, p.node):
        raise NoRedex("output formula is not in the subtree of the principal's node")
    return []


def g_and_l(s, p, q):
    f = _principal(s, p, False, F.And).formula
    return [_replace(s, p, [_mk(f.l), _mk(f.r)])]


def g_and_r(s, p, q):
    f = _principal(s, p, True, F.And).formula
    return [_replace(s, p, [_mk(f.l, True)]), _replace(s, p, [_mk(f.r, True)])]


def g_or_l(s, p, q):
    f = _principal(s, p, False, F.Or).formula
    if not _output_below(s, p.node):
        raise NoRedex("output formula is not in the subtree of the principal's node")
    return [_replace(s, p, [_mk(f.l)]), _replace(s, p, [_mk(f.r)])]


def g_or_r1(s, p, q):
    f = _principal(s, p, True, F.Or).formula
    return [_replace(s, p, [_mk(f.l, True)])]


def g_or_r2(s, p, q):
    f = _principal(s, p, True, F.Or).formula
    return [_replace(s, p, [_mk(f.r, True)])]


def g_imp_l(s, p, q, prune=True):
    f = _principal(s, p, False, F.Implies).formula
    left = _pruned_replace(s, p, [_mk(f.l, True)]) if prune else plug(make_context(_drop_output(_replace(s, p, [HOLE]))), [_mk(f.l, True)])
    return [left, _replace(s, p, [_mk(f.r)])]


def g_imp_r(s, p, q):
    f = _principal(s, p, True, F.Implies).formula
    return [_replace(s, p, [_mk(f.l), _mk(f.r, True)])]


def _into_bracket(s, p, q, new_item):
    j = _bracket_index(s, p.node, q.get("bracket"), exclude=(p.slot,))
    return [_move_then_remove(s, p.node, [p.slot], p.node + (j,), [new_item])]


def g_box_l(s, p, q):
    f = _principal(s, p, False, F.Box).formula
    return _into_bracket(s, p, q, _mk(f.body))


def g_box_r(s, p, q):
    f = _principal(s, p, True, F.Box).formula
    return [_replace(s, p, [Bracket(Sequent((_mk(f.body, True),)))])]


def g_dia_l(s, p, q):
    f = _principal(s, p, False, F.Dia).formula
    return [_replace(s, p, [Bracket(Sequent((_mk(f.body),)))])]


def g_dia_l_hat(s, p, q):
    f = _principal(s, p, False, F.Dia).formula
    if not _output_below(s, p.node):
        raise NoRedex("output formula is not in the subtree of the principal's node")
    return [_replace(s, p, [Bracket(Sequent((_mk(f.body),)))])]


def g_dia_r(s, p, q):
    f = _principal(s, p, True, F.Dia).formula
    return _into_bracket(s, p, q, _mk(f.body, True))


def g_d_r(s, p, q):
    f = _principal(s, p, True, F.Dia).formula
    return [_replace(s, p, [Bracket(Sequent((_mk(f.body, True),)))])]


def g_d_l(s, p, q):
    f = _principal(s, p, False, F.Box).formula
    return [_replace(s, p, [Bracket(Sequent((_mk(f.body),)))])]


def g_t_r(s, p, q):
    f = _principal(s, p, True, F.Dia).formula
    return [_replace(s, p, [_mk(f.body, True)])]


def g_t_l(s, p, q):
    f = _principal(s, p, False, F.Box).formula
    return [_replace(s, p, [_mk(f.body)])]


def g_four_r(s, p, q):
    it = _principal(s, p, True, F.Dia)
    return _into_bracket(s, p, q, it)


def g_four_l(s, p, q):
    it = _principal(s, p, False, F.Box)
    return _into_bracket(s, p, q, it)


def _deep(s, p, q, out, ctor, unwrap, min_len=1):
    it = _principal(s, p, out, ctor)
    target = _check_target(s, p.node, q.get("target"), min_len, avoid=(p.slot,))
    new = _mk(it.formula.body, out) if unwrap else it
    return [_move_then_remove(s, p.node, [p.slot], p.node + target, [new])]


def g_s4_r(s, p, q):
    return _deep(s, p, q, True, F.Dia, False)


def g_s4_l(s, p, q):
    return _deep(s, p, q, False, F.Box, False)


def g_s4_r_dia(s, p, q):
    return _deep(s, p, q, True, F.Dia, True)


def g_s4_l_box(s, p, q):
    return _deep(s, p, q, False, F.Box, True)


def _node_of(p: Path) -> tuple:
    if p is None:
        raise NoRedex("rule needs a node location")
    return p.node


def g_cont(s, p, q):
    node = _node_of(p)
    idx = _items_param(s, node, q)
    items = _node_items(s, node)
    dup = [items[i] for i in idx]
    if not dup:
        raise InvalidParams("contraction needs at least one item")
    if not is_lhs(dup):
        raise NoRedex("contracted part must be an LHS sequent")
    return [_edit(s, node, lambda its: its + dup)]


def g_weak(s, p, q):
    node = _node_of(p)
    idx = _items_param(s, node, q)
    items = _node_items(s, node)
    if not idx:
        raise InvalidParams("weakening needs at least one item")
    if not is_lhs([items[i] for i in idx]):
        raise NoRedex("weakened part must be an LHS sequent")
    return [_edit(s, node, lambda its: [it for i, it in enumerate(its) if i not in idx])]


def g_nec(s, p, q):
    if len(s.items) != 1 or not isinstance(s.items[0], Bracket):
        raise NoRedex("nec concludes a single bracket")
    return [s.items[0].child]


def _cut_formula(q) -> Formula:
    f = q.get("formula")
    if f is None:
        raise InvalidParams("cut needs a 'formula' parameter")
    return f if not isinstance(f, str) else F.parse(f)


def g_cut(s, p, q, prune=True):
    node = _node_of(p)
    _node_items(s, node)
    a = _cut_formula(q)
    left = _pruned_with(s, node, [_mk(a, True)]) if prune else _unpruned_with(s, node, [_mk(a, True)])
    return [left, _edit(s, node, lambda its: its + [_mk(a)])]


def g_dia_cut(s, p, q, prune=True):
    node = _node_of(p)
    a = _cut_formula(q)
    if not isinstance(a, F.Dia):
        raise InvalidParams("the fused diamond cut needs a diamond formula")
    target = _check_target(s, node, q.get("target"))
    here = _node_items(s, node)
    if has_output(here[target[0]]):
        raise NoRedex("the bracket chain of the diamond cut must be an LHS context")
    dest = node + target
    left = _pruned_with(s, dest, [_mk(a, True)]) if prune else _unpruned_with(s, dest, [_mk(a, True)])
    return [left, _edit(s, node, lambda its: its + [_mk(a)])]


def g_box_cut(s, p, q, prune=True):
    node = _node_of(p)
    a = _cut_formula(q)
    if not isinstance(a, F.Box):
        raise InvalidParams("the fused box cut needs a box formula")
    target = _check_target(s, node, q.get("target"))
    left = _pruned_with(s, node, [_mk(a, True)]) if prune else _unpruned_with(s, node, [_mk(a, True)])
    return [left, _edit(s, node + target, lambda its: its + [_mk(a)])]


def g_d_dot(s, p, q):
    node = _node_of(p)
    _node_items(s, node)
    return [_edit(s, node, lambda its: its + [Bracket(EMPTY)])]


def g_t_dot(s, p, q):
    node = _node_of(p)
    idx = _items_param(s, node, q)
    items = _node_items(s, node)
    sigma = [items[i] for i in idx]
    return [_move_then_remove(s, node, idx, node, [Bracket(Sequent(tuple(sigma)))])]


def g_b_dot(s, p, q):
    node = _node_of(p)
    items = _node_items(s, node)
    j = _bracket_index(s, node, q.get("bracket"))
    idx = _items_param(s, node, q, exclude=(j,))
    sigma = [items[i] for i in idx]
    return [_move_then_remove(s, node, idx, node + (j,), _wrap(sigma, 1))]


def g_four_dot(s, p, q):
    node = _node_of(p)
    items = _node_items(s, node)
    j = _bracket_index(s, node, q.get("bracket"))
    inner = items[j].child.items
    if len(inner) != 1 or not isinstance(inner[0], Bracket):
        raise NoRedex("4-dot needs a bracket holding exactly one bracket")
    return [_replace(s, Path(node, j), [inner[0]])]


def g_five_dot(s, p, q):
    node = _node_of(p)
    i = _bracket_index(s, node, q.get("bracket"))
    j = _bracket_index(s, node, q.get("into"), exclude=(i,))
    items = _node_items(s, node)
    return [_move_then_remove(s, node, [i], node + (j,), [items[i]])]


def _sb_like(s, p, q, boxed: bool, exact: bool):
    """sb/s5b (boxed=False: Σ are items) and s5/sb5 (boxed=True: Σ is a bracket)."""
    node = _node_of(p)
    items = _node_items(s, node)
    if boxed:
        i = _bracket_index(s, node, q.get("bracket"))
        idx = [i]
        sigma = list(items[i].child.items)
        # the moved bracket survives as the innermost wrapper
        tag = items[i].tag
    else:
        idx = _items_param(s, node, q)
        sigma = [items[i] for i in idx]
        tag = None
    target = _check_target(s, node, q.get("target"), 0 if (boxed and exact) else 1, avoid=idx)
    n = len(target)
    if exact:
        k = 1 if boxed else n
    else:
        k = q.get("k")
        if not isinstance(k, int) or not 1 <= k <= n:
            raise InvalidParams(f"k must satisfy 1 <= k <= n = {n}")
    return [_move_then_remove(s, node, idx, node + target, _wrap(sigma, k, tag))]


def g_sb_dot(s, p, q):
    return _sb_like(s, p, q, boxed=False, exact=True)


def g_s5_dot(s, p, q):
    return _sb_like(s, p, q, boxed=True, exact=True)


def g_s5b_dot(s, p, q):
    return _sb_like(s, p, q, boxed=False, exact=False)


def g_sb5_dot(s, p, q):
    return _sb_like(s, p, q, boxed=True, exact=False)


def g_proper(s, p, q):
    it = _principal(s, p, True)
    f = q.get("formula")
    if f is not None and it.formula != (F.parse(f) if isinstance(f, str) else f):
        raise NoRedex("output formula differs from the proper axiom")
    return []


GENERATORS: dict[RuleId, Callable] = {
    R.ID: g_id, R.BOT_L: g_bot_l, R.AND_L: g_and_l, R.AND_R: g_and_r, R.OR_L: g_or_l,
    R.OR_R1: g_or_r1, R.OR_R2: g_or_r2, R.IMP_L: g_imp_l, R.IMP_R: g_imp_r, R.BOX_L: g_box_l,
    R.BOX_R: g_box_r, R.DIA_L: g_dia_l, R.DIA_L_HAT: g_dia_l_hat, R.DIA_R: g_dia_r,
    R.CONT: g_cont, R.WEAK: g_weak, R.NEC: g_nec, R.CUT: g_cut, R.DIA_CUT: g_dia_cut,
    R.BOX_CUT: g_box_cut, R.D_R: g_d_r, R.D_L: g_d_l, R.T_R: g_t_r, R.T_L: g_t_l,
    R.FOUR_R: g_four_r, R.FOUR_L: g_four_l, R.S4_R: g_s4_r, R.S4_L: g_s4_l,
    R.S4_R_DIA: g_s4_r_dia, R.S4_L_BOX: g_s4_l_box, R.D_DOT: g_d_dot, R.T_DOT: g_t_dot,
    R.B_DOT: g_b_dot, R.FOUR_DOT: g_four_dot, R.FIVE_DOT: g_five_dot, R.SB_DOT: g_sb_dot,
    R.S5_DOT: g_s5_dot, R.S5B_DOT: g_s5b_dot, R.SB5_DOT: g_sb5_dot, R.PROPER: g_proper,
}

NEEDS_FORMULA = {R.ID, R.BOT_L, R.AND_L, R.AND_R, R.OR_L, R.OR_R1, R.OR_R2, R.IMP_L, R.IMP_R,
                 R.BOX_L, R.BOX_R, R.DIA_L, R.DIA_L_HAT, R.DIA_R, R.D_R, R.D_L, R.T_R, R.T_L,
                 R.FOUR_R, R.FOUR_L, R.S4_R, R.S4_L, R.S4_R_DIA, R.S4_L_BOX, R.PROPER}


def normalize_params(params) -> dict:
    q = dict(params or {})
    for k in ("items", "target"):
        if k in q and q[k] is not None:
            q[k] = tuple(int(i) for i in q[k])
    if isinstance(q.get("formula"), str):
        q["formula"] = F.parse(q["formula"])
    return q


def apply(s: Sequent, rule: RuleId, principal: Optional[Path] = None, params=None,
          cfg: Optional[SystemConfig] = None, tagged: bool = False) -> list[Sequent]:
    """Premises of `rule` applied bottom-up to s at `principal`.

    With tagged=True every premise item that survives from the conclusion
    carries the address of its conclusion occurrence as tag."""
    rule = RuleId(rule)
    q = normalize_params(params)
    if cfg is not None and not cfg.enabled(rule, _proper_formula(s, principal, q) if rule is R.PROPER else None):
        raise DisabledRule(f"rule {rule} is not enabled in this system")
    src = tag_addresses(s) if tagged else s
    return GENERATORS[rule](src, principal, q)


def _proper_formula(s, principal, q):
    f = q.get("formula")
    if f is not None:
        return f
    try:
        it = _principal(s, principal, True)
        return it.formula
    except NoRedex:
        return None


def instance(s: Sequent, rule: RuleId, principal: Optional[Path] = None, params=None,
             cfg: Optional[SystemConfig] = None) -> RuleInstance:
    prem = apply(s, rule, principal, params, cfg)
    return RuleInstance(rule, s, tuple(prem), principal, normalize_params(params))


# ---------------------------------------------------------------- locations


def _subsets(n: int, limit: int = 12, max_size: Optional[int] = None) -> Iterator[tuple]:
    if n > limit:
        rng = range(0, min(n, 2) + 1)
    else:
        rng = range(0, n + 1)
    for r in rng:
        if max_size is not None and r > max_size:
            break
        yield from itertools.combinations(range(n), r)


def _dedup_subsets(items, subsets) -> Iterator[tuple]:
    seen = set()
    for sub in subsets:
        key = tuple(sorted(items[i].key for i in sub))
        if key in seen:
            continue
        seen.add(key)
        yield sub


def _descendants(s: Sequent, node: tuple, avoid=(), depth: int = 0) -> Iterator[tuple]:
    """Relative paths to every node strictly below `node`."""
    for i, it in enumerate(node_at(s, node).items):
        if isinstance(it, Bracket) and i not in avoid:
            yield (i,)
            for rest in _descendants(s, node + (i,)):
                yield (i,) + rest


def _formula_slots(s: Sequent, out: bool, ctor=None):
    for node, i, it in walk(s):
        if isinstance(it, Fml) and it.out == out and (ctor is None or isinstance(it.formula, ctor)):
            yield Path(node, i), it


def _brackets_at(s: Sequent, node: tuple, exclude=()):
    return [j for j, it in enumerate(node_at(s, node).items) if isinstance(it, Bracket) and j not in exclude]


_PRINCIPAL_SHAPE = {
    R.ID: (False, F.Atom), R.BOT_L: (False, F.Bottom), R.AND_L: (False, F.And), R.AND_R: (True, F.And),
    R.OR_L: (False, F.Or), R.OR_R1: (True, F.Or), R.OR_R2: (True, F.Or), R.IMP_L: (False, F.Implies),
    R.IMP_R: (True, F.Implies), R.BOX_L: (False, F.Box), R.BOX_R: (True, F.Box), R.DIA_L: (False, F.Dia),
    R.DIA_L_HAT: (False, F.Dia), R.DIA_R: (True, F.Dia), R.D_R: (True, F.Dia), R.D_L: (False, F.Box),
    R.T_R: (True, F.Dia), R.T_L: (False, F.Box), R.FOUR_R: (True, F.Dia), R.FOUR_L: (False, F.Box),
    R.S4_R: (True, F.Dia), R.S4_L: (False, F.Box), R.S4_R_DIA: (True, F.Dia), R.S4_L_BOX: (False, F.Box),
    R.PROPER: (True, None),
}


def locations(s: Sequent, rule: RuleId, hints: Optional[list] = None, max_sigma: Optional[int] = None,
              relaxed: bool = False) -> Iterator[tuple[Optional[Path], dict]]:
    """Candidate (principal, params) pairs for `rule` in s.

    `hints` are premise sequents, used to guess cut formulas. Σ-subsets are
    enumerated exhaustively for small nodes (capped by max_sigma if given).
    With relaxed=True, super-rule bracket counts are not restricted, which
    lets the checker tell a side-condition failure from a schema mismatch."""
    rule = RuleId(rule)
    if rule in _PRINCIPAL_SHAPE:
        out, ctor = _PRINCIPAL_SHAPE[rule]
        for p, it in _formula_slots(s, out, ctor):
            if rule in (R.BOX_L, R.DIA_R, R.FOUR_R, R.FOUR_L):
                for j in _brackets_at(s, p.node, (p.slot,)):
                    yield p, {"bracket": j}
            elif rule in (R.S4_R, R.S4_L, R.S4_R_DIA, R.S4_L_BOX):
                for t in _descendants(s, p.node, avoid=(p.slot,)):
                    yield p, {"target": t}
            elif rule is R.PROPER:
                yield p, {"formula": it.formula}
            else:
                yield p, {}
        return
    if rule is R.NEC:
        yield None, {}
        return
    for node in list(nodes(s)):
        items = node_at(s, node).items
        n = len(items)
        if rule in (R.CONT, R.WEAK):
            inputs = [i for i in range(n) if not has_output(items[i])]
            subs = (tuple(inputs[k] for k in c) for c in _subsets(len(inputs), max_size=max_sigma))
            for sub in _dedup_subsets(items, subs):
                if sub:
                    yield Path(node, None), {"items": sub}
        elif rule is R.D_DOT:
            yield Path(node, None), {}
        elif rule is R.T_DOT:
            for sub in _dedup_subsets(items, _subsets(n, max_size=max_sigma)):
                yield Path(node, None), {"items": sub}
        elif rule is R.FOUR_DOT:
            for j in _brackets_at(s, node):
                yield Path(node, None), {"bracket": j}
        elif rule is R.FIVE_DOT:
            for i in _brackets_at(s, node):
                for j in _brackets_at(s, node, (i,)):
                    yield Path(node, None), {"bracket": i, "into": j}
        elif rule is R.B_DOT:
            for j in _brackets_at(s, node):
                rest = [i for i in range(n) if i != j]
                subs = (tuple(rest[k] for k in c) for c in _subsets(len(rest), max_size=max_sigma))
                for sub in _dedup_subsets(items, subs):
                    yield Path(node, None), {"items": sub, "bracket": j}
        elif rule in (R.SB_DOT, R.S5B_DOT):
            for sub in _dedup_subsets(items, _subsets(n, max_size=max_sigma)):
                for t in _descendants(s, node, avoid=sub):
                    if rule is R.SB_DOT and not relaxed:
                        yield Path(node, None), {"items": sub, "target": t}
                    else:
                        for k in range(0 if relaxed else 1, len(t) + (3 if relaxed else 1)):
                            yield Path(node, None), {"items": sub, "target": t, "k": k}
        elif rule in (R.S5_DOT, R.SB5_DOT):
            for i in _brackets_at(s, node):
                ts = list(_descendants(s, node, avoid=(i,)))
                if rule is R.S5_DOT:
                    ts = [()] + ts
                for t in ts:
                    if rule is R.S5_DOT and not relaxed:
                        yield Path(node, None), {"bracket": i, "target": t}
                    else:
                        for k in range(0 if relaxed else 1, len(t) + (3 if relaxed else 1)):
                            yield Path(node, None), {"bracket": i, "target": t, "k": k}
        elif rule in CUTS:
            for a in _cut_formulas(hints, rule):
                if rule is R.CUT:
                    yield Path(node, None), {"formula": a}
                else:
                    for t in _descendants(s, node):
                        yield Path(node, None), {"formula": a, "target": t}


def _cut_formulas(hints, rule):
    if not hints:
        return []
    seen = []
    want = {R.CUT: None, R.DIA_CUT: F.Dia, R.BOX_CUT: F.Box}[rule]
    for prem in hints:
        for _, _, it in walk(prem):
            if isinstance(it, Fml) and (want is None or isinstance(it.formula, want)) and it.formula not in seen:
                seen.append(it.formula)
    return seen


# ---------------------------------------------------------------- checking


def _relaxed_generate(s, rule, p, q):
    """Premises with the side condition dropped, or None if the rule has none."""
    if rule is R.IMP_L:
        return g_imp_l(s, p, q, prune=False)
    if rule is R.CUT:
        return g_cut(s, p, q, prune=False)
    if rule is R.DIA_CUT:
        return g_dia_cut(s, p, q, prune=False)
    if rule is R.BOX_CUT:
        return g_box_cut(s, p, q, prune=False)
    if rule in (R.SB_DOT, R.S5_DOT, R.S5B_DOT, R.SB5_DOT):
        k = q.get("k")
        if k is None:
            return None
        node = p.node
        items = _node_items(s, node)
        if rule in (R.S5_DOT, R.SB5_DOT):
            idx = [q["bracket"]]
            sigma = list(items[q["bracket"]].child.items)
        else:
            idx = list(q["items"])
            sigma = [items[i] for i in idx]
        t = tuple(q["target"])
        return [_move_then_remove(s, node, idx, node + t, _wrap(sigma, k))]
    return None


def _same(generated, given) -> bool:
    return len(generated) == len(given) and all(a == b for a, b in zip(generated, given))


def _first_difference(generated, given) -> str:
    for k, (a, b) in enumerate(zip(generated, given)):
        if a != b:
            return f"premise {k + 1}: expected {a}, got {b}"
    return f"expected {len(generated)} premises, got {len(given)}"


def locate(inst: RuleInstance, cfg: SystemConfig) -> RuleInstance:
    """Return inst with a principal/params under which it matches its schema,
    or raise the appropriate RuleError."""
    rule = inst.rule
    if len(inst.premises) != ARITY[rule]:
        raise SchemaMismatch(f"{rule} takes {ARITY[rule]} premise(s), got {len(inst.premises)}")
    for k, seq in enumerate((inst.conclusion,) + tuple(inst.premises)):
        c = classify(seq)
        if c != FULL:
            where = "conclusion" if k == 0 else f"premise {k}"
            n = c.output_count if isinstance(c, Invalid) else 0
            raise PolarityViolation(f"{where} {seq} is not a full sequent ({n} output formulas)")
    s = inst.conclusion
    if rule is R.PROPER:
        f = inst.params.get("formula") or _proper_formula(s, inst.principal or output_path(s), normalize_params(inst.params))
        if not cfg.enabled(rule, normalize_params({"formula": f})["formula"] if f is not None else None):
            raise DisabledRule("proper axiom is not declared in this system")
    elif not cfg.enabled(rule):
        raise DisabledRule(f"rule {rule} is not enabled in this system")
    if inst.principal is not None or inst.params:
        cands = [(inst.principal, normalize_params(inst.params))]
    else:
        cands = locations(s, rule, hints=list(inst.premises))
    closest = None
    side = None
    for p, q in cands:
        try:
            gen = GENERATORS[rule](s, p, q)
        except NoRedex as e:
            closest = closest or str(e)
            continue
        if _same(gen, inst.premises):
            return RuleInstance(rule, s, inst.premises, p, q)
        if closest is None or closest.startswith("no "):
            closest = _first_difference(gen, inst.premises)
        try:
            relaxed = _relaxed_generate(s, rule, p, q)
        except (NoRedex, KeyError, IndexError):
            relaxed = None
        if relaxed is not None and _same(relaxed, inst.premises):
            side = f"{rule}: premises match only without the side condition (pruning or bracket count)"
    if side is None and rule in (R.SB_DOT, R.S5_DOT, R.S5B_DOT, R.SB5_DOT):
        base = inst.params or {}
        relaxed_cands = locations(s, rule, relaxed=True) if inst.principal is None else \
            [(inst.principal, dict(normalize_params(base), k=k)) for k in range(0, 8)]
        for p, q in relaxed_cands:
            try:
                relaxed = _relaxed_generate(s, rule, p, q)
            except (NoRedex, KeyError, IndexError, TypeError):
                continue
            if relaxed is not None and _same(relaxed, inst.premises):
                side = f"{rule}: bracket count {q.get('k')} violates the depth condition"
                break
    if side is not None:
        raise SideConditionViolation(side)
    raise SchemaMismatch(f"{rule} does not match: {closest or 'no candidate location'}")


def check_instance(inst: RuleInstance, cfg: SystemConfig) -> Optional[RuleError]:
    try:
        locate(inst, cfg)
    except RuleError as e:
        return e
    return None


# ---------------------------------------------------------------- move generation


def enumerate_applicable(s: Sequent, cfg: SystemConfig, max_sigma: int = 2) -> list[RuleInstance]:
    """All rule instances concluding s, up to canonical premises. Cut and
    weakening are not enumerated; contraction only on single items."""
    out = []
    seen = set()
    for rule in cfg.rules():
        if rule in CUTS or rule in (R.WEAK,):
            continue
        for p, q in locations(s, rule, max_sigma=max_sigma):
            if rule is R.CONT and len(q["items"]) != 1:
                continue
            try:
                prem = GENERATORS[rule](s, p, q)
            except NoRedex:
                continue
            if rule in STRUCTURAL or rule is R.CONT:
                key = (rule, tuple(x.key for x in prem))
            else:
                key = (rule, p, tuple(sorted(q.items())), tuple(x.key for x in prem))
            if key in seen:
                continue
            seen.add(key)
            out.append(RuleInstance(rule, s, tuple(prem), p, q))
    for f in sorted(cfg.proper_axioms, key=F.key):
        for p, it in _formula_slots(s, True):
            if it.formula == f:
                out.append(RuleInstance(R.PROPER, s, (), p, {"formula": f}))
    return out
