"""Cut elimination for safe systems.

Everything here is a derivation -> derivation function. The workhorses are
two generic rewriters:

* `transform` pushes a set of marked occurrences up a derivation, editing
  each marked occurrence the same way in every sequent (delete it, flatten
  or deepen a bracket, replace a formula by its inversion components). At
  every node it keeps the rule if it still fits, or switches to the
  matching rule of the same family, and it verifies every premise it
  produces. One node in, at most one node out, so height never grows.
* `weaken` transports a derivation along an embedding of its conclusion
  into a bigger sequent.

The cut lemmas are built on top of these and on cont; every outer step is
re-checked and the cut value must drop in the multiset order.
"""

from __future__ import annotations

import itertools
import json
import sys
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from . import formula as F
from .calculus import (
    BLACK_DESTRUCTING, CUTS, STRUCTURAL, R, RuleError, RuleId, SystemConfig, _pruned_with, apply, is_safe,
)
from .derivation import (
    CheckFailed, CutValue, Derivation, classify_cuts, cut_value, height, is_anchored, is_cut_free, located,
    multiset_less, premise_maps, principal_address,
)
from .sequent import (
    Bracket, Fml, Path, Sequent, align, has_output, item_at, node_at, output_path, prune_node, show,
    strip_tags, tag_addresses, walk,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class ElimError(Exception):
    """Cut elimination cannot proceed; `detail` says why."""

    def __init__(self, message: str, detail=None):
        super().__init__(message)
        self.detail = detail


class TransformError(ElimError):
    pass


class NotSafe(ElimError):
    pass


class MeasureViolation(ElimError):
    pass


class FuelExhausted(ElimError):
    pass


# ---------------------------------------------------------------- trace


@dataclass
class TraceStep:
    label: str
    before: list
    after: list
    size_before: int
    size_after: int

    def to_json(self) -> dict:
        return {"label": self.label, "before": [[v.rank, v.unanchored] for v in self.before],
                "after": [[v.rank, v.unanchored] for v in self.after],
                "size_before": self.size_before, "size_after": self.size_after}


@dataclass
class ElimTrace:
    steps: list = field(default_factory=list)

    def record(self, label, before, after, size_before, size_after):
        self.steps.append(TraceStep(label, _sorted_values(before), _sorted_values(after),
                                    size_before, size_after))

    def decreasing(self) -> bool:
        return all(multiset_less(_counter(s.after), _counter(s.before)) for s in self.steps)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(s.to_json()) + "\n" for s in self.steps)

    def __len__(self):
        return len(self.steps)


def _sorted_values(c) -> list:
    return sorted(c.elements(), reverse=True)


def _counter(values):
    from collections import Counter
    return Counter(values)


# ---------------------------------------------------------------- fuel


class _Fuel:
    left: Optional[int] = None

    @classmethod
    def burn(cls, n: int = 1):
        if cls.left is None:
            return
        cls.left -= n
        if cls.left < 0:
            raise FuelExhausted("rewrite step budget exhausted")


# ---------------------------------------------------------------- small helpers


def _node(rule, concl, kids=(), p=None, q=None) -> Derivation:
    return Derivation(RuleId(rule), strip_tags(concl), tuple(kids), p, q or {})


def _tags(s: Sequent) -> dict:
    """tag -> address for every tagged item of s."""
    out = {}
    for nd, i, it in walk(s):
        if it.tag is not None:
            out.setdefault(it.tag, nd + (i,))
    return out


def _tag_node(index: dict, tag) -> Optional[tuple]:
    if tag == ():
        return ()
    return index.get(tag)


def _fresh(it, tag):
    if isinstance(it, Bracket):
        kids = tuple(_fresh(x, tag + (k,)) if x.tag is None else x for k, x in enumerate(it.child.items))
        return Bracket(Sequent(kids), it.tag if it.tag is not None else tag)
    if it.tag is None:
        return Fml(it.formula, it.out, tag)
    return it


def _with_items(s: Sequent, node: tuple, extra) -> Sequent:
    """s with `extra` appended at node (keeps tags)."""
    from .sequent import update_node
    return update_node(s, node, lambda n: Sequent(n.items + tuple(extra)))


def _output_item_at(s: Sequent, node: tuple):
    """The item at `node` that leads to (or is) the output formula."""
    op = output_path(s)
    if op is None or op.node[:len(node)] != node:
        return None
    if len(op.node) == len(node):
        return node + (op.slot,)
    return node + (op.node[len(node)],)


def _common(a: tuple, b: tuple) -> tuple:
    k = 0
    while k < len(a) and k < len(b) and a[k] == b[k]:
        k += 1
    return a[:k]


# ---------------------------------------------------------------- edits


@dataclass(frozen=True, eq=False)
class Edit:
    name: str
    fn: Callable
    # extra marks of the same kind may be introduced on premises
    repairable: bool = False

    def __repr__(self):
        return f"Edit({self.name})"


DELETE = Edit("delete", lambda it: [])
FLATTEN = Edit("flatten", lambda it: list(it.child.items), repairable=True)
DEEPEN = Edit("deepen", lambda it: [Bracket(Sequent((it,)))], repairable=True)
GHOST = Edit("ghost", lambda it: [] if not it.child.items else [it])


def substitute(*items) -> Edit:
    return Edit("substitute", lambda it: [strip_tags(Sequent((x,))).items[0] for x in items])


def _rewrite(s: Sequent, marks: dict, rep: dict, node: tuple = ()) -> Sequent:
    """Apply marks (address -> Edit) to a sequent whose tags are its own
    addresses. rep collects the tags of what each marked item became."""
    out = []
    for i, it in enumerate(s.items):
        addr = node + (i,)
        if isinstance(it, Bracket):
            it = replace(it, child=_rewrite(it.child, marks, rep, addr))
        e = marks.get(addr)
        if e is None:
            out.append(it)
            continue
        new = [_fresh(x, ("new", addr, k)) for k, x in enumerate(e.fn(it))]
        rep[addr] = [x.tag for x in new]
        out.extend(new)
    return Sequent(tuple(out))


def rewrite(s: Sequent, marks: dict) -> Sequent:
    return strip_tags(_rewrite(tag_addresses(s), marks, {}))


# ---------------------------------------------------------------- translating rule instances


class _Translator:
    """Maps addresses of an old sequent to a rewritten one (via tags)."""

    def __init__(self, index: dict, rep: Optional[dict] = None):
        self.index = index
        self.rep = rep or {}

    def item(self, a: tuple) -> Optional[tuple]:
        return self.index.get(a)

    def node(self, n: tuple) -> tuple:
        while n and n not in self.index:
            n = n[:-1]
        return self.index[n] if n else ()

    def group(self, a: tuple) -> list:
        if a in self.rep:
            return [self.index[t] for t in self.rep[a] if t in self.index]
        x = self.index.get(a)
        return [] if x is None else [x]

    def at_level(self, a: tuple, node: tuple) -> list:
        """Items at `node` standing for old item a (the item itself, its
        replacements, or the ancestor of its image at that level)."""
        out = []
        for x in self.group(a):
            if x[:-1] == node:
                out.append(x)
            elif len(x) > len(node) + 1 and x[:len(node)] == node:
                out.append(x[:len(node) + 1])
        return out


def _rel(node: tuple, absolute: tuple) -> Optional[tuple]:
    if absolute[:len(node)] != node:
        return None
    return absolute[len(node):]


_MOVE_FAMILIES = {
    R.BOX_L: "boxl", R.S4_L_BOX: "boxl", R.T_L: "boxl", R.D_L: "boxl",
    R.DIA_R: "diar", R.S4_R_DIA: "diar", R.T_R: "diar", R.D_R: "diar",
    R.FOUR_L: "fourl", R.S4_L: "fourl", R.FOUR_R: "fourr", R.S4_R: "fourr",
}
_SB = (R.SB_DOT, R.S5B_DOT, R.S5_DOT, R.SB5_DOT)


def _dest(rule, p: Path, q: dict) -> Optional[tuple]:
    if rule in (R.BOX_L, R.DIA_R, R.FOUR_L, R.FOUR_R):
        return p.node + (q["bracket"],)
    if rule in (R.S4_L_BOX, R.S4_R_DIA, R.S4_L, R.S4_R):
        return p.node + tuple(q["target"])
    if rule in (R.T_L, R.T_R):
        return p.node
    return None


def _family_moves(family: str, p: Path, rel: tuple) -> list:
    out = []
    if family == "boxl":
        if not rel:
            out.append((R.T_L, p, {}))
        if len(rel) == 1:
            out.append((R.BOX_L, p, {"bracket": rel[0]}))
        if rel:
            out.append((R.S4_L_BOX, p, {"target": rel}))
        out.append((R.D_L, p, {}))
    elif family == "diar":
        if not rel:
            out.append((R.T_R, p, {}))
        if len(rel) == 1:
            out.append((R.DIA_R, p, {"bracket": rel[0]}))
        if rel:
            out.append((R.S4_R_DIA, p, {"target": rel}))
        out.append((R.D_R, p, {}))
    elif family in ("fourl", "fourr") and rel:
        four, s4 = (R.FOUR_L, R.S4_L) if family == "fourl" else (R.FOUR_R, R.S4_R)
        if len(rel) == 1:
            out.append((four, p, {"bracket": rel[0]}))
        out.append((s4, p, {"target": rel}))
    return out


def _translations(rule: RuleId, p: Optional[Path], q: dict, tr: _Translator) -> list:
    """Candidate (rule, principal, params) in the rewritten sequent."""
    if p is not None and p.slot is not None:
        a = tr.item(p.node + (p.slot,))
        if a is None:
            return []
        np_ = Path(a[:-1], a[-1])
        newnode = np_.node
    else:
        newnode = tr.node(p.node) if p is not None else ()
        np_ = None if p is None else Path(newnode, None)

    family = _MOVE_FAMILIES.get(rule)
    if family is not None:
        d = _dest(rule, p, q)
        rel = _rel(newnode, tr.node(d))
        if rel is None:
            return []
        return _family_moves(family, np_, rel)

    if rule in _SB:
        return _sb_translations(rule, p, q, tr, newnode, np_)

    variants = [dict()]
    for key, val in q.items():
        opts = []
        if key in ("bracket", "into"):
            opts = [x[-1] for x in tr.at_level(p.node + (val,), newnode)]
        elif key == "items":
            idx = []
            ok = True
            for i in val:
                g = tr.group(p.node + (i,))
                if any(x[:-1] != newnode for x in g):
                    ok = False
                    break
                idx.extend(x[-1] for x in g)
            opts = [tuple(idx)] if ok else []
        elif key == "target":
            rel = _rel(newnode, tr.node(p.node + tuple(val)))
            opts = [] if rel is None else [rel]
        else:
            opts = [val]
        if not opts:
            return []
        variants = [dict(v, **{key: o}) for v in variants for o in dict.fromkeys(opts)]
    return [(rule, np_, v) for v in variants]


def _sb_translations(rule, p, q, tr, newnode, np_) -> list:
    if "bracket" in q:
        moved = tr.at_level(p.node + (q["bracket"],), newnode)
    else:
        moved = []
        for i in q["items"]:
            moved.extend(tr.at_level(p.node + (i,), newnode))
    rel = _rel(newnode, tr.node(p.node + tuple(q["target"])))
    if rel is None:
        return []
    idx = tuple(dict.fromkeys(x[-1] for x in moved))
    n = len(rel)
    out = []
    if len(idx) == 1:
        out.append((R.S5_DOT, np_, {"bracket": idx[0], "target": rel}))
        out += [(R.SB5_DOT, np_, {"bracket": idx[0], "target": rel, "k": k}) for k in range(1, n + 1)]
    if n:
        out.append((R.SB_DOT, np_, {"items": idx, "target": rel}))
        out += [(R.S5B_DOT, np_, {"items": idx, "target": rel, "k": k}) for k in range(1, n + 1)]
    # keep the original rule first
    out.sort(key=lambda c: c[0] is not rule)
    return out


# ---------------------------------------------------------------- the marked-occurrence rewriter


def transform(d: Derivation, marks: dict, cfg: SystemConfig) -> Derivation:
    """Derivation of rewrite(d.conclusion, marks). d must be located."""
    if not marks:
        return d
    _Fuel.burn()
    st = tag_addresses(d.conclusion)
    rep: dict = {}
    s2 = _rewrite(st, marks, rep)
    concl = strip_tags(s2)
    kids_marks, targets = [], []
    for k, m in enumerate(premise_maps(d)):
        mk = {a: marks[t] for a, t in m.items() if t in marks}
        kids_marks.append(mk)
        targets.append(_rewrite(tag_addresses(d.children[k].conclusion), mk, {}))
    for k, t in enumerate(targets):
        if t == s2:
            return transform(d.children[k], kids_marks[k], cfg)
    tr = _Translator(_tags(s2), rep)
    repair = [e for e in dict.fromkeys(marks.values()) if e.repairable]
    for rule, p, q in _translations(d.rule, d.principal, d.params, tr):
        try:
            gen = apply(concl, rule, p, q, cfg)
        except RuleError:
            continue
        if len(gen) != len(d.children):
            continue
        chosen = []
        for k, g in enumerate(gen):
            mk = _fit(d.children[k].conclusion, kids_marks[k], targets[k], g, repair)
            if mk is None:
                break
            chosen.append(mk)
        else:
            kids = [transform(c, mk, cfg) for c, mk in zip(d.children, chosen)]
            return _node(rule, concl, kids, p, q)
    raise TransformError(f"cannot push {sorted(e.name for e in marks.values())} through {d.rule} "
                         f"at {show(d.conclusion)}", {"rule": d.rule.value})


def _fit(prem: Sequent, marks: dict, target: Sequent, want: Sequent, repair: list) -> Optional[dict]:
    if target == want:
        return marks
    if not repair:
        return None
    tp = tag_addresses(prem)
    for a in marks:
        mk = {b: e for b, e in marks.items() if b != a}
        if _rewrite(tp, mk, {}) == want:
            return mk
    free = [nd + (i,) for nd, i, it in walk(prem) if isinstance(it, Bracket) and nd + (i,) not in marks]
    for size in (1, 2):
        for extra in itertools.combinations(free, size):
            for e in repair:
                mk = dict(marks)
                mk.update({a: e for a in extra})
                if _rewrite(tp, mk, {}) == want:
                    return mk
    return None


# ---------------------------------------------------------------- specific rewrites


def flatten(d: Derivation, at: tuple, cfg: SystemConfig) -> Derivation:
    """Γ{Σ} from a derivation of Γ{[Σ]}; `at` is the bracket's address."""
    return transform(d, {tuple(at): FLATTEN}, cfg)


def deepen(d: Derivation, at: tuple, cfg: SystemConfig, times: int = 1) -> Derivation:
    """Γ{[[Δ]]} from a derivation of Γ{[Δ]} (repeated `times`)."""
    at = tuple(at)
    for _ in range(times):
        d = transform(d, {at: DEEPEN}, cfg)
        at = at + (0,)
    return d


def strengthen(d: Derivation, at: tuple, cfg: SystemConfig) -> Derivation:
    """Drop an input occurrence whose flow never meets a black-destructing rule."""
    return transform(d, {tuple(at): DELETE}, cfg)


_INVERSIONS = {
    R.AND_L: (False, F.And), R.OR_L: (False, F.Or), R.DIA_L: (False, F.Dia), R.DIA_L_HAT: (False, F.Dia),
    R.AND_R: (True, F.And), R.IMP_R: (True, F.Implies), R.BOX_R: (True, F.Box), R.IMP_L: (False, F.Implies),
}


def _inversion_items(rule, f, branch):
    if rule is R.AND_L:
        return [Fml(f.l), Fml(f.r)]
    if rule is R.OR_L:
        return [Fml(f.r if branch else f.l)]
    if rule in (R.DIA_L, R.DIA_L_HAT):
        return [Bracket(Sequent((Fml(f.body),)))]
    if rule is R.AND_R:
        return [Fml(f.r if branch else f.l, True)]
    if rule is R.IMP_R:
        return [Fml(f.l), Fml(f.r, True)]
    if rule is R.BOX_R:
        return [Bracket(Sequent((Fml(f.body, True),)))]
    if rule is R.IMP_L:
        return [Fml(f.r)]
    raise ValueError(f"{rule} is not invertible here")


def invert(rule, d: Derivation, at: Path, cfg: SystemConfig, branch: int = 0) -> Derivation:
    """Derivation of the premise (number `branch`) of `rule` applied at `at`
    to d's conclusion. For imp_l only the right premise is invertible."""
    rule = RuleId(rule)
    if rule not in _INVERSIONS:
        raise ValueError(f"{rule} is not one of the invertible rules")
    out, ctor = _INVERSIONS[rule]
    it = item_at(d.conclusion, at)
    if not isinstance(it, Fml) or it.out != out or not isinstance(it.formula, ctor):
        raise ValueError(f"{rule} does not match the occurrence at {at}")
    edit = substitute(*_inversion_items(rule, it.formula, branch))
    return transform(d, {at.node + (at.slot,): edit}, cfg)


# ---------------------------------------------------------------- embeddings and weakening


def embed(a: Sequent, b: Sequent, fixed: Optional[dict] = None) -> Optional[dict]:
    """An embedding of a into b: formula items go injectively to equal
    items, brackets to brackets, depth is kept. `fixed` pins some items.
    Returns old address -> new address (items and brackets) or None."""
    fixed = dict(fixed or {})
    forced = {}
    for pa, pb in fixed.items():
        if len(pa) != len(pb):
            return None
        for k in range(1, len(pa)):
            if forced.setdefault(pa[:k], pb[:k]) != pb[:k]:
                return None
    return _Embedder(fixed, forced).run(a, b, (), ())


class _Embedder:
    def __init__(self, fixed, forced):
        self.fixed = fixed
        self.forced = forced
        self.memo = {}

    def run(self, a: Sequent, b: Sequent, na: tuple, nb: tuple) -> Optional[dict]:
        key = (na, nb)
        if key in self.memo:
            return self.memo[key]
        res = self._run(a, b, na, nb)
        self.memo[key] = res
        return res

    def _run(self, a, b, na, nb):
        out, used = {}, set()
        free = []
        for i, it in enumerate(a.items):
            if not isinstance(it, Fml):
                continue
            ad = na + (i,)
            if ad in self.fixed:
                bd = self.fixed[ad]
                j = bd[-1]
                if bd[:-1] != nb or j in used or j >= len(b.items) or b.items[j].key != it.key:
                    return None
                used.add(j)
                out[ad] = bd
            else:
                free.append((i, it))
        for i, it in free:
            j = next((j for j, x in enumerate(b.items) if j not in used and isinstance(x, Fml) and x.key == it.key), None)
            if j is None:
                return None
            used.add(j)
            out[na + (i,)] = nb + (j,)
        brs = [(i, it) for i, it in enumerate(a.items) if isinstance(it, Bracket)]
        cand = [j for j, x in enumerate(b.items) if isinstance(x, Bracket)]
        rest = self._match(brs, 0, cand, frozenset(), a, b, na, nb)
        if rest is None:
            return None
        out.update(rest)
        return out

    def _match(self, brs, k, cand, taken, a, b, na, nb):
        if k == len(brs):
            return {}
        i, it = brs[k]
        ad = na + (i,)
        if ad in self.forced:
            f = self.forced[ad]
            if f[:-1] != nb:
                return None
            opts = [f[-1]] if f[-1] in cand else []
        else:
            opts = sorted(cand, key=lambda j: b.items[j].key != it.key)
        for j in opts:
            if j in taken:
                continue
            sub = self.run(it.child, b.items[j].child, ad, nb + (j,))
            if sub is None:
                continue
            more = self._match(brs, k + 1, cand, taken | {j}, a, b, na, nb)
            if more is None:
                continue
            m = {ad: nb + (j,)}
            m.update(sub)
            m.update(more)
            return m
        return None


def _emb_node(emb: dict, n: tuple) -> tuple:
    return emb[n] if n else ()


def _translate_by_embedding(rule, p: Optional[Path], q: dict, emb: dict):
    if p is None:
        np_ = None
        node = ()
    elif p.slot is None:
        node = _emb_node(emb, p.node)
        np_ = Path(node, None)
    else:
        a = emb[p.node + (p.slot,)]
        np_ = Path(a[:-1], a[-1])
        node = _emb_node(emb, p.node)
    nq = {}
    for key, val in q.items():
        if key in ("bracket", "into"):
            nq[key] = emb[p.node + (val,)][-1]
        elif key == "items":
            nq[key] = tuple(emb[p.node + (i,)][-1] for i in val)
        elif key == "target":
            nq[key] = emb[p.node + tuple(val)][len(node):]
        else:
            nq[key] = val
    return np_, nq


def weaken(d: Derivation, target: Sequent, emb: Optional[dict] = None) -> Derivation:
    """Derivation of `target`, which must contain d's conclusion up to
    extra input material (weakening is height-preserving admissible)."""
    target = strip_tags(target)
    if emb is None:
        emb = embed(d.conclusion, target)
        if emb is None:
            raise TransformError(f"{show(d.conclusion)} does not embed into {show(target)}")
    return _weaken(d, target, emb)


def _weaken(d: Derivation, target: Sequent, emb: dict) -> Derivation:
    _Fuel.burn()
    rule = d.rule
    if rule is R.WEAK:
        m = premise_maps(d)[0]
        inner = {a: emb[t] for a, t in m.items()}
        return _weaken(d.children[0], target, inner)
    if rule is R.NEC:
        w = wrap(d.children[0])
        return weaken(w, target)
    if rule is R.FOUR_DOT:
        raise TransformError("weakening across 4-dot needs it eliminated first")
    p, q = _translate_by_embedding(rule, d.principal, d.params, emb)
    try:
        gen = apply(target, rule, p, q)
    except RuleError as e:
        raise TransformError(f"weakening broke {rule} at {show(target)}: {e}") from None
    kids = []
    for c, g in zip(d.children, gen):
        g = strip_tags(g)
        e2 = embed(c.conclusion, g)
        if e2 is None:
            raise TransformError(f"premise {show(c.conclusion)} does not embed into {show(g)}")
        kids.append(_weaken(c, g, e2))
    return _node(rule, target, kids, p, q)


def wrap(d: Derivation, times: int = 1) -> Derivation:
    """[Γ] from a derivation of Γ: nec is height-preserving admissible."""
    pre = (0,) * times

    def go(x: Derivation) -> Derivation:
        s = x.conclusion
        for _ in range(times):
            s = Sequent((Bracket(s),))
        p = None if x.principal is None else Path(pre + x.principal.node, x.principal.slot)
        return Derivation(x.rule, s, tuple(go(c) for c in x.children), p, x.params)
    return go(d)


# ---------------------------------------------------------------- super rules


def _to_super_node(x: Derivation, cfg: SystemConfig) -> Derivation:
    r, q = x.rule, dict(x.params)
    b, five = "b" in cfg.Y, "5" in cfg.Y
    if r is R.FOUR_L:
        return replace(x, rule=R.S4_L, params={"target": (q["bracket"],)})
    if r is R.FOUR_R:
        return replace(x, rule=R.S4_R, params={"target": (q["bracket"],)})
    if r is R.B_DOT:
        nq = {"items": q["items"], "target": (q["bracket"],)}
        return replace(x, rule=R.S5B_DOT, params=dict(nq, k=1)) if five else replace(x, rule=R.SB_DOT, params=nq)
    if r is R.FIVE_DOT:
        nq = {"bracket": q["bracket"], "target": (q["into"],)}
        return replace(x, rule=R.SB5_DOT, params=dict(nq, k=1)) if b else replace(x, rule=R.S5_DOT, params=nq)
    return x


def to_super(d: Derivation, cfg: SystemConfig) -> Derivation:
    """Same derivation in cfg with super rules: 4L/4R/b/5 become one-step super rules."""
    d = located(d, cfg)

    def go(x):
        y = _to_super_node(x, cfg)
        return Derivation(y.rule, y.conclusion, tuple(go(c) for c in y.children), y.principal, y.params)
    return go(d)


def _steps_for(s: Sequent, x: Derivation) -> Optional[list]:
    """Bottom-up sequence of plain steps (rule, principal, params, next
    sequent) simulating the super rule at x, or None if x is not one."""
    r, p, q = x.rule, x.principal, x.params
    if r not in (R.S4_L, R.S4_R, R.S4_L_BOX, R.S4_R_DIA) + _SB:
        return None
    cur = tag_addresses(s)
    steps = []

    def step(rule, pp, qq):
        nonlocal cur
        nxt = apply(cur, rule, pp, qq)[0]
        steps.append((rule, pp, qq))
        cur = nxt

    def where(tag):
        return _tag_node(_tags(cur), tag)

    node = p.node
    target = tuple(q.get("target", ()))
    chain = [node + target[:k + 1] for k in range(len(target))]
    if r in (R.S4_L, R.S4_R, R.S4_L_BOX, R.S4_R_DIA):
        tag = p.node + (p.slot,)
        plain = R.FOUR_L if r in (R.S4_L, R.S4_L_BOX) else R.FOUR_R
        last = {R.S4_L_BOX: R.BOX_L, R.S4_R_DIA: R.DIA_R}.get(r, plain)
        for k, c in enumerate(chain):
            a = where(tag)
            dest = where(c)
            step(last if k == len(chain) - 1 else plain, Path(a[:-1], a[-1]), {"bracket": dest[-1]})
        return steps
    n = len(target)
    if r in (R.SB_DOT, R.S5B_DOT):
        k = n if r is R.SB_DOT else q["k"]
        moving = [node + (i,) for i in q["items"]]
        wraps = k
    else:
        k = 1 if r is R.S5_DOT else q["k"]
        moving = [node + (q["bracket"],)]
        wraps = k - 1
    # first `wraps` b-steps (each goes one level down and adds a bracket), then 5-steps
    for lvl in range(n):
        here = where(chain[lvl - 1]) if lvl else node
        dest = where(chain[lvl])
        if lvl < wraps:
            idx = tuple(where(t)[-1] for t in moving) if lvl == 0 else (len(node_at(cur, here).items) - 1,)
            step(R.B_DOT, Path(here, None), {"items": idx, "bracket": dest[-1]})
        else:
            i = where(moving[0])[-1] if lvl == 0 else len(node_at(cur, here).items) - 1
            step(R.FIVE_DOT, Path(here, None), {"bracket": i, "into": dest[-1]})
    return steps


def from_super(d: Derivation, cfg: SystemConfig) -> Derivation:
    """Same conclusion without super rules; cfg is the super system."""
    d = located(d, cfg)

    def go(x: Derivation) -> Derivation:
        kids = tuple(go(c) for c in x.children)
        steps = _steps_for(x.conclusion, x)
        if steps is None:
            return Derivation(x.rule, x.conclusion, kids, x.principal, x.params)
        if not steps:
            return kids[0]
        seqs = [x.conclusion]
        for rule, p, q in steps:
            seqs.append(apply(seqs[-1], rule, p, q)[0])
        if seqs[-1] != kids[0].conclusion:
            raise ElimError(f"decomposition of {x.rule} does not reach its premise")
        out = kids[0]
        for (rule, p, q), s in reversed(list(zip(steps, seqs))):
            out = _node(rule, s, [out], p, q)
        return out
    return go(d)


# ---------------------------------------------------------------- fused cuts


def _cut_left_coords(s: Sequent, node: tuple, a: F.Formula):
    gen = _pruned_with(tag_addresses(s), node, [Fml(a, True, "cutout")])
    return gen, _tags(gen)


def unfuse_cut4(d: Derivation) -> Derivation:
    """dia_cut -> cut under s4R on the left; box_cut -> cut with s4L on the right."""
    if d.rule not in (R.DIA_CUT, R.BOX_CUT):
        raise ElimError("unfuse_cut4 needs a dia_cut or box_cut node")
    s, n, a, t = d.conclusion, d.principal.node, d.params["formula"], tuple(d.params["target"])
    left, right = d.children
    if d.rule is R.DIA_CUT:
        gen, idx = _cut_left_coords(s, n, a)
        out = idx["cutout"]
        here = _tag_node(idx, n)
        dest = idx[n + t]
        new_left = _node(R.S4_R, gen, [left], Path(out[:-1], out[-1]), {"target": dest[len(here):]})
        return _node(R.CUT, s, [new_left, right], Path(n, None), {"formula": a})
    r = apply(s, R.CUT, Path(n, None), {"formula": a})[1]
    fa = next(nd + (i,) for nd, i, it in walk(tag_addresses(r)) if it.tag is None)
    new_right = _node(R.S4_L, r, [right], Path(fa[:-1], fa[-1]), {"target": t})
    return _node(R.CUT, s, [left, new_right], Path(n, None), {"formula": a})


def fuse_cut4(d: Derivation) -> Derivation:
    """cut whose left premise ends in an s4R tower on the cut formula (or
    whose right premise starts with s4L on it) -> one dia_cut / box_cut."""
    if d.rule not in CUTS:
        raise ElimError("fuse_cut4 needs a cut node")
    s, n, a = d.conclusion, d.principal.node, d.params["formula"]
    t = tuple(d.params.get("target", ()))
    left, right = d.children
    if d.rule in (R.CUT, R.DIA_CUT) and left.rule is R.S4_R and principal_address(left) == _out_addr(left.conclusion):
        gen = _pruned_with(tag_addresses(s), n + t, [Fml(a, True, "cutout")])
        m = align(gen, left.conclusion)
        dest = m[left.principal.node + tuple(left.params["target"])]
        return fuse_cut4(_node(R.DIA_CUT, s, [left.children[0], right], Path(n, None),
                               {"formula": a, "target": dest[len(n):]}))
    if d.rule in (R.CUT, R.BOX_CUT) and right.rule is R.S4_L and principal_address(right) == _cut_formula_addr(d):
        gen = apply(tag_addresses(s), d.rule, d.principal, d.params)[1]
        m = align(gen, right.conclusion)
        dest = m[right.principal.node + tuple(right.params["target"])]
        return fuse_cut4(_node(R.BOX_CUT, s, [left, right.children[0]], Path(n, None),
                               {"formula": a, "target": dest[len(n):]}))
    if d.rule is R.CUT:
        raise ElimError("no s4 tower on the cut formula next to this cut")
    return d


def _out_addr(s: Sequent) -> tuple:
    op = output_path(s)
    return op.node + (op.slot,)


def _cut_formula_addr(d: Derivation) -> tuple:
    from .derivation import cut_formula_address
    return cut_formula_address(d)


# ---------------------------------------------------------------- admissible rules


def eliminate_admissible(d: Derivation, rule, cfg: SystemConfig) -> Derivation:
    """Remove every instance of weak, nec, t-dot or 4-dot without growing height."""
    rule = RuleId(rule)
    if rule not in (R.WEAK, R.NEC, R.T_DOT, R.FOUR_DOT):
        raise ValueError(f"{rule} is not one of weak, nec, t_dot, four_dot")
    d = located(d, cfg)
    before = height(d)
    # height is only preserved with super rules; without them, work in the
    # super system and unfold the super steps afterwards
    unfold = "4" in cfg.X and not cfg.super_rules and rule in (R.T_DOT, R.FOUR_DOT)
    if unfold:
        d = to_super(d, cfg)
        cfg = cfg.with_(super_rules=True)

    def go(x: Derivation) -> Derivation:
        kids = tuple(go(c) for c in x.children)
        x = Derivation(x.rule, x.conclusion, kids, x.principal, x.params)
        if x.rule is not rule:
            return x
        c = kids[0]
        if rule is R.WEAK:
            return weaken(c, x.conclusion)
        if rule is R.NEC:
            return wrap(c)
        m = premise_maps(x)[0]
        if rule is R.T_DOT:
            new = next(a for a, t in m.items() if t is None and a[:-1] == x.principal.node)
            return flatten(c, new, cfg)
        inner = x.principal.node + (x.params["bracket"], 0)
        at = next(a for a, t in m.items() if t == inner)
        return deepen(c, at, cfg)

    out = go(d)
    if unfold:
        return from_super(out, cfg)
    if height(out) > before:
        raise MeasureViolation(f"eliminating {rule} raised height {before} -> {height(out)}")
    return out


# ---------------------------------------------------------------- irrelevant cuts


def remove_irrelevant_cuts(d: Derivation, cfg: SystemConfig) -> Derivation:
    """Delete every cut none of whose cut-paths starts at a black-destructing
    rule: the cut formula is erased from the right derivation instead."""
    d = located(d, cfg)
    while True:
        bad = [r for r in classify_cuts(d) if not r.relevant]
        if not bad:
            return d
        at = max(bad, key=lambda r: len(r.at)).at
        c = d.subderivation(at)
        new = strengthen(c.children[1], _cut_formula_addr(c), cfg)
        d = d.replace_at(at, new)


# ---------------------------------------------------------------- multicut: making a cut anchored


@dataclass
class _Mark:
    """An input occurrence of the cut formula still to be cut away. `left`
    proves the pruned sequent with the formula as output at `base`; when
    addr sits deeper than base the pending cut is a box cut."""
    addr: tuple
    base: tuple
    left: Derivation
    formula: F.Formula


def _all_tags(s: Sequent) -> dict:
    out: dict = {}
    for nd, i, it in walk(s):
        if it.tag is not None:
            out.setdefault(it.tag, []).append(nd + (i,))
    return out


def _drop(s: Sequent, addrs, node: tuple = ()) -> Sequent:
    """Remove the formula items at addrs (tags are kept)."""
    out = []
    for i, it in enumerate(s.items):
        a = node + (i,)
        if a in addrs:
            continue
        if isinstance(it, Bracket):
            it = replace(it, child=_drop(it.child, addrs, a))
        out.append(it)
    return Sequent(tuple(out))


def _left_goal(s: Sequent, marks, base: tuple, a: F.Formula) -> Sequent:
    """↓_base (s minus marks){a∘}, tagged with addresses of s."""
    sm = _drop(tag_addresses(strip_tags(s)), set(marks))
    b = _tag_node(_tags(sm), base)
    return _pruned_with(sm, b, [Fml(a, True, "cutout")])


def _lhs_item(s: Sequent, a: tuple) -> bool:
    return not has_output(item_at(s, Path(a[:-1], a[-1])))


def _sigma_moves(r, p, q, marks) -> bool:
    if r not in (R.SB_DOT, R.S5B_DOT):
        return False
    k = len(p.node)

    def moved(a):
        return len(a) > k and a[:k] == p.node and a[k] in q["items"]
    return any(moved(m.addr) if m.base == m.addr[:-1] else (m.base != () and moved(m.base)) for m in marks)


def _dup_options(d: Derivation, marks) -> list:
    s = d.conclusion
    maddrs = {m.addr for m in marks}

    def ok(a):
        return a not in maddrs and _lhs_item(s, a)
    cand = []
    pa = principal_address(d)
    if pa is not None:
        cand.append(pa)
    node = d.principal.node if d.principal is not None else ()
    q = d.params
    cand += [node + (i,) for i in q.get("items", ())]
    cand += [node + (q[k],) for k in ("bracket", "into") if k in q]
    if q.get("target"):
        cand.append(node + (tuple(q["target"])[0],))
    # items pruned away from a premise on the way to a mark's pending cut
    try:
        gens = apply(s, d.rule, d.principal, d.params, tagged=True)
    except RuleError:
        gens = []
    for g in gens:
        op = output_path(g)
        if op is None:
            continue
        at = _all_tags(g)
        for m in marks:
            for a2 in at.get(m.addr, []):
                c = _common(a2[:-1], op.node)
                hit = c + (op.node[len(c)],) if len(op.node) > len(c) else c + (op.slot,)
                t = item_at(g, Path(hit[:-1], hit[-1])).tag
                if t is not None and t in _walk_addrs(s):
                    cand.append(t)
    c1 = [a for a in dict.fromkeys(cand) if ok(a)]
    here = [node + (i,) for i in range(len(node_at(s, node).items)) if ok(node + (i,))]
    c2 = list(dict.fromkeys(c1 + here))
    opts = [()]
    for c in (c1, c2):
        if c and tuple(c) not in opts:
            opts.append(tuple(c))
    return opts


def _walk_addrs(s: Sequent) -> set:
    return {nd + (i,) for nd, i, _ in walk(s)}


def _push(left: Derivation, m: _Mark, s: Sequent, maddrs, d: Derivation, delta: int, cfg) -> Derivation:
    """Move the material a structural rule carries along with a mark's base
    down by delta brackets in the mark's left derivation."""
    old = _left_goal(s, maddrs, m.base, m.formula)
    inv = {t: a for a, t in align(old, left.conclusion).items()}
    r, p, q = d.rule, d.principal, d.params
    if r in (R.SB_DOT, R.S5B_DOT):
        if p.node == ():
            return wrap(left, delta)
        return deepen(left, inv[p.node], cfg, delta)
    if r in (R.S5_DOT, R.SB5_DOT):
        return deepen(left, inv[p.node + (q["bracket"],)], cfg, delta)
    raise TransformError(f"{r} moves a pending cut in a way that is not handled")


def _strip_marks(it, a: tuple, maddrs):
    if isinstance(it, Bracket):
        inner = _drop(tag_addresses(it.child), {x[len(a):] for x in maddrs if x[:len(a)] == a})
        return strip_tags(Sequent((Bracket(inner),))).items[0]
    return strip_tags(Sequent((it,))).items[0]


def _to_end(s: Sequent, a: tuple) -> Sequent:
    from .sequent import update_node
    return update_node(s, a[:-1], lambda n: Sequent(n.items[:a[-1]] + n.items[a[-1] + 1:] + (n.items[a[-1]],)))


def _cont_chain(sm: Sequent, dups, top: Derivation) -> Derivation:
    """Contractions from sm (tagged with old addresses) up to top's conclusion."""
    groups: dict = {}
    for a in dups:
        groups.setdefault(a[:-1], []).append(a)
    seqs, steps = [sm], []
    for node, group in groups.items():
        idx = _tags(seqs[-1])
        p = Path(_tag_node(idx, node), None)
        qq = {"items": tuple(idx[a][-1] for a in group)}
        seqs.append(apply(seqs[-1], R.CONT, p, qq)[0])
        steps.append((p, qq))
    if strip_tags(seqs[-1]) != top.conclusion:
        raise TransformError("contractions do not reach the cut's conclusion")
    out = top
    for (p, qq), s in reversed(list(zip(steps, seqs))):
        out = _node(R.CONT, s, [out], p, qq)
    return out


def _multicut(d: Derivation, marks: list, cfg: SystemConfig) -> Derivation:
    """Derivation of d's conclusion minus the marked occurrences, where each
    mark is cut against its left derivation right where it is consumed."""
    if not marks:
        return d
    _Fuel.burn()
    pa = principal_address(d)
    m0 = next((m for m in marks if m.addr == pa), None) if d.rule in BLACK_DESTRUCTING else None
    err = None
    for dups in _dup_options(d, marks):
        try:
            return _multicut_step(d, marks, m0, dups, cfg)
        except (TransformError, RuleError) as e:
            err = e
    raise TransformError(f"cannot move pending cuts past {d.rule} at {show(d.conclusion)}: {err}")


def _multicut_step(d: Derivation, marks, m0, dups, cfg) -> Derivation:
    s = d.conclusion
    r, p, q = d.rule, d.principal, dict(d.params)
    maddrs = {m.addr for m in marks}
    others = [m for m in marks if m is not m0]
    dups = list(dups)
    sigma_extra = []
    if _sigma_moves(r, p, q, marks):
        sigma_extra = [p.node + (i,) for i in range(len(node_at(s, p.node).items))
                       if i not in q["items"] and p.node + (i,) not in maddrs and _lhs_item(s, p.node + (i,))]
        dups = list(dict.fromkeys(dups + sigma_extra))
    plus = s
    copies = {}
    for a in dups:
        nd = a[:-1]
        copies[a] = nd + (len(node_at(plus, nd).items),)
        plus = _with_items(plus, nd, [_strip_marks(item_at(s, Path(nd, a[-1])), a, maddrs)])
    plus = tag_addresses(strip_tags(plus))
    if sigma_extra:
        q["items"] = tuple(q["items"]) + tuple(copies[a][-1] for a in sigma_extra)
    gens = apply(plus, r, p, q)

    subs, gs = [], []
    for j, h in enumerate(gens):
        at = _all_tags(h)
        hs = strip_tags(h)
        found = []
        for m in others:
            for a2 in at.get(m.addr, []):
                if m.base == m.addr[:-1]:
                    b2 = a2[:-1]
                elif m.base == ():
                    b2 = ()
                else:
                    bs = [b for b in at.get(m.base, []) if a2[:len(b)] == b]
                    if not bs:
                        raise TransformError("a pending cut lost its bracket")
                    b2 = bs[0]
                found.append((m, a2, b2))
        new_addrs = {a2 for _, a2, _ in found}
        sub_marks = []
        for m, a2, b2 in found:
            goal = _left_goal(hs, new_addrs, b2, m.formula)
            left = m.left
            delta = len(b2) - len(m.base)
            if delta < 0:
                raise TransformError("pending cut moved up the tree")
            if delta:
                left = _push(left, m, s, maddrs, d, delta, cfg)
            sub_marks.append(_Mark(a2, b2, weaken(left, goal), m.formula))
        child = d.children[j]
        fixed, byt = {}, {}
        for a, t in premise_maps(d)[j].items():
            if t in maddrs:
                byt.setdefault(t, []).append(a)
        for t, lst in byt.items():
            hl = at.get(t, [])
            if len(hl) != len(lst):
                raise TransformError("mark occurrences do not line up")
            fixed.update(zip(sorted(lst), sorted(hl)))
        emb = embed(child.conclusion, hs, fixed)
        if emb is None:
            raise TransformError(f"{show(child.conclusion)} does not embed into {show(hs)}")
        subs.append(_multicut(_weaken(child, hs, emb), sub_marks, cfg))
        gs.append(strip_tags(_drop(tag_addresses(hs), new_addrs)))

    ct = _drop(plus, {m.addr for m in others})
    if m0 is not None:
        # the cut's own occurrence is the last equal one at its node, so
        # the consuming rule must take that one to stay anchored
        ct = _to_end(ct, _tags(ct)[m0.addr])
    c = strip_tags(ct)
    top = None
    if len(gs) == 1 and gs[0] == c:
        top = subs[0]
    else:
        for rule2, p2, q2 in _translations(r, p, q, _Translator(_tags(ct))):
            try:
                g2 = apply(c, rule2, p2, q2, cfg)
            except RuleError:
                continue
            if len(g2) == len(gs) and all(x == y for x, y in zip(g2, gs)):
                top = _node(rule2, c, subs, p2, q2)
                break
        if top is None:
            raise TransformError(f"{r} does not survive removing the pending cut formulas")
    if m0 is not None:
        smm = _drop(ct, {_tags(ct)[m0.addr]})
        idx = _tags(smm)
        b = _tag_node(idx, m0.base)
        t = _tag_node(idx, m0.addr[:-1])[len(b):]
        qc = {"formula": m0.formula}
        rule_c = R.CUT
        if t:
            rule_c, qc["target"] = R.BOX_CUT, t
        g = apply(strip_tags(smm), rule_c, Path(b, None), qc)
        if g[1] != c:
            raise TransformError("cut premise mismatch")
        top = _node(rule_c, smm, [weaken(m0.left, g[0]), top], Path(b, None), qc)
    if not dups:
        return top
    return _cont_chain(_drop(tag_addresses(s), maddrs), dups, top)


def make_anchored(c: Derivation, cfg: SystemConfig) -> Derivation:
    """Replace a cut by cuts on the same formula that are anchored: each one
    sits right below the rule that destroys its cut formula."""
    if c.rule not in CUTS:
        raise ElimError("make_anchored needs a cut node")
    if not is_cut_free(c.children[0]):
        raise ElimError("make_anchored needs a cut-free left premise")
    if c.rule is R.DIA_CUT:
        c = unfuse_cut4(c)
    a = c.params["formula"]
    right = c.children[1]
    fa = _cut_formula_addr(c)
    if c.rule is R.BOX_CUT:
        gen = apply(tag_addresses(c.conclusion), c.rule, c.principal, c.params)[1]
        inv = {t: x for x, t in align(gen, right.conclusion).items()}
        base = _tag_node(inv, c.principal.node)
    else:
        base = fa[:-1]
    return _multicut(right, [_Mark(fa, base, c.children[0], a)], cfg)


# ---------------------------------------------------------------- reducing an anchored cut


def _cut(rule, s: Sequent, node: tuple, a: F.Formula, left: Derivation, right: Derivation,
         target: tuple = ()) -> Derivation:
    """A cut node on s, with left and right weakened into the exact premises."""
    q = {"formula": a}
    if rule is not R.CUT:
        q["target"] = tuple(target)
    g = apply(strip_tags(s), rule, Path(node, None), q)
    return _node(rule, s, [weaken(left, g[0]), weaken(right, g[1])], Path(node, None), q)


def _created(d: Derivation, j: int = 0) -> list:
    """Addresses in premise j of the occurrences d's rule creates."""
    return [a for a, t in premise_maps(d)[j].items() if t is None]


def _to_concl(d: Derivation, j: int, a: tuple) -> Optional[tuple]:
    """Node address a of premise j, mapped to d's conclusion."""
    m = premise_maps(d)[j]
    return m.get(a) if a else ()


def _copy_theta(s: Sequent, n: tuple, p: tuple):
    """s with a copy of the item at n leading towards p, or None if that
    item is not input-only."""
    a = n + (p[len(n)],)
    if not _lhs_item(s, a):
        return None
    return _with_items(s, n, [strip_tags(Sequent((item_at(s, Path(n, a[-1])),))).items[0]]), a


def _with_theta(s: Sequent, n: tuple, p: tuple, build) -> Derivation:
    """build(S) on s, or on s plus a copy of the bracket the new cut goes
    through, contracted below."""
    try:
        return build(s)
    except (TransformError, RuleError) as e:
        err = e
    if len(p) <= len(n):
        raise err
    got = _copy_theta(s, n, p)
    if got is None:
        raise err
    s2, a = got
    top = build(s2)
    qq = {"items": (a[-1],)}
    return _node(R.CONT, s, [top], Path(n, None), qq)


def _dive(d: Derivation, at: tuple, depth: int, cfg) -> Derivation:
    """Bracket at `at` becomes its contents moved `depth` levels down: depth 0
    flattens it, depth k >= 1 deepens it k - 1 times."""
    if depth == 0:
        return flatten(d, at, cfg)
    return deepen(d, at, cfg, depth - 1)


def reduce_anchored_cut(c: Derivation, cfg: SystemConfig) -> Derivation:
    """Replace an anchored cut by cuts on smaller formulas (or none)."""
    if c.rule not in CUTS or not is_anchored(c):
        raise ElimError("reduce_anchored_cut needs an anchored cut")
    _Fuel.burn()
    if c.rule is R.DIA_CUT:
        c = unfuse_cut4(c)
    left, right = c.children
    s, n, a = c.conclusion, c.principal.node, c.params["formula"]
    r = right.rule
    t = tuple(c.params.get("target", ()))
    if r is R.ID:
        return weaken(left, s)
    if r is R.BOT_L:
        pi = _output_item_at(s, n)
        it = item_at(s, Path(pi[:-1], pi[-1]))
        return transform(left, {_out_addr(left.conclusion): substitute(it)}, cfg)
    if r is R.AND_L:
        lb = invert(R.AND_R, left, _out_path(left), cfg, 0)
        lc = invert(R.AND_R, left, _out_path(left), cfg, 1)
        inner_s = _with_items(s, n, [Fml(a.l)])
        inner = _cut(R.CUT, inner_s, n, a.r, lc, right.children[0])
        return _cut(R.CUT, s, n, a.l, lb, inner)
    if r is R.IMP_L:
        lp = invert(R.IMP_R, left, _out_path(left), cfg)
        r1, r2 = right.children
        node_b = _to_concl(right, 0, _out_addr(r1.conclusion)[:-1])
        inner_s = _with_items(s, n, [Fml(a.l)])
        inner = _cut(R.CUT, inner_s, n, a.r, lp, r2)
        outer_left = weaken(r1, _pruned_with(s, n, [Fml(a.l, True)]))
        return _node(R.CUT, s, [outer_left, inner], Path(n, None), {"formula": a.l})
    if r in (R.BOX_L, R.S4_L_BOX, R.T_L, R.D_L):
        return _reduce_box(c, cfg)
    if r in (R.OR_L, R.DIA_L_HAT, R.DIA_L):
        return _reduce_left(left, right, s, a, n, cfg)
    raise ElimError(f"no reduction for a cut anchored at {r}")


def _out_path(d: Derivation) -> Path:
    return output_path(d.conclusion)


def _reduce_box(c: Derivation, cfg) -> Derivation:
    left, right = c.children
    s, n, a = c.conclusion, c.principal.node, c.params["formula"]
    b = a.body
    # where b lands, in conclusion coordinates
    new = _created(right)[0]
    gen = apply(tag_addresses(s), c.rule, c.principal, c.params)[1]
    rmap = align(gen, right.conclusion)
    pr = _to_concl(right, 0, new[:-1])
    p = rmap[pr] if pr else ()
    lb = invert(R.BOX_R, left, _out_path(left), cfg)
    br = _out_addr(lb.conclusion)[:-1]
    lb = _dive(lb, br, len(p) - len(n), cfg)

    def build(s2):
        return _cut(R.CUT, s2, p, b, lb, right.children[0])
    return _with_theta(s, n, p, build)


def _reduce_left(left: Derivation, right: Derivation, s: Sequent, a: F.Formula, n: tuple, cfg,
                 t: tuple = ()) -> Derivation:
    """Cut of `left` (proving ↓_{n+t} s{a∘}) against `right`, whose last rule
    destroys a• at n and is one of or_l, dia_l: recursion on `left`."""
    _Fuel.burn()
    kind = R.CUT if not t else R.DIA_CUT
    gen = _pruned_with(tag_addresses(s), n + t, [Fml(a, True, "cutout")])
    lm = align(gen, left.conclusion)
    out = _out_addr(left.conclusion)
    l = left.rule
    pa = principal_address(left)
    if pa == out:
        if l in (R.OR_R1, R.OR_R2):
            k = 0 if l is R.OR_R1 else 1
            if t:
                raise ElimError("disjunction under a diamond cut")
            return _cut(R.CUT, s, n, (a.l, a.r)[k], left.children[0], right.children[k])
        if l is R.S4_R:
            dest = lm[left.principal.node + tuple(left.params["target"])]
            return _reduce_left(left.children[0], right, s, a, n, cfg, dest[len(n):])
        if l in (R.DIA_R, R.S4_R_DIA, R.T_R, R.D_R):
            b = a.body
            l0 = left.children[0]
            bnode = _to_concl(left, 0, _out_addr(l0.conclusion)[:-1])
            p = lm[bnode] if bnode else ()
            r0 = right.children[0]
            br = next(x for x in _created(right) if isinstance(item_at(r0.conclusion, Path(x[:-1], x[-1])), Bracket))
            r0 = _dive(r0, br, len(p) - len(n), cfg)

            def build(s2):
                return _cut(R.CUT, s2, p, b, l0, r0)
            return _with_theta(s, n, p, build)
        raise ElimError(f"unexpected rule {l} on the cut formula")
    if l is R.BOT_L:
        bot = lm[pa]
        try:
            apply(s, R.BOT_L, Path(bot[:-1], bot[-1]), cfg=cfg)
            return _node(R.BOT_L, s, [], Path(bot[:-1], bot[-1]))
        except RuleError:
            pass
        raise ElimError("bot_l under a diamond cut away from the output")
    if l is R.IMP_L:
        qs = lm[pa]
        pq = Path(qs[:-1], qs[-1])
        g = apply(s, R.IMP_L, pq)
        l0 = weaken(left.children[0], g[0])
        rinv = {tag: x for x, tag in align(apply(tag_addresses(s), kind, Path(n, None), _cq(a, t))[1],
                                               right.conclusion).items()}
        ra = rinv[qs]
        r1 = invert(R.IMP_L, right, Path(ra[:-1], ra[-1]), cfg)
        s1 = g[1]
        gp = apply(s1, kind, Path(n, None), _cq(a, t))
        l1 = weaken(left.children[1], gp[0])
        r1 = weaken(r1, gp[1])
        sub = _reduce_left(l1, r1, s1, a, n, cfg, t)
        return _node(R.IMP_L, s, [l0, sub], pq)
    return _commute_left(left, right, s, a, n, t, lm, cfg)


def _cq(a, t):
    return {"formula": a, "target": tuple(t)} if t else {"formula": a}


def _commute_left(left, right, s, a, n, t, lm, cfg) -> Derivation:
    """The left rule is passive: apply it on the conclusion and push the cut up."""
    kind = R.CUT if not t else R.DIA_CUT
    emb = {x: y for x, y in lm.items() if y != "cutout"}
    try:
        p2, q2 = _translate_by_embedding(left.rule, left.principal, left.params, emb)
    except KeyError:
        # a structural rule carries the output cut formula into another
        # node; commuting would need the inverse of that rule on the right
        raise TransformError(f"{left.rule} moves the cut formula", {"rule": left.rule.value}) from None
    err = None
    for extra in ([], None):
        s2 = s
        dups = []
        if extra is None:
            pa = principal_address(Derivation(left.rule, s, (), p2, q2)) if p2 is not None else None
            cands = [pa] if pa is not None else []
            nd = p2.node if p2 is not None else ()
            cands += [nd + (i,) for i in q2.get("items", ())]
            dups = [x for x in cands if _lhs_item(s, x)]
            if not dups:
                break
            for x in dups:
                s2 = _with_items(s2, x[:-1], [strip_tags(Sequent((item_at(s, Path(x[:-1], x[-1])),))).items[0]])
        try:
            hs = apply(tag_addresses(s2), left.rule, p2, q2, cfg)
            subs = []
            for j, h in enumerate(hs):
                idx = _tags(h)
                nj = _tag_node(idx, n)
                dj = _tag_node(idx, n + t)
                if nj is None or dj is None or dj[:len(nj)] != nj:
                    raise TransformError("the cut position moved")
                tj = dj[len(nj):]
                hsj = strip_tags(h)
                g = apply(hsj, kind if tj else R.CUT, Path(nj, None), _cq(a, tj))
                lj = weaken(left.children[j], g[0])
                rj = weaken(right, g[1])
                subs.append(_reduce_left(lj, rj, hsj, a, nj, cfg, tj))
            top = _node(left.rule, s2, subs, p2, q2)
            if not dups:
                return top
            return _cont_chain(tag_addresses(s), dups, top)
        except (TransformError, RuleError) as e:
            err = e
    raise TransformError(f"cannot commute the cut past {left.rule}: {err}")


# ---------------------------------------------------------------- conversions


def to_hat(d: Derivation, cfg: SystemConfig) -> Derivation:
    """NCK derivation -> NCK' derivation: every dia_l becomes dia_l_hat,
    which needs the output at the principal's node."""
    d = located(d, cfg)
    cfg2 = cfg.with_(base="NCKPrime")

    def go(x: Derivation, at: tuple) -> Derivation:
        kids = tuple(go(c, at + (k,)) for k, c in enumerate(x.children))
        rule = x.rule
        if rule is R.DIA_L:
            try:
                apply(x.conclusion, R.DIA_L_HAT, x.principal, x.params, cfg2)
            except RuleError as e:
                raise ElimError(f"dia_l at node {list(at)} has no hat form: {e}", {"at": list(at)}) from None
            rule = R.DIA_L_HAT
        return Derivation(rule, x.conclusion, kids, x.principal, x.params)
    return go(d, ())


def _d_to_dot(d: Derivation, cfg: SystemConfig) -> Derivation:
    """dL / dR become an empty bracket (d-dot) followed by boxL / diaR into it."""
    def go(x: Derivation) -> Derivation:
        kids = tuple(go(c) for c in x.children)
        if x.rule not in (R.D_L, R.D_R):
            return Derivation(x.rule, x.conclusion, kids, x.principal, x.params)
        p = x.principal
        mid = apply(x.conclusion, R.D_DOT, Path(p.node, None))[0]
        j = len(node_at(mid, p.node).items) - 1
        rule = R.BOX_L if x.rule is R.D_L else R.DIA_R
        top = _node(rule, mid, kids, p, {"bracket": j})
        return _node(R.D_DOT, x.conclusion, [top], Path(p.node, None))
    return go(d)


def _remove_ghosts(d: Derivation, cfg: SystemConfig) -> Derivation:
    """Undo _d_to_dot: every d-dot bracket is erased, the rules that used it
    turn back into dL / dR."""
    def go(x: Derivation) -> Derivation:
        if x.rule is R.D_DOT:
            new = _created(x)[0]
            return go(transform(x.children[0], {new: GHOST}, cfg))
        return Derivation(x.rule, x.conclusion, tuple(go(c) for c in x.children), x.principal, x.params)
    return go(d)


# ---------------------------------------------------------------- the main loop


def _search_fallback(c: Derivation, cfg: SystemConfig, budget, err) -> Derivation:
    from .search import Found, prove_sequent
    res = prove_sequent(c.conclusion, cfg.with_(cut_enabled=False), budget)
    if not isinstance(res, Found):
        raise TransformError(f"{err}; search fallback found nothing within its budget") from None
    return res.derivation


def _topmost_cut(d: Derivation) -> Optional[tuple]:
    for at, x in d.nodes():
        if x.rule in CUTS and all(is_cut_free(c) for c in x.children):
            return at
    return None


def _elim_cfg(cfg: SystemConfig) -> SystemConfig:
    if cfg.base != "NCKPrime":
        raise NotSafe("cut elimination runs on the NCK' base (dia_l_hat); convert with to_hat first")
    x = set(cfg.X) - {"d"}
    y = set(cfg.Y) | ({"d"} if "d" in cfg.X else set())
    if not is_safe(x, y):
        raise NotSafe(
            f"<X={sorted(cfg.X)}, Y={sorted(cfg.Y)}> is not a safe pair: safety needs X within {{t,4}}, "
            "Y within {d,b,5}, b in Y whenever t in X and 5 in Y, and 4 in X whenever b or 5 is in Y")
    return cfg.with_(Y=frozenset(y), super_rules="4" in cfg.X, cut_enabled=True, admissible=False,
                     proper_axioms=frozenset())


def eliminate_cuts(d: Derivation, cfg: SystemConfig, fuel: int = 10 ** 6, check_steps: bool = True,
                   fallback: Optional["SearchBudget"] = None) -> tuple[Derivation, ElimTrace]:
    """A cut-free derivation of the same sequent, plus the trace of cut values.

    With a `fallback` search budget, a topmost cut that no local rewrite can
    handle is replaced by a searched cut-free proof of its conclusion; such
    steps show up in the trace as search_fallback."""
    work = _elim_cfg(cfg)
    full = cfg.with_(cut_enabled=True, super_rules=False)
    d = located(d, full)
    for _, x in d.nodes():
        if x.rule is R.PROPER:
            raise ElimError(f"proper axiom leaf {show(x.conclusion)}: cuts against proper axioms are not eliminable")
    trace = ElimTrace()
    if is_cut_free(d):
        return d, trace
    final = cfg.with_(cut_enabled=False, super_rules=False)
    _Fuel.left = fuel
    try:
        for rule in (R.WEAK, R.NEC):
            if any(x.rule is rule for _, x in d.nodes()):
                d = eliminate_admissible(d, rule, full)
        if "d" in cfg.X:
            d = _d_to_dot(d, work)
        if work.super_rules:
            d = to_super(d, work.with_(super_rules=False))
        d = located(d, work)
        while True:
            at = _topmost_cut(d)
            if at is None:
                break
            c = d.subderivation(at)
            before = cut_value(d)
            size = d.size()
            reports = {r.at: r for r in classify_cuts(c)}
            try:
                if not reports[()].relevant:
                    label = "remove_irrelevant_cuts"
                    new = strengthen(c.children[1], _cut_formula_addr(c), work)
                elif not is_anchored(c):
                    label = "make_anchored"
                    new = make_anchored(c, work)
                else:
                    label = "reduce_anchored_cut"
                    new = reduce_anchored_cut(c, work)
            except TransformError as e:
                if fallback is None:
                    raise
                # no local rewrite applies: an output-restricted rule sits in the
                # bracket chain of a diamond cut, or a structural rule moves the cut formula
                label = "search_fallback"
                new = _search_fallback(c, work, fallback, e)
            if check_steps:
                new = located(new, work)
                if new.conclusion != c.conclusion:
                    raise MeasureViolation(f"{label} changed the conclusion", trace)
            d = located(d.replace_at(at, new), work)
            after = cut_value(d)
            trace.record(label, before, after, size, d.size())
            if not multiset_less(after, before):
                raise MeasureViolation(f"{label} did not decrease the cut value: {dict(before)} -> {dict(after)}",
                                       trace)
        if work.super_rules:
            d = from_super(d, work)
        if "d" in cfg.X and "d" not in cfg.Y:
            d = _remove_ghosts(d, work.with_(super_rules=False, X=cfg.X))
        return located(d, final), trace
    finally:
        _Fuel.left = None
