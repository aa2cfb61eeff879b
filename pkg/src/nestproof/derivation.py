"""Derivation trees: checking, heights, cut values, the multiset order and flow-graphs."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import formula as F
from .calculus import (
    BLACK_DESTRUCTING, CUTS, R, RuleError, RuleId, RuleInstance, SystemConfig, apply, locate,
    normalize_params,
)
from .sequent import Fml, Path, Sequent, align, item_at, node_at, output_path, parse_sequent, show, walk


@dataclass(frozen=True, eq=False)
class Derivation:
    rule: RuleId
    conclusion: Sequent
    children: tuple = ()
    principal: Optional[Path] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rule", RuleId(self.rule))
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(self, "params", normalize_params(self.params))

    @property
    def premises(self) -> tuple:
        return tuple(c.conclusion for c in self.children)

    def instance(self) -> RuleInstance:
        return RuleInstance(self.rule, self.conclusion, self.premises, self.principal, self.params)

    def nodes(self, at: tuple = ()) -> Iterator[tuple[tuple, "Derivation"]]:
        """Pre-order (tree address, subderivation)."""
        yield at, self
        for k, c in enumerate(self.children):
            yield from c.nodes(at + (k,))

    def subderivation(self, at: tuple) -> "Derivation":
        d = self
        for k in at:
            d = d.children[k]
        return d

    def replace_at(self, at: tuple, new: "Derivation") -> "Derivation":
        if not at:
            return new
        k = at[0]
        kids = list(self.children)
        kids[k] = kids[k].replace_at(at[1:], new)
        return Derivation(self.rule, self.conclusion, tuple(kids), self.principal, self.params)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def rules_used(self) -> Counter:
        return Counter(d.rule for _, d in self.nodes())

    def __repr__(self):
        return f"Derivation({self.rule.value}, {show(self.conclusion)!r}, {len(self.children)} premise(s))"


def node(rule, conclusion, children=(), principal=None, params=None) -> Derivation:
    if isinstance(conclusion, str):
        conclusion = parse_sequent(conclusion)
    return Derivation(RuleId(rule), conclusion, tuple(children), principal, params or {})


def build(s: Sequent, rule, principal=None, params=None, *subs) -> Derivation:
    """Apply rule bottom-up to s, then let each entry of `subs` prove the
    corresponding premise. Entries are callables premise -> Derivation
    or ready-made derivations (whose conclusions must match)."""
    prem = apply(s, rule, principal, params)
    if len(subs) != len(prem):
        raise ValueError(f"{rule} has {len(prem)} premises, {len(subs)} subproofs given")
    kids = []
    for p, sub in zip(prem, subs):
        d = sub(p) if callable(sub) else sub
        if d.conclusion != p:
            raise ValueError(f"subproof concludes {d.conclusion}, premise is {p}")
        kids.append(d)
    return Derivation(RuleId(rule), s, tuple(kids), principal, params or {})


# ---------------------------------------------------------------- checking


@dataclass
class CheckError:
    at: tuple
    error: RuleError

    def __str__(self):
        return f"at node {list(self.at)} ({self.error.kind}): {self.error.message}"

    def to_json(self):
        return {"at": list(self.at), **self.error.to_json()}


def located(d: Derivation, cfg: SystemConfig) -> Derivation:
    """d with every principal/params filled in; raises CheckFailed."""
    def go(x: Derivation, at: tuple) -> Derivation:
        kids = tuple(go(c, at + (k,)) for k, c in enumerate(x.children))
        try:
            inst = locate(RuleInstance(x.rule, x.conclusion, tuple(c.conclusion for c in kids), x.principal, x.params), cfg)
        except RuleError as e:
            raise CheckFailed(CheckError(at, e)) from None
        return Derivation(x.rule, x.conclusion, kids, inst.principal, inst.params)
    return go(d, ())


class CheckFailed(Exception):
    def __init__(self, err: CheckError):
        super().__init__(str(err))
        self.err = err


def check(d: Derivation, cfg: SystemConfig) -> Optional[CheckError]:
    """None if every instance is correct, else the first failure (post-order)."""
    try:
        located(d, cfg)
    except CheckFailed as e:
        return e.err
    return None


def assert_valid(d: Derivation, cfg: SystemConfig) -> Derivation:
    return located(d, cfg)


def height(d: Derivation) -> int:
    return 1 + max(height(c) for c in d.children) if d.children else 0


def is_cut_free(d: Derivation) -> bool:
    return all(x.rule not in CUTS for _, x in d.nodes())


# ---------------------------------------------------------------- occurrences


def premise_maps(d: Derivation) -> list[dict]:
    """For each premise, map its occurrence addresses to the conclusion
    occurrence they continue (None for occurrences created by the rule)."""
    gen = apply(d.conclusion, d.rule, d.principal, d.params, tagged=True)
    return [_prefer_principal(align(g, c.conclusion), c) for g, c in zip(gen, d.children)]


def _prefer_principal(m: dict, child: Derivation) -> dict:
    """Equal occurrences at one node are interchangeable: if the premise's own
    rule works on an old occurrence while an equal one was just created next
    to it, let the created one be the principal."""
    pa = principal_address(child)
    if pa is None or m.get(pa) is None:
        return m
    it = item_at(child.conclusion, Path(pa[:-1], pa[-1]))
    for addr, tag in m.items():
        if tag is None and addr[:-1] == pa[:-1] and addr != pa \
                and item_at(child.conclusion, Path(addr[:-1], addr[-1])) == it:
            m = dict(m)
            m[addr], m[pa] = m[pa], None
            return m
    return m


def cut_formula_address(d: Derivation) -> tuple:
    """Address of the cut formula occurrence in the right premise of a cut node."""
    m = premise_maps(d)[1]
    right = d.children[1].conclusion
    for addr, tag in m.items():
        if tag is None:
            it = item_at(right, Path(addr[:-1], addr[-1]))
            if isinstance(it, Fml) and not it.out and it.formula == d.params["formula"]:
                return addr
    raise ValueError("cut formula occurrence not found")


def principal_address(d: Derivation) -> Optional[tuple]:
    if d.principal is None or d.principal.slot is None:
        return None
    return d.principal.node + (d.principal.slot,)


def is_anchored(d: Derivation) -> bool:
    right = d.children[1]
    return right.rule in BLACK_DESTRUCTING and principal_address(right) == cut_formula_address(d)


# ---------------------------------------------------------------- cut values


@dataclass(frozen=True, order=True)
class CutValue:
    rank: int
    unanchored: int

    def __str__(self):
        return f"<{self.rank},{self.unanchored}>"


def cut_value(d: Derivation) -> Counter:
    """Multiset of cut values. d must be located (principals known)."""
    out = Counter()
    for _, x in d.nodes():
        if x.rule in CUTS:
            out[CutValue(F.depth(x.params["formula"]), 0 if is_anchored(x) else 1)] += 1
    return out


def multiset_less(m1, m2) -> bool:
    """Dershowitz-Manna: m1 << m2 iff they differ and, after cancelling the
    common part, every leftover of m1 lies below some leftover of m2."""
    a, b = Counter(m1), Counter(m2)
    if a == b:
        return False
    x, y = a - b, b - a
    if not y:
        return False
    return all(any(u < v for v in y) for u in x)


# ---------------------------------------------------------------- flow-graph


@dataclass
class FlowGraph:
    vertices: set
    # edge from a premise occurrence to the conclusion occurrence it continues
    edges: dict
    preds: dict
    left_edges: set

    def in_edges(self, v) -> list:
        return self.preds.get(v, [])


def flow_graph(d: Derivation) -> FlowGraph:
    """Vertices are (tree address, occurrence address) of input formulas."""
    vertices, edges, preds, left = set(), {}, {}, set()
    for at, x in d.nodes():
        for node, i, it in _walk_inputs(x.conclusion):
            vertices.add((at, node + (i,)))
        if not x.children:
            continue
        for k, m in enumerate(premise_maps(x)):
            child = x.children[k].conclusion
            for addr, tag in m.items():
                it = item_at(child, Path(addr[:-1], addr[-1]))
                if tag is None or not isinstance(it, Fml) or it.out:
                    continue
                u, v = (at + (k,), addr), (at, tag)
                edges[u] = v
                preds.setdefault(v, []).append(u)
                if x.rule in CUTS and k == 0:
                    left.add(u)
    return FlowGraph(vertices, edges, preds, left)


def _walk_inputs(s: Sequent, node: tuple = ()):
    for nd, i, it in walk(s, node):
        if isinstance(it, Fml) and not it.out:
            yield nd, i, it


@dataclass
class CutPath:
    vertices: list  # from the cut formula upwards

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def top(self):
        return self.vertices[-1]


def cut_paths(d: Derivation, at: tuple, g: Optional[FlowGraph] = None) -> list[CutPath]:
    g = g or flow_graph(d)
    cut = d.subderivation(at)
    start = (at + (1,), cut_formula_address(cut))
    out = []

    def grow(path):
        ps = g.in_edges(path[-1])
        if not ps:
            out.append(CutPath(list(path)))
            return
        for u in ps:
            grow(path + [u])

    grow([start])
    return out


def path_relevant(d: Derivation, p: CutPath) -> bool:
    at, addr = p.top
    x = d.subderivation(at)
    return x.rule in BLACK_DESTRUCTING and principal_address(x) == addr


def path_left_free(g: FlowGraph, p: CutPath) -> bool:
    return not any(u in g.left_edges for u in p.vertices)


@dataclass
class CutReport:
    at: tuple
    rule: RuleId
    formula: F.Formula
    anchored: bool
    relevant: bool
    left_free: bool
    origins: list
    paths: list

    def to_json(self):
        return {"at": list(self.at), "rule": self.rule.value, "formula": F.show(self.formula),
                "anchored": self.anchored, "relevant": self.relevant, "left_free": self.left_free,
                "origins": [[list(a), list(b)] for a, b in self.origins],
                "path_lengths": [p.length for p in self.paths]}


def classify_cuts(d: Derivation) -> list[CutReport]:
    g = flow_graph(d)
    out = []
    for at, x in d.nodes():
        if x.rule not in CUTS:
            continue
        paths = cut_paths(d, at, g)
        rel = [p for p in paths if path_relevant(d, p)]
        out.append(CutReport(at, x.rule, x.params["formula"], is_anchored(x), bool(rel),
                             all(path_left_free(g, p) for p in rel), [p.top for p in rel], paths))
    return out


def is_left_free(d: Derivation) -> bool:
    return all(r.left_free for r in classify_cuts(d))


# ---------------------------------------------------------------- JSON


def _param_json(q: dict) -> dict:
    out = {}
    for k, v in q.items():
        if isinstance(v, tuple):
            v = list(v)
        elif not isinstance(v, (int, str, list)) and v is not None:
            v = F.show(v)
        out[k] = v
    return out


def to_json(d: Derivation) -> dict:
    return {
        "rule": d.rule.value,
        "conclusion": show(d.conclusion),
        "principal_path": None if d.principal is None else d.principal.to_json(),
        "params": _param_json(d.params),
        "premises": [to_json(c) for c in d.children],
    }


def from_json(obj) -> Derivation:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        kids = tuple(from_json(c) for c in obj.get("premises", []))
        p = obj.get("principal_path")
        return Derivation(RuleId(obj["rule"]), parse_sequent(obj["conclusion"]), kids,
                          None if p is None else Path.from_json(p), obj.get("params") or {})
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed derivation JSON: {e}") from None


def render(d: Derivation, indent: int = 0) -> str:
    """Plain-text tree, conclusion first, premises indented."""
    lines = [" " * indent + f"{show(d.conclusion)}   ({d.rule.value})"]
    for c in d.children:
        lines.append(render(c, indent + 2))
    return "\n".join(lines)


# ---------------------------------------------------------------- general identity


def _matching_input(s: Sequent) -> tuple[Path, Path, F.Formula]:
    op = output_path(s)
    a = item_at(s, op).formula
    for i, it in enumerate(node_at(s, op.node).items):
        if isinstance(it, Fml) and not it.out and it.formula == a:
            return Path(op.node, i), op, a
    raise ValueError(f"no input copy of the output formula at its node in {show(s)}")


def derive_id(s: Sequent, base: str = "NCKPrime") -> Derivation:
    """Cut-free proof of Γ{A•, A∘} for an arbitrary formula A, using only
    the rules of the base system."""
    pin, op, a = _matching_input(s)
    if isinstance(a, F.Atom):
        return build(s, R.ID, pin)
    if isinstance(a, F.Bottom):
        return build(s, R.BOT_L, pin)
    rec = lambda p: derive_id(p, base)
    if isinstance(a, F.And):
        def right(p):
            return build(p, R.AND_R, _output(p), None, rec, rec)
        return build(s, R.AND_L, pin, None, right)
    if isinstance(a, F.Or):
        def r1(p):
            return build(p, R.OR_R1, _output(p), None, rec)

        def r2(p):
            return build(p, R.OR_R2, _output(p), None, rec)
        return build(s, R.OR_L, pin, None, r1, r2)
    if isinstance(a, F.Implies):
        def left(p):
            return build(p, R.IMP_L, _find_input(p, a, op.node), None, rec, rec)
        return build(s, R.IMP_R, op, None, left)
    if isinstance(a, F.Box):
        def boxl(p):
            return build(p, R.BOX_L, _find_input(p, a, op.node), {"bracket": op.slot}, rec)
        return build(s, R.BOX_R, op, None, boxl)
    if isinstance(a, F.Dia):
        def diar(p):
            return build(p, R.DIA_R, _output(p), {"bracket": pin.slot}, rec)
        rule = R.DIA_L if base == "NCK" else R.DIA_L_HAT
        return build(s, rule, pin, None, diar)
    raise TypeError(a)


def _output(s: Sequent) -> Path:
    return output_path(s)


def _find_input(s: Sequent, a: F.Formula, node: tuple) -> Path:
    for i, it in enumerate(node_at(s, node).items):
        if isinstance(it, Fml) and not it.out and it.formula == a:
            return Path(node, i)
    raise ValueError(f"no input {F.show(a)} at node {list(node)}")
