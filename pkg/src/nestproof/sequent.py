"""Nested sequents, contexts with a hole, output pruning and the corresponding formula."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator, Optional, Union

from . import formula as F
from .formula import Formula, ParseError, TokenStream, parse_formula, tokenize


@dataclass(frozen=True)
class Fml:
    """A polarized formula occurrence. `out` marks output polarity."""

    formula: Formula
    out: bool = False
    tag: object = field(default=None, compare=False, repr=False)

    @cached_property
    def key(self) -> tuple:
        return (0, F.key(self.formula), self.out)


@dataclass(frozen=True)
class Bracket:
    child: "Sequent"
    tag: object = field(default=None, compare=False, repr=False)

    @cached_property
    def key(self) -> tuple:
        return (1, self.child.key)


@dataclass(frozen=True)
class HoleItem:
    @cached_property
    def key(self) -> tuple:
        return (2,)


HOLE = HoleItem()

Item = Union[Fml, Bracket, HoleItem]


@dataclass(frozen=True, eq=False)
class Sequent:
    items: tuple = ()

    @cached_property
    def key(self) -> tuple:
        return tuple(sorted(it.key for it in self.items))

    def __eq__(self, other):
        return isinstance(other, Sequent) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return len(self.items)

    def __str__(self):
        return show(self)

    def __repr__(self):
        return f"Sequent({show(self)!r})"


EMPTY = Sequent(())


# ---------------------------------------------------------------- paths


@dataclass(frozen=True)
class Path:
    """`node` lists item indices of brackets from the root; `slot` is an item
    index at that node, or None for the hole position."""

    node: tuple = ()
    slot: Optional[int] = None

    def to_json(self):
        return {"node": list(self.node), "slot": "hole" if self.slot is None else self.slot}

    @classmethod
    def from_json(cls, obj) -> "Path":
        if obj is None:
            return cls()
        if isinstance(obj, list):
            return cls(tuple(obj), None)
        slot = obj.get("slot", "hole")
        return cls(tuple(obj.get("node", ())), None if slot == "hole" else int(slot))


def node_at(s: Sequent, node: tuple) -> Sequent:
    for i in node:
        it = s.items[i]
        if not isinstance(it, Bracket):
            raise IndexError(f"item {i} is not a bracket")
        s = it.child
    return s


def item_at(s: Sequent, p: Path) -> Item:
    return node_at(s, p.node).items[p.slot]


def update_node(s: Sequent, node: tuple, fn) -> Sequent:
    """Rebuild s with the sequent at `node` replaced by fn(that sequent)."""
    if not node:
        return fn(s)
    i, rest = node[0], node[1:]
    it = s.items[i]
    new = replace(it, child=update_node(it.child, rest, fn))
    return Sequent(s.items[:i] + (new,) + s.items[i + 1:])


def walk(s: Sequent, node: tuple = ()) -> Iterator[tuple[tuple, int, Item]]:
    """Pre-order (node, index, item) over all items."""
    for i, it in enumerate(s.items):
        yield node, i, it
        if isinstance(it, Bracket):
            yield from walk(it.child, node + (i,))


def nodes(s: Sequent, node: tuple = ()) -> Iterator[tuple]:
    yield node
    for i, it in enumerate(s.items):
        if isinstance(it, Bracket):
            yield from nodes(it.child, node + (i,))


# ---------------------------------------------------------------- classification


def output_count(s: Sequent) -> int:
    n = 0
    for _, _, it in walk(s):
        if isinstance(it, Fml) and it.out:
            n += 1
    return n


def has_output(it: Item) -> bool:
    if isinstance(it, Fml):
        return it.out
    if isinstance(it, Bracket):
        return any(has_output(j) for j in it.child.items)
    return False


@dataclass(frozen=True)
class Invalid:
    output_count: int


LHS = "LHS"
FULL = "Full"


def classify(s: Sequent):
    n = output_count(s)
    if n == 0:
        return LHS
    if n == 1:
        return FULL
    return Invalid(n)


def output_path(s: Sequent) -> Optional[Path]:
    for node, i, it in walk(s):
        if isinstance(it, Fml) and it.out:
            return Path(node, i)
    return None


def is_lhs(items) -> bool:
    return not any(has_output(it) for it in items)


# ---------------------------------------------------------------- corresponding formula


def corresponding_formula(s: Sequent) -> Formula:
    c = classify(s)
    if isinstance(c, Invalid):
        raise ValueError(f"corresponding formula of an invalid sequent ({c.output_count} outputs)")
    return _fm(s)


def _fm_item(it: Item) -> Formula:
    if isinstance(it, Fml):
        return it.formula
    if isinstance(it, Bracket):
        inner = _fm(it.child)
        return F.Box(inner) if has_output(it) else F.Dia(inner)
    raise ValueError("hole has no corresponding formula")


def _fm(s: Sequent) -> Formula:
    ins = [it for it in s.items if not has_output(it)]
    outs = [it for it in s.items if has_output(it)]
    phi = [_fm_item(it) for it in ins]
    if not outs:
        return F.conj(phi)
    psi = _fm_item(outs[0])
    return F.Implies(F.conj(phi), psi) if phi else psi


# ---------------------------------------------------------------- contexts


@dataclass(frozen=True)
class Context:
    skeleton: Sequent
    hole_path: Path

    def __str__(self):
        return show(self.skeleton)

    def plug(self, filler=None) -> Sequent:
        return plug(self, filler)


def find_hole(s: Sequent) -> Path:
    found = [Path(node, i) for node, i, it in walk(s) if isinstance(it, HoleItem)]
    if len(found) != 1:
        raise ValueError(f"context must contain exactly one hole, found {len(found)}")
    return found[0]


def make_context(skeleton: Sequent) -> Context:
    return Context(skeleton, find_hole(skeleton))


def _filler_items(filler) -> tuple:
    if filler is None:
        return ()
    if isinstance(filler, Sequent):
        return filler.items
    if isinstance(filler, (Fml, Bracket)):
        return (filler,)
    return tuple(filler)


def plug(c: Context, filler=None) -> Sequent:
    p = c.hole_path
    items = _filler_items(filler)

    def fill(node: Sequent) -> Sequent:
        return Sequent(node.items[:p.slot] + items + node.items[p.slot + 1:])

    return update_node(c.skeleton, p.node, fill)


def split(s: Sequent, p: Path):
    """Cut the item at p out of s (or open an empty hole if p.slot is None)."""
    node = node_at(s, p.node)
    if p.slot is None:
        skel = update_node(s, p.node, lambda n: Sequent(n.items + (HOLE,)))
        return Context(skel, Path(p.node, len(node.items))), EMPTY
    if not 0 <= p.slot < len(node.items):
        raise IndexError(f"bad path {p}")
    filler = node.items[p.slot]
    skel = update_node(s, p.node, lambda n: Sequent(n.items[:p.slot] + (HOLE,) + n.items[p.slot + 1:]))
    return Context(skel, Path(p.node, p.slot)), filler


def split_items(s: Sequent, node: tuple, indices) -> tuple[Context, Sequent]:
    """Cut several items at one node out into a single filler sequent."""
    here = node_at(s, node)
    idx = sorted(set(indices))
    filler = Sequent(tuple(here.items[i] for i in idx))
    keep = [it for i, it in enumerate(here.items) if i not in idx]
    hole_i = idx[0] if idx else len(keep)
    keep.insert(hole_i, HOLE)
    skel = update_node(s, node, lambda n: Sequent(tuple(keep)))
    return Context(skel, Path(node, hole_i)), filler


def is_output_context(c: Context) -> bool:
    return output_count(c.skeleton) == 0


def is_input_context(c: Context) -> bool:
    return classify(plug(c)) == FULL


def context_depth(c: Context) -> int:
    return len(c.hole_path.node)


# ---------------------------------------------------------------- output pruning


def prune_node(s: Sequent, hole_node: tuple) -> Sequent:
    """Remove the output-carrying part that shares a node with `hole_node`
    on the way to the output formula."""
    op = output_path(s)
    if op is None:
        return s
    k = 0
    while k < len(hole_node) and k < len(op.node) and hole_node[k] == op.node[k]:
        k += 1
    at = op.node[:k]
    drop = op.slot if k == len(op.node) else op.node[k]
    return update_node(s, at, lambda n: Sequent(n.items[:drop] + n.items[drop + 1:]))


def output_prune(c: Context) -> Context:
    if is_output_context(c):
        return c
    return make_context(prune_node(c.skeleton, c.hole_path.node))


def output_prune_seq(s: Sequent) -> Sequent:
    return prune_node(s, ())


# ---------------------------------------------------------------- text syntax


def parse_sequent(text: str, allow_hole: bool = False) -> Sequent:
    ts = TokenStream(tokenize(text))
    s = _parse_items(ts, allow_hole, top=True)
    if ts.peek() != "$":
        ts.fail({"$", ","})
    return s


def parse_context(text: str) -> Context:
    return make_context(parse_sequent(text, allow_hole=True))


_ITEM_START = F.FORMULA_START | {"@", "{"}


def _starts_formula_after_box(ts: TokenStream) -> bool:
    return F._kind(ts.peek(2)) in F.FORMULA_START


def _parse_items(ts: TokenStream, allow_hole: bool, top: bool) -> Sequent:
    items = []
    end = "$" if top else "]"
    if ts.peek() == end:
        return Sequent(())
    while True:
        items.append(_parse_item(ts, allow_hole))
        if ts.peek() == ",":
            ts.next()
            continue
        if ts.peek() != end:
            ts.fail({",", end})
        return Sequent(tuple(items))


def _parse_item(ts: TokenStream, allow_hole: bool) -> Item:
    tok = ts.peek()
    if tok == "@":
        ts.next()
        return Fml(parse_formula(ts), True)
    if tok == "{" and allow_hole:
        ts.next()
        ts.expect("}")
        return HOLE
    if tok == "[" and not (ts.peek(1) == "]" and _starts_formula_after_box(ts)):
        ts.next()
        child = _parse_items(ts, allow_hole, top=False)
        ts.expect("]")
        return Bracket(child)
    if F._kind(tok) in F.FORMULA_START:
        return Fml(parse_formula(ts), False)
    ts.fail(_ITEM_START | ({"{"} if allow_hole else set()))


def show_item(it: Item) -> str:
    if isinstance(it, Fml):
        return ("@" if it.out else "") + _show_in_seq(it.formula, it.out)
    if isinstance(it, Bracket):
        inner = show(it.child)
        return f"[{inner}]" if inner else "[ ]"
    return "{ }"


def _show_in_seq(f: Formula, out: bool) -> str:
    s = F.show(f)
    return f"({s})" if F._prec(f) < 4 else s


def show(s: Sequent) -> str:
    return ", ".join(show_item(it) for it in s.items)


# ---------------------------------------------------------------- canonical form


def canonical_item(it: Item) -> Item:
    if isinstance(it, Bracket):
        return Bracket(canonical_form(it.child), it.tag)
    return it


def canonical_form(s: Sequent) -> Sequent:
    items = sorted((canonical_item(it) for it in s.items), key=lambda it: it.key)
    return Sequent(tuple(items))


def strip_tags(s: Sequent) -> Sequent:
    out = []
    for it in s.items:
        if isinstance(it, Fml):
            out.append(Fml(it.formula, it.out))
        elif isinstance(it, Bracket):
            out.append(Bracket(strip_tags(it.child)))
        else:
            out.append(it)
    return Sequent(tuple(out))


def tag_addresses(s: Sequent, node: tuple = ()) -> Sequent:
    """Copy of s whose every item is tagged with its own address."""
    out = []
    for i, it in enumerate(s.items):
        if isinstance(it, Fml):
            out.append(Fml(it.formula, it.out, node + (i,)))
        elif isinstance(it, Bracket):
            out.append(Bracket(tag_addresses(it.child, node + (i,)), node + (i,)))
        else:
            out.append(it)
    return Sequent(tuple(out))


def align(generated: Sequent, actual: Sequent, node: tuple = ()) -> dict:
    """Map addresses in `actual` to the tags of the matching items in
    `generated` (the two must be multiset-equal)."""
    out = {}
    pool: dict = {}
    for it in generated.items:
        pool.setdefault(it.key, []).append(it)
    for i, it in enumerate(actual.items):
        cands = pool.get(it.key)
        if not cands:
            raise ValueError("sequents are not multiset-equal")
        g = cands.pop(0)
        addr = node + (i,)
        out[addr] = g.tag
        if isinstance(it, Bracket):
            out.update(align(g.child, it.child, addr))
    return out


def formula_seq(text_or_items) -> Sequent:
    if isinstance(text_or_items, str):
        return parse_sequent(text_or_items)
    return Sequent(tuple(text_or_items))


__all__ = [
    "Fml", "Bracket", "HOLE", "HoleItem", "Sequent", "EMPTY", "Path", "Context", "Invalid", "LHS", "FULL",
    "classify", "corresponding_formula", "split", "split_items", "plug", "output_prune", "output_prune_seq",
    "context_depth", "canonical_form", "parse_sequent", "parse_context", "show", "ParseError",
]
