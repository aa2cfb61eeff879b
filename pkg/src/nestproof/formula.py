"""Modal formulas: syntax trees, an ASCII parser and a minimal-parenthesis printer."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class And:
    l: "Formula"
    r: "Formula"


@dataclass(frozen=True)
class Or:
    l: "Formula"
    r: "Formula"


@dataclass(frozen=True)
class Implies:
    l: "Formula"
    r: "Formula"


@dataclass(frozen=True)
class Box:
    body: "Formula"


@dataclass(frozen=True)
class Dia:
    body: "Formula"


Formula = Union[Atom, Bottom, And, Or, Implies, Box, Dia]

BOT = Bottom()
TOP = Implies(BOT, BOT)

ATOM_RE = re.compile(r"[a-z][a-zA-Z0-9_]*")
KEYWORDS = {"bot", "top"}


def depth(f: Formula) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 1
    if isinstance(f, (Box, Dia)):
        return depth(f.body) + 1
    return max(depth(f.l), depth(f.r)) + 1


def size(f: Formula) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 1
    if isinstance(f, (Box, Dia)):
        return size(f.body) + 1
    return size(f.l) + size(f.r) + 1


def atoms(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, Bottom):
        return set()
    if isinstance(f, (Box, Dia)):
        return atoms(f.body)
    return atoms(f.l) | atoms(f.r)


_KIND = {Atom: 0, Bottom: 1, And: 2, Or: 3, Implies: 4, Box: 5, Dia: 6}


def key(f: Formula) -> tuple:
    """Total order on formulas, used for canonical forms."""
    k = _KIND[type(f)]
    if isinstance(f, Atom):
        return (k, f.name)
    if isinstance(f, Bottom):
        return (k,)
    if isinstance(f, (Box, Dia)):
        return (k, key(f.body))
    return (k, key(f.l), key(f.r))


def substitute(f: Formula, sub: dict) -> Formula:
    """Replace atoms by formulas (used for schema templates)."""
    if isinstance(f, Atom):
        return sub.get(f.name, f)
    if isinstance(f, Bottom):
        return f
    if isinstance(f, (Box, Dia)):
        return type(f)(substitute(f.body, sub))
    return type(f)(substitute(f.l, sub), substitute(f.r, sub))


# ---------------------------------------------------------------- parsing


class ParseError(ValueError):
    def __init__(self, offset: int, expected, found: str = ""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"syntax error at offset {offset}: expected one of {{{exp}}}, found {found or 'end of input'!r}")


_TOKEN_RE = re.compile(r"\s*(?:(->)|(<>)|([\[\]()&|,@{}])|([a-z][a-zA-Z0-9_]*))")


def tokenize(text: str) -> list[tuple[str, int]]:
    """(token, byte offset) pairs, ending with ('$', len)."""
    out = []
    pos = 0
    raw = text.encode()
    while True:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            start = pos + (len(rest) - len(rest.lstrip()))
            off = len(text[:start].encode())
            raise ParseError(off, {"token"}, text[start])
        tok = m.group(m.lastindex)
        start = m.start(m.lastindex)
        out.append((tok, len(text[:start].encode())))
        pos = m.end()
    out.append(("$", len(raw)))
    return out


FORMULA_START = {"(", "<>", "[", "bot", "top", "atom"}


def _kind(tok: str) -> str:
    if tok in KEYWORDS:
        return tok
    if ATOM_RE.fullmatch(tok):
        return "atom"
    return tok


class TokenStream:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> str:
        j = min(self.i + ahead, len(self.toks) - 1)
        return self.toks[j][0]

    def offset(self) -> int:
        return self.toks[self.i][1]

    def next(self) -> str:
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            self.fail({tok})
        self.i += 1

    def fail(self, expected):
        found = self.peek()
        raise ParseError(self.offset(), expected, "" if found == "$" else found)


# binding power of infix operators; -> is right associative
_INFIX = {"->": (1, Implies, True), "|": (2, Or, False), "&": (3, And, False)}


def parse_formula(ts: TokenStream, min_prec: int = 1) -> Formula:
    left = _parse_prefix(ts)
    while ts.peek() in _INFIX:
        prec, ctor, right_assoc = _INFIX[ts.peek()]
        if prec < min_prec:
            break
        ts.next()
        right = parse_formula(ts, prec if right_assoc else prec + 1)
        left = ctor(left, right)
    return left


def _parse_prefix(ts: TokenStream) -> Formula:
    tok = ts.peek()
    k = _kind(tok)
    if k == "<>":
        ts.next()
        return Dia(_parse_prefix(ts))
    if k == "[":
        ts.next()
        ts.expect("]")
        return Box(_parse_prefix(ts))
    if k == "(":
        ts.next()
        f = parse_formula(ts)
        ts.expect(")")
        return f
    if k == "bot":
        ts.next()
        return BOT
    if k == "top":
        ts.next()
        return TOP
    if k == "atom":
        ts.next()
        return Atom(tok)
    ts.fail(FORMULA_START)


def parse(text: str) -> Formula:
    ts = TokenStream(tokenize(text))
    f = parse_formula(ts)
    if ts.peek() != "$":
        ts.fail({"$", "&", "|", "->"})
    return f


# ---------------------------------------------------------------- printing


def _prec(f: Formula) -> int:
    if isinstance(f, Implies) and f != TOP:
        return 1
    if isinstance(f, Or):
        return 2
    if isinstance(f, And):
        return 3
    return 4


def show(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Bottom):
        return "bot"
    if f == TOP:
        return "top"
    if isinstance(f, (Box, Dia)):
        op = "[]" if isinstance(f, Box) else "<>"
        body = show(f.body)
        return op + (body if _prec(f.body) == 4 else f"({body})")
    p = _prec(f)
    op = {1: "->", 2: "|", 3: "&"}[p]
    # left-assoc & and | need parens only on the right; -> only on the left
    lp = _prec(f.l) <= p if p == 1 else _prec(f.l) < p
    rp = _prec(f.r) < p if p == 1 else _prec(f.r) <= p
    ls = f"({show(f.l)})" if lp else show(f.l)
    rs = f"({show(f.r)})" if rp else show(f.r)
    return f"{ls} {op} {rs}"


def conj(fs) -> Formula:
    """Right-nested conjunction; the empty conjunction is top."""
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out
