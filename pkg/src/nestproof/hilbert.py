"""Hilbert systems HCK+X: schema matching, proof checking, soundness obligations."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

from . import formula as F
from .derivation import Derivation
from .sequent import corresponding_formula, strip_tags

# metavariables are upper-case atoms, which the formula parser never produces
A, B, C = F.Atom("A"), F.Atom("B"), F.Atom("C")
METAVARS = frozenset({"A", "B", "C"})

_imp, _and, _or = F.Implies, F.And, F.Or
_box, _dia = F.Box, F.Dia

# a standard intuitionistic basis; there is no primitive negation, so bot -> A stands in for it
IPC = {
    "ipc1": _imp(A, _imp(B, A)),
    "ipc2": _imp(_imp(A, _imp(B, C)), _imp(_imp(A, B), _imp(A, C))),
    "ipc3": _imp(A, _or(A, B)),
    "ipc4": _imp(B, _or(A, B)),
    "ipc5": _imp(_imp(A, C), _imp(_imp(B, C), _imp(_or(A, B), C))),
    "ipc6": _imp(_and(A, B), A),
    "ipc7": _imp(_and(A, B), B),
    "ipc8": _imp(A, _imp(B, _and(A, B))),
    "ipc9": _imp(F.BOT, A),
}

MODAL = {
    "k1": _imp(_box(_imp(A, B)), _imp(_box(A), _box(B))),
    "k2": _imp(_box(_imp(A, B)), _imp(_dia(A), _dia(B))),
}

AXIOMS = {
    "d": _imp(_box(A), _dia(A)),
    "t": _and(_imp(A, _dia(A)), _imp(_box(A), A)),
    "b": _and(_imp(A, _box(_dia(A))), _imp(_dia(_box(A)), A)),
    "4": _and(_imp(_dia(_dia(A)), _dia(A)), _imp(_box(A), _box(_box(A)))),
    "5": _and(_imp(_dia(A), _box(_dia(A))), _imp(_dia(_box(A)), _box(A))),
}

SCHEMAS = {**IPC, **MODAL, **AXIOMS}


def schemas_for(X=()) -> dict:
    bad = set(X) - set(AXIOMS)
    if bad:
        raise ValueError(f"unknown axioms {sorted(bad)}")
    return {**IPC, **MODAL, **{x: AXIOMS[x] for x in sorted(X)}}


def match_schema(schema: F.Formula, f: F.Formula, sub: Optional[dict] = None) -> Optional[dict]:
    """Substitution s with schema[s] == f, or None."""
    sub = dict(sub or {})
    stack = [(schema, f)]
    while stack:
        t, g = stack.pop()
        if isinstance(t, F.Atom) and t.name in METAVARS:
            bound = sub.get(t.name)
            if bound is None:
                sub[t.name] = g
            elif bound != g:
                return None
        elif type(t) is not type(g):
            return None
        elif isinstance(t, F.Atom):
            if t != g:
                return None
        elif isinstance(t, (F.Box, F.Dia)):
            stack.append((t.body, g.body))
        elif not isinstance(t, F.Bottom):
            # push right first so the left side binds first
            stack.append((t.r, g.r))
            stack.append((t.l, g.l))
    return sub


@dataclass(frozen=True)
class AxiomInstance:
    schema: str
    subst: Optional[dict] = None


@dataclass(frozen=True)
class MP:
    minor: int
    major: int


@dataclass(frozen=True)
class Nec:
    line: int


Justification = Union[AxiomInstance, MP, Nec]


@dataclass(frozen=True)
class HilbertProof:
    lines: tuple

    @property
    def conclusion(self) -> F.Formula:
        return self.lines[-1][0]

    def to_json(self) -> list:
        out = []
        for f, j in self.lines:
            row = {"formula": F.show(f)}
            if isinstance(j, AxiomInstance):
                row.update(by="axiom", schema=j.schema)
                if j.subst:
                    row["subst"] = {k: F.show(v) for k, v in j.subst.items()}
            elif isinstance(j, MP):
                row.update(by="mp", minor=j.minor, major=j.major)
            else:
                row.update(by="nec", line=j.line)
            out.append(row)
        return out

    @classmethod
    def from_json(cls, rows) -> "HilbertProof":
        if isinstance(rows, str):
            rows = json.loads(rows)
        lines = []
        for row in rows:
            f = F.parse(row["formula"])
            by = row["by"]
            if by == "axiom":
                sub = {k: F.parse(v) for k, v in row.get("subst", {}).items()} or None
                j = AxiomInstance(row["schema"], sub)
            elif by == "mp":
                j = MP(int(row["minor"]), int(row["major"]))
            elif by == "nec":
                j = Nec(int(row["line"]))
            else:
                raise ValueError(f"unknown justification {by!r}")
            lines.append((f, j))
        return cls(tuple(lines))


@dataclass(frozen=True)
class LineError:
    line: int
    reason: str

    def __str__(self):
        return f"line {self.line}: {self.reason}"


def check_hilbert(p: HilbertProof, X=()) -> Optional[LineError]:
    """None if every line is justified in HCK+X, else the first bad line."""
    allowed = schemas_for(X)
    for n, (f, j) in enumerate(p.lines):
        def earlier(i):
            return isinstance(i, int) and 0 <= i < n

        if isinstance(j, AxiomInstance):
            if j.schema not in allowed:
                return LineError(n, f"schema {j.schema!r} is not available")
            sub = match_schema(allowed[j.schema], f)
            if sub is None:
                return LineError(n, f"not an instance of {j.schema}")
            if j.subst is not None and any(sub.get(k) != v for k, v in j.subst.items()):
                return LineError(n, "substitution does not fit")
        elif isinstance(j, MP):
            if not (earlier(j.minor) and earlier(j.major)):
                return LineError(n, "bad index")
            if p.lines[j.major][0] != F.Implies(p.lines[j.minor][0], f):
                return LineError(n, "modus ponens shape mismatch")
        elif isinstance(j, Nec):
            if not earlier(j.line):
                return LineError(n, "bad index")
            if f != F.Box(p.lines[j.line][0]):
                return LineError(n, "necessitation shape mismatch")
        else:
            return LineError(n, f"unknown justification {j!r}")
    return None


def obligation(d: Derivation) -> F.Formula:
    """fm(premises) -> fm(conclusion) for the bottom rule of d."""
    concl = corresponding_formula(strip_tags(d.conclusion))
    if not d.children:
        return concl
    prem = F.conj(corresponding_formula(strip_tags(c.conclusion)) for c in d.children)
    return F.Implies(prem, concl)


def obligations(d: Derivation) -> list[F.Formula]:
    return [obligation(x) for _, x in d.nodes()]
