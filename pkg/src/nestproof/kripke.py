"""Finite birelational Kripke models for constructive and intuitionistic K."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from . import formula as F

CONSTRUCTIVE = "Constructive"
INTUITIONISTIC = "Intuitionistic"


def _closure(worlds, pairs) -> frozenset:
    """Reflexive-transitive closure (Warshall)."""
    rel = {w: {w} for w in worlds}
    for a, b in pairs:
        rel[a].add(b)
    for k in worlds:
        for i in worlds:
            if k in rel[i]:
                rel[i] |= rel[k]
    return frozenset((a, b) for a in worlds for b in rel[a])


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple

    def __str__(self):
        return f"{self.kind} at {self.witness}"


@dataclass(frozen=True, eq=False)
class KripkeModel:
    worlds: tuple
    leq: frozenset
    R: frozenset
    fallible: frozenset = frozenset()
    valuation: dict = field(default_factory=dict)
    flavor: str = CONSTRUCTIVE

    def __post_init__(self):
        ws = tuple(self.worlds)
        if not ws:
            raise ValueError("a model needs at least one world")
        if len(set(ws)) != len(ws):
            raise ValueError("duplicate world names")
        if self.flavor not in (CONSTRUCTIVE, INTUITIONISTIC):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        known = set(ws)
        for a, b in list(self.leq) + list(self.R):
            if a not in known or b not in known:
                raise ValueError(f"relation mentions unknown world in {(a, b)}")
        for w in set(self.fallible) | set(self.valuation):
            if w not in known:
                raise ValueError(f"unknown world {w!r}")
        object.__setattr__(self, "worlds", ws)
        object.__setattr__(self, "leq", _closure(ws, self.leq))
        object.__setattr__(self, "R", frozenset(tuple(p) for p in self.R))
        object.__setattr__(self, "fallible", frozenset(self.fallible))
        val = {w: frozenset(self.valuation.get(w, ())) for w in ws}
        object.__setattr__(self, "valuation", val)
        object.__setattr__(self, "_up", {w: tuple(v for v in ws if (w, v) in self.leq) for w in ws})
        object.__setattr__(self, "_succ", {w: tuple(v for v in ws if (w, v) in self.R) for w in ws})
        object.__setattr__(self, "_memo", {})

    def up(self, w) -> tuple:
        return self._up[w]

    def succ(self, w) -> tuple:
        return self._succ[w]

    def to_json(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "leq_pairs": sorted([a, b] for a, b in self.leq if a != b),
            "r_pairs": sorted([a, b] for a, b in self.R),
            "fallible": sorted(self.fallible),
            "valuation": {w: sorted(v) for w, v in self.valuation.items() if v},
            "flavor": self.flavor,
        }

    @classmethod
    def from_json(cls, d) -> "KripkeModel":
        if isinstance(d, str):
            d = json.loads(d)
        return cls(
            worlds=tuple(d["worlds"]),
            leq=frozenset(tuple(p) for p in d.get("leq_pairs", ())),
            R=frozenset(tuple(p) for p in d.get("r_pairs", ())),
            fallible=frozenset(d.get("fallible", ())),
            valuation={w: set(v) for w, v in d.get("valuation", {}).items()},
            flavor=d.get("flavor", CONSTRUCTIVE),
        )


def validate(m: KripkeModel) -> list[Violation]:
    """Every violated condition; an empty list means the model is fine."""
    out = []
    for a, b in sorted(m.leq):
        if not m.valuation[a] <= m.valuation[b]:
            out.append(Violation("valuation not monotone", (a, b)))
    if m.flavor == CONSTRUCTIVE:
        for w in m.worlds:
            if w not in m.fallible:
                continue
            for v in m.up(w):
                if v not in m.fallible:
                    out.append(Violation("fallible not closed under leq", (w, v)))
            for v in m.succ(w):
                if v not in m.fallible:
                    out.append(Violation("fallible not closed under R", (w, v)))
        return out
    if m.fallible:
        out.append(Violation("intuitionistic model with fallible worlds", tuple(sorted(m.fallible))))
    for w, v in sorted(m.R):
        for v2 in m.up(v):
            if not any((w2, v2) in m.R for w2 in m.up(w)):
                out.append(Violation("F1", (w, v, v2)))
    for w, w2 in sorted(m.leq):
        for v in m.succ(w):
            if not any((v, v2) in m.leq for v2 in m.succ(w2)):
                out.append(Violation("F2", (w, w2, v)))
    return out


def forces(m: KripkeModel, w, f: F.Formula) -> bool:
    if w not in m.valuation:
        raise KeyError(f"unknown world {w!r}")
    key = (w, f)
    hit = m._memo.get(key)
    if hit is None:
        hit = _forces(m, w, f)
        m._memo[key] = hit
    return hit


def _forces(m: KripkeModel, w, f) -> bool:
    if w in m.fallible:
        return True
    if isinstance(f, F.Atom):
        return f.name in m.valuation[w]
    if isinstance(f, F.Bottom):
        return False
    if isinstance(f, F.And):
        return forces(m, w, f.l) and forces(m, w, f.r)
    if isinstance(f, F.Or):
        return forces(m, w, f.l) or forces(m, w, f.r)
    if isinstance(f, F.Implies):
        return all(forces(m, v, f.r) for v in m.up(w) if forces(m, v, f.l))
    if isinstance(f, F.Box):
        return all(forces(m, u, f.body) for v in m.up(w) for u in m.succ(v))
    if m.flavor == INTUITIONISTIC:
        return any(forces(m, u, f.body) for u in m.succ(w))
    return all(any(forces(m, u, f.body) for u in m.succ(v)) for v in m.up(w))


def refutes(m: KripkeModel, f: F.Formula) -> Optional[str]:
    for w in m.worlds:
        if not forces(m, w, f):
            return w
    return None


def _model(worlds, leq=(), R=(), fallible=(), valuation=None, flavor=CONSTRUCTIVE) -> KripkeModel:
    return KripkeModel(tuple(worlds), frozenset(leq), frozenset(R), frozenset(fallible),
                       valuation or {}, flavor)


def k3_model(flavor: str = CONSTRUCTIVE) -> KripkeModel:
    return _model(["w0", "w1", "u0", "v1"], [("w0", "w1")], [("w0", "u0"), ("w1", "v1")],
                  valuation={"u0": {"a1"}, "v1": {"a2"}}, flavor=flavor)


def k4_model_literal() -> KripkeModel:
    """k4 countermodel with the valuation exactly as usually printed."""
    return _model(["w0", "w1", "u0", "u1"], [("w0", "w1"), ("u0", "u1")], [("w0", "u0")],
                  valuation={"u0": {"a2"}, "u1": {"a1", "a2"}})


def k4_model() -> KripkeModel:
    """k4 countermodel with I(u0) empty and I(u1) = {a1}; this one does refute k4."""
    return _model(["w0", "w1", "u0", "u1"], [("w0", "w1"), ("u0", "u1")], [("w0", "u0")],
                  valuation={"u1": {"a1"}})


def k5_model() -> KripkeModel:
    return _model(["w0", "u0"], R=[("w0", "u0")], fallible=["u0"])


K3 = F.parse("<>(a1 | a2) -> <>a1 | <>a2")
K4 = F.parse("(<>a1 -> []a2) -> [](a1 -> a2)")
K5 = F.parse("<>bot -> bot")


def random_model(rng: random.Random, n: int, atoms=("a", "b"), p_leq: float = 0.3, p_r: float = 0.35,
                 p_fallible: float = 0.15, p_atom: float = 0.35) -> KripkeModel:
    """A random valid constructive model with n worlds.

    Valuations and fallible sets are made upward closed after sampling,
    so the result always validates."""
    ws = tuple(f"w{i}" for i in range(n))
    leq = _closure(ws, [(a, b) for a in ws for b in ws if a != b and rng.random() < p_leq])
    R = frozenset((a, b) for a in ws for b in ws if rng.random() < p_r)
    fall = {w for w in ws if rng.random() < p_fallible}
    changed = True
    while changed:
        changed = False
        for a, b in list(leq) + list(R):
            if a in fall and b not in fall:
                fall.add(b)
                changed = True
    val = {w: {x for x in atoms if rng.random() < p_atom} for w in ws}
    for a, b in leq:
        val[b] |= val[a]
    return KripkeModel(ws, leq, R, frozenset(fall), val)
