"""Bounded backward proof search for the cut-free systems.

Iterative deepening on height. Invertible rules are applied eagerly and
never undone; everything else is a choice point. A branch dies when it
revisits a sequent (up to multiset equality) or runs out of height.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Union

from . import formula as F
from .calculus import GENERATORS, R, NoRedex, SystemConfig, locations
from .derivation import Derivation, check
from .sequent import Bracket, Fml, Path, Sequent, node_at, nodes, output_path


@dataclass(frozen=True)
class SearchBudget:
    max_height: int = 16
    max_contractions_per_branch: int = 2
    fuel: int = 2_000_000
    loop_check: bool = True
    max_sigma: int = 2

    def __post_init__(self):
        if self.max_height < 0 or self.max_contractions_per_branch < 0 or self.fuel <= 0:
            raise ValueError("search budget values must be positive")


@dataclass
class SearchStats:
    expanded: int = 0
    depth_reached: int = 0
    loops_cut: int = 0
    memo_hits: int = 0
    fuel_exhausted: bool = False
    seconds: float = 0.0

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class Found:
    derivation: Derivation
    stats: SearchStats


@dataclass
class NotFoundWithinBudget:
    stats: SearchStats


Result = Union[Found, NotFoundWithinBudget]

_AXIOMS = (R.ID, R.BOT_L)
_INVERTIBLE = (R.AND_L, R.IMP_R, R.BOX_R, R.DIA_L_HAT, R.DIA_L)
_BRANCHING = (R.AND_R, R.OR_L)
_PROPOSITIONAL = (R.OR_R1, R.OR_R2, R.IMP_L)
_MODAL = (R.DIA_R, R.BOX_L, R.T_L, R.T_R, R.D_R, R.D_L, R.FOUR_L, R.FOUR_R,
          R.S4_L_BOX, R.S4_R_DIA, R.S4_L, R.S4_R)
_STRUCT = (R.D_DOT, R.T_DOT, R.FOUR_DOT, R.B_DOT, R.FIVE_DOT, R.SB_DOT, R.S5_DOT, R.S5B_DOT, R.SB5_DOT)


class _OutOfFuel(Exception):
    pass


class _Searcher:
    def __init__(self, cfg: SystemConfig, budget: SearchBudget):
        self.cfg = cfg
        self.budget = budget
        self.stats = SearchStats()
        self.failed: dict = {}
        self.enabled = set(cfg.rules())

    # moves are (rule, principal, params, premises)
    def _moves(self, s: Sequent, rules) -> list:
        out = []
        seen = set()
        for rule in rules:
            if rule not in self.enabled:
                continue
            for p, q in locations(s, rule, max_sigma=self.budget.max_sigma):
                if rule is R.D_DOT and any(isinstance(it, Bracket) and not it.child.items
                                           for it in node_at(s, p.node).items):
                    continue
                try:
                    prem = GENERATORS[rule](s, p, q)
                except NoRedex:
                    continue
                key = (rule, tuple(x.key for x in prem))
                if key in seen:
                    continue
                seen.add(key)
                out.append((rule, p, q, prem))
        return out

    def _axiom(self, s: Sequent) -> Optional[Derivation]:
        for rule, p, q, _ in self._moves(s, _AXIOMS):
            return Derivation(rule, s, (), p, q)
        if self.cfg.proper_axioms:
            op = output_path(s)
            f = node_at(s, op.node).items[op.slot].formula
            if self.cfg.enabled(R.PROPER, f):
                return Derivation(R.PROPER, s, (), op, {"formula": f})
        return None

    def _contractions(self, s: Sequent, conts: Counter) -> list:
        out = []
        for node in nodes(s):
            items = node_at(s, node).items
            seen = set()
            for i, it in enumerate(items):
                if not isinstance(it, Fml) or it.out or not isinstance(it.formula, (F.Implies, F.Box)):
                    continue
                k = F.key(it.formula)
                if k in seen or conts[k] >= self.budget.max_contractions_per_branch:
                    continue
                seen.add(k)
                q = {"items": (i,)}
                out.append((R.CONT, Path(node, None), q, GENERATORS[R.CONT](s, Path(node, None), q), k))
        return out

    def prove(self, s: Sequent, h: int, ancestors: frozenset, conts: Counter) -> Optional[Derivation]:
        self.stats.expanded += 1
        if self.stats.expanded > self.budget.fuel:
            self.stats.fuel_exhausted = True
            raise _OutOfFuel
        ax = self._axiom(s)
        if ax is not None:
            return ax
        if h == 0:
            return None
        ckey = (s.key, tuple(sorted(conts.items())))
        if self.failed.get(ckey, -1) >= h:
            self.stats.memo_hits += 1
            return None
        if self.budget.loop_check and s.key in ancestors:
            self.stats.loops_cut += 1
            return None
        anc = ancestors | {s.key}

        for group in (_INVERTIBLE, _BRANCHING):
            moves = self._moves(s, group)
            if moves:
                rule, p, q, prem = moves[0]
                d = self._close(s, rule, p, q, prem, h, anc, conts)
                if d is None:
                    self.failed[ckey] = max(self.failed.get(ckey, -1), h)
                return d

        for rule, p, q, prem in self._moves(s, _PROPOSITIONAL + _MODAL + _STRUCT):
            d = self._close(s, rule, p, q, prem, h, anc, conts)
            if d is not None:
                return d
        for rule, p, q, prem, k in self._contractions(s, conts):
            c2 = conts.copy()
            c2[k] += 1
            d = self._close(s, rule, p, q, prem, h, anc, c2)
            if d is not None:
                return d
        self.failed[ckey] = max(self.failed.get(ckey, -1), h)
        return None

    def _close(self, s, rule, p, q, prem, h, anc, conts) -> Optional[Derivation]:
        kids = []
        for x in prem:
            d = self.prove(x, h - 1, anc, conts)
            if d is None:
                return None
            kids.append(d)
        return Derivation(rule, s, tuple(kids), p, q)


def prove_sequent(s: Sequent, cfg: SystemConfig, budget: Optional[SearchBudget] = None) -> Result:
    if cfg.cut_enabled:
        raise ValueError("proof search works in cut-free systems; disable cut")
    budget = budget or SearchBudget()
    srch = _Searcher(cfg, budget)
    t0 = time.perf_counter()
    try:
        for h in range(budget.max_height + 1):
            srch.stats.depth_reached = h
            d = srch.prove(s, h, frozenset(), Counter())
            if d is not None:
                srch.stats.seconds = time.perf_counter() - t0
                err = check(d, cfg)
                if err is not None:
                    raise AssertionError(f"search produced an incorrect derivation: {err}")
                return Found(d, srch.stats)
    except _OutOfFuel:
        pass
    srch.stats.seconds = time.perf_counter() - t0
    return NotFoundWithinBudget(srch.stats)


def prove(goal: F.Formula, cfg: SystemConfig, budget: Optional[SearchBudget] = None) -> Result:
    if isinstance(goal, str):
        goal = F.parse(goal)
    return prove_sequent(Sequent((Fml(goal, True),)), cfg, budget)
