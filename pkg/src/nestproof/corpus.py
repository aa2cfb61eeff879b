"""Hand transcriptions of known derivations, with the systems they live in.

Each entry lists conclusions explicitly and leaves principals to the
checker. Identity steps on compound formulas are expanded into atomic
ones by `derive_id`, since the checker only knows the atomic axiom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import formula as F
from .calculus import R, SystemConfig
from .derivation import Derivation, derive_id, node
from .sequent import parse_sequent


@dataclass(frozen=True)
class Entry:
    name: str
    group: str
    cfg: SystemConfig
    make: Callable[[], Derivation]
    goal: str = ""

    def derivation(self) -> Derivation:
        return self.make()


def N(rule, seq: str, *kids: Derivation) -> Derivation:
    return node(rule, seq, kids)


def gid(seq: str, base: str = "NCKPrime") -> Derivation:
    return derive_id(parse_sequent(seq), base)


# ---------------------------------------------------------------- axiom proofs in NCK'


def ax_d():
    return N(R.IMP_R, "@[]a -> <>a",
             N(R.D_R, "[]a, @<>a",
               N(R.BOX_L, "[]a, [@a]",
                 N(R.ID, "[a, @a]"))))


def ax_t():
    return N(R.AND_R, "@(a -> <>a) & ([]a -> a)",
             N(R.IMP_R, "@a -> <>a",
               N(R.T_R, "a, @<>a",
                 N(R.ID, "a, @a"))),
             N(R.IMP_R, "@[]a -> a",
               N(R.T_L, "[]a, @a",
                 N(R.ID, "a, @a"))))


def ax_b():
    return N(R.AND_R, "@(<>[]a -> a) & (a -> []<>a)",
             N(R.IMP_R, "@<>[]a -> a",
               N(R.DIA_L_HAT, "<>[]a, @a",
                 N(R.B_DOT, "[[]a], @a",
                   N(R.BOX_L, "[[]a, [@a]]",
                     N(R.ID, "[[a, @a]]"))))),
             N(R.IMP_R, "@a -> []<>a",
               N(R.BOX_R, "a, @[]<>a",
                 N(R.B_DOT, "a, [@<>a]",
                   N(R.DIA_R, "[[a], @<>a]",
                     N(R.ID, "[[a, @a]]"))))))


def ax_4():
    return N(R.AND_R, "@([]a -> [][]a) & (<><>a -> <>a)",
             N(R.IMP_R, "@[]a -> [][]a",
               N(R.BOX_R, "[]a, @[][]a",
                 N(R.FOUR_L, "[]a, [@[]a]",
                   gid("[[]a, @[]a]")))),
             N(R.IMP_R, "@<><>a -> <>a",
               N(R.DIA_L_HAT, "<><>a, @<>a",
                 N(R.FOUR_R, "[<>a], @<>a",
                   gid("[<>a, @<>a]")))))


def ax_5():
    return N(R.AND_R, "@(<>[]a -> []a) & (<>a -> []<>a)",
             N(R.IMP_R, "@<>[]a -> []a",
               N(R.DIA_L_HAT, "<>[]a, @[]a",
                 N(R.BOX_R, "[[]a], @[]a",
                   N(R.FIVE_DOT, "[[]a], [@a]",
                     N(R.BOX_L, "[[]a, [@a]]",
                       N(R.ID, "[[a, @a]]")))))),
             N(R.IMP_R, "@<>a -> []<>a",
               N(R.DIA_L_HAT, "<>a, @[]<>a",
                 N(R.BOX_R, "[a], @[]<>a",
                   N(R.FIVE_DOT, "[a], [@<>a]",
                     N(R.DIA_R, "[[a], @<>a]",
                       N(R.ID, "[[a, @a]]")))))))


# ---------------------------------------------------------------- k3 and k5 from the structural b rule, in NCK


def _k3_branch(x: str):
    return N(R.OR_R1 if x == "a" else R.OR_R2, f"[{x}, [@<>a | <>b]]",
             N(R.B_DOT, f"[{x}, [@<>{x}]]",
               N(R.DIA_R, f"[[[{x}], @<>{x}]]",
                 N(R.ID, f"[[[{x}, @{x}]]]"))))


def k3_from_b():
    return N(R.IMP_R, "@<>(a | b) -> <>a | <>b",
             N(R.DIA_L, "<>(a | b), @<>a | <>b",
               N(R.B_DOT, "[a | b], @<>a | <>b",
                 N(R.OR_L, "[a | b, [@<>a | <>b]]",
                   _k3_branch("a"), _k3_branch("b")))))


def k5_from_b():
    return N(R.IMP_R, "@<>bot -> bot",
             N(R.DIA_L, "<>bot, @bot",
               N(R.B_DOT, "[bot], @bot",
                 N(R.BOT_L, "[bot, [@bot]]"))))


# ---------------------------------------------------------------- b and 5 used as proper axioms, with cut

S, D = "s", "d"
B_AXIOMS = frozenset({F.parse("s -> []<>s"), F.parse("<>[]s -> s")})
FIVE_AXIOMS = frozenset({F.parse("<>s -> []<>s"), F.parse("<>[]s -> []s")})


def _d1():
    # s, [@<>s] by cut on s -> []<>s
    return N(R.CUT, "s, [@<>s]",
             N(R.WEAK, "s, @s -> []<>s",
               N(R.PROPER, "@s -> []<>s")),
             N(R.IMP_L, "s -> []<>s, s, [@<>s]",
               N(R.ID, "s, @s"),
               N(R.BOX_L, "[]<>s, s, [@<>s]",
                 gid("s, [<>s, @<>s]", "NCK"))))


def _d2():
    # <>s, [@<>s] by cut on <>s -> []<>s
    return N(R.CUT, "<>s, [@<>s]",
             N(R.WEAK, "<>s, @<>s -> []<>s",
               N(R.PROPER, "@<>s -> []<>s")),
             N(R.IMP_L, "<>s -> []<>s, <>s, [@<>s]",
               gid("<>s, @<>s", "NCK"),
               N(R.BOX_L, "[]<>s, <>s, [@<>s]",
                 gid("<>s, [<>s, @<>s]", "NCK"))))


def _boxed_cut(ax: str, out: str):
    # [[]s], @out by cut on <>[]s -> out
    return N(R.CUT, f"[[]s], @{out}",
             N(R.WEAK, f"[[]s], @<>[]s -> {out}",
               N(R.PROPER, f"@<>[]s -> {out}")),
             N(R.IMP_L, f"[[]s], <>[]s -> {out}, @{out}",
               N(R.DIA_R, "[[]s], @<>[]s",
                 gid("[[]s, @[]s]", "NCK")),
               gid(f"[[]s], {out}, @{out}", "NCK")))


def b5_i():
    return N(R.IMP_R, "@s & <>d -> <>(<>s & d)",
             N(R.AND_L, "s & <>d, @<>(<>s & d)",
               N(R.DIA_L, "s, <>d, @<>(<>s & d)",
                 N(R.DIA_R, "s, [d], @<>(<>s & d)",
                   N(R.AND_R, "s, [d, @<>s & d]",
                     N(R.WEAK, "s, [d, @<>s]", _d1()),
                     N(R.ID, "s, [d, @d]"))))))


def b5_ii():
    return N(R.IMP_R, "@[](d -> []s) -> <>d -> s",
             N(R.IMP_R, "[](d -> []s), @<>d -> s",
               N(R.DIA_L, "[](d -> []s), <>d, @s",
                 N(R.BOX_L, "[](d -> []s), [d], @s",
                   N(R.IMP_L, "[d -> []s, d], @s",
                     N(R.ID, "[d, @d]"),
                     N(R.WEAK, "[[]s, d], @s", _boxed_cut("b", "s")))))))


def b5_iii():
    return N(R.IMP_R, "@[](<>s -> d) -> s -> []d",
             N(R.IMP_R, "[](<>s -> d), @s -> []d",
               N(R.BOX_R, "[](<>s -> d), s, @[]d",
                 N(R.BOX_L, "[](<>s -> d), s, [@d]",
                   N(R.IMP_L, "s, [<>s -> d, @d]",
                     _d1(),
                     N(R.ID, "s, [d, @d]"))))))


def b5_iv():
    return N(R.IMP_R, "@<>s & <>d -> <>(<>s & d)",
             N(R.AND_L, "<>s & <>d, @<>(<>s & d)",
               N(R.DIA_L, "<>s, <>d, @<>(<>s & d)",
                 N(R.DIA_R, "<>s, [d], @<>(<>s & d)",
                   N(R.AND_R, "<>s, [d, @<>s & d]",
                     N(R.WEAK, "<>s, [d, @<>s]", _d2()),
                     N(R.ID, "<>s, [d, @d]"))))))


def b5_v():
    return N(R.IMP_R, "@[](d -> []s) -> <>d -> []s",
             N(R.IMP_R, "[](d -> []s), @<>d -> []s",
               N(R.DIA_L, "[](d -> []s), <>d, @[]s",
                 N(R.BOX_L, "[](d -> []s), [d], @[]s",
                   N(R.IMP_L, "[d -> []s, d], @[]s",
                     N(R.ID, "[@d, d]"),
                     N(R.WEAK, "[[]s, d], @[]s", _boxed_cut("5", "[]s")))))))


def b5_vi():
    return N(R.IMP_R, "@[](<>s -> d) -> <>s -> []d",
             N(R.IMP_R, "[](<>s -> d), @<>s -> []d",
               N(R.BOX_R, "[](<>s -> d), <>s, @[]d",
                 N(R.BOX_L, "[](<>s -> d), <>s, [@d]",
                   N(R.IMP_L, "<>s, [<>s -> d, @d]",
                     _d2(),
                     N(R.ID, "<>s, [d, @d]"))))))


# ---------------------------------------------------------------- Hilbert rules simulated by cut and nec

MP_AXIOMS = frozenset({F.parse("a"), F.parse("a -> b")})


def sim_mp():
    return N(R.CUT, "@b",
             N(R.PROPER, "@a"),
             N(R.CUT, "a, @b",
               N(R.PROPER, "a, @a -> b"),
               N(R.IMP_L, "a -> b, a, @b",
                 N(R.ID, "@a, a"),
                 N(R.ID, "b, a, @b"))))


def sim_nec():
    return N(R.BOX_R, "@[]a",
             N(R.NEC, "[@a]",
               N(R.PROPER, "@a")))


def mp_composition():
    """Two cuts and an imp_l, composing cut-free proofs of a -> a and
    (a -> a) -> ((a -> a) | c) into one of (a -> a) | c."""
    p_a = N(R.IMP_R, "@a -> a", N(R.ID, "a, @a"))
    p_ab = N(R.IMP_R, "a -> a, @(a -> a) -> (a -> a) | c",
             N(R.OR_R1, "a -> a, a -> a, @(a -> a) | c",
               gid("a -> a, a -> a, @a -> a")))
    step = N(R.IMP_L, "(a -> a) -> (a -> a) | c, a -> a, @(a -> a) | c",
             gid("a -> a, @a -> a"),
             gid("(a -> a) | c, a -> a, @(a -> a) | c"))
    return N(R.CUT, "@(a -> a) | c",
             p_a,
             N(R.CUT, "a -> a, @(a -> a) | c", p_ab, step))


def atomic_cut():
    return N(R.CUT, "a, @a", N(R.ID, "a, @a"), N(R.ID, "a, a, @a"))


# ---------------------------------------------------------------- flow-graph example


def flow_example():
    """Unanchored version: the d & b cut sits below an or-right step."""
    return N(R.CUT, "bot, @b | c",
             N(R.BOT_L, "bot, @a"),
             N(R.CUT, "bot, a, @b | c",
               N(R.CUT, "bot, a, @d & b",
                 N(R.BOT_L, "bot, a, @e"),
                 N(R.BOT_L, "bot, a, e, @d & b")),
               N(R.OR_R1, "bot, a, d & b, @b | c",
                 N(R.AND_L, "bot, a, d & b, @b",
                   N(R.ID, "bot, a, d, b, @b")))))


def flow_example_permuted():
    return N(R.CUT, "bot, @b | c",
             N(R.BOT_L, "bot, @a"),
             N(R.OR_R1, "bot, a, @b | c",
               N(R.CUT, "bot, a, @b",
                 N(R.CUT, "bot, a, @d & b",
                   N(R.BOT_L, "bot, a, @e"),
                   N(R.BOT_L, "bot, a, e, @d & b")),
                 N(R.AND_L, "bot, a, d & b, @b",
                   N(R.ID, "bot, a, d, b, @b")))))


# ---------------------------------------------------------------- registry

_PRIME = SystemConfig()
_NCK = SystemConfig(base="NCK")
_CUT = SystemConfig(base="NCK", cut_enabled=True, admissible=True)

CORPUS: dict[str, Entry] = {e.name: e for e in [
    Entry("axiom_d", "axioms", _PRIME.with_(X={"d"}), ax_d, "[]a -> <>a"),
    Entry("axiom_t", "axioms", _PRIME.with_(X={"t"}), ax_t, "(a -> <>a) & ([]a -> a)"),
    Entry("axiom_b", "axioms", _PRIME.with_(Y={"b"}), ax_b, "(<>[]a -> a) & (a -> []<>a)"),
    Entry("axiom_4", "axioms", _PRIME.with_(X={"4"}), ax_4, "([]a -> [][]a) & (<><>a -> <>a)"),
    Entry("axiom_5", "axioms", _PRIME.with_(Y={"5"}), ax_5, "(<>[]a -> []a) & (<>a -> []<>a)"),
    Entry("k3_b", "b_entails", _NCK.with_(Y={"b"}), k3_from_b, "<>(a | b) -> <>a | <>b"),
    Entry("k5_b", "b_entails", _NCK.with_(Y={"b"}), k5_from_b, "<>bot -> bot"),
    Entry("b5aux_i", "b5aux", _CUT.with_(proper_axioms=B_AXIOMS), b5_i),
    Entry("b5aux_ii", "b5aux", _CUT.with_(proper_axioms=B_AXIOMS), b5_ii),
    Entry("b5aux_iii", "b5aux", _CUT.with_(proper_axioms=B_AXIOMS), b5_iii),
    Entry("b5aux_iv", "b5aux", _CUT.with_(proper_axioms=FIVE_AXIOMS), b5_iv),
    Entry("b5aux_v", "b5aux", _CUT.with_(proper_axioms=FIVE_AXIOMS), b5_v),
    Entry("b5aux_vi", "b5aux", _CUT.with_(proper_axioms=FIVE_AXIOMS), b5_vi),
    Entry("sim_mp", "hilbert_rules", _PRIME.with_(cut_enabled=True, proper_axioms=MP_AXIOMS), sim_mp, "b"),
    Entry("sim_nec", "hilbert_rules", _PRIME.with_(admissible=True, proper_axioms=MP_AXIOMS), sim_nec, "[]a"),
    Entry("mp_composition", "elim", _PRIME.with_(cut_enabled=True), mp_composition, "(a -> a) | c"),
    Entry("atomic_cut", "elim", _PRIME.with_(cut_enabled=True), atomic_cut),
    Entry("flow", "flow", _PRIME.with_(cut_enabled=True), flow_example, "b | c"),
    Entry("flow_permuted", "flow", _PRIME.with_(cut_enabled=True), flow_example_permuted, "b | c"),
]}

GOLDEN = [n for n, e in CORPUS.items() if e.group not in ("flow", "elim")]
