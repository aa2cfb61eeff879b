"""Search for cut-free proofs of the modal axioms, then try k3, k4 and k5 in plain CK."""
from nestproof import formula as F
from nestproof.calculus import SystemConfig
from nestproof.corpus import CORPUS
from nestproof.derivation import height, render
from nestproof.kripke import K3, K4, K5
from nestproof.search import Found, SearchBudget, prove


def main():
    for name in ("axiom_d", "axiom_t", "axiom_b", "axiom_4", "axiom_5"):
        e = CORPUS[name]
        r = prove(e.goal, e.cfg, SearchBudget(max_height=12))
        print(f"{e.goal}  [X={sorted(e.cfg.X)} Y={sorted(e.cfg.Y)}]  height {height(r.derivation)}")
    print()
    print(render(prove(CORPUS["axiom_d"].goal, CORPUS["axiom_d"].cfg).derivation))
    print()
    for f in (K3, K4, K5):
        r = prove(f, SystemConfig(), SearchBudget(max_height=16))
        verdict = "found" if isinstance(r, Found) else f"not found ({r.stats.expanded} sequents expanded)"
        print(f"{F.show(f)}: {verdict}")


if __name__ == "__main__":
    main()
