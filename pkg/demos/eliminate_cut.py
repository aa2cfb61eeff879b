"""Build a cut on a boxed formula and eliminate it, printing the trace."""
from nestproof import formula as F
from nestproof.calculus import R, logic
from nestproof.cutelim import eliminate_cuts
from nestproof.derivation import Derivation, render
from nestproof.search import prove_sequent
from nestproof.sequent import Path, parse_sequent


def main():
    cfg = logic("CS4", cut_enabled=True)
    plain = cfg.with_(cut_enabled=False)
    # [](a -> b), []a |- []b, cutting on []b
    left = prove_sequent(parse_sequent("[](a -> b), []a, @[]b"), plain).derivation
    right = prove_sequent(parse_sequent("[](a -> b), []a, []b, @[]b"), plain).derivation
    d = Derivation(R.CUT, parse_sequent("[](a -> b), []a, @[]b"), (left, right), Path((), None),
                   {"formula": F.parse("[]b")})
    print(render(d))
    out, trace = eliminate_cuts(d, cfg)
    print("\ncut-free:")
    print(render(out))
    print("\ntrace:")
    for s in trace.steps:
        print(f"  {s.label:28s} {[(v.rank, v.unanchored) for v in s.before]} -> "
              f"{[(v.rank, v.unanchored) for v in s.after]}")


if __name__ == "__main__":
    main()
