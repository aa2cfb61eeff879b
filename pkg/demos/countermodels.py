"""Evaluate k3, k4 and k5 in their countermodels and run a small falsification sweep."""
import random

from nestproof import formula as F
from nestproof.kripke import K3, K4, K5, forces, k3_model, k4_model, k4_model_literal, k5_model, random_model, refutes


def main():
    for label, m, f in [("k3", k3_model(), K3), ("k4", k4_model(), K4), ("k4 as printed", k4_model_literal(), K4),
                        ("k5", k5_model(), K5)]:
        w = refutes(m, f)
        print(f"{label:14s} {F.show(f):40s} refuted at {w}" if w else f"{label:14s} {F.show(f):40s} not refuted")
    m = k4_model_literal()
    print("\nprinted k4 model, w0 forces [](a1 -> a2):", forces(m, "w0", F.parse("[](a1 -> a2)")))

    rng = random.Random(0)
    models = [random_model(rng, rng.randint(1, 4)) for _ in range(200)]
    for text in ("[](a -> b) -> ([]a -> []b)", "[](a -> b) -> (<>a -> <>b)", "<>(a | b) -> <>a | <>b", "a -> []a"):
        hits = sum(refutes(m, F.parse(text)) is not None for m in models)
        print(f"{text:32s} refuted in {hits}/200 random models")


if __name__ == "__main__":
    main()
