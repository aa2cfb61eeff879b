import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import formulas
from nestproof import formula as F
from nestproof.kripke import (
    CONSTRUCTIVE, INTUITIONISTIC, K3, K4, K5, KripkeModel, forces, k3_model, k4_model, k4_model_literal, k5_model,
    random_model, refutes, validate,
)

P = F.parse


def test_k3_model():
    m = k3_model()
    assert validate(m) == []
    assert forces(m, "w0", P("<>(a1 | a2)"))
    assert not forces(m, "w0", P("<>a1 | <>a2"))
    assert refutes(m, K3) == "w0"


def test_k3_model_is_not_intuitionistic():
    bad = validate(k3_model(INTUITIONISTIC))
    assert any(v.kind == "F2" and v.witness == ("w0", "w1", "u0") for v in bad)


def test_k5_model():
    m = k5_model()
    assert validate(m) == []
    assert forces(m, "w0", P("<>bot")) and not forces(m, "w0", F.BOT)
    assert refutes(m, K5) == "w0"


def test_fallible_forces_everything():
    m = k5_model()
    for f in ("bot", "a", "[]bot", "<>bot"):
        assert forces(m, "u0", P(f))


def test_fallible_closure_violation():
    m = KripkeModel(("w", "v"), frozenset(), frozenset({("w", "v")}), frozenset({"w"}), {})
    assert [v.kind for v in validate(m)] == ["fallible not closed under R"]


def test_monotone_valuation_violation():
    m = KripkeModel(("w", "v"), frozenset({("w", "v")}), frozenset(), frozenset(), {"w": {"a"}})
    assert [v.kind for v in validate(m)] == ["valuation not monotone"]


def test_leq_is_closed_on_load():
    m = KripkeModel(("x", "y", "z"), frozenset({("x", "y"), ("y", "z")}), frozenset(), frozenset(), {})
    assert ("x", "z") in m.leq and ("y", "y") in m.leq


def test_corrected_k4_model():
    m = k4_model()
    assert validate(m) == []
    assert refutes(m, K4) == "w0"
    assert forces(m, "w0", P("<>a1 -> []a2"))
    assert not forces(m, "w0", P("[](a1 -> a2)"))


def test_literal_k4_model_evaluation_is_pinned():
    # as printed the model forces [](a1 -> a2) at w0, so it does not refute k4
    m = k4_model_literal()
    assert validate(m) == []
    assert forces(m, "u0", P("a1 -> a2"))
    assert forces(m, "w0", P("[](a1 -> a2)"))
    assert forces(m, "w0", P("<>a1 -> []a2"))
    assert refutes(m, K4) is None


def test_top_is_never_refuted():
    for m in (k3_model(), k4_model(), k5_model(), k4_model_literal()):
        assert refutes(m, F.TOP) is None


def test_unknown_world():
    with pytest.raises(KeyError):
        forces(k3_model(), "nowhere", P("a"))


def test_json_round_trip():
    m = k3_model()
    back = KripkeModel.from_json(json.loads(json.dumps(m.to_json())))
    assert back.leq == m.leq and back.R == m.R and back.flavor == CONSTRUCTIVE
    assert forces(back, "w0", P("<>(a1 | a2)"))


def test_intuitionistic_diamond_is_local():
    # one world with an R-successor forcing a; in the constructive reading a later world must also see one
    m = KripkeModel(("w", "w2", "u"), frozenset({("w", "w2")}), frozenset({("w", "u")}), frozenset(),
                    {"u": {"a"}}, CONSTRUCTIVE)
    assert not forces(m, "w", P("<>a"))
    i = KripkeModel(("w", "u"), frozenset(), frozenset({("w", "u")}), frozenset(), {"u": {"a"}}, INTUITIONISTIC)
    assert validate(i) == [] and forces(i, "w", P("<>a"))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 5), formulas(max_leaves=8))
def test_forcing_is_monotone(seed, n, f):
    m = random_model(random.Random(seed), n)
    assert validate(m) == []
    for w, v in m.leq:
        if forces(m, w, f):
            assert forces(m, v, f)
