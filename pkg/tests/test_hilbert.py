import json
import random

import pytest

from nestproof import formula as F
from nestproof.calculus import R, SystemConfig
from nestproof.corpus import CORPUS, N, ax_d
from nestproof.derivation import located
from nestproof.hilbert import (
    AXIOMS, IPC, MODAL, MP, AxiomInstance, HilbertProof, Nec, check_hilbert, match_schema, obligation,
    obligations, schemas_for,
)
from nestproof.kripke import random_model, refutes

P = F.parse


def test_match_k1():
    sub = match_schema(MODAL["k1"], P("[](p -> q) -> ([]p -> []q)"))
    assert sub == {"A": P("p"), "B": P("q")}


def test_match_d_needs_equal_bodies():
    assert match_schema(AXIOMS["d"], P("[]a -> <>b")) is None


def test_match_t():
    assert match_schema(AXIOMS["t"], P("(p -> <>p) & ([]p -> p)")) == {"A": P("p")}


def test_basis_size():
    assert len(IPC) == 9
    assert set(schemas_for({"b"})) == set(IPC) | {"k1", "k2", "b"}
    with pytest.raises(ValueError):
        schemas_for({"x"})


def _nec_proof():
    t = P("a -> (a -> a)")
    return HilbertProof((
        (t, AxiomInstance("ipc1", {"A": P("a"), "B": P("a")})),
        (F.Box(t), Nec(0)),
        (P("[](a -> (a -> a)) -> ([]a -> [](a -> a))"), AxiomInstance("k1")),
        (P("[]a -> [](a -> a)"), MP(1, 2)),
    ))


def test_check_hilbert_ok():
    p = _nec_proof()
    assert check_hilbert(p) is None
    assert p.conclusion == P("[]a -> [](a -> a)")


def test_b_axiom_needs_b():
    p = HilbertProof(((P("(a -> []<>a) & (<>[]a -> a)"), AxiomInstance("b")),))
    err = check_hilbert(p)
    assert err is not None and "not available" in err.reason
    assert check_hilbert(p, X={"b"}) is None


def test_bad_indices_and_shapes():
    bad = HilbertProof(((P("[]a"), Nec(3)),))
    assert check_hilbert(bad).reason == "bad index"
    wrong = HilbertProof(((P("a -> (b -> a)"), AxiomInstance("ipc1")), (P("c"), MP(0, 0))))
    assert check_hilbert(wrong).reason == "modus ponens shape mismatch"
    notinst = HilbertProof(((P("a -> b"), AxiomInstance("ipc1")),))
    assert "not an instance" in check_hilbert(notinst).reason


def test_hilbert_json_round_trip():
    p = _nec_proof()
    back = HilbertProof.from_json(json.dumps(p.to_json()))
    assert back == p


def test_obligation_examples():
    assert obligation(N(R.ID, "a, @a")) == P("a -> a")
    assert obligation(N(R.IMP_R, "@a -> b", N(R.ID, "a, b, @b"))) == P("(a & b -> b) -> a -> b")


def test_imp_r_obligation():
    d = N(R.IMP_R, "@a -> b", N(R.PROPER, "a, @b"))
    assert obligation(d) == P("(a -> b) -> (a -> b)")


def test_d_axiom_obligations_are_pinned():
    d = located(ax_d(), CORPUS["axiom_d"].cfg)
    assert [F.show(f) for f in obligations(d)] == [
        "([]a -> <>a) -> []a -> <>a",
        "([]a -> []a) -> []a -> <>a",
        "[](a -> a) -> []a -> []a",
        "[](a -> a)",
    ]


def test_ck_obligations_of_a_searched_k1_proof_survive_random_models():
    from nestproof.search import prove
    d = prove("[](a -> b) -> ([]a -> []b)", SystemConfig()).derivation
    rng = random.Random(2)
    models = [random_model(rng, rng.randint(1, 4)) for _ in range(100)]
    for f in obligations(d):
        assert all(refutes(m, f) is None for m in models), F.show(f)


def test_d_obligation_is_refuted_in_ck():
    # the d_r step is not sound for plain CK: some model refutes its obligation
    d = located(ax_d(), CORPUS["axiom_d"].cfg)
    f = obligations(d)[1]
    rng = random.Random(0)
    assert any(refutes(random_model(rng, rng.randint(1, 3)), f) is not None for _ in range(200))
