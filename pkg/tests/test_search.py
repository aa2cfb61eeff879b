import pytest

from nestproof import formula as F
from nestproof.calculus import SystemConfig, logic
from nestproof.corpus import CORPUS
from nestproof.derivation import check, height, render
from nestproof.kripke import K3, K4, K5
from nestproof.search import Found, NotFoundWithinBudget, SearchBudget, prove, prove_sequent
from nestproof.sequent import Fml, Sequent, parse_sequent as P

PRIME = SystemConfig()
K1 = "[](a -> b) -> ([]a -> []b)"
K2 = "[](a -> b) -> (<>a -> <>b)"


def found(res, cfg, goal):
    assert isinstance(res, Found)
    assert check(res.derivation, cfg) is None
    assert res.derivation.conclusion == Sequent((Fml(F.parse(goal), True),))
    return res.derivation


@pytest.mark.parametrize("goal", [K1, K2])
def test_k1_k2_in_plain_system(goal):
    d = found(prove(goal, PRIME), PRIME, goal)
    assert height(d) <= 12


@pytest.mark.parametrize("name", ["axiom_d", "axiom_t", "axiom_b", "axiom_4", "axiom_5"])
def test_axioms_under_their_systems(name):
    e = CORPUS[name]
    d = found(prove(e.goal, e.cfg, SearchBudget(max_height=12)), e.cfg, e.goal)
    assert height(d) <= 12


def test_d_via_the_structural_rule():
    cfg = SystemConfig(Y=frozenset({"d"}))
    found(prove("[]a -> <>a", cfg), cfg, "[]a -> <>a")


@pytest.mark.parametrize("f", [K3, K4, K5], ids=["k3", "k4", "k5"])
def test_non_theorems_not_found(f):
    res = prove(f, PRIME, SearchBudget(max_height=16))
    assert isinstance(res, NotFoundWithinBudget)
    assert res.stats.depth_reached == 16 and not res.stats.fuel_exhausted


def test_b_dot_example():
    cfg = SystemConfig(Y=frozenset({"b"}))
    goal = "<>([]a | bot) -> a"
    found(prove(goal, cfg), cfg, goal)
    assert isinstance(prove(goal, PRIME, SearchBudget(max_height=10)), NotFoundWithinBudget)


def test_k3_and_k5_with_b():
    cfg = SystemConfig(Y=frozenset({"b"}))
    for f in (K3, K5):
        assert isinstance(prove(f, cfg, SearchBudget(max_height=12)), Found)


def test_deterministic():
    a = prove(K2, PRIME)
    b = prove(K2, PRIME)
    assert render(a.derivation) == render(b.derivation)


def test_cut_enabled_is_refused():
    with pytest.raises(ValueError):
        prove("a -> a", PRIME.with_(cut_enabled=True))


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(max_height=-1)
    with pytest.raises(ValueError):
        SearchBudget(fuel=0)


def test_fuel_exhaustion_is_reported():
    res = prove(K4, PRIME, SearchBudget(fuel=5))
    assert isinstance(res, NotFoundWithinBudget) and res.stats.fuel_exhausted


def test_sequent_goals():
    res = prove_sequent(P("a, [b], @a & a"), PRIME)
    assert isinstance(res, Found) and check(res.derivation, PRIME) is None
    assert isinstance(prove_sequent(P("a, @b"), PRIME, SearchBudget(max_height=6)), NotFoundWithinBudget)


@pytest.mark.parametrize("name", ["CK", "CD", "CT", "CK4", "CK45", "CD4", "CD45", "CS4", "CS5"])
def test_safe_logics_with_super_rules(name):
    cfg = logic(name, super_rules=True)
    found(prove(K1, cfg, SearchBudget(max_height=12)), cfg, K1)
