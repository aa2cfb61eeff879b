import json
import subprocess
import sys

import pytest

from nestproof import formula as F
from nestproof.cli import main
from nestproof.corpus import CORPUS, ax_d, mp_composition
from nestproof.derivation import check, from_json, is_cut_free, to_json
from nestproof.calculus import SystemConfig, logic
from nestproof.kripke import k3_model


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def mp_file(tmp_path):
    p = tmp_path / "cut.json"
    p.write_text(json.dumps(to_json(mp_composition())))
    return p


def test_cf(capsys):
    code, out, _ = run(capsys, "cf", "c, [a, [@b], [b, c]]")
    assert code == 0
    assert F.parse(out) == F.parse("c -> []((a & <>(b & c)) -> []b)")


def test_parse(capsys):
    assert run(capsys, "parse", "a->b->c")[1].strip() == "a -> b -> c"
    code, out, _ = run(capsys, "--json", "parse", "[a, @b]")
    assert code == 0 and json.loads(out) == {"kind": "sequent", "text": "[a, @b]"}
    code, _, err = run(capsys, "parse", "a ->")
    assert code == 2 and err


def test_prove_d(capsys):
    code, out, _ = run(capsys, "prove", "--logic", "CD", "--json", "[]a -> <>a")
    assert code == 0
    d = from_json(json.loads(out)["derivation"])
    assert check(d, logic("CD")) is None


def test_prove_negative(capsys):
    code, out, _ = run(capsys, "prove", "--budget-height", "8", "<>bot -> bot")
    assert code == 1 and "not found" in out


def test_elim(capsys, mp_file, tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, out, _ = run(capsys, "elim", str(mp_file), "--logic", "CK", "--json", "--trace", str(trace))
    assert code == 0
    payload = json.loads(out)
    d = from_json(payload["derivation"])
    assert is_cut_free(d) and check(d, SystemConfig()) is None
    assert len(trace.read_text().splitlines()) == len(payload["trace"]) > 0


def test_elim_refuses_unsafe_logic(capsys, mp_file):
    code, _, err = run(capsys, "elim", str(mp_file), "--logic", "CKB")
    assert code == 1 and "safe" in err


def test_check_round_trip(capsys, tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps(to_json(ax_d())))
    assert run(capsys, "check", str(p), "--logic", "CD")[0] == 0
    code, out, _ = run(capsys, "check", str(p), "--logic", "CK")
    assert code == 1 and "disabled-rule" in out


def test_check_with_axiom_flags(capsys, tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps(to_json(ax_d())))
    assert run(capsys, "check", str(p), "--axioms", "X=d")[0] == 0


def test_obligations(capsys, tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps(to_json(ax_d())))
    code, out, _ = run(capsys, "obligations", str(p))
    assert code == 0 and out.splitlines()[-1] == "[](a -> a)"


def test_kripke_commands(capsys, tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(k3_model().to_json()))
    assert run(capsys, "kripke-validate", str(p))[0] == 0
    code, out, _ = run(capsys, "kripke-eval", str(p), "<>(a1 | a2) -> <>a1 | <>a2", "--world", "w0")
    assert code == 1 and "does not force" in out
    assert run(capsys, "kripke-eval", str(p), "top")[0] == 0


def test_corpus(capsys):
    code, out, _ = run(capsys, "corpus")
    assert code == 0
    assert len(out.splitlines()) == len(CORPUS)


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "print", str(bad))[0] == 2
    assert run(capsys, "corpus", "nope")[0] == 2
    assert run(capsys, "prove", "--logic", "nope", "a")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["prove", "--no-such-flag", "a"])
    assert e.value.code == 2


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "nestproof.cli", "cf", "a, @b"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "a -> b"
