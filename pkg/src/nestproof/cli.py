"""The `nest` command line tool.

Exit codes: 0 success, 1 negative verdict (check failed, nothing found,
model invalid or formula refuted), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from . import formula as F
from . import hilbert, kripke
from .calculus import LOGICS, SystemConfig, logic
from .cutelim import ElimError, eliminate_cuts, to_hat
from .derivation import CheckFailed, check, from_json, render, to_json
from .search import Found, SearchBudget, prove_sequent
from .sequent import Fml, ParseError, Sequent, corresponding_formula, parse_sequent, show


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config


def _axiom_set(text: str, allowed: str) -> frozenset:
    names = [x.strip() for x in text.replace(",", " ").split() if x.strip()]
    if len(names) == 1 and names[0] not in allowed and all(c in allowed for c in names[0]):
        names = list(names[0])
    bad = [x for x in names if x not in allowed]
    if bad:
        raise UsageError(f"unknown axioms {bad}; allowed: {allowed}")
    return frozenset(names)


def config_from(args) -> SystemConfig:
    if args.logic and args.axioms:
        raise UsageError("give either --logic or --axioms, not both")
    if args.logic:
        try:
            cfg = logic(args.logic)
        except ValueError as e:
            raise UsageError(str(e)) from None
    else:
        X, Y = frozenset(), frozenset()
        for part in args.axioms or []:
            key, _, val = part.partition("=")
            if key.upper() == "X":
                X = _axiom_set(val, "dt4")
            elif key.upper() == "Y":
                Y = _axiom_set(val, "dtb45")
            else:
                raise UsageError(f"--axioms expects X=.. and Y=.., got {part!r}")
        cfg = SystemConfig(X=X, Y=Y)
    proper = frozenset(_parse_formula(f) for f in args.proper_axiom or [])
    return cfg.with_(base=args.base, super_rules=args.super, cut_enabled=args.cut,
                     proper_axioms=proper, admissible=args.admissible)


def _parse_formula(text: str) -> F.Formula:
    try:
        return F.parse(text)
    except ParseError as e:
        raise UsageError(f"cannot parse formula {text!r}: {e}") from None


def _parse_goal(text: str) -> Sequent:
    """A sequent if the text has an output marker or brackets, else a formula goal."""
    try:
        if "@" in text:
            return parse_sequent(text)
        return Sequent((Fml(F.parse(text), True),))
    except ParseError as e:
        raise UsageError(f"cannot parse {text!r}: {e}") from None


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from None


def _read_derivation(path: str):
    try:
        return from_json(_read_json(path))
    except (ValueError, ParseError) as e:
        raise UsageError(str(e)) from None


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2))
    elif text:
        print(text)


# ---------------------------------------------------------------- commands


def cmd_parse(args) -> int:
    text = args.text
    if "@" in text or "[" in text.replace("[]", ""):
        try:
            s = parse_sequent(text)
        except ParseError as e:
            raise UsageError(str(e)) from None
        _emit(args, {"kind": "sequent", "text": show(s)}, show(s))
    else:
        f = _parse_formula(text)
        _emit(args, {"kind": "formula", "text": F.show(f), "depth": F.depth(f)}, F.show(f))
    return 0


def cmd_print(args) -> int:
    d = _read_derivation(args.file)
    _emit(args, to_json(d), render(d))
    return 0


def cmd_cf(args) -> int:
    try:
        s = parse_sequent(args.sequent)
    except ParseError as e:
        raise UsageError(str(e)) from None
    f = corresponding_formula(s)
    _emit(args, {"sequent": show(s), "formula": F.show(f)}, F.show(f))
    return 0


def cmd_check(args) -> int:
    d = _read_derivation(args.file)
    cfg = config_from(args)
    err = check(d, cfg)
    if err is None:
        _emit(args, {"ok": True}, "ok")
        return 0
    _emit(args, {"ok": False, "error": err.to_json()}, f"rejected: {err}")
    return 1


def _budget(args) -> SearchBudget:
    kw = {}
    if args.budget_height is not None:
        kw["max_height"] = args.budget_height
    if args.fuel is not None:
        kw["fuel"] = args.fuel
    try:
        return SearchBudget(**kw)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_prove(args) -> int:
    goal = _parse_goal(args.goal)
    cfg = config_from(args).with_(cut_enabled=False)
    res = prove_sequent(goal, cfg, _budget(args))
    if isinstance(res, Found):
        payload = {"found": True, "derivation": to_json(res.derivation), "stats": res.stats.to_json()}
        _emit(args, payload, render(res.derivation) if not args.quiet else "found")
        return 0
    _emit(args, {"found": False, "stats": res.stats.to_json()},
          f"not found within budget (height {res.stats.depth_reached})")
    return 1


def cmd_elim(args) -> int:
    d = _read_derivation(args.file)
    cfg = config_from(args).with_(cut_enabled=True)
    err = check(d, cfg.with_(admissible=True))
    if err is not None:
        _emit(args, {"ok": False, "error": err.to_json()}, f"input does not check: {err}")
        return 1
    try:
        if cfg.base == "NCK" and args.to_hat:
            d = to_hat(d, cfg.with_(admissible=True))
            cfg = cfg.with_(base="NCKPrime")
        fallback = SearchBudget(max_height=args.fallback_height) if args.fallback_height else None
        kw = {"fallback": fallback}
        if args.fuel is not None:
            kw["fuel"] = args.fuel
        out, trace = eliminate_cuts(d, cfg.with_(admissible=True), **kw)
    except ElimError as e:
        print(f"elim: {e}", file=sys.stderr)
        if args.trace and isinstance(e.detail, object) and hasattr(e.detail, "to_jsonl"):
            _write(args.trace, e.detail.to_jsonl())
        return 1
    except CheckFailed as e:
        print(f"elim: {e}", file=sys.stderr)
        return 1
    if args.trace:
        _write(args.trace, trace.to_jsonl())
    payload = {"derivation": to_json(out), "trace": [s.to_json() for s in trace.steps]}
    _emit(args, payload, render(out) + f"\n-- {len(trace)} step(s)")
    return 0


def _write(path: str, text: str):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e}") from None


def cmd_obligations(args) -> int:
    d = _read_derivation(args.file)
    obs = [F.show(f) for f in hilbert.obligations(d)]
    _emit(args, {"obligations": obs}, "\n".join(obs))
    return 0


def _read_model(path: str) -> kripke.KripkeModel:
    try:
        return kripke.KripkeModel.from_json(_read_json(path))
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"bad model: {e}") from None


def cmd_kripke_validate(args) -> int:
    m = _read_model(args.model)
    bad = kripke.validate(m)
    _emit(args, {"valid": not bad, "violations": [{"kind": v.kind, "witness": list(v.witness)} for v in bad]},
          "valid" if not bad else "\n".join(str(v) for v in bad))
    return 0 if not bad else 1


def cmd_kripke_eval(args) -> int:
    m = _read_model(args.model)
    f = _parse_formula(args.formula)
    worlds = [args.world] if args.world else list(m.worlds)
    try:
        forced = {w: kripke.forces(m, w, f) for w in worlds}
    except KeyError as e:
        raise UsageError(str(e)) from None
    ok = all(forced.values())
    text = "\n".join(f"{w}: {'forces' if v else 'does not force'}" for w, v in forced.items())
    _emit(args, {"formula": F.show(f), "forced": forced, "all": ok}, text)
    return 0 if ok else 1


def _corpus_item(name):
    from .corpus import CORPUS
    e = CORPUS[name]
    err = check(e.derivation(), e.cfg)
    return name, e.group, None if err is None else str(err)


def cmd_corpus(args) -> int:
    from .corpus import CORPUS
    names = args.names or list(CORPUS)
    unknown = [n for n in names if n not in CORPUS]
    if unknown:
        raise UsageError(f"unknown corpus entries {unknown}; known: {', '.join(CORPUS)}")
    with ThreadPoolExecutor() as pool:
        rows = list(pool.map(_corpus_item, names))
    failed = [r for r in rows if r[2] is not None]
    lines = [f"{'ok  ' if err is None else 'FAIL'} {name} [{group}]" + (f": {err}" if err else "")
             for name, group, err in rows]
    _emit(args, {"items": [{"name": n, "group": g, "error": e} for n, g, e in rows], "failed": len(failed)},
          "\n".join(lines))
    return 0 if not failed else 1


# ---------------------------------------------------------------- argument parsing


def _system_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("system")
    g.add_argument("--logic", help=f"preset: {', '.join(LOGICS)}")
    g.add_argument("--axioms", nargs="+", metavar="X=..|Y=..", help="e.g. --axioms X=t,4 Y=b,5")
    g.add_argument("--base", choices=["NCK", "NCKPrime"], default="NCKPrime")
    g.add_argument("--super", action="store_true", help="use the super rules for 4, b, 5")
    g.add_argument("--cut", action="store_true", help="allow cut")
    g.add_argument("--admissible", action="store_true", help="allow weak and nec")
    g.add_argument("--proper-axiom", action="append", metavar="F", help="allow F as a proper axiom")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nest", description="Nested sequents for constructive modal logics.")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", help="parse and pretty-print a formula or sequent")
    s.add_argument("text")
    s.set_defaults(fn=cmd_parse)

    s = sub.add_parser("print", help="render a derivation JSON file")
    s.add_argument("file")
    s.set_defaults(fn=cmd_print)

    s = sub.add_parser("cf", help="corresponding formula of a sequent")
    s.add_argument("sequent")
    s.set_defaults(fn=cmd_cf)

    s = sub.add_parser("check", help="check a derivation")
    s.add_argument("file")
    _system_flags(s)
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("prove", help="search for a cut-free proof")
    s.add_argument("goal", help="a formula, or a sequent containing @")
    _system_flags(s)
    s.add_argument("--budget-height", type=int)
    s.add_argument("--fuel", type=int)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(fn=cmd_prove)

    s = sub.add_parser("elim", help="eliminate cuts from a derivation")
    s.add_argument("file")
    _system_flags(s)
    s.add_argument("--fuel", type=int, help="rewrite step cap (default 10^6)")
    s.add_argument("--trace", metavar="FILE", help="write the trace as JSON lines")
    s.add_argument("--to-hat", action="store_true", help="convert dia_l to dia_l_hat first")
    s.add_argument("--fallback-height", type=int, default=0,
                   help="replace a stuck cut by a searched proof of at most this height")
    s.set_defaults(fn=cmd_elim)

    s = sub.add_parser("obligations", help="soundness obligations of every rule instance")
    s.add_argument("file")
    s.set_defaults(fn=cmd_obligations)

    s = sub.add_parser("kripke-validate", help="check the frame conditions of a model")
    s.add_argument("model")
    s.set_defaults(fn=cmd_kripke_validate)

    s = sub.add_parser("kripke-eval", help="evaluate a formula in a model")
    s.add_argument("model")
    s.add_argument("formula")
    s.add_argument("--world")
    s.set_defaults(fn=cmd_kripke_eval)

    s = sub.add_parser("corpus", help="check the built-in transcribed derivations")
    s.add_argument("names", nargs="*")
    s.set_defaults(fn=cmd_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    # let --json appear anywhere on the line
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    argv = [a for a in argv if a != "--json"]
    args = parser.parse_args(argv)
    args.json = want_json
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"nest: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
