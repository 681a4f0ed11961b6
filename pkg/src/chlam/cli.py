"""Command line front door.

Exit codes: 0 ok, 1 usage or parse error, 2 fuel exhausted / unresolved,
3 inapplicable (no separating context), 4 property failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bohm as bohm_mod
from . import harness, separate, types
from .reduction import Normal, evaluate_head, evaluate_head_trace
from .syntax import (
    ParseError,
    lift,
    parse_cterm,
    parse_term,
    print_cterm,
    print_context,
    print_term,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FUEL = 2
EXIT_INAPPLICABLE = 3
EXIT_PROPERTY = 4


def _default_fuel() -> int:
    env = os.environ.get("CHECKERS_FUEL")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            pass
    return 10000


def _read_term_arg(value):
    if value == "-":
        return sys.stdin.read()
    return value


def _common(sub, fuel=True, depth=False, seed=False, as_json=True):
    if fuel:
        sub.add_argument("--fuel", type=int, default=_default_fuel())
    if depth:
        sub.add_argument("--depth", type=int, default=6)
    if seed:
        sub.add_argument("--seed", type=int, default=0)
    if as_json:
        sub.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chlam", description="checkers lambda-calculus laboratory")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("parse", help="parse a term and print its canonical form")
    sp.add_argument("term")
    sp.add_argument("--checkers", action="store_true", help="parse as a checkers term")
    _common(sp, fuel=False)

    sp = sub.add_parser("reduce", help="checkers head evaluation with step counts")
    sp.add_argument("term")
    sp.add_argument("--trace", action="store_true")
    _common(sp)

    sp = sub.add_parser("bohm", help="print a Böhm tree approximant")
    sp.add_argument("term")
    _common(sp, depth=True)

    sp = sub.add_parser("compare", help="tree preorder comparison")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--mode", choices=("bohm", "bohm-eta"), default="bohm")
    sp.add_argument("--assume-divergence", action="store_true")
    _common(sp, depth=True)

    sp = sub.add_parser("separate", help="construct and verify a separating context")
    sp.add_argument("left_file")
    sp.add_argument("right_file")
    _common(sp, depth=True)

    sp = sub.add_parser("typecheck", help="check a derivation file")
    sp.add_argument("file")
    _common(sp, fuel=False)

    sp = sub.add_parser("infer-tight", help="tight typing via evaluation and expansion")
    sp.add_argument("term")
    _common(sp)

    sp = sub.add_parser("typings", help="bounded enumeration of typings")
    sp.add_argument("term")
    sp.add_argument("--cap", type=int, default=3, help="applicative size cap")
    sp.add_argument("--universe-depth", type=int, default=1)
    sp.add_argument("--multi-cap", type=int, default=2)
    _common(sp, fuel=False)

    sp = sub.add_parser("probe", help="finite-context interaction preorder probe")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--mode", choices=("preorder", "improvement"), default="preorder")
    sp.add_argument("--budget", type=int, default=4)
    _common(sp)

    sp = sub.add_parser("suite", help="run a property suite")
    sp.add_argument("name", help="suite name, or 'all'")
    sp.add_argument("--cases", type=int, default=None)
    _common(sp, seed=True)

    return p


def _outcome_json(out) -> dict:
    status = "normal" if isinstance(out, Normal) else "fuel-exhausted"
    return {"status": status, "k": out.k, "n": out.n}


def cmd_parse(args) -> int:
    text = _read_term_arg(args.term)
    if args.checkers:
        t = parse_cterm(text)
        rendered = print_cterm(t)
    else:
        t = parse_term(text)
        rendered = print_term(t)
    if args.json:
        print(json.dumps({"term": rendered}))
    else:
        print(rendered)
    return EXIT_OK


def cmd_reduce(args) -> int:
    ct = parse_cterm(_read_term_arg(args.term))
    out, steps = evaluate_head_trace(ct, args.fuel)
    if args.trace:
        for state, kind in steps:
            print(f"{kind} {print_cterm(state)}")
    if isinstance(out, Normal):
        if args.json:
            print(json.dumps({"result": print_cterm(out.hnf), **_outcome_json(out)}))
        else:
            if args.trace:
                print(f"{'':>11} {print_cterm(out.hnf)}")
            print(f"normal k={out.k} n={out.n}")
        return EXIT_OK
    if args.json:
        print(json.dumps({"state": print_cterm(out.state), **_outcome_json(out)}))
    else:
        print(f"fuel-exhausted k={out.k} n={out.n}")
    return EXIT_FUEL


def cmd_bohm(args) -> int:
    t = parse_term(_read_term_arg(args.term))
    approx = bohm_mod.bohm_approx(t, args.depth, args.fuel)
    if args.json:
        print(json.dumps(bohm_mod.approx_to_json(approx)))
    else:
        print(bohm_mod.render_approx(approx))
    return EXIT_OK


def cmd_compare(args) -> int:
    t = parse_term(_read_term_arg(args.left))
    u = parse_term(_read_term_arg(args.right))
    verdict, path = bohm_mod.compare_with_witness(
        t, u, args.depth, args.fuel, eta=(args.mode == "bohm-eta"),
        assume_divergence=args.assume_divergence,
    )
    if args.json:
        payload = {"verdict": str(verdict)}
        if path is not None:
            payload["witness_path"] = list(path)
        print(json.dumps(payload))
    else:
        print(verdict)
        if verdict is bohm_mod.FAILS and path is not None:
            print("witness path:", "<" + ",".join(map(str, path)) + ">")
    return EXIT_OK if verdict is not bohm_mod.UNKNOWN else EXIT_FUEL


def cmd_separate(args) -> int:
    with open(args.left_file) as fh:
        t = parse_term(fh.read())
    with open(args.right_file) as fh:
        u = parse_term(fh.read())
    try:
        result = separate.separate_terms(t, u, args.depth, args.fuel)
    except separate.FuelExceeded as e:
        print(f"fuel exceeded: {e}", file=sys.stderr)
        return EXIT_FUEL
    if result is None:
        print("no separating context constructed (no definite difference, or an "
              "unhandled head-variable collision)", file=sys.stderr)
        return EXIT_INAPPLICABLE
    left, right = result.transcript
    if args.json:
        print(json.dumps({
            "context": print_context(result.context),
            "K": result.K,
            "left": _outcome_json(left),
            "right": _outcome_json(right),
        }))
    else:
        print("context:", print_context(result.context))
        print("K:", result.K)
        for label, out in (("left", left), ("right", right)):
            status = "normal" if isinstance(out, Normal) else "fuel-exhausted"
            print(f"{label}: {status} k={out.k} n={out.n}")
    return EXIT_OK


def cmd_typecheck(args) -> int:
    with open(args.file) as fh:
        payload = json.load(fh)
    try:
        d = types.derivation_from_json(payload)
        report = types.check_derivation(d)
    except types.DerivationError as e:
        print(f"invalid: {e}", file=sys.stderr)
        return EXIT_PROPERTY
    if args.json:
        print(json.dumps({
            "valid": True,
            "k": report.k,
            "size": report.size,
            "type": types.linear_to_json(report.type) if not isinstance(report.type, types.Multi)
            else [types.linear_to_json(i) for i in report.type.items],
        }))
    else:
        print(f"valid: {report.env} |-{report.k} : {report.type} (size {report.size})")
    return EXIT_OK


def cmd_infer_tight(args) -> int:
    ct = parse_cterm(_read_term_arg(args.term))
    got = types.infer_tight(ct, args.fuel)
    if got is None:
        print("fuel-exhausted: no head normal form reached", file=sys.stderr)
        return EXIT_FUEL
    d, k = got
    c = d.conclusion
    if args.json:
        print(json.dumps({"k": k, "derivation": types.derivation_to_json(d)}))
    else:
        print(f"{c.env} |-{k} {print_cterm(c.subject)} : {c.type}")
    return EXIT_OK


def cmd_typings(args) -> int:
    ct = parse_cterm(_read_term_arg(args.term))
    universe = types.type_universe(args.universe_depth, args.multi_cap)
    found = types.enumerate_typings(ct, args.cap, universe)
    if args.json:
        print(json.dumps([
            {
                "env": {n: [types.linear_to_json(i) for i in m.items] for n, m in env.items},
                "k": k,
                "type": types.linear_to_json(ty),
            }
            for env, k, ty in found
        ]))
    else:
        for env, k, ty in found:
            print(f"{env} |-{k} : {ty}")
        if not found:
            print("(no linear typings within the bounds)")
    return EXIT_OK


def cmd_probe(args) -> int:
    t = parse_term(_read_term_arg(args.left))
    u = parse_term(_read_term_arg(args.right))
    report = harness.probe_preorder(t, u, args.budget, args.fuel, mode=args.mode)
    if args.json:
        payload = {
            "relation": report.relation,
            "contexts_tried": report.contexts_tried,
            "verdict": report.verdict,
        }
        if report.counterexample is not None:
            ce = report.counterexample
            payload["context"] = print_context(ce.context)
            payload["left"] = _outcome_json(ce.left)
            payload["right"] = _outcome_json(ce.right)
        print(json.dumps(payload))
    else:
        print(f"{report.relation}: {report.verdict} ({report.contexts_tried} contexts tried)")
        if report.counterexample is not None:
            ce = report.counterexample
            print("context:", print_context(ce.context))
            print(f"left k={ce.left.k} right k={ce.right.k}")
    return EXIT_OK


def cmd_suite(args) -> int:
    names = sorted(harness.SUITES) if args.name == "all" else [args.name]
    cfg = harness.GenConfig(seed=args.seed, max_size=12)
    ok = True
    reports = []
    for name in names:
        try:
            kwargs = {}
            if args.cases is not None:
                kwargs["cases"] = args.cases
            rep = harness.run_suite(name, cfg, **kwargs)
        except KeyError as e:
            print(e, file=sys.stderr)
            return EXIT_USAGE
        reports.append(rep)
        ok = ok and rep.passed
        if not args.json:
            status = "pass" if rep.passed else "FAIL"
            print(f"{rep.name}: {status} ({rep.cases} cases)")
            for f in rep.failures[:5]:
                print(f"  {f}")
    if args.json:
        print(json.dumps([r.to_json() for r in reports]))
    return EXIT_OK if ok else EXIT_PROPERTY


_COMMANDS = {
    "parse": cmd_parse,
    "reduce": cmd_reduce,
    "bohm": cmd_bohm,
    "compare": cmd_compare,
    "separate": cmd_separate,
    "typecheck": cmd_typecheck,
    "infer-tight": cmd_infer_tight,
    "typings": cmd_typings,
    "probe": cmd_probe,
    "suite": cmd_suite,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.cmd](args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as e:
        print(f"bad json: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
