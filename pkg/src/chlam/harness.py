"""Deterministic term generation, finite-context preorder probes, and the
property suites behind the test battery.

Probes sample the context-quantified interaction preorders: NoCounterexample
is always a bounded claim, and a probe never reports a counterexample out of
two fuel exhaustions. Context enumeration goes by size and tries white-lifted
contexts first; the separating context constructed from a tree difference,
when one exists, is tried before anything else.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .syntax import (
    App,
    BLACK,
    BVar,
    CApp,
    CLam,
    CTerm,
    Lam,
    NApp,
    NLam,
    NVar,
    Named,
    HOLE,
    Player,
    Term,
    Var,
    WHITE,
    free_vars,
    hole_count,
    lift,
    lift_context,
    parse_term,
    plug,
    print_cterm,
    print_term,
    substitute,
    term_size,
    to_named,
    wash,
)
from .reduction import (
    INTERACTION,
    SILENT,
    FuelExhausted,
    Normal,
    any_beta_steps,
    evaluate_head,
    evaluate_head_trace,
    head_normalize,
    head_step,
    head_step_ordinary,
    is_hnf,
)
from . import bohm as _bohm
from . import separate as _separate
from . import types as _types


# ---------------------------------------------------------------------------
# Generation


@dataclass(frozen=True)
class GenConfig:
    seed: int
    max_size: int = 12
    closed: bool = False
    player_mix: str = "mixed"  # "all-black" | "all-white" | "mixed"


_FREE_POOL = ("a", "b", "c")


def _players(mix: str):
    if mix == "all-black":
        return (BLACK,)
    if mix == "all-white":
        return (WHITE,)
    return (BLACK, WHITE)


def _leaf(rng: random.Random, depth: int, closed: bool) -> CTerm:
    if depth > 0 and (closed or rng.random() < 0.7):
        return BVar(rng.randrange(depth))
    return Var(rng.choice(_FREE_POOL))


def _gen(rng: random.Random, budget: int, depth: int, closed: bool, players) -> CTerm:
    leaf_ok = depth > 0 or not closed
    if budget <= 1:
        if leaf_ok:
            return _leaf(rng, depth, closed)
        return CLam(rng.choice(players), BVar(0))
    roll = rng.random()
    if budget >= 4 and roll < 0.35:
        # seed a redex so evaluation has something to do
        left = rng.randint(2, budget - 2)
        fun = CLam(rng.choice(players), _gen(rng, left - 1, depth + 1, closed, players))
        arg = _gen(rng, budget - 1 - left, depth, closed, players)
        return CApp(rng.choice(players), fun, arg)
    if roll < 0.55 or not leaf_ok:
        return CLam(rng.choice(players), _gen(rng, budget - 1, depth + 1, closed, players))
    if roll < 0.90 and budget >= 3:
        left = rng.randint(1, budget - 2)
        f = _gen(rng, left, depth, closed, players)
        a = _gen(rng, budget - 1 - left, depth, closed, players)
        return CApp(rng.choice(players), f, a)
    return _leaf(rng, depth, closed)


def gen_terms(cfg: GenConfig) -> Iterator[CTerm]:
    """Infinite deterministic stream of checkers terms."""
    rng = random.Random(cfg.seed)
    players = _players(cfg.player_mix)
    lo = max(2 if cfg.closed else 1, cfg.max_size // 2)
    while True:
        budget = rng.randint(lo, cfg.max_size)
        yield _gen(rng, budget, 0, cfg.closed, players)


def gen_ordinary_terms(cfg: GenConfig) -> Iterator[Term]:
    for ct in gen_terms(cfg):
        yield wash(ct)


def gen_hnfs(cfg: GenConfig) -> Iterator[CTerm]:
    """Head normal forms: lam-prefix over a variable head with argument terms."""
    rng = random.Random(cfg.seed)
    players = _players(cfg.player_mix)
    while True:
        n = rng.randint(0, 3)
        n_args = rng.randint(0, 3)
        head: CTerm
        if n > 0 and rng.random() < 0.6:
            head = BVar(rng.randrange(n))
        else:
            head = Var(rng.choice(_FREE_POOL))
        t = head
        for _ in range(n_args):
            arg = _gen(rng, rng.randint(1, max(1, cfg.max_size // 3)), n, False, players)
            t = CApp(rng.choice(players), t, arg)
        for _ in range(n):
            t = CLam(rng.choice(players), t)
        yield t


# ---------------------------------------------------------------------------
# Context enumeration for probes


_POOL = [Var("z"), Var("w"), parse_term("I")]


def _context_shapes(budget: int):
    """Ordinary context skeletons by size, smallest first."""
    by_size = {1: [HOLE]}
    for size in range(2, budget + 1):
        shapes = []
        for inner in by_size.get(size - 1, []):
            shapes.append(NLam(None, "x", inner))
        for t in _POOL:
            cost = term_size(t)
            for inner in by_size.get(size - 1 - cost, []):
                shapes.append(NApp(None, inner, to_named(t)))
                shapes.append(NApp(None, to_named(t), inner))
        by_size[size] = shapes
    for size in sorted(by_size):
        yield from by_size[size]


def _tag_assignments(shape: Named):
    """All player taggings of a context, white-heavy orderings first."""
    slots = []

    def count(node):
        match node:
            case NLam(_, _, body):
                slots.append(None)
                count(body)
            case NApp(_, fun, arg):
                slots.append(None)
                count(fun)
                count(arg)
            case _:
                pass

    count(shape)
    for tags in itertools.product((WHITE, BLACK), repeat=len(slots)):
        it = iter(tags)

        def assign(node):
            match node:
                case NLam(_, binder, body):
                    return NLam(next(it), binder, assign(body))
                case NApp(_, fun, arg):
                    return NApp(next(it), assign(fun), assign(arg))
                case _:
                    return node

        yield assign(shape)


def candidate_contexts(t: Term, u: Term, budget: int, fuel: int) -> Iterator[Named]:
    """Checkers contexts to try: the constructed separator first, then all
    taggings of each skeleton, white-lifted ones first."""
    result = None
    try:
        result = _separate.separate_terms(t, u, depth=budget, fuel=fuel)
    except _separate.SeparationError:
        result = None
    if result is not None:
        yield lift_context(WHITE, result.context)
    for shape in _context_shapes(budget):
        yield from _tag_assignments(shape)


# ---------------------------------------------------------------------------
# Probes


@dataclass(frozen=True)
class Counterexample:
    context: Named
    left: object
    right: object


@dataclass(frozen=True)
class ProbeReport:
    relation: str  # "interaction-preorder" | "interaction-improvement"
    contexts_tried: int
    verdict: str  # "no-counterexample" | "counterexample"
    counterexample: Optional[Counterexample] = None


def probe_preorder(t: Term, u: Term, budget: int, fuel: int, mode: str = "preorder") -> ProbeReport:
    """Sample checkers contexts for a violation of the chosen relation.

    A counterexample needs the left plugging to converge definitely; the
    right side must converge with an offending index or carry a divergence
    certificate. Fuel-vs-fuel is never a counterexample.
    """
    relation = "interaction-preorder" if mode == "preorder" else "interaction-improvement"
    bt, bu = lift(BLACK, t), lift(BLACK, u)
    tried = 0
    for ctx in candidate_contexts(t, u, budget, fuel):
        tried += 1
        s1, o1 = head_normalize(plug(ctx, bt), fuel, detect_loops=True)
        if s1 != "normal":
            continue
        s2, o2 = head_normalize(plug(ctx, bu), fuel, detect_loops=True)
        if s2 == "fuel":
            continue
        if s2 == "loop":
            return ProbeReport(relation, tried, "counterexample", Counterexample(ctx, o1, o2))
        bad = o2.k != o1.k if mode == "preorder" else o2.k > o1.k
        if bad:
            return ProbeReport(relation, tried, "counterexample", Counterexample(ctx, o1, o2))
    return ProbeReport(relation, tried, "no-counterexample")


def replay_counterexample(report: ProbeReport, t: Term, u: Term, fuel: int) -> bool:
    """Re-verify a reported counterexample in isolation."""
    if report.counterexample is None:
        return False
    ctx = report.counterexample.context
    s1, o1 = head_normalize(plug(ctx, lift(BLACK, t)), fuel, detect_loops=True)
    s2, o2 = head_normalize(plug(ctx, lift(BLACK, u)), fuel, detect_loops=True)
    if s1 != "normal":
        return False
    if s2 == "loop":
        return True
    if s2 != "normal":
        return False
    if report.relation == "interaction-preorder":
        return o2.k != o1.k
    return o2.k > o1.k


# ---------------------------------------------------------------------------
# Local joinability (confluence smoke test)


def joins(t1: CTerm, t2: CTerm, fuel: int) -> bool:
    """Bounded bidirectional search for a common ->bc reduct."""
    if t1 == t2:
        return True
    seen = ({t1}, {t2})
    fronts = (deque([t1]), deque([t2]))
    budget = fuel
    while budget > 0 and (fronts[0] or fronts[1]):
        side = 0 if fronts[0] and (len(seen[0]) <= len(seen[1]) or not fronts[1]) else 1
        cur = fronts[side].popleft()
        for red, _ in any_beta_steps(cur):
            if red in seen[1 - side]:
                return True
            if red not in seen[side]:
                seen[side].add(red)
                fronts[side].append(red)
        budget -= 1
    return False


# ---------------------------------------------------------------------------
# Suites


@dataclass
class SuiteReport:
    name: str
    cases: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self):
        return {
            "suite": self.name,
            "cases": self.cases,
            "passed": self.passed,
            "failures": self.failures[:20],
        }


def _take(it, n):
    return list(itertools.islice(it, n))


def suite_roundtrip(cfg: GenConfig, cases: int = 2000) -> SuiteReport:
    rep = SuiteReport("roundtrip", cases)
    from .syntax import parse_cterm

    for i, ct in enumerate(_take(gen_terms(cfg), cases)):
        if parse_cterm(print_cterm(ct)) != ct:
            rep.failures.append(f"case {i}: {print_cterm(ct)}")
        t = wash(ct)
        if parse_term(print_term(t)) != t:
            rep.failures.append(f"case {i} (ordinary): {print_term(t)}")
    return rep


def suite_substitutivity(cfg: GenConfig, cases: int = 400) -> SuiteReport:
    rep = SuiteReport("substitutivity", cases)
    rng = random.Random(cfg.seed ^ 0x5EED)
    gen = gen_terms(cfg)
    checked = 0
    for i, ct in enumerate(gen):
        if checked >= cases:
            break
        steps = any_beta_steps(ct)
        hs = head_step(ct)
        if hs is not None:
            steps.append(hs)
        if not steps:
            continue
        checked += 1
        ct2, _ = rng.choice(steps)
        x = rng.choice(sorted(free_vars(ct)) or ["a"])
        u = next(gen_terms(GenConfig(cfg.seed + i + 1, 6, closed=True, player_mix=cfg.player_mix)))
        lhs = substitute(ct, x, u)
        rhs = substitute(ct2, x, u)
        if rhs not in [r for r, _ in any_beta_steps(lhs)]:
            rep.failures.append(f"seed {cfg.seed}+{i}: {print_cterm(ct)} [{x} := {print_cterm(u)}]")
    rep.cases = checked
    return rep


def suite_lifting(cfg: GenConfig, cases: int = 500) -> SuiteReport:
    rep = SuiteReport("lifting", cases)
    for i, t in enumerate(_take(gen_ordinary_terms(cfg), cases)):
        for player in (BLACK, WHITE):
            lt = lift(player, t)
            if wash(lt) != t:
                rep.failures.append(f"case {i}: wash/lift")
            if is_hnf(t) != is_hnf(lt):
                rep.failures.append(f"case {i}: hnf preservation")
            r = head_step_ordinary(t)
            lr = head_step(lt)
            if (r is None) != (lr is None):
                rep.failures.append(f"case {i}: step existence")
            elif r is not None:
                if lr[0] != lift(player, r) or lr[1] is not SILENT:
                    rep.failures.append(f"case {i}: lifted step is not the silent lift")
                if wash(lr[0]) != r:
                    rep.failures.append(f"case {i}: projection through wash")
    return rep


def suite_tagging(cfg: GenConfig, cases: int = 400) -> SuiteReport:
    rep = SuiteReport("tagging", cases)
    checked = 0
    for i, ct in enumerate(gen_terms(cfg)):
        if checked >= cases:
            break
        t = wash(ct)
        r = head_step_ordinary(t)
        if r is None:
            continue
        checked += 1
        lr = head_step(ct)
        if lr is None or wash(lr[0]) != r:
            rep.failures.append(f"case {i}: no checkers step projecting to the head step")
    rep.cases = checked
    return rep


def suite_confluence(cfg: GenConfig, cases: int = 10000, join_fuel: int = 200) -> SuiteReport:
    rep = SuiteReport("confluence", cases)
    for i, ct in enumerate(_take(gen_terms(cfg), cases)):
        reducts = list(dict.fromkeys(r for r, _ in any_beta_steps(ct)))
        for a, b in itertools.combinations(reducts, 2):
            if not joins(a, b, join_fuel):
                rep.failures.append(f"case {i}: {print_cterm(ct)}")
                break
    return rep


def suite_extraction(cfg: GenConfig, cases_per: int = 3) -> SuiteReport:
    rep = SuiteReport("extraction-property", 0)
    rng = random.Random(cfg.seed)
    total = 0
    for n in range(1, 6):
        for i in range(1, n + 1):
            for c in range(cases_per):
                total += 1
                args = [
                    wash(_gen(random.Random(rng.randrange(1 << 30)), rng.randint(2, 6), 0, True, (BLACK,)))
                    for _ in range(n)
                ]
                probe = _separate.tupler(n)
                for a in args:
                    probe = App(probe, a)
                probe = App(probe, _separate.selector(n, i))
                state = probe
                found = state == args[i - 1]
                for _ in range(200):
                    nxt = head_step_ordinary(state)
                    if nxt is None:
                        break
                    state = nxt
                    if state == args[i - 1]:
                        found = True
                        break
                if not found:
                    rep.failures.append(f"n={n} i={i} case {c}")
    rep.cases = total
    return rep


def suite_interaction_additivity(cfg: GenConfig, cases: int = 500, fuel: int = 300) -> SuiteReport:
    rep = SuiteReport("interaction-additivity", cases)
    for i, ct in enumerate(_take(gen_terms(cfg), cases)):
        out, steps = evaluate_head_trace(ct, fuel)
        if out.k != sum(1 for _, kind in steps if kind is INTERACTION):
            rep.failures.append(f"case {i}: {print_cterm(ct)}")
    return rep


def suite_subject_reduction(cfg: GenConfig, cases: int = 300, fuel: int = 2000) -> SuiteReport:
    rep = SuiteReport("subject-reduction", 0)
    checked = 0
    for i, ct in enumerate(gen_terms(cfg)):
        if checked >= cases:
            break
        got = _types.infer_tight(ct, fuel)
        if got is None:
            continue
        checked += 1
        d, _ = got
        cur = d
        while head_step(cur.conclusion.subject) is not None:
            before = _types.check_derivation(cur)
            nxt, kind = _types.subject_reduce(cur)
            after = _types.check_derivation(nxt)
            if after.size != before.size - 1:
                rep.failures.append(f"case {i}: size did not drop by 1")
                break
            if after.k != before.k - (1 if kind is INTERACTION else 0):
                rep.failures.append(f"case {i}: index law violated")
                break
            cur = nxt
    rep.cases = checked
    return rep


def suite_tight_exactness(cfg: GenConfig, cases: int = 1000, fuel: int = 10000) -> SuiteReport:
    rep = SuiteReport("tight-exactness", 0)
    checked = 0
    for i, ct in enumerate(gen_terms(cfg)):
        if checked >= cases:
            break
        out = evaluate_head(ct, fuel)
        if not isinstance(out, Normal):
            continue
        checked += 1
        got = _types.infer_tight(ct, fuel)
        if got is None:
            rep.failures.append(f"case {i}: inference gave up on a normalizing term")
            continue
        d, k = got
        if k != out.k:
            rep.failures.append(f"case {i}: inferred {k} but evaluation counts {out.k}")
            continue
        concl = d.conclusion
        if not _types.is_tight(concl.env, concl.type):
            rep.failures.append(f"case {i}: inferred typing is not tight")
    rep.cases = checked
    return rep


def suite_tight_hnf(cfg: GenConfig, cases: int = 1000) -> SuiteReport:
    rep = SuiteReport("tight-hnf-zero-interaction", cases)
    for i, h in enumerate(_take(gen_hnfs(cfg), cases)):
        d = _types.derive_hnf_tight(h)
        c = d.conclusion
        if c.k != 0:
            rep.failures.append(f"case {i}: k = {c.k}")
        elif not _types.is_tight(c.env, c.type):
            rep.failures.append(f"case {i}: not tight")
        else:
            _types.check_derivation(d)
    return rep


def suite_bohm_beta_invariance(cfg: GenConfig, cases: int = 300, depth: int = 3, fuel: int = 200) -> SuiteReport:
    rep = SuiteReport("bohm-beta-invariance", 0)
    rng = random.Random(cfg.seed ^ 0xB0)
    checked = 0
    for i, t in enumerate(gen_ordinary_terms(cfg)):
        if checked >= cases:
            break
        reducts = [wash(r) for r, _ in any_beta_steps(lift(BLACK, t))]
        if not reducts:
            continue
        checked += 1
        u = rng.choice(reducts)
        a = _bohm.bohm_approx(t, depth, fuel)
        b = _bohm.bohm_approx(u, depth, fuel)
        if not _approx_compatible(a, b):
            rep.failures.append(f"case {i}: {print_term(t)} vs {print_term(u)}")
    rep.cases = checked
    return rep


def _approx_compatible(a, b, env=None) -> bool:
    """Equal wherever both approximants are resolved nodes."""
    env = env or {}
    if not isinstance(a, _bohm.Node) or not isinstance(b, _bohm.Node):
        return True
    if len(a.binders) != len(b.binders) or len(a.children) != len(b.children):
        return False
    env = dict(env)
    for x, y in zip(a.binders, b.binders):
        env[x] = y
    if env.get(a.head, a.head) != b.head:
        return False
    return all(_approx_compatible(c, d, env) for c, d in zip(a.children, b.children))


def suite_eta_improvement(cfg: GenConfig, budget: int = 5, fuel: int = 400) -> SuiteReport:
    """Experimental probe of the conjecture that eta-reduction improves
    interaction counts; evidence only, never a claimed result."""
    pairs = [
        (parse_term(r"\x y. x y"), parse_term("I")),
        (parse_term(r"\x y z. x y z"), parse_term(r"\x y. x y")),
        (parse_term(r"\x. K x"), parse_term("K")),
    ]
    rep = SuiteReport("eta-improvement-experiment", len(pairs))
    for i, (redex, reduct) in enumerate(pairs):
        report = probe_preorder(redex, reduct, budget, fuel, mode="improvement")
        if report.verdict == "counterexample":
            rep.failures.append(f"pair {i}: counterexample found (conjecture violated)")
    return rep


SUITES = {
    "roundtrip": suite_roundtrip,
    "substitutivity": suite_substitutivity,
    "lifting": suite_lifting,
    "tagging": suite_tagging,
    "confluence": suite_confluence,
    "extraction-property": suite_extraction,
    "interaction-additivity": suite_interaction_additivity,
    "subject-reduction": suite_subject_reduction,
    "tight-exactness": suite_tight_exactness,
    "tight-hnf": suite_tight_hnf,
    "bohm-beta-invariance": suite_bohm_beta_invariance,
    "eta-improvement": suite_eta_improvement,
}


def run_suite(name: str, cfg: GenConfig, **kwargs) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    return SUITES[name](cfg, **kwargs)
