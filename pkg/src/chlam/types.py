"""The checkers multi-type system: non-idempotent intersection types with
player-tagged arrows.

Linear types are the atom X or arrows M ->{c,c'} L where c is the player of
the abstraction producing the value and c' the player of the application
consuming it; the arrow is silent when the tags agree. Judgments carry an
index k counting the interaction application rules in the derivation; the
application rule adds 1 exactly when it consumes an interaction arrow.

Derivations are immutable trees checked by `check_derivation`; all
transformers (splitting, merging, substitution and its inverse, subject
reduction/expansion, tight inference, transport along tree similarity) are
implemented as executable functions whose outputs re-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .syntax import (
    BLACK,
    BVar,
    CApp,
    CLam,
    CTerm,
    NameSupply,
    Player,
    Term,
    Var,
    WHITE,
    close_term,
    free_vars,
    lift,
    locally_closed,
    open_term,
    parse_cterm,
    print_cterm,
    substitute,
)
from .reduction import (
    INTERACTION,
    SILENT,
    StepKind,
    evaluate_head_trace,
    head_normalize_ordinary,
    head_step,
    is_hnf,
)
from .bohm import spine_data, _spine


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Atom:
    def __str__(self) -> str:
        return "X"


ATOM = Atom()


@dataclass(frozen=True)
class Arrow:
    arg: "Multi"
    src: Player  # abstraction-side tag
    dst: Player  # application-side tag
    res: "Linear"

    @property
    def silent(self) -> bool:
        return self.src == self.dst

    def __str__(self) -> str:
        return f"{self.arg} ->{self.src}{self.dst} {self.res}"


Linear = Union[Atom, Arrow]


def _type_key(x) -> tuple:
    match x:
        case Atom():
            return (0,)
        case Arrow(arg, src, dst, res):
            return (1, arg.key(), src.value, dst.value, _type_key(res))
        case Multi(items):
            return tuple(_type_key(i) for i in items)
    raise TypeError(f"not a type: {x!r}")


@dataclass(frozen=True)
class Multi:
    """Multiset of linear types in canonical (sorted) order."""

    items: tuple

    @staticmethod
    def of(linears) -> "Multi":
        return Multi(tuple(sorted(linears, key=_type_key)))

    def key(self):
        return _type_key(self)

    def merge(self, other: "Multi") -> "Multi":
        return Multi.of(self.items + other.items)

    def __len__(self) -> int:
        return len(self.items)

    def __str__(self) -> str:
        return "[" + ", ".join(str(i) for i in self.items) + "]"


ZERO = Multi(())


def multi(*linears) -> Multi:
    return Multi.of(linears)


GenericType = Union[Linear, Multi]


def gamma(c1: Player, c2: Player) -> int:
    """The index increment of an application: 1 on an interaction arrow."""
    return 0 if c1 == c2 else 1


# ---------------------------------------------------------------------------
# Environments and judgments


@dataclass(frozen=True)
class TypeEnv:
    items: tuple  # sorted (name, Multi) pairs, never ZERO

    @staticmethod
    def of(mapping) -> "TypeEnv":
        pairs = [(n, m) for n, m in dict(mapping).items() if len(m) > 0]
        return TypeEnv(tuple(sorted(pairs)))

    def get(self, name: str) -> Multi:
        for n, m in self.items:
            if n == name:
                return m
        return ZERO

    def domain(self) -> frozenset:
        return frozenset(n for n, _ in self.items)

    def merge(self, other: "TypeEnv") -> "TypeEnv":
        out = {n: m for n, m in self.items}
        for n, m in other.items:
            out[n] = out[n].merge(m) if n in out else m
        return TypeEnv.of(out)

    def without(self, name: str) -> "TypeEnv":
        return TypeEnv(tuple((n, m) for n, m in self.items if n != name))

    def with_entry(self, name: str, m: Multi) -> "TypeEnv":
        if len(m) == 0:
            return self.without(name)
        out = {n: mm for n, mm in self.items if n != name}
        out[name] = m
        return TypeEnv.of(out)

    def rename(self, old: str, new: str) -> "TypeEnv":
        return TypeEnv.of({(new if n == old else n): m for n, m in self.items})

    def __str__(self) -> str:
        return ", ".join(f"{n}:{m}" for n, m in self.items) if self.items else "(empty)"


EMPTY_ENV = TypeEnv(())


@dataclass(frozen=True)
class Judgment:
    env: TypeEnv
    k: int
    subject: CTerm
    type: GenericType


class Rule(Enum):
    AX = "ax"
    MANY = "many"
    LAM = "lam"
    APP_S = "app_s"
    APP_I = "app_i"


@dataclass(frozen=True)
class Derivation:
    rule: Rule
    conclusion: Judgment
    premises: tuple
    binder: Optional[str] = None  # LAM only: name opening the body in the premise
    size: int = 0  # number of application rules; derived, set by the builders


# -- builders: the only sanctioned way to grow derivations


def ax(name: str, L: Linear) -> Derivation:
    j = Judgment(TypeEnv.of({name: multi(L)}), 0, Var(name), L)
    return Derivation(Rule.AX, j, ())


def many(subject: CTerm, premises) -> Derivation:
    premises = tuple(premises)
    env = EMPTY_ENV
    k = 0
    for p in premises:
        env = env.merge(p.conclusion.env)
        k += p.conclusion.k
    ty = Multi.of(p.conclusion.type for p in premises)
    j = Judgment(env, k, subject, ty)
    return Derivation(Rule.MANY, j, premises, size=sum(p.size for p in premises))


def lam_node(player: Player, dst: Player, binder: str, premise: Derivation) -> Derivation:
    pc = premise.conclusion
    m = pc.env.get(binder)
    subject = CLam(player, close_term(pc.subject, binder))
    j = Judgment(pc.env.without(binder), pc.k, subject, Arrow(m, player, dst, pc.type))
    return Derivation(Rule.LAM, j, (premise,), binder=binder, size=premise.size)


def app_node(app_player: Player, d_fun: Derivation, d_arg: Derivation) -> Derivation:
    fc, ac = d_fun.conclusion, d_arg.conclusion
    arrow = fc.type
    if not isinstance(arrow, Arrow) or arrow.dst != app_player:
        raise DerivationError((), f"function type {arrow} cannot be {app_player}-applied")
    if arrow.arg != ac.type:
        raise DerivationError((), f"argument type {ac.type} does not match arrow {arrow}")
    inc = gamma(arrow.src, arrow.dst)
    rule = Rule.APP_S if inc == 0 else Rule.APP_I
    subject = CApp(app_player, fc.subject, ac.subject)
    j = Judgment(fc.env.merge(ac.env), fc.k + ac.k + inc, subject, arrow.res)
    return Derivation(rule, j, (d_fun, d_arg), size=d_fun.size + d_arg.size + 1)


# ---------------------------------------------------------------------------
# Checking


class DerivationError(ValueError):
    def __init__(self, path, message):
        self.path = tuple(path)
        super().__init__(f"at node {'.'.join(map(str, self.path)) or '<root>'}: {message}")


@dataclass(frozen=True)
class CheckReport:
    env: TypeEnv
    k: int
    type: GenericType
    size: int


def check_derivation(d: Derivation) -> CheckReport:
    """Validate every node against its rule schema; recompute k and size."""

    def fail(path, msg):
        raise DerivationError(path, msg)

    def go(d, path) -> tuple:
        c = d.conclusion
        if not locally_closed(c.subject):
            fail(path, "subject has dangling indices")
        if any(len(m) == 0 for _, m in c.env.items):
            fail(path, "environment stores an empty multi type")
        match d.rule:
            case Rule.AX:
                if d.premises:
                    fail(path, "axiom with premises")
                if not isinstance(c.subject, Var):
                    fail(path, "axiom subject is not a variable")
                if not isinstance(c.type, (Atom, Arrow)):
                    fail(path, "axiom types must be linear")
                if c.env != TypeEnv.of({c.subject.name: multi(c.type)}):
                    fail(path, "axiom environment must be x:[L] for its own type")
                if c.k != 0:
                    fail(path, "axiom index must be 0")
                return 0, 0
            case Rule.MANY:
                if not isinstance(c.type, Multi):
                    fail(path, "many conclusion must be a multi type")
                env = EMPTY_ENV
                k = size = 0
                for i, p in enumerate(d.premises):
                    psize, _ = go(p, path + (i,))
                    if p.conclusion.subject != c.subject:
                        fail(path + (i,), "many premise subject differs")
                    if not isinstance(p.conclusion.type, (Atom, Arrow)):
                        fail(path + (i,), "many premises must be linear")
                    env = env.merge(p.conclusion.env)
                    k += p.conclusion.k
                    size += psize
                if Multi.of(p.conclusion.type for p in d.premises) != c.type:
                    fail(path, "multi type is not the multiset of premise types")
                if env != c.env or k != c.k:
                    fail(path, "environment or index does not sum")
                return size, k
            case Rule.LAM:
                if len(d.premises) != 1 or d.binder is None:
                    fail(path, "lam needs one premise and a binder")
                if not isinstance(c.subject, CLam):
                    fail(path, "lam subject is not an abstraction")
                if not isinstance(c.type, Arrow):
                    fail(path, "lam type is not an arrow")
                if c.type.src != c.subject.player:
                    fail(path, "arrow source tag must be the abstraction's player")
                p = d.premises[0]
                size, _ = go(p, path + (0,))
                if d.binder in c.env.domain():
                    fail(path, "binder shadows the environment")
                if d.binder in free_vars(c.subject):
                    fail(path, "binder must be fresh for the subject")
                if p.conclusion.subject != open_term(c.subject.body, Var(d.binder)):
                    fail(path, "premise subject is not the opened body")
                if p.conclusion.env.get(d.binder) != c.type.arg:
                    fail(path, "arrow argument differs from the binder's multi type")
                if p.conclusion.env.without(d.binder) != c.env:
                    fail(path, "environment differs beyond the binder")
                if p.conclusion.type != c.type.res or p.conclusion.k != c.k:
                    fail(path, "result type or index mismatch")
                return size, c.k
            case Rule.APP_S | Rule.APP_I:
                if len(d.premises) != 2:
                    fail(path, "application needs two premises")
                if not isinstance(c.subject, CApp):
                    fail(path, "application subject is not an application")
                df, da = d.premises
                fsize, _ = go(df, path + (0,))
                asize, _ = go(da, path + (1,))
                arrow = df.conclusion.type
                if not isinstance(arrow, Arrow):
                    fail(path, "function premise is not arrow-typed")
                if arrow.dst != c.subject.player:
                    fail(path, "arrow target tag must be the application's player")
                silent = arrow.silent
                if silent != (d.rule == Rule.APP_S):
                    fail(path, "rule does not match the arrow's silent/interaction status")
                if da.rule != Rule.MANY or da.conclusion.type != arrow.arg:
                    fail(path, "argument premise must be a many of the arrow's argument")
                if df.conclusion.subject != c.subject.fun or da.conclusion.subject != c.subject.arg:
                    fail(path, "premise subjects do not match the application")
                if df.conclusion.env.merge(da.conclusion.env) != c.env:
                    fail(path, "environment does not sum")
                inc = gamma(arrow.src, arrow.dst)
                if c.k != df.conclusion.k + da.conclusion.k + inc:
                    fail(path, f"index must add premise indices plus {inc}")
                if c.type != arrow.res:
                    fail(path, "conclusion type is not the arrow's result")
                return fsize + asize + 1, c.k
        fail(path, f"unknown rule {d.rule}")

    size, _ = go(d, ())
    c = d.conclusion
    return CheckReport(c.env, c.k, c.type, size)


# ---------------------------------------------------------------------------
# Tightness


def _multis_of_linear(L: Linear):
    if isinstance(L, Arrow):
        yield L.arg
        for inner in L.arg.items:
            yield from _multis_of_linear(inner)
        yield from _multis_of_linear(L.res)


def _arrows_of_linear(L: Linear):
    if isinstance(L, Arrow):
        yield L
        for inner in L.arg.items:
            yield from _arrows_of_linear(inner)
        yield from _arrows_of_linear(L.res)


def is_tight(env: TypeEnv, L: Linear) -> bool:
    """Exactly one non-empty multiset in (env, L), and every arrow silent."""
    multis = []
    arrows = []
    for _, m in env.items:
        multis.append(m)
        for inner in m.items:
            multis.extend(_multis_of_linear(inner))
            arrows.extend(_arrows_of_linear(inner))
    multis.extend(_multis_of_linear(L))
    arrows.extend(_arrows_of_linear(L))
    nonempty = sum(1 for m in multis if len(m) > 0)
    return nonempty == 1 and all(a.silent for a in arrows)


def derive_hnf_tight(h: CTerm) -> Derivation:
    """The canonical tight, zero-interaction derivation of a head normal form.

    The head variable gets a silent-arrow chain ending in the atom, every
    spine argument an empty many, and each abstraction a silent arrow.
    """
    if not is_hnf(h):
        raise ValueError("derive_hnf_tight requires a head normal form")
    supply = NameSupply(free_vars(h))
    binders = []
    t = h
    while isinstance(t, CLam):
        nm = supply.fresh()
        binders.append((t.player, nm))
        t = open_term(t.body, Var(nm))
    spine = []
    while isinstance(t, CApp):
        spine.append((t.player, t.arg))
        t = t.fun
    spine.reverse()
    assert isinstance(t, Var)
    head_type: Linear = ATOM
    for player, _ in reversed(spine):
        head_type = Arrow(ZERO, player, player, head_type)
    d = ax(t.name, head_type)
    for player, arg in spine:
        d = app_node(player, d, many(arg, ()))
    for player, nm in reversed(binders):
        d = lam_node(player, player, nm, d)
    return d


# ---------------------------------------------------------------------------
# Splitting and merging


def split_derivation(d: Derivation, n_part: Multi, o_part: Multi):
    """Regroup a many node's premises along a multiset splitting."""
    if d.rule != Rule.MANY:
        raise DerivationError((), "split requires a many node")
    if n_part.merge(o_part) != d.conclusion.type:
        raise DerivationError((), f"{n_part} + {o_part} is not {d.conclusion.type}")
    need = list(n_part.items)
    left, right = [], []
    for p in d.premises:
        ty = p.conclusion.type
        if ty in need:
            need.remove(ty)
            left.append(p)
        else:
            right.append(p)
    if need:
        raise DerivationError((), "premises cannot realize the requested splitting")
    subject = d.conclusion.subject
    return many(subject, left), many(subject, right)


def merge_derivations(d1: Derivation, d2: Derivation) -> Derivation:
    if d1.rule != Rule.MANY or d2.rule != Rule.MANY:
        raise DerivationError((), "merge requires two many nodes")
    if d1.conclusion.subject != d2.conclusion.subject:
        raise DerivationError((), "merge requires the same subject")
    return many(d1.conclusion.subject, d1.premises + d2.premises)


# ---------------------------------------------------------------------------
# Renaming (alpha on derivations)


def rename_free(d: Derivation, old: str, new: str) -> Derivation:
    """Rename a free variable throughout a derivation; `new` must be fresh."""
    c = d.conclusion
    j = Judgment(c.env.rename(old, new), c.k, substitute(c.subject, old, Var(new)), c.type)
    binder = new if d.binder == old else d.binder
    return Derivation(d.rule, j, tuple(rename_free(p, old, new) for p in d.premises), binder, d.size)


def _names_in(d: Derivation) -> set:
    out = set(free_vars(d.conclusion.subject)) | set(d.conclusion.env.domain())
    if d.binder:
        out.add(d.binder)
    for p in d.premises:
        out |= _names_in(p)
    return out


def _freshen_lam(d: Derivation, avoid) -> Derivation:
    """Rename a LAM node's binder away from `avoid`."""
    if d.binder not in avoid:
        return d
    supply = NameSupply(avoid | _names_in(d))
    new = supply.fresh("v")
    premise = rename_free(d.premises[0], d.binder, new)
    return Derivation(d.rule, d.conclusion, (premise,), new, d.size)


# ---------------------------------------------------------------------------
# Substitution and anti-substitution on derivations


def subst_derivation(d_t: Derivation, x: str, d_u: Derivation) -> Derivation:
    """Combine a derivation using x:M with a many derivation of the argument."""
    if d_u.rule != Rule.MANY:
        raise DerivationError((), "argument derivation must be a many node")
    if d_t.conclusion.env.get(x) != d_u.conclusion.type:
        raise DerivationError(
            (), f"env gives {x}:{d_t.conclusion.env.get(x)} but argument has {d_u.conclusion.type}"
        )
    u = d_u.conclusion.subject
    fv_u = free_vars(u)

    def go(d, du):
        c = d.conclusion
        match d.rule:
            case Rule.AX:
                if c.subject == Var(x):
                    return du.premises[0]
                return d
            case Rule.MANY:
                needs = [p.conclusion.env.get(x) for p in d.premises]
                parts = []
                rest = du
                for i, p in enumerate(d.premises):
                    if i == len(d.premises) - 1:
                        share = rest
                    else:
                        remainder = ZERO
                        for m in needs[i + 1 :]:
                            remainder = remainder.merge(m)
                        share, rest = split_derivation(rest, needs[i], remainder)
                    parts.append(go(p, share))
                return many(substitute(c.subject, x, u), parts)
            case Rule.LAM:
                node = _freshen_lam(d, fv_u | {x} | set(du.conclusion.env.domain()))
                sub = go(node.premises[0], du)
                return lam_node(c.subject.player, c.type.dst, node.binder, sub)
            case Rule.APP_S | Rule.APP_I:
                df, da = d.premises
                du_f, du_a = split_derivation(
                    du, df.conclusion.env.get(x), da.conclusion.env.get(x)
                )
                return app_node(c.subject.player, go(df, du_f), go(da, du_a))
        raise DerivationError((), f"unknown rule {d.rule}")

    return go(d_t, d_u)


def anti_subst_derivation(d: Derivation, t: CTerm, x: str, u: CTerm):
    """Factor a derivation of t[x<-u] into one of t and a many of u."""
    if substitute(t, x, u) != d.conclusion.subject:
        raise DerivationError((), "subject is not the requested substitution instance")
    fv_u = free_vars(u)

    def go(d, t):
        c = d.conclusion
        if d.rule == Rule.MANY:
            ms, dts, dus = ZERO, [], []
            for p in d.premises:
                m, dt, du = go(p, t)
                ms = ms.merge(m)
                dts.append(dt)
                dus.append(du)
            d_t = many(t, dts)
            d_u = many(u, ())
            for du in dus:
                d_u = merge_derivations(d_u, du)
            return ms, d_t, d_u
        match t:
            case Var(name) if name == x:
                return multi(c.type), ax(x, c.type), many(u, (d,))
            case Var():
                return ZERO, d, many(u, ())
            case CLam(p, body):
                node = _freshen_lam(d, fv_u | {x})
                opened = open_term(body, Var(node.binder))
                m, dtb, du = go(node.premises[0], opened)
                return m, lam_node(p, c.type.dst, node.binder, dtb), du
            case CApp(q, f, a):
                df, da = d.premises
                m1, dtf, du1 = go(df, f)
                m2, dta, du2 = go(da, a)
                return m1.merge(m2), app_node(q, dtf, dta), merge_derivations(du1, du2)
        raise DerivationError((), f"cannot decompose subject shaped {type(t).__name__}")

    return go(d, t)


# ---------------------------------------------------------------------------
# Subject reduction and expansion


def subject_reduce(d: Derivation):
    """Follow the head step of the subject; returns (derivation, step kind)."""
    c = d.conclusion
    match d.rule:
        case Rule.MANY:
            outs = [subject_reduce(p) for p in d.premises]
            if not outs:
                raise DerivationError((), "cannot reduce an empty many: subject not under evaluation")
            kind = outs[0][1]
            return many(outs[0][0].conclusion.subject, [o[0] for o in outs]), kind
        case Rule.LAM:
            sub, kind = subject_reduce(d.premises[0])
            return lam_node(c.subject.player, c.type.dst, d.binder, sub), kind
        case Rule.APP_S | Rule.APP_I:
            df, da = d.premises
            if isinstance(c.subject.fun, CLam):
                # root redex: the function premise is a lam node
                if df.rule != Rule.LAM:
                    raise DerivationError((), "redex function premise is not a lam node")
                kind = SILENT if d.rule == Rule.APP_S else INTERACTION
                node = _freshen_lam(df, free_vars(c.subject.arg))
                return subst_derivation(node.premises[0], node.binder, da), kind
            sub, kind = subject_reduce(df)
            return app_node(c.subject.player, sub, da), kind
    raise DerivationError((), "subject is already a head normal form")


def subject_expand(d_after: Derivation, before: CTerm) -> Derivation:
    """Rebuild a derivation of `before`, one head step earlier."""
    step = head_step(before)
    if step is None:
        raise DerivationError((), "before-term is a head normal form")

    def go(d, b):
        match b:
            case CApp(q, CLam(p, body), a):
                supply = NameSupply(free_vars(b) | _names_in(d))
                x = supply.fresh("v")
                opened = open_term(body, Var(x))
                m, d_body, d_arg = anti_subst_derivation(d, opened, x, a)
                lam = lam_node(p, q, x, d_body)
                return app_node(q, lam, d_arg)
            case CLam(p, body):
                if d.rule == Rule.MANY:
                    return many(b, [go(pr, b) for pr in d.premises])
                if d.rule != Rule.LAM:
                    raise DerivationError((), "expansion under an abstraction needs a lam node")
                node = _freshen_lam(d, free_vars(b))
                sub = go(node.premises[0], open_term(body, Var(node.binder)))
                return lam_node(p, d.conclusion.type.dst, node.binder, sub)
            case CApp(q, f, a):
                if d.rule == Rule.MANY:
                    return many(b, [go(pr, b) for pr in d.premises])
                if d.rule not in (Rule.APP_S, Rule.APP_I):
                    raise DerivationError((), "expansion under an application needs an app node")
                df, da = d.premises
                return app_node(q, go(df, f), da)
        raise DerivationError((), "before-term does not match the derivation")

    return go(d_after, before)


# ---------------------------------------------------------------------------
# Tight inference


def infer_tight(ct: CTerm, fuel: int):
    """Evaluate, type the hnf tightly, expand back: the index is the exact
    interaction count. None when evaluation exhausts its fuel."""
    outcome, steps = evaluate_head_trace(ct, fuel)
    if not hasattr(outcome, "hnf"):
        return None
    d = derive_hnf_tight(outcome.hnf)
    for state, _ in reversed(steps):
        d = subject_expand(d, state)
    return d, d.conclusion.k


# ---------------------------------------------------------------------------
# Transport along the tree preorder


def transport_bohm(d: Derivation, t: Term, u: Term, depth: int, fuel: int):
    """Rebuild d's typing of black t as a typing of black u, given t below u
    in the tree preorder. None when evaluation or shape matching fails."""
    if depth < 0:
        return None
    if d.rule == Rule.MANY:
        prems = []
        for p in d.premises:
            q = transport_bohm(p, t, u, depth, fuel)
            if q is None:
                return None
            prems.append(q)
        return many(lift(BLACK, u), prems)

    if d.conclusion.subject != lift(BLACK, t):
        raise DerivationError((), "derivation does not type the black lifting of t")
    status_t, out_t = head_normalize_ordinary(t, fuel)
    if status_t != "normal":
        return None
    status_u, out_u = head_normalize_ordinary(u, fuel)
    if status_u != "normal":
        return None
    ht, hu = out_t.hnf, out_u.hnf
    d1, d2 = spine_data(ht), spine_data(hu)
    if d1[:3] != d2[:3]:
        return None
    n, _, kargs = d1[0], d1[1], d1[2]

    dh = d
    for _ in range(out_t.n):
        dh, kind = subject_reduce(dh)
        if kind is not SILENT:
            raise DerivationError((), "black evaluation produced a non-silent step")

    supply = NameSupply(free_vars(t) | free_vars(u) | _names_in(dh))
    lam_info = []
    node = dh
    body_t, body_u = ht, hu
    for _ in range(n):
        if node.rule != Rule.LAM:
            raise DerivationError((), "hnf derivation shape mismatch (lam)")
        nm = supply.fresh("w")
        premise = rename_free(node.premises[0], node.binder, nm)
        lam_info.append((node.conclusion.type.dst, nm))
        node = premise
        body_t = open_term(body_t.body, Var(nm))
        body_u = open_term(body_u.body, Var(nm))
    manys = []
    for _ in range(kargs):
        if node.rule not in (Rule.APP_S, Rule.APP_I):
            raise DerivationError((), "hnf derivation shape mismatch (app)")
        manys.append(node.premises[1])
        node = node.premises[0]
    manys.reverse()
    t_args = _spine(body_t)[1]
    u_args = _spine(body_u)[1]

    rebuilt = node  # the head variable's axiom
    for i in range(kargs):
        if manys[i].conclusion.subject != lift(BLACK, t_args[i]):
            raise DerivationError((), "argument premise does not type the argument")
        prems = []
        for p in manys[i].premises:
            q = transport_bohm(p, t_args[i], u_args[i], depth - 1, fuel)
            if q is None:
                return None
            prems.append(q)
        rebuilt = app_node(BLACK, rebuilt, many(lift(BLACK, u_args[i]), prems))
    for dst, nm in reversed(lam_info):
        rebuilt = lam_node(BLACK, dst, nm, rebuilt)

    states = []
    cur = lift(BLACK, u)
    for _ in range(out_u.n):
        states.append(cur)
        cur = head_step(cur)[0]
    for state in reversed(states):
        rebuilt = subject_expand(rebuilt, state)

    final = rebuilt.conclusion
    orig = d.conclusion
    if (final.env, final.k, final.type) != (orig.env, orig.k, orig.type):
        raise DerivationError((), "transport changed the conclusion")
    return rebuilt


# ---------------------------------------------------------------------------
# Bounded enumeration of typings


def type_universe(depth: int = 1, multi_cap: int = 2):
    """Atom plus `depth` layers of arrows over multisets of size <= multi_cap."""
    types = [ATOM]
    for _ in range(depth):
        base = sorted(types, key=_type_key)
        multis = [ZERO]
        for card in range(1, multi_cap + 1):
            multis.extend(Multi.of(c) for c in itertools.combinations_with_replacement(base, card))
        new = list(types)
        for m in multis:
            for src in (BLACK, WHITE):
                for dst in (BLACK, WHITE):
                    for res in base:
                        new.append(Arrow(m, src, dst, res))
        types = list(dict.fromkeys(new))
    return types


def enumerate_derivations(ct: CTerm, size_cap: int, universe=None, multi_cap: int = 2):
    """All derivations with linear conclusions over the finite universe,
    one witness per distinct conclusion, sizes bounded by size_cap."""
    if universe is None:
        universe = type_universe()
    supply = NameSupply(free_vars(ct))
    memo = {}

    def dedupe(ds):
        out = {}
        for d in ds:
            c = d.conclusion
            out.setdefault((c.env, c.k, c.type), d)
        return list(out.values())

    def lin(t):
        if t in memo:
            return memo[t]
        results = []
        match t:
            case Var(name):
                results = [ax(name, L) for L in universe]
            case CLam(p, body):
                nm = supply.fresh("v")
                opened = open_term(body, Var(nm))
                for db in lin(opened):
                    for dst in (BLACK, WHITE):
                        results.append(lam_node(p, dst, nm, db))
            case CApp(q, f, a):
                arg_groups = {}
                for df in lin(f):
                    arrow = df.conclusion.type
                    if not isinstance(arrow, Arrow) or arrow.dst != q:
                        continue
                    if df.size + 1 > size_cap:
                        continue
                    if arrow.arg not in arg_groups:
                        arg_groups[arrow.arg] = manys_of(a, arrow.arg)
                    for da in arg_groups[arrow.arg]:
                        if df.size + da.size + 1 <= size_cap:
                            results.append(app_node(q, df, da))
        results = dedupe(results)
        memo[t] = results
        return results

    def manys_of(t, m):
        if len(m) == 0:
            return [many(t, ())]
        groups = {}
        for d in lin(t):
            groups.setdefault(d.conclusion.type, []).append(d)
        counts = {}
        for L in m.items:
            counts[L] = counts.get(L, 0) + 1
        picks = []
        for L, cnt in counts.items():
            if L not in groups:
                return []
            picks.append(list(itertools.combinations_with_replacement(groups[L], cnt)))
        out = []
        for combo in itertools.product(*picks):
            prems = [d for group in combo for d in group]
            if sum(d.size for d in prems) <= size_cap:
                out.append(many(t, prems))
        return dedupe(out)

    return lin(ct)


def enumerate_typings(ct: CTerm, size_cap: int, universe=None):
    """Conclusions (env, k, linear type) of the bounded enumeration."""
    return sorted(
        {
            (d.conclusion.env, d.conclusion.k, d.conclusion.type)
            for d in enumerate_derivations(ct, size_cap, universe)
        },
        key=lambda c: (c[1], _type_key(c[2]), str(c[0])),
    )


# ---------------------------------------------------------------------------
# Serialization (JSON derivation files)


def _player_str(p: Player) -> str:
    return p.value


def linear_to_json(L: Linear):
    match L:
        case Atom():
            return "X"
        case Arrow(arg, src, dst, res):
            return {
                "arg": [linear_to_json(i) for i in arg.items],
                "from": _player_str(src),
                "to": _player_str(dst),
                "res": linear_to_json(res),
            }
    raise TypeError(f"not a linear type: {L!r}")


def json_to_linear(obj) -> Linear:
    if obj == "X":
        return ATOM
    return Arrow(
        Multi.of(json_to_linear(i) for i in obj["arg"]),
        Player(obj["from"]),
        Player(obj["to"]),
        json_to_linear(obj["res"]),
    )


def derivation_to_json(d: Derivation):
    c = d.conclusion
    ty = (
        [linear_to_json(i) for i in c.type.items]
        if isinstance(c.type, Multi)
        else linear_to_json(c.type)
    )
    return {
        "rule": d.rule.value,
        "env": {n: [linear_to_json(i) for i in m.items] for n, m in c.env.items},
        "k": c.k,
        "subject": print_cterm(c.subject),
        "type": ty,
        "premises": [derivation_to_json(p) for p in d.premises],
    }


def derivation_from_json(obj) -> Derivation:
    rule = Rule(obj["rule"])
    env = TypeEnv.of({n: Multi.of(json_to_linear(i) for i in ls) for n, ls in obj["env"].items()})
    subject = parse_cterm(obj["subject"])
    ty = (
        Multi.of(json_to_linear(i) for i in obj["type"])
        if isinstance(obj["type"], list)
        else json_to_linear(obj["type"])
    )
    premises = tuple(derivation_from_json(p) for p in obj["premises"])
    binder = None
    if rule == Rule.LAM and premises:
        psub = premises[0].conclusion.subject
        extra = free_vars(psub) - free_vars(subject)
        if extra:
            binder = sorted(extra)[0]
        else:
            binder = NameSupply(free_vars(psub) | free_vars(subject)).fresh("v")
    size = sum(p.size for p in premises) + (1 if rule in (Rule.APP_S, Rule.APP_I) else 0)
    return Derivation(rule, Judgment(env, obj["k"], subject, ty), premises, binder, size)
