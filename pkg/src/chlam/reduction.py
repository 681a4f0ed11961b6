"""Head reduction for checkers terms, with silent/interaction step counting.

A root redex is an application whose function is an abstraction; the step is
silent when the two player tags agree and an interaction otherwise. Checkers
head reduction contracts the unique redex under the head context
lam-prefix . [] t1 ... tk, so it is deterministic. `evaluate_head` is the
fueled big-step form: Normal carries the hnf, the interaction index k and the
total number of head steps n; FuelExhausted is a value, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .syntax import (
    App,
    BVar,
    CApp,
    CLam,
    CTerm,
    Lam,
    NApp,
    NLam,
    NameSupply,
    Named,
    HOLE,
    Term,
    Var,
    free_vars,
    open_term,
    to_named,
)


class StepKind(Enum):
    SILENT = "silent"
    INTERACTION = "interaction"

    def __str__(self) -> str:
        return self.value


SILENT = StepKind.SILENT
INTERACTION = StepKind.INTERACTION


@dataclass(frozen=True)
class Normal:
    hnf: CTerm
    k: int  # interaction head steps
    n: int  # all head steps


@dataclass(frozen=True)
class FuelExhausted:
    state: CTerm
    k: int
    n: int


Outcome = Union[Normal, FuelExhausted]


def root_step(ct: CTerm) -> Optional[tuple]:
    """Contract a root redex, if there is one, and report the step kind."""
    match ct:
        case CApp(q, CLam(p, body), arg):
            return open_term(body, arg), (SILENT if p == q else INTERACTION)
    return None


def root_step_ordinary(t: Term) -> Optional[Term]:
    match t:
        case App(Lam(body), arg):
            return open_term(body, arg)
    return None


def is_hnf(t) -> bool:
    """Head normal forms: lam-prefix over a variable-headed spine."""
    while isinstance(t, (Lam, CLam)):
        t = t.body
    while isinstance(t, (App, CApp)):
        t = t.fun
    return isinstance(t, (Var, BVar))


def head_step(ct: CTerm) -> Optional[tuple]:
    """The unique checkers head step, or None on an hnf. Deterministic."""
    match ct:
        case CLam(p, body):
            r = head_step(body)
            return (CLam(p, r[0]), r[1]) if r is not None else None
        case CApp():
            spine = []
            f = ct
            while isinstance(f, CApp):
                spine.append(f)
                f = f.fun
            if not isinstance(f, CLam):
                return None
            contracted, kind = root_step(spine[-1])
            for outer in spine[-2::-1]:
                contracted = CApp(outer.player, contracted, outer.arg)
            return contracted, kind
    return None


def head_step_ordinary(t: Term) -> Optional[Term]:
    match t:
        case Lam(body):
            r = head_step_ordinary(body)
            return Lam(r) if r is not None else None
        case App():
            spine = []
            f = t
            while isinstance(f, App):
                spine.append(f)
                f = f.fun
            if not isinstance(f, Lam):
                return None
            contracted = root_step_ordinary(spine[-1])
            for outer in spine[-2::-1]:
                contracted = App(contracted, outer.arg)
            return contracted
    return None


def head_decompose(ct: CTerm) -> Optional[tuple]:
    """Split a non-hnf into its head context (named, plugging recaptures) and redex."""
    if is_hnf(ct):
        return None
    supply = NameSupply(free_vars(ct))
    binders = []
    t = ct
    while isinstance(t, CLam):
        nm = supply.fresh()
        binders.append((t.player, nm))
        t = open_term(t.body, Var(nm))
    spine = []
    while isinstance(t.fun, CApp):
        spine.append((t.player, t.arg))
        t = t.fun
    ctx: Named = HOLE
    for player, arg in reversed(spine):
        ctx = NApp(player, ctx, to_named(arg, supply))
    for player, nm in reversed(binders):
        ctx = NLam(player, nm, ctx)
    return ctx, t


def evaluate_head(ct: CTerm, fuel: int) -> Outcome:
    k = n = 0
    t = ct
    while n < fuel:
        r = head_step(t)
        if r is None:
            return Normal(t, k, n)
        t, kind = r
        n += 1
        if kind is INTERACTION:
            k += 1
    if head_step(t) is None:
        return Normal(t, k, n)
    return FuelExhausted(t, k, n)


def evaluate_head_trace(ct: CTerm, fuel: int) -> tuple:
    """Like evaluate_head but also return the list of (state, kind) per step.

    Each entry holds the state *before* the step and the step's kind; the
    final state is in the outcome.
    """
    k = n = 0
    t = ct
    steps = []
    while n < fuel:
        r = head_step(t)
        if r is None:
            return Normal(t, k, n), steps
        nxt, kind = r
        steps.append((t, kind))
        t = nxt
        n += 1
        if kind is INTERACTION:
            k += 1
    if head_step(t) is None:
        return Normal(t, k, n), steps
    return FuelExhausted(t, k, n), steps


def evaluate_head_ordinary(t: Term, fuel: int) -> Outcome:
    n = 0
    while n < fuel:
        r = head_step_ordinary(t)
        if r is None:
            return Normal(t, 0, n)
        t = r
        n += 1
    if head_step_ordinary(t) is None:
        return Normal(t, 0, n)
    return FuelExhausted(t, 0, n)


def head_normalize(ct: CTerm, fuel: int, detect_loops: bool = False) -> tuple:
    """Evaluate to hnf; status is 'normal', 'fuel', or 'loop'.

    'loop' means a state was revisited up to alpha: a genuine divergence
    certificate, unlike plain fuel exhaustion.
    """
    seen = {ct} if detect_loops else None
    k = n = 0
    t = ct
    while n < fuel:
        r = head_step(t)
        if r is None:
            return "normal", Normal(t, k, n)
        t, kind = r
        n += 1
        if kind is INTERACTION:
            k += 1
        if detect_loops:
            if t in seen:
                return "loop", FuelExhausted(t, k, n)
            seen.add(t)
    if head_step(t) is None:
        return "normal", Normal(t, k, n)
    return "fuel", FuelExhausted(t, k, n)


def head_normalize_ordinary(t: Term, fuel: int, detect_loops: bool = False) -> tuple:
    seen = {t} if detect_loops else None
    n = 0
    while n < fuel:
        r = head_step_ordinary(t)
        if r is None:
            return "normal", Normal(t, 0, n)
        t = r
        n += 1
        if detect_loops:
            if t in seen:
                return "loop", FuelExhausted(t, 0, n)
            seen.add(t)
    if head_step_ordinary(t) is None:
        return "normal", Normal(t, 0, n)
    return "fuel", FuelExhausted(t, 0, n)


def any_beta_steps(ct: CTerm) -> list:
    """All one-step checkers-beta reducts, at every position, with kinds."""
    out = []
    r = root_step(ct)
    if r is not None:
        out.append(r)
    match ct:
        case CLam(p, body):
            out.extend((CLam(p, b), kind) for b, kind in any_beta_steps(body))
        case CApp(p, fun, arg):
            out.extend((CApp(p, f, arg), kind) for f, kind in any_beta_steps(fun))
            out.extend((CApp(p, fun, a), kind) for a, kind in any_beta_steps(arg))
    return out
