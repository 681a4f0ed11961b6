"""Böhm-tree approximants and the tree preorders, as fueled procedures.

Every comparison is three-valued: fuel exhaustion is never reported as
divergence. A bottom leaf is `certified` when head evaluation revisited a
state up to alpha, which is a genuine divergence certificate; only certified
bottoms (or the explicit assume_divergence flag) let the (bot) clause fire.

The spine of a head normal form lam x1..xn. y t1...tk is summarized as
(n, head marker, k); markers are stable under appending eta-expansion
binders, which is what the extensional preorder needs at each node.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .syntax import (
    App,
    BVar,
    Lam,
    NameSupply,
    Term,
    Var,
    free_vars,
    lam,
    open_term,
    shift,
)
from .reduction import head_normalize_ordinary


class Tri(Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


HOLDS, FAILS, UNKNOWN = Tri.HOLDS, Tri.FAILS, Tri.UNKNOWN


@dataclass(frozen=True)
class Node:
    binders: tuple
    head: str
    children: tuple


@dataclass(frozen=True)
class BotLeaf:
    certified: bool = False  # True: revisited state, genuine divergence


@dataclass(frozen=True)
class CutLeaf:
    pass


BohmApprox = Union[Node, BotLeaf, CutLeaf]
CUT = CutLeaf()


# ---------------------------------------------------------------------------
# Spine analysis


def _strip_lams(t: Term):
    n = 0
    while isinstance(t, Lam):
        n += 1
        t = t.body
    return n, t


def _spine(t: Term):
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def spine_data(h: Term):
    """(n, marker, k, args) of an hnf; marker aligns across eta padding.

    marker is ('own', p) for a head bound at position p of the own prefix
    (1-indexed from the outside), ('outer', e) for a dangling index past it,
    or ('free', name).
    """
    n, body = _strip_lams(h)
    head, args = _spine(body)
    match head:
        case Var(name):
            marker = ("free", name)
        case BVar(i):
            marker = ("own", n - i) if i < n else ("outer", i - n)
        case _:
            raise ValueError(f"not an hnf: {h!r}")
    return n, marker, len(args), args


def spine_eq(h: Term, h2: Term) -> bool:
    """Same binder count, same head variable, same argument count."""
    a = spine_data(h)
    b = spine_data(h2)
    return a[:3] == b[:3]


def eta_expand_hnf(h: Term, m: int) -> Term:
    """Append m binder/argument pairs to an hnf's spine."""
    if m == 0:
        return h
    n, body = _strip_lams(h)
    body = shift(body, m)
    for j in range(m - 1, -1, -1):
        body = App(body, BVar(j))
    for _ in range(n + m):
        body = Lam(body)
    return body


# ---------------------------------------------------------------------------
# Head resolution with three-valued status


def resolve(t: Term, fuel: int):
    """('hnf', h) | ('diverges', None) | ('fuel', None)."""
    status, out = head_normalize_ordinary(t, fuel, detect_loops=True)
    if status == "normal":
        return "hnf", out.hnf
    if status == "loop":
        return "diverges", None
    return "fuel", None


# ---------------------------------------------------------------------------
# Approximants


def bohm_approx(t: Term, depth: int, fuel: int) -> BohmApprox:
    """Fuel- and depth-bounded Böhm tree, binder names from a shared counter."""
    supply = NameSupply(free_vars(t))

    def build(t, d):
        if d <= 0:
            return CUT
        status, h = resolve(t, fuel)
        if status != "hnf":
            return BotLeaf(certified=(status == "diverges"))
        names = []
        while isinstance(h, Lam):
            nm = supply.fresh()
            names.append(nm)
            h = open_term(h.body, Var(nm))
        head, args = _spine(h)
        assert isinstance(head, Var)
        return Node(tuple(names), head.name, tuple(build(a, d - 1) for a in args))

    return build(t, depth)


def approx_to_term(a: BohmApprox, bottom: Term) -> Term:
    """Read an approximant back as a term; Bot and Cut leaves become `bottom`."""
    match a:
        case Node(binders, head, children):
            t: Term = Var(head)
            for c in children:
                t = App(t, approx_to_term(c, bottom))
            for b in reversed(binders):
                t = lam(b, t)
            return t
        case BotLeaf() | CutLeaf():
            return bottom
    raise TypeError(f"not an approximant: {a!r}")


def approx_alpha_eq(a: BohmApprox, b: BohmApprox) -> bool:
    def go(a, b, env):
        match a, b:
            case Node(bs1, h1, cs1), Node(bs2, h2, cs2):
                if len(bs1) != len(bs2) or len(cs1) != len(cs2):
                    return False
                env2 = dict(env)
                for x, y in zip(bs1, bs2):
                    env2[x] = y
                if env2.get(h1, h1) != h2 or (h1 not in env2 and h2 in env2.values()):
                    return False
                return all(go(c1, c2, env2) for c1, c2 in zip(cs1, cs2))
            case BotLeaf(), BotLeaf():
                return True
            case CutLeaf(), CutLeaf():
                return True
        return False

    return go(a, b, {})


def render_approx(a: BohmApprox, indent: str = "") -> str:
    match a:
        case Node(binders, head, children):
            lam = f"\\{' '.join(binders)}. " if binders else ""
            line = f"{indent}{lam}{head}"
            return "\n".join([line] + [render_approx(c, indent + "  ") for c in children])
        case BotLeaf():
            return f"{indent}_|_"
        case CutLeaf():
            return f"{indent}..."
    raise TypeError(f"not an approximant: {a!r}")


def approx_to_json(a: BohmApprox):
    match a:
        case Node(binders, head, children):
            return {"lam": list(binders), "head": head, "args": [approx_to_json(c) for c in children]}
        case BotLeaf():
            return {"bot": True}
        case CutLeaf():
            return {"cut": True}
    raise TypeError(f"not an approximant: {a!r}")


# ---------------------------------------------------------------------------
# Node access along paths


@dataclass(frozen=True)
class NodeResult:
    status: str  # "ok" | "undefined" | "fuel"
    hnf: Optional[Term]


def open_prefix(h: Term, supply: NameSupply):
    """Open an hnf's binder prefix with fresh names; the spine becomes closed."""
    names = []
    while isinstance(h, Lam):
        nm = supply.fresh()
        names.append(nm)
        h = open_term(h.body, Var(nm))
    head, args = _spine(h)
    return names, head, args


def node_at_path(t: Term, path, fuel: int, supply: Optional[NameSupply] = None) -> NodeResult:
    """The paper's t|path: head-normalize, descend into the i-th argument.

    Binders crossed on the way down are opened with fresh names, so the
    returned hnf is a closed term over those names.
    """
    if supply is None:
        supply = NameSupply(free_vars(t))
    status, h = resolve(t, fuel)
    if status == "fuel":
        return NodeResult("fuel", None)
    if status == "diverges":
        return NodeResult("undefined", None)
    if not path:
        return NodeResult("ok", h)
    i, rest = path[0], path[1:]
    _, _, args = open_prefix(h, supply)
    if not 1 <= i <= len(args):
        return NodeResult("undefined", None)
    return node_at_path(args[i - 1], rest, fuel, supply)


# ---------------------------------------------------------------------------
# Preorders


def _resolve_pair(t, u, fuel, assume_divergence):
    """Shared (bot)-clause handling; returns a Tri or the two hnfs."""
    st, ht = resolve(t, fuel)
    if st == "diverges":
        return HOLDS
    if st == "fuel":
        return HOLDS if assume_divergence else UNKNOWN
    su, hu = resolve(u, fuel)
    if su == "diverges":
        return FAILS
    if su == "fuel":
        return UNKNOWN
    return ht, hu


def _combine(results) -> Tri:
    verdict = HOLDS
    for r in results:
        if r is FAILS:
            return FAILS
        if r is UNKNOWN:
            verdict = UNKNOWN
    return verdict


def _le_core(t, u, depth, fuel, eta, eta_budget, assume) -> tuple:
    """Shared recursion; returns (Tri, failing path or None). Children are
    compared left to right, fail-fast."""
    r = _resolve_pair(t, u, fuel, assume)
    if isinstance(r, Tri):
        return r, (() if r is FAILS else None)
    ht, hu = r
    if eta:
        n1, _, k1, _ = spine_data(ht)
        n2, _, k2, _ = spine_data(hu)
        if n2 - n1 != k2 - k1:
            return FAILS, ()
        gap = n2 - n1
        if eta_budget is not None and abs(gap) > eta_budget:
            return UNKNOWN, None
        if gap > 0:
            ht = eta_expand_hnf(ht, gap)
        elif gap < 0:
            hu = eta_expand_hnf(hu, -gap)
    d1 = spine_data(ht)
    d2 = spine_data(hu)
    if d1[:3] != d2[:3]:
        return FAILS, ()
    if d1[2] == 0:
        return HOLDS, None
    if depth <= 0:
        return UNKNOWN, None
    verdict = HOLDS
    for i, (a, b) in enumerate(zip(d1[3], d2[3])):
        sub, subpath = _le_core(a, b, depth - 1, fuel, eta, eta_budget, assume)
        if sub is FAILS:
            return FAILS, (i + 1,) + subpath
        if sub is UNKNOWN:
            verdict = UNKNOWN
    return verdict, None


def bohm_le(t: Term, u: Term, depth: int, fuel: int, assume_divergence: bool = False) -> Tri:
    """The Böhm preorder clause-by-clause, to the given depth."""
    return _le_core(t, u, depth, fuel, False, None, assume_divergence)[0]


def bohm_le_eta(
    t: Term,
    u: Term,
    depth: int,
    fuel: int,
    eta_budget: Optional[int] = None,
    assume_divergence: bool = False,
) -> Tri:
    """Extensional variant: each node match may eta-expand the shorter spine.

    The default budget is the arity difference at each node, recomputed per
    node; a smaller explicit budget downgrades deeper matches to Unknown.
    """
    return _le_core(t, u, depth, fuel, True, eta_budget, assume_divergence)[0]


def compare_with_witness(
    t: Term, u: Term, depth: int, fuel: int, eta: bool = False, assume_divergence: bool = False
) -> tuple:
    """(verdict, failing path when the verdict is Fails)."""
    return _le_core(t, u, depth, fuel, eta, None, assume_divergence)


# ---------------------------------------------------------------------------
# Difference witnesses (directional: why t is not below u)


@dataclass(frozen=True)
class HeadMismatch:
    pass


@dataclass(frozen=True)
class SpineArityMismatch:
    extra: int  # m > 0
    side: str  # "left" | "right": which term has the longer spine


@dataclass(frozen=True)
class DivergenceAsymmetry:
    pass


DiffKind = Union[HeadMismatch, SpineArityMismatch, DivergenceAsymmetry]


@dataclass(frozen=True)
class DiffWitness:
    path: tuple
    kind: DiffKind
    hnf_left: Optional[Term]
    hnf_right: Optional[Term]


def _classify(ht: Term, hu: Term) -> DiffKind:
    n1, m1, k1, _ = spine_data(ht)
    n2, m2, k2, _ = spine_data(hu)
    if m1 != m2:
        return HeadMismatch()
    if n1 != n2:
        return SpineArityMismatch(abs(n2 - n1), "right" if n2 > n1 else "left")
    return SpineArityMismatch(abs(k2 - k1), "right" if k2 > k1 else "left")


def find_difference(t: Term, u: Term, depth: int, fuel: int) -> Optional[DiffWitness]:
    """BFS for the minimal path at which t's tree definitely exceeds u's.

    Nodes where the left side is certified diverging satisfy the (bot)
    clause and are pruned; inconclusive nodes (fuel, depth) are skipped, so
    absence of a witness is only a bounded claim.
    """
    supply = NameSupply(free_vars(t) | free_vars(u))
    queue = [((), t, u)]
    for _ in range(depth + 1):
        next_queue = []
        for path, a, b in queue:
            sa, ha = resolve(a, fuel)
            if sa != "hnf":
                continue  # left bottom or unknown: no definite violation here
            sb, hb = resolve(b, fuel)
            if sb == "diverges":
                return DiffWitness(path, DivergenceAsymmetry(), ha, None)
            if sb == "fuel":
                continue
            if not spine_eq(ha, hb):
                return DiffWitness(path, _classify(ha, hb), ha, hb)
            # shared prefix: open both sides with the same fresh names
            n = spine_data(ha)[0]
            names = [supply.fresh() for _ in range(n)]
            body_a, body_b = ha, hb
            for nm in names:
                body_a = open_term(body_a.body, Var(nm))
                body_b = open_term(body_b.body, Var(nm))
            args_a = _spine(body_a)[1]
            args_b = _spine(body_b)[1]
            for i in range(len(args_a)):
                next_queue.append((path + (i + 1,), args_a[i], args_b[i]))
        queue = next_queue
        if not queue:
            break
    return None


# ---------------------------------------------------------------------------
# The approximant order


def le_bot(a: BohmApprox, b: BohmApprox, assume_divergence: bool = False) -> Tri:
    """Structural <=_bot: b refines a by replacing bottoms with subtrees."""

    def go(a, b, env):
        match a:
            case BotLeaf(certified):
                if certified or assume_divergence:
                    return HOLDS
                return UNKNOWN
            case CutLeaf():
                return UNKNOWN
        match b:
            case BotLeaf(certified):
                # a is a Node here; a definite node is never below bottom
                if certified or assume_divergence:
                    return FAILS
                return UNKNOWN
            case CutLeaf():
                return UNKNOWN
        bs1, h1, cs1 = a.binders, a.head, a.children
        bs2, h2, cs2 = b.binders, b.head, b.children
        if len(bs1) != len(bs2) or len(cs1) != len(cs2):
            return FAILS
        env2 = dict(env)
        for x, y in zip(bs1, bs2):
            env2[x] = y
        if env2.get(h1, h1) != h2:
            return FAILS
        return _combine(go(c1, c2, env2) for c1, c2 in zip(cs1, cs2))

    return go(a, b, {})
