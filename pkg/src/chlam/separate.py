"""Tuplers, selectors, and context construction that separates tree-different terms.

The extraction property T_n t1...tn P^n_i ->*h t_i lets a context reach into a
Böhm tree: free variables are sent to tuplers by a capturing prefix
(lam y1..yr. []) T_K ... T_K, each path step appends enough tuplers to
reorganize a node's spine and then a selector picking the wanted child.

`interaction_bohm_out` follows the separation proof for the regime where the
two trees differ only by an eta gap at the end of a spine: the constructed
context makes the white/black interaction counts differ by exactly that gap.
`classic_separate` covers plain termination differences (one side diverging
where the other has a node, or different head variables); it is deliberately
partial and returns None where discriminating a head would collide with a
tupler role. Every emitted result is verified by running both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (
    App,
    BLACK,
    BVar,
    Context,
    HOLE,
    Lam,
    NApp,
    NLam,
    NameSupply,
    Term,
    Var,
    WHITE,
    free_vars,
    lift,
    lift_context,
    locally_closed,
    open_term,
    plug,
    shift,
    to_named,
)
from .reduction import FuelExhausted as FuelOut
from .reduction import Normal, Outcome, evaluate_head
from .bohm import (
    DiffWitness,
    DivergenceAsymmetry,
    HeadMismatch,
    SpineArityMismatch,
    _spine,
    resolve,
    spine_data,
)


class SeparationError(Exception):
    pass


class NotApplicable(SeparationError):
    pass


class FuelExceeded(SeparationError):
    pass


class VerificationFailed(SeparationError):
    """The constructed context did not separate: an implementation bug."""


# ---------------------------------------------------------------------------
# Combinators


def tuple_term(ts) -> Term:
    """<t1,...,tn> = lam z. z t1 ... tn with z fresh."""
    body: Term = BVar(0)
    for t in ts:
        body = App(body, shift(t, 1))
    return Lam(body)


def tupler(n: int) -> Term:
    """T_n = lam x1...xn. <x1,...,xn>."""
    body: Term = BVar(0)
    for i in range(1, n + 1):
        body = App(body, BVar(n + 1 - i))
    t: Term = Lam(body)
    for _ in range(n):
        t = Lam(t)
    return t


def selector(n: int, i: int) -> Term:
    """P^n_i = lam x1...xn. xi."""
    if not 1 <= i <= n:
        raise ValueError(f"selector index {i} out of range 1..{n}")
    t: Term = BVar(n - i)
    for _ in range(n):
        t = Lam(t)
    return t


def _omega() -> Term:
    d = Lam(App(BVar(0), BVar(0)))
    return App(d, d)


def _diverger(n: int) -> Term:
    """lam x1...xn. Omega: diverges under head reduction however applied."""
    t = _omega()
    for _ in range(n):
        t = Lam(t)
    return t


# ---------------------------------------------------------------------------
# Path walking with shared binder names


@dataclass
class _Level:
    n: int
    k: int
    j: int  # 1-based child index taken at this node
    names: list  # opened binder names (length n), shared by both sides
    head_id: object  # ('name', nm) or ('own', position) resolved to names


@dataclass
class _Final:
    status1: str  # 'hnf' | 'diverges'
    status2: str
    n1: int
    n2: int
    k1: int
    k2: int
    head1: object  # ('name', nm) | ('own', p) | None when diverging
    head2: object
    hnf1: Optional[Term]
    hnf2: Optional[Term]


def _head_identity(marker, names):
    if marker[0] == "free":
        return ("name", marker[1])
    if marker[0] == "own":
        return ("own", marker[1]) if names is None else ("name", names[marker[1] - 1])
    raise NotApplicable("terms must be locally closed")


def _resolve_checked(t: Term, fuel: int):
    status, h = resolve(t, fuel)
    if status == "fuel":
        raise FuelExceeded("head normalization ran out of fuel along the path")
    return status, h


def _walk(t: Term, u: Term, path, fuel: int):
    """Resolve both terms along `path`; prefix nodes must be spine-equal."""
    supply = NameSupply(free_vars(t) | free_vars(u))
    levels = []
    a, b = t, u
    for j in path:
        sa, ha = _resolve_checked(a, fuel)
        sb, hb = _resolve_checked(b, fuel)
        if sa != "hnf" or sb != "hnf":
            raise NotApplicable("divergence at a proper prefix of the path")
        n1, m1, k1, _ = spine_data(ha)
        n2, m2, k2, _ = spine_data(hb)
        if (n1, m1, k1) != (n2, m2, k2):
            raise NotApplicable("spines differ at a proper prefix of the path")
        if not 1 <= j <= k1:
            raise NotApplicable(f"path index {j} out of range 1..{k1}")
        names = [supply.fresh() for _ in range(n1)]
        for nm in names:
            ha = open_term(ha.body, Var(nm))
            hb = open_term(hb.body, Var(nm))
        args_a = _spine(ha)[1]
        args_b = _spine(hb)[1]
        levels.append(_Level(n1, k1, j, names, _head_identity(m1, names)))
        a, b = args_a[j - 1], args_b[j - 1]
    sa, ha = _resolve_checked(a, fuel)
    sb, hb = _resolve_checked(b, fuel)
    d1 = spine_data(ha) if sa == "hnf" else (0, None, 0, None)
    d2 = spine_data(hb) if sb == "hnf" else (0, None, 0, None)
    final = _Final(
        sa,
        sb,
        d1[0],
        d2[0],
        d1[2],
        d2[2],
        _head_identity(d1[1], None) if sa == "hnf" else None,
        _head_identity(d2[1], None) if sb == "hnf" else None,
        ha if sa == "hnf" else None,
        hb if sb == "hnf" else None,
    )
    return levels, final


def choose_K(t: Term, u: Term, path, fuel: int) -> int:
    """Max spine arity met along the path, plus the final arity gap, plus 1."""
    levels, final = _walk(t, u, path, fuel)
    max_k = max((lv.k for lv in levels), default=0)
    max_k = max(max_k, final.k1, final.k2)
    gap = abs(final.n2 - final.n1) if final.status1 == final.status2 == "hnf" else 0
    return max_k + gap + 1


# ---------------------------------------------------------------------------
# Results


@dataclass(frozen=True)
class IndexReport:
    status: str  # "normal" | "fuel-exhausted"
    k: Optional[int]


@dataclass(frozen=True)
class SeparationResult:
    context: Context
    K: int
    expected: tuple
    transcript: tuple

    @property
    def verified_gap(self) -> Optional[int]:
        left, right = self.transcript
        if isinstance(left, Normal) and isinstance(right, Normal):
            return right.k - left.k
        return None


def verify_separation(ctx: Context, t: Term, u: Term, fuel: int):
    """Run both pluggings: white context around black terms."""
    white = lift_context(WHITE, ctx)
    out1 = evaluate_head(plug(white, lift(BLACK, t)), fuel)
    out2 = evaluate_head(plug(white, lift(BLACK, u)), fuel)
    return out1, out2


def _assemble(free_names, subs, svec) -> Context:
    ctx = HOLE
    for nm in reversed(free_names):
        ctx = NLam(None, nm, ctx)
    for nm in free_names:
        ctx = NApp(None, ctx, to_named(subs[nm]))
    for s in svec:
        ctx = NApp(None, ctx, to_named(s))
    return ctx


def _level_args(levels, K, overrides=None):
    """Per-level argument blocks T_K^{n+K-k} P^K_j, with optional per-slot overrides."""
    out = []
    for idx, lv in enumerate(levels):
        block = [tupler(K) for _ in range(lv.n + K - lv.k)]
        if overrides:
            for (lvl_idx, pos), term in overrides.items():
                if lvl_idx == idx:
                    block[pos - 1] = term
        block.append(selector(K, lv.j))
        out.extend(block)
    return out


# ---------------------------------------------------------------------------
# Interaction Böhm-out (the eta-gap regime)


def interaction_bohm_out(
    t: Term, u: Term, witness: DiffWitness, fuel: int, K: Optional[int] = None
) -> SeparationResult:
    """Separate by interaction count two terms whose trees differ by an eta gap.

    The context substitutes T_K for every free variable via a capturing
    prefix, then per path step applies T_K^(n+K-k) and the selector P^K_j;
    at the differing node the bound-head case additionally applies
    min(n1,n2) tuplers. Verified interaction indices must differ by exactly
    the witness's gap.
    """
    if not isinstance(witness.kind, SpineArityMismatch):
        raise NotApplicable(f"witness kind {type(witness.kind).__name__} is not a spine arity gap")
    if not (locally_closed(t) and locally_closed(u)):
        raise NotApplicable("terms must be locally closed")
    levels, final = _walk(t, u, witness.path, fuel)
    if final.status1 != "hnf" or final.status2 != "hnf":
        raise NotApplicable("both terms must reach an hnf at the witness path")
    if final.head1 != final.head2:
        raise NotApplicable("heads differ at the witness node: not the eta regime")
    if final.n2 - final.n1 != final.k2 - final.k1 or final.n1 == final.n2:
        raise NotApplicable("arity gap is not an eta gap")
    if K is None:
        K = choose_K(t, u, witness.path, fuel)
    needed = max([lv.k for lv in levels] + [final.k1, final.k2])
    if K < needed:
        raise NotApplicable(f"K={K} too small for spine arities along the path")

    if final.head1[0] == "own":
        n0 = min(final.n1, final.n2)
        base = [tupler(K) for _ in range(n0)]
        i1, i2 = n0 + final.k1, n0 + final.k2
    else:
        base = []
        i1, i2 = final.k1, final.k2
    for lv in reversed(levels):
        i1 = lv.n + lv.k + i1
        i2 = lv.n + lv.k + i2

    svec = _level_args(levels, K) + base
    names = sorted(free_vars(t) | free_vars(u))
    ctx = _assemble(names, {nm: tupler(K) for nm in names}, svec)

    out1, out2 = verify_separation(ctx, t, u, fuel)
    if not (isinstance(out1, Normal) and isinstance(out2, Normal)):
        raise FuelExceeded("verification ran out of fuel")
    if (out1.k, out2.k) != (i1, i2) or out1.k == out2.k:
        raise VerificationFailed(
            f"expected indices {i1}/{i2}, measured {out1.k}/{out2.k}"
        )
    expected = (IndexReport("normal", i1), IndexReport("normal", i2))
    return SeparationResult(ctx, K, expected, (out1, out2))


# ---------------------------------------------------------------------------
# Classic separation (termination differences)


def classic_separate(
    t: Term, u: Term, witness: DiffWitness, fuel: int
) -> Optional[SeparationResult]:
    """Make the left plugging converge and the right one diverge.

    DivergenceAsymmetry: extract along the path; the left side lands on an
    hnf, the right on a diverging term. HeadMismatch: additionally send the
    right head to lam^K.Omega, provided that variable is not needed as a
    tupler along the path (otherwise None: unhandled collision).
    """
    if not (locally_closed(t) and locally_closed(u)):
        return None
    if not isinstance(witness.kind, (DivergenceAsymmetry, HeadMismatch)):
        return None
    try:
        levels, final = _walk(t, u, witness.path, fuel)
    except NotApplicable:
        return None
    if final.status1 != "hnf":
        return None

    max_k = max([lv.k for lv in levels] + [final.k1, final.k2, 0])
    K = max_k + max(final.n1, final.n2) + 1
    names = sorted(free_vars(t) | free_vars(u))
    subs = {nm: tupler(K) for nm in names}
    overrides = {}
    base = []

    if isinstance(witness.kind, DivergenceAsymmetry):
        if final.status2 != "diverges":
            return None
    else:
        if final.status2 != "hnf" or final.head1 == final.head2:
            return None
        prefix_heads = {lv.head_id for lv in levels}
        if final.head2 in prefix_heads:
            return None  # the diverger would collide with a tupler role
        diverger = _diverger(K)
        if final.head2[0] == "own":
            # apply arguments to the differing node itself
            nfin = max(final.n1, final.n2)
            block = [tupler(K)] * nfin
            block[final.head2[1] - 1] = diverger
            base = block
        else:
            nm = final.head2[1]
            if nm in subs:
                subs[nm] = diverger
            else:
                slot = None
                for idx, lv in enumerate(levels):
                    if nm in lv.names:
                        slot = (idx, lv.names.index(nm) + 1)
                if slot is None:
                    return None
                overrides[slot] = diverger

    svec = _level_args(levels, K, overrides) + base
    ctx = _assemble(names, subs, svec)
    out1, out2 = verify_separation(ctx, t, u, fuel)
    if not isinstance(out1, Normal):
        raise FuelExceeded("left plugging did not converge within fuel")
    if not isinstance(out2, FuelOut):
        raise VerificationFailed("right plugging converged; context does not separate")
    expected = (IndexReport("normal", None), IndexReport("fuel-exhausted", None))
    return SeparationResult(ctx, K, expected, (out1, out2))


# ---------------------------------------------------------------------------
# Driver


def separate_terms(t: Term, u: Term, depth: int, fuel: int) -> Optional[SeparationResult]:
    """Find a witness and dispatch to the matching construction."""
    from .bohm import find_difference

    w = find_difference(t, u, depth, fuel)
    if w is None:
        return None
    if isinstance(w.kind, SpineArityMismatch):
        try:
            return interaction_bohm_out(t, u, w, fuel)
        except NotApplicable:
            return None
    return classic_separate(t, u, w, fuel)
