"""Terms of the ordinary and two-player (checkers) lambda calculus.

Representation is locally nameless: bound variables are de Bruijn indices
(`BVar`), free variables are names (`Var`). Alpha-equivalence is therefore
plain structural equality and substitution is capture-avoiding by
construction. Printers invent fresh readable names from a deterministic
counter-based supply.

Contexts (terms with exactly one hole) are kept in a *named* form so that
plugging can capture free variables of the plugged term, which is the
intended semantics. `plug` resolves names against the binders crossed on
the way to the hole.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Union


class Player(Enum):
    BLACK = "b"
    WHITE = "w"

    @property
    def opposite(self) -> "Player":
        return Player.WHITE if self is Player.BLACK else Player.BLACK

    def __str__(self) -> str:
        return self.value


BLACK = Player.BLACK
WHITE = Player.WHITE


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BVar:
    index: int


@dataclass(frozen=True)
class Lam:
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class CLam:
    player: Player
    body: "CTerm"


@dataclass(frozen=True)
class CApp:
    player: Player
    fun: "CTerm"
    arg: "CTerm"


Term = Union[Var, BVar, Lam, App]
CTerm = Union[Var, BVar, CLam, CApp]
AnyTerm = Union[Term, CTerm]


def free_vars(t: AnyTerm) -> frozenset:
    match t:
        case Var(name):
            return frozenset((name,))
        case BVar():
            return frozenset()
        case Lam(body) | CLam(_, body):
            return free_vars(body)
        case App(fun, arg) | CApp(_, fun, arg):
            return free_vars(fun) | free_vars(arg)
    raise TypeError(f"not a term: {t!r}")


def term_size(t: AnyTerm) -> int:
    """Number of constructors, variables included."""
    match t:
        case Var() | BVar():
            return 1
        case Lam(body) | CLam(_, body):
            return 1 + term_size(body)
        case App(fun, arg) | CApp(_, fun, arg):
            return 1 + term_size(fun) + term_size(arg)
    raise TypeError(f"not a term: {t!r}")


def locally_closed(t: AnyTerm, depth: int = 0) -> bool:
    match t:
        case Var():
            return True
        case BVar(i):
            return i < depth
        case Lam(body) | CLam(_, body):
            return locally_closed(body, depth + 1)
        case App(fun, arg) | CApp(_, fun, arg):
            return locally_closed(fun, depth) and locally_closed(arg, depth)
    raise TypeError(f"not a term: {t!r}")


def shift(t: AnyTerm, by: int, cutoff: int = 0) -> AnyTerm:
    """Shift dangling indices >= cutoff by `by`."""
    match t:
        case Var():
            return t
        case BVar(i):
            return BVar(i + by) if i >= cutoff else t
        case Lam(body):
            return Lam(shift(body, by, cutoff + 1))
        case CLam(p, body):
            return CLam(p, shift(body, by, cutoff + 1))
        case App(fun, arg):
            return App(shift(fun, by, cutoff), shift(arg, by, cutoff))
        case CApp(p, fun, arg):
            return CApp(p, shift(fun, by, cutoff), shift(arg, by, cutoff))
    raise TypeError(f"not a term: {t!r}")


def open_term(body: AnyTerm, repl: AnyTerm, depth: int = 0) -> AnyTerm:
    """Beta-instantiate the binder at `depth` with `repl` (indices above it drop)."""
    match body:
        case Var():
            return body
        case BVar(i):
            if i == depth:
                return shift(repl, depth)
            return BVar(i - 1) if i > depth else body
        case Lam(b):
            return Lam(open_term(b, repl, depth + 1))
        case CLam(p, b):
            return CLam(p, open_term(b, repl, depth + 1))
        case App(f, a):
            return App(open_term(f, repl, depth), open_term(a, repl, depth))
        case CApp(p, f, a):
            return CApp(p, open_term(f, repl, depth), open_term(a, repl, depth))
    raise TypeError(f"not a term: {body!r}")


def close_term(t: AnyTerm, name: str, depth: int = 0) -> AnyTerm:
    """Turn free occurrences of `name` into references to a new enclosing binder."""
    match t:
        case Var(n):
            return BVar(depth) if n == name else t
        case BVar(i):
            return BVar(i + 1) if i >= depth else t
        case Lam(b):
            return Lam(close_term(b, name, depth + 1))
        case CLam(p, b):
            return CLam(p, close_term(b, name, depth + 1))
        case App(f, a):
            return App(close_term(f, name, depth), close_term(a, name, depth))
        case CApp(p, f, a):
            return CApp(p, close_term(f, name, depth), close_term(a, name, depth))
    raise TypeError(f"not a term: {t!r}")


def lam(name: str, body: Term) -> Lam:
    return Lam(close_term(body, name))


def clam(player: Player, name: str, body: CTerm) -> CLam:
    return CLam(player, close_term(body, name))


def substitute(t: AnyTerm, name: str, repl: AnyTerm) -> AnyTerm:
    """Capture-avoiding substitution of `repl` for the free variable `name`."""

    def go(t, d):
        match t:
            case Var(n):
                return shift(repl, d) if n == name else t
            case BVar():
                return t
            case Lam(b):
                return Lam(go(b, d + 1))
            case CLam(p, b):
                return CLam(p, go(b, d + 1))
            case App(f, a):
                return App(go(f, d), go(a, d))
            case CApp(p, f, a):
                return CApp(p, go(f, d), go(a, d))
        raise TypeError(f"not a term: {t!r}")

    return go(t, 0)


def lift(player: Player, t: Term) -> CTerm:
    """Tag every abstraction and application of an ordinary term with one player."""
    match t:
        case Var() | BVar():
            return t
        case Lam(body):
            return CLam(player, lift(player, body))
        case App(fun, arg):
            return CApp(player, lift(player, fun), lift(player, arg))
    raise TypeError(f"not an ordinary term: {t!r}")


def wash(ct: CTerm) -> Term:
    """Erase all player tags; total inverse of lifting."""
    match ct:
        case Var() | BVar():
            return ct
        case CLam(_, body):
            return Lam(wash(body))
        case CApp(_, fun, arg):
            return App(wash(fun), wash(arg))
        case Lam(body):
            return Lam(wash(body))
        case App(fun, arg):
            return App(wash(fun), wash(arg))
    raise TypeError(f"not a term: {ct!r}")


def is_tagging(ct: CTerm, t: Term) -> bool:
    """True iff ct is t with some assignment of players to its constructors."""
    return wash(ct) == t


# ---------------------------------------------------------------------------
# Fresh names


class NameSupply:
    """Deterministic counter-based fresh names, skipping a set to avoid."""

    def __init__(self, avoid=()):
        self._avoid = set(avoid)
        self._counter = 0

    def fresh(self, hint: str = "x") -> str:
        while True:
            name = f"{hint}{self._counter}"
            self._counter += 1
            if name not in self._avoid:
                self._avoid.add(name)
                return name


# ---------------------------------------------------------------------------
# Named trees: contexts and the parser/printer surface


@dataclass(frozen=True)
class NVar:
    name: str


@dataclass(frozen=True)
class NLam:
    player: Optional[Player]
    binder: str
    body: "Named"


@dataclass(frozen=True)
class NApp:
    player: Optional[Player]
    fun: "Named"
    arg: "Named"


@dataclass(frozen=True)
class NHole:
    pass


Named = Union[NVar, NLam, NApp, NHole]
Context = Named  # ordinary: all players None, exactly one hole
CContext = Named  # checkers: all players set, exactly one hole

HOLE = NHole()


def hole_count(node: Named) -> int:
    match node:
        case NHole():
            return 1
        case NVar():
            return 0
        case NLam(_, _, body):
            return hole_count(body)
        case NApp(_, fun, arg):
            return hole_count(fun) + hole_count(arg)
    raise TypeError(f"not a named tree: {node!r}")


def lift_context(player: Player, ctx: Context) -> CContext:
    match ctx:
        case NHole() | NVar():
            return ctx
        case NLam(_, binder, body):
            return NLam(player, binder, lift_context(player, body))
        case NApp(_, fun, arg):
            return NApp(player, lift_context(player, fun), lift_context(player, arg))
    raise TypeError(f"not a context: {ctx!r}")


def wash_context(ctx: CContext) -> Context:
    match ctx:
        case NHole() | NVar():
            return ctx
        case NLam(_, binder, body):
            return NLam(None, binder, wash_context(body))
        case NApp(_, fun, arg):
            return NApp(None, wash_context(fun), wash_context(arg))
    raise TypeError(f"not a context: {ctx!r}")


def _capture(t: AnyTerm, stack: list) -> AnyTerm:
    """Bind free names of t that appear in the binder stack (innermost first)."""

    def go(t, depth):
        match t:
            case Var(name):
                for i, n in enumerate(stack):
                    if n == name:
                        return BVar(depth + i)
                return t
            case BVar():
                return t
            case Lam(b):
                return Lam(go(b, depth + 1))
            case CLam(p, b):
                return CLam(p, go(b, depth + 1))
            case App(f, a):
                return App(go(f, depth), go(a, depth))
            case CApp(p, f, a):
                return CApp(p, go(f, depth), go(a, depth))
        raise TypeError(f"not a term: {t!r}")

    return go(t, 0)


def plug(ctx: Named, t: AnyTerm) -> AnyTerm:
    """Textually replace the hole with t, capturing t's free variables."""

    def go(node, stack):
        match node:
            case NHole():
                return _capture(t, stack)
            case NVar(name):
                for i, n in enumerate(stack):
                    if n == name:
                        return BVar(i)
                return Var(name)
            case NLam(p, binder, body):
                b = go(body, [binder] + stack)
                return Lam(b) if p is None else CLam(p, b)
            case NApp(p, fun, arg):
                f = go(fun, stack)
                a = go(arg, stack)
                return App(f, a) if p is None else CApp(p, f, a)
        raise TypeError(f"not a named tree: {node!r}")

    return go(ctx, [])


def to_named(t: AnyTerm, supply: Optional[NameSupply] = None) -> Named:
    """Assign printable names to binders; free variables keep their names."""
    if supply is None:
        supply = NameSupply(free_vars(t))

    def go(t, env):
        match t:
            case Var(name):
                return NVar(name)
            case BVar(i):
                return NVar(env[i])
            case Lam(body):
                nm = supply.fresh()
                return NLam(None, nm, go(body, [nm] + env))
            case CLam(p, body):
                nm = supply.fresh()
                return NLam(p, nm, go(body, [nm] + env))
            case App(fun, arg):
                return NApp(None, go(fun, env), go(arg, env))
            case CApp(p, fun, arg):
                return NApp(p, go(fun, env), go(arg, env))
        raise TypeError(f"not a term: {t!r}")

    return go(t, [])


# ---------------------------------------------------------------------------
# Printing

_TOP, _FUN, _ARG = 0, 1, 2


def _render(node: Named, pos: int = _TOP) -> str:
    match node:
        case NVar(name):
            return name
        case NHole():
            return "[]"
        case NLam(p, _, _):
            binders = []
            body = node
            while isinstance(body, NLam) and body.player is p:
                binders.append(body.binder)
                body = body.body
            head = "\\" if p is None else f"\\{p.value} "
            s = f"{head}{' '.join(binders)}. {_render(body, _TOP)}"
            return f"({s})" if pos != _TOP else s
        case NApp(p, fun, arg):
            sep = " " if p is None else f" @{p.value} "
            s = f"{_render(fun, _FUN)}{sep}{_render(arg, _ARG)}"
            return f"({s})" if pos == _ARG else s
    raise TypeError(f"not a named tree: {node!r}")


def print_term(t: Term) -> str:
    return _render(to_named(t))


def print_cterm(ct: CTerm) -> str:
    return _render(to_named(ct))


def print_context(ctx: Named) -> str:
    return _render(ctx)


# ---------------------------------------------------------------------------
# Parsing
#
# Grammar (UTF-8 text):
#   variables  [a-zA-Z_][a-zA-Z0-9_']*
#   ordinary   \x y. t        application by juxtaposition, left-assoc
#   checkers   \b x. t  \w x. t     t @b u   t @w u, left-assoc
#   hole       []              (contexts only)
# Shorthands I, K, F, Y, Om, T<n>, P<n>_<i> expand in ordinary mode.


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[a-zA-Z_][a-zA-Z0-9_']*)"
    r"|(?P<lambda>\\)"
    r"|(?P<dot>\.)"
    r"|(?P<lpar>\()"
    r"|(?P<rpar>\))"
    r"|(?P<at>@)"
    r"|(?P<hole>\[\]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


_SHORTHAND_RE = re.compile(r"^(?:I|K|F|Y|Om|T(\d+)|P(\d+)_(\d+))$")


def _named_lams(names, body):
    for n in reversed(names):
        body = NLam(None, n, body)
    return body


def _named_apps(fun, args):
    for a in args:
        fun = NApp(None, fun, a)
    return fun


def _shorthand(name: str) -> Optional[Named]:
    m = _SHORTHAND_RE.match(name)
    if m is None:
        return None
    if name == "I":
        return NLam(None, "x", NVar("x"))
    if name == "K":
        return _named_lams(["x", "y"], NVar("x"))
    if name == "F":
        return _named_lams(["x", "y"], NVar("y"))
    if name == "Y":
        w = NLam(None, "x", NApp(None, NVar("f"), NApp(None, NVar("x"), NVar("x"))))
        return NLam(None, "f", NApp(None, w, w))
    if name == "Om":
        d = NLam(None, "x", NApp(None, NVar("x"), NVar("x")))
        return NApp(None, d, d)
    if m.group(1) is not None:  # tupler T<n>
        n = int(m.group(1))
        xs = [f"x{i}" for i in range(1, n + 1)]
        tup = NLam(None, "z", _named_apps(NVar("z"), [NVar(x) for x in xs]))
        return _named_lams(xs, tup)
    n, i = int(m.group(2)), int(m.group(3))
    if not 1 <= i <= n:
        raise ParseError(f"selector {name}: index out of range", 0)
    xs = [f"x{j}" for j in range(1, n + 1)]
    return _named_lams(xs, NVar(f"x{i}"))


class _Parser:
    def __init__(self, text: str, checkers: bool, allow_hole: bool):
        self.tokens = _tokenize(text)
        self.i = 0
        self.checkers = checkers
        self.allow_hole = allow_hole

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, got {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Named:
        node = self.term()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return node

    def term(self) -> Named:
        if self.peek()[0] == "lambda":
            return self.lam()
        return self.app()

    def lam(self) -> Named:
        self.expect("lambda")
        player = None
        if self.checkers:
            tok = self.expect("ident")
            if tok[1] not in ("b", "w"):
                raise ParseError(f"expected player b or w after \\, got {tok[1]!r}", tok[2])
            player = Player(tok[1])
        binders = []
        while self.peek()[0] == "ident":
            binders.append(self.next()[1])
        if not binders:
            tok = self.peek()
            raise ParseError("expected at least one binder", tok[2])
        self.expect("dot")
        body = self.term()
        for b in reversed(binders):
            body = NLam(player, b, body)
        return body

    def app(self) -> Named:
        node = self.atom()
        while True:
            tok = self.peek()
            if self.checkers:
                if tok[0] != "at":
                    break
                self.next()
                ptok = self.expect("ident")
                if ptok[1] not in ("b", "w"):
                    raise ParseError(f"expected player b or w after @, got {ptok[1]!r}", ptok[2])
                node = NApp(Player(ptok[1]), node, self.atom())
            else:
                if tok[0] not in ("ident", "lpar", "hole"):
                    break
                node = NApp(None, node, self.atom())
        return node

    def atom(self) -> Named:
        tok = self.next()
        if tok[0] == "ident":
            if not self.checkers:
                sh = _shorthand(tok[1])
                if sh is not None:
                    return sh
            return NVar(tok[1])
        if tok[0] == "lpar":
            node = self.term()
            self.expect("rpar")
            return node
        if tok[0] == "hole":
            if not self.allow_hole:
                raise ParseError("hole [] not allowed here", tok[2])
            return HOLE
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2])


def _to_nameless(node: Named, env: list) -> AnyTerm:
    match node:
        case NVar(name):
            for i, n in enumerate(env):
                if n == name:
                    return BVar(i)
            return Var(name)
        case NLam(p, binder, body):
            b = _to_nameless(body, [binder] + env)
            return Lam(b) if p is None else CLam(p, b)
        case NApp(p, fun, arg):
            f = _to_nameless(fun, env)
            a = _to_nameless(arg, env)
            return App(f, a) if p is None else CApp(p, f, a)
        case NHole():
            raise ParseError("hole in a term", 0)
    raise TypeError(f"not a named tree: {node!r}")


def parse_term(text: str) -> Term:
    return _to_nameless(_Parser(text, checkers=False, allow_hole=False).parse(), [])


def parse_cterm(text: str) -> CTerm:
    return _to_nameless(_Parser(text, checkers=True, allow_hole=False).parse(), [])


def _parse_context(text: str, checkers: bool) -> Named:
    node = _Parser(text, checkers=checkers, allow_hole=True).parse()
    n = hole_count(node)
    if n != 1:
        raise ParseError(f"context must contain exactly one hole, found {n}", 0)
    return node


def parse_context(text: str) -> Context:
    return _parse_context(text, checkers=False)


def parse_ccontext(text: str) -> CContext:
    return _parse_context(text, checkers=True)
