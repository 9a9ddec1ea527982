"""Reduction: the key step B plus the terminating cut-propagation system x'.

x' = {B1,B2,B3, A1..A4} and the substitution rules {C1..C6, Calpha, D1..D3,
Dbeta}. B is the beta-like step. x' terminates on all terms; adding B does
not, so B-involving normalisation is fuel-bounded.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional

from .terms import (
    NIL,
    Concat,
    Cons,
    Cut,
    CutL,
    Lam,
    ListTerm,
    MetaLs,
    MetaTm,
    Nil,
    Pi,
    SortTm,
    Term,
    TermApp,
    TermOrList,
    VarApp,
    alpha_eq,
    at_path,
    children,
    free_vars,
    fresh_var,
    rename_free,
    replace_at,
)

X_RULES = (
    "B1", "B2", "B3",
    "A1", "A2", "A3", "A4",
    "C1", "C2", "C3", "C4", "C5", "C6", "Calpha",
    "D1", "D2", "D3", "Dbeta",
)
ALL_RULES = ("B",) + X_RULES

# steps beyond this are treated as an implementation defect: the
# cut-propagation system is terminating, so it can never run this long
DEFECT_CAP = 2_000_000


class RewriteDefect(RuntimeError):
    pass


class StaleRedex(ValueError):
    pass


class Verdict(Enum):
    YES = "yes"
    NO = "no"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Redex:
    path: tuple
    rule: str


@dataclass(frozen=True)
class Exhausted:
    partial: TermOrList


def _rules_at(t: TermOrList) -> tuple:
    """Rules whose left-hand side matches at the root of t."""
    out = []
    match t:
        case TermApp(head, args):
            if isinstance(head, Lam) and isinstance(args, Cons):
                out.append("B")
            if isinstance(args, Nil):
                out.append("B1")
            if isinstance(head, VarApp):
                out.append("B2")
            if isinstance(head, TermApp):
                out.append("B3")
        case Concat(left, right):
            if isinstance(left, Cons):
                out.append("A1")
            if isinstance(left, Nil):
                out.append("A2")
            if isinstance(left, Concat):
                out.append("A3")
            if isinstance(right, Nil):
                out.append("A4")
        case Cut(_, _, y, body):
            match body:
                case Lam():
                    out.append("C1")
                case VarApp(x, _):
                    out.append("C2" if x == y else "C3")
                case TermApp():
                    out.append("C4")
                case Pi():
                    out.append("C5")
                case SortTm():
                    out.append("C6")
                case MetaTm():
                    out.append("Calpha")
        case CutL(_, _, _, body):
            match body:
                case Nil():
                    out.append("D1")
                case Cons():
                    out.append("D2")
                case Concat():
                    out.append("D3")
                case MetaLs():
                    out.append("Dbeta")
    return tuple(out)


def _freshen_binder(x: str, body: TermOrList, avoid) -> tuple:
    """Rename a binder so a cut can move under it without capture."""
    x2 = fresh_var(x, set(avoid) | free_vars(body) | {x})
    return x2, rename_free(body, {x: x2})


def contract(t: TermOrList, rule: str) -> TermOrList:
    """Apply rule at the root. Assumes the rule matches (checked by caller)."""
    match rule, t:
        case "B", TermApp(Lam(x, a, m), Cons(n, l)):
            return TermApp(Cut(a, n, x, m), l)
        case "B1", TermApp(m, Nil()):
            return m
        case "B2", TermApp(VarApp(x, l), l2):
            return VarApp(x, Concat(l, l2))
        case "B3", TermApp(TermApp(m, l), l2):
            return TermApp(m, Concat(l, l2))
        case "A1", Concat(Cons(m, l1), l2):
            return Cons(m, Concat(l1, l2))
        case "A2", Concat(Nil(), l2):
            return l2
        case "A3", Concat(Concat(l1, l2), l3):
            return Concat(l1, Concat(l2, l3))
        case "A4", Concat(l1, Nil()):
            return l1
        case "C1", Cut(g, p, y, Lam(x, a, m)):
            if x == y or x in free_vars(p) or x in free_vars(g):
                x, m = _freshen_binder(x, m, free_vars(p) | free_vars(g) | {y})
            return Lam(x, Cut(g, p, y, a), Cut(g, p, y, m))
        case "C2", Cut(g, p, y, VarApp(_, l)):
            return TermApp(p, CutL(g, p, y, l))
        case "C3", Cut(g, p, y, VarApp(x, l)):
            return VarApp(x, CutL(g, p, y, l))
        case "C4", Cut(g, p, y, TermApp(m, l)):
            return TermApp(Cut(g, p, y, m), CutL(g, p, y, l))
        case "C5", Cut(g, p, y, Pi(x, a, b)):
            if x == y or x in free_vars(p) or x in free_vars(g):
                x, b = _freshen_binder(x, b, free_vars(p) | free_vars(g) | {y})
            return Pi(x, Cut(g, p, y, a), Cut(g, p, y, b))
        case "C6", Cut(_, _, _, SortTm() as s):
            return s
        case "Calpha", Cut(g, p, y, MetaTm(mv, args)):
            return MetaTm(mv, tuple(Cut(g, p, y, a) for a in args))
        case "D1", CutL(_, _, _, Nil()):
            return NIL
        case "D2", CutL(g, p, y, Cons(m, l)):
            return Cons(Cut(g, p, y, m), CutL(g, p, y, l))
        case "D3", CutL(g, p, y, Concat(l1, l2)):
            return Concat(CutL(g, p, y, l1), CutL(g, p, y, l2))
        case "Dbeta", CutL(g, p, y, MetaLs(mv, args)):
            return MetaLs(mv, tuple(Cut(g, p, y, a) for a in args))
    raise StaleRedex(f"rule {rule} does not match {t!r}")


def iter_redexes(t: TermOrList, rules) -> Iterator[Redex]:
    """All redexes in leftmost-outermost (pre-order) order."""
    rules = frozenset(rules)
    stack = [((), t)]
    while stack:
        path, u = stack.pop()
        for r in _rules_at(u):
            if r in rules:
                yield Redex(path, r)
        kids = children(u)
        for i in range(len(kids) - 1, -1, -1):
            stack.append((path + (i,), kids[i]))


def find_redexes(t: TermOrList, rules=ALL_RULES) -> list:
    return list(iter_redexes(t, rules))


def step(t: TermOrList, redex: Redex) -> TermOrList:
    sub = at_path(t, redex.path)
    if redex.rule not in _rules_at(sub):
        raise StaleRedex(f"no {redex.rule} redex at {redex.path}")
    return replace_at(t, redex.path, contract(sub, redex.rule))


def _first_redex(t: TermOrList, rules) -> Optional[Redex]:
    for r in iter_redexes(t, rules):
        return r
    return None


def normalize_x(t: TermOrList, on_step=None) -> TermOrList:
    """Unique normal form of the cut-propagation system x'.

    Leftmost-outermost; always terminates. A defect cap guards against
    implementation bugs in the rule table.
    """
    steps = 0
    while True:
        r = _first_redex(t, X_RULES)
        if r is None:
            return t
        t = replace_at(t, r.path, contract(at_path(t, r.path), r.rule))
        if on_step is not None:
            on_step(r)
        steps += 1
        if steps > DEFECT_CAP:
            raise RewriteDefect("x' normalisation exceeded the defect cap")


def normalize_bx(t: TermOrList, fuel: int, on_step=None):
    """Full normalisation including B, leftmost-outermost, fuel-bounded.

    Returns the normal form, or Exhausted(partial) when fuel runs out.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    for _ in range(fuel):
        r = _first_redex(t, ALL_RULES)
        if r is None:
            return t
        t = replace_at(t, r.path, contract(at_path(t, r.path), r.rule))
        if on_step is not None:
            on_step(r)
    if _first_redex(t, ALL_RULES) is None:
        return t
    return Exhausted(t)


class _Fuel:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self) -> bool:
        if self.left <= 0:
            return False
        self.left -= 1
        return True


class _OutOfFuel(Exception):
    pass


def _whnf_term(t: Term, fuel: _Fuel) -> Term:
    defect = 0
    while True:
        defect += 1
        if defect > DEFECT_CAP:
            raise RewriteDefect("head normalisation exceeded the defect cap")
        roots = _rules_at(t)
        if roots:
            if not fuel.spend():
                raise _OutOfFuel()
            t = contract(t, roots[0])
            continue
        match t:
            case Cut(g, p, y, body):
                # cuts block only on a cut body: reduce it first
                body2 = _whnf_term(body, fuel)
                if body2 is body:
                    return t
                t = Cut(g, p, y, body2)
            case TermApp(head, args):
                head2 = _whnf_term(head, fuel)
                if head2 is not head:
                    t = TermApp(head2, args)
                    continue
                # a lambda head waits on cons/nil, any other stuck head can
                # still collapse by B1 once the list exposes nil
                args2 = _whnf_list(args, fuel)
                if args2 is args:
                    return t
                t = TermApp(head2, args2)
            case _:
                return t


def _whnf_list(l: ListTerm, fuel: _Fuel) -> ListTerm:
    defect = 0
    while True:
        defect += 1
        if defect > DEFECT_CAP:
            raise RewriteDefect("head normalisation exceeded the defect cap")
        roots = _rules_at(l)
        if roots:
            if not fuel.spend():
                raise _OutOfFuel()
            l = contract(l, roots[0])
            continue
        match l:
            case CutL(g, p, y, body):
                body2 = _whnf_list(body, fuel)
                if body2 is body:
                    return l
                l = CutL(g, p, y, body2)
            case Concat(left, right):
                left2 = _whnf_list(left, fuel)
                if left2 is left:
                    return l
                l = Concat(left2, right)
            case _:
                return l


def whnf(t: TermOrList, fuel: int = 10_000):
    """Weak-head normal form, or Exhausted on fuel. Exposes the head
    constructor needed by reduction side conditions (sort, Pi, cons, nil)."""
    f = _Fuel(fuel)
    try:
        if isinstance(t, Term):
            return _whnf_term(t, f)
        return _whnf_list(t, f)
    except _OutOfFuel:
        return Exhausted(t)


def _nf_term(t: Term, fuel: _Fuel) -> Term:
    t = _whnf_term(t, fuel)
    match t:
        case SortTm():
            return t
        case Pi(x, a, b):
            return Pi(x, _nf_term(a, fuel), _nf_term(b, fuel))
        case Lam(x, a, b):
            return Lam(x, _nf_term(a, fuel), _nf_term(b, fuel))
        case VarApp(x, l):
            return VarApp(x, _nf_list(l, fuel))
        case MetaTm(mv, args):
            return MetaTm(mv, tuple(_nf_term(a, fuel) for a in args))
        case TermApp(m, l):  # stuck on a meta head or a meta-blocked list
            out = TermApp(_nf_term(m, fuel), _nf_list(l, fuel))
            if _rules_at(out):  # children may have exposed a root redex
                if not fuel.spend():
                    raise _OutOfFuel()
                return _nf_term(contract(out, _rules_at(out)[0]), fuel)
            return out
    raise RewriteDefect(f"unexpected weak-head form {t!r}")


def _nf_list(l: ListTerm, fuel: _Fuel) -> ListTerm:
    l = _whnf_list(l, fuel)
    match l:
        case Nil():
            return l
        case Cons(m, tail):
            return Cons(_nf_term(m, fuel), _nf_list(tail, fuel))
        case MetaLs(mv, args):
            return MetaLs(mv, tuple(_nf_term(a, fuel) for a in args))
        case Concat(left, right):  # stuck on a meta-headed left part
            out = Concat(_nf_list(left, fuel), _nf_list(right, fuel))
            if _rules_at(out):  # a normalized right part may expose nil
                if not fuel.spend():
                    raise _OutOfFuel()
                return _nf_list(contract(out, _rules_at(out)[0]), fuel)
            return out
    raise RewriteDefect(f"unexpected weak-head form {l!r}")


def normalize_fast(t: TermOrList, fuel: int):
    """Full normal form by head-first structural descent. Same result as
    the leftmost-outermost stepper (confluence) without its per-step rescan;
    used by convertibility. Exhausted(t) on fuel."""
    f = _Fuel(fuel)
    try:
        if isinstance(t, Term):
            return _nf_term(t, f)
        return _nf_list(t, f)
    except _OutOfFuel:
        return Exhausted(t)


DEFAULT_CONV_FUEL = 10_000


def convertible(a: TermOrList, b: TermOrList, fuel: int = DEFAULT_CONV_FUEL) -> Verdict:
    """Convertibility by joint normalisation; sound on typed terms by
    confluence. Fuel exhaustion is reported, never conflated with NO."""
    if alpha_eq(a, b):
        return Verdict.YES
    na = normalize_fast(a, fuel)
    nb = normalize_fast(b, fuel)
    if isinstance(na, Exhausted) or isinstance(nb, Exhausted):
        return Verdict.UNDECIDED
    return Verdict.YES if alpha_eq(na, nb) else Verdict.NO
