"""Classical lambda-term syntax and round-trip translations.

Meta-variables have no native lambda-syntax counterpart, so each registered
meta-variable of arity k is mirrored by a reserved, never-bound variable
applied to at least k arguments (k+1 for list meta-variables: the extra first
argument stands for the future head the list will be attached to). The
translations are inverse on normal forms and turn the key step B into beta
steps and the administrative x' steps into equalities.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
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
    MetaVar,
    MetaVarRegistry,
    Nil,
    Pi,
    SortTm,
    Term,
    TermApp,
    TermOrList,
    VarApp,
    fresh_var,
)


class PtsTerm:
    __slots__ = ()


@dataclass(frozen=True)
class VarP(PtsTerm):
    name: str


@dataclass(frozen=True)
class SortP(PtsTerm):
    name: str


@dataclass(frozen=True)
class PiP(PtsTerm):
    var: str
    dom: PtsTerm
    body: PtsTerm


@dataclass(frozen=True)
class LamP(PtsTerm):
    var: str
    annot: PtsTerm
    body: PtsTerm


@dataclass(frozen=True)
class App(PtsTerm):
    fn: PtsTerm
    arg: PtsTerm


RESERVED_PREFIX = "!"


def reserved_name(mv: MetaVar) -> str:
    return f"{RESERVED_PREFIX}{mv.name}"


def is_reserved(name: str) -> bool:
    return name.startswith(RESERVED_PREFIX)


@dataclass(frozen=True)
class ReservedVar:
    """The lambda-side stand-in for one meta-variable."""

    name: str
    kind: str
    arity: int
    mv: MetaVar

    @staticmethod
    def of(mv: MetaVar) -> "ReservedVar":
        return ReservedVar(reserved_name(mv), mv.kind, mv.arity, mv)


class FragmentError(ValueError):
    """Input outside the image of the translation: a reserved variable is
    bound or under-applied."""


def free_vars_pts(t: PtsTerm) -> frozenset:
    match t:
        case VarP(x):
            return frozenset({x})
        case SortP(_):
            return frozenset()
        case PiP(x, dom, body) | LamP(x, dom, body):
            return free_vars_pts(dom) | (free_vars_pts(body) - {x})
        case App(fn, arg):
            return free_vars_pts(fn) | free_vars_pts(arg)
    raise TypeError(f"not a lambda term: {t!r}")


def _canon_pts(t: PtsTerm, env: dict, depth: int) -> tuple:
    match t:
        case VarP(x):
            ref = env.get(x)
            return ("v", ref) if ref is not None else ("f", x)
        case SortP(s):
            return ("s", s)
        case PiP(x, dom, body):
            inner = dict(env)
            inner[x] = depth
            return ("pi", _canon_pts(dom, env, depth), _canon_pts(body, inner, depth + 1))
        case LamP(x, dom, body):
            inner = dict(env)
            inner[x] = depth
            return ("lam", _canon_pts(dom, env, depth), _canon_pts(body, inner, depth + 1))
        case App(fn, arg):
            return ("app", _canon_pts(fn, env, depth), _canon_pts(arg, env, depth))
    raise TypeError(f"not a lambda term: {t!r}")


def canon_key_pts(t: PtsTerm) -> tuple:
    return _canon_pts(t, {}, 0)


def alpha_eq_pts(a: PtsTerm, b: PtsTerm) -> bool:
    return canon_key_pts(a) == canon_key_pts(b)


def subst_pts(t: PtsTerm, x: str, u: PtsTerm) -> PtsTerm:
    match t:
        case VarP(y):
            return u if y == x else t
        case SortP(_):
            return t
        case App(fn, arg):
            return App(subst_pts(fn, x, u), subst_pts(arg, x, u))
        case PiP(y, dom, body) | LamP(y, dom, body):
            ctor = PiP if isinstance(t, PiP) else LamP
            dom2 = subst_pts(dom, x, u)
            if y == x:
                return ctor(y, dom2, body)
            if y in free_vars_pts(u) and x in free_vars_pts(body):
                y2 = fresh_var(y, free_vars_pts(u) | free_vars_pts(body) | {x})
                body = subst_pts(body, y, VarP(y2))
                y = y2
            return ctor(y, dom2, subst_pts(body, x, u))
    raise TypeError(f"not a lambda term: {t!r}")


def beta_redex_paths(t: PtsTerm, path=()) -> Iterator[tuple]:
    if isinstance(t, App) and isinstance(t.fn, LamP):
        yield path
    match t:
        case PiP(_, dom, body) | LamP(_, dom, body):
            yield from beta_redex_paths(dom, path + (0,))
            yield from beta_redex_paths(body, path + (1,))
        case App(fn, arg):
            yield from beta_redex_paths(fn, path + (0,))
            yield from beta_redex_paths(arg, path + (1,))


def _pts_at(t: PtsTerm, path: tuple) -> PtsTerm:
    for i in path:
        match t:
            case PiP(_, dom, body) | LamP(_, dom, body):
                t = (dom, body)[i]
            case App(fn, arg):
                t = (fn, arg)[i]
            case _:
                raise IndexError(path)
    return t


def _pts_replace(t: PtsTerm, path: tuple, new: PtsTerm) -> PtsTerm:
    if not path:
        return new
    i = path[0]
    match t:
        case PiP(x, dom, body):
            return PiP(x, _pts_replace(dom, path[1:], new), body) if i == 0 else PiP(x, dom, _pts_replace(body, path[1:], new))
        case LamP(x, dom, body):
            return LamP(x, _pts_replace(dom, path[1:], new), body) if i == 0 else LamP(x, dom, _pts_replace(body, path[1:], new))
        case App(fn, arg):
            return App(_pts_replace(fn, path[1:], new), arg) if i == 0 else App(fn, _pts_replace(arg, path[1:], new))
    raise IndexError(path)


def beta_step(t: PtsTerm) -> list:
    """All one-step beta reducts, leftmost-outermost order."""
    out = []
    for path in beta_redex_paths(t):
        redex = _pts_at(t, path)
        assert isinstance(redex, App) and isinstance(redex.fn, LamP)
        out.append(_pts_replace(t, path, subst_pts(redex.fn.body, redex.fn.var, redex.arg)))
    return out


def beta_normalize(t: PtsTerm, fuel: int):
    """Leftmost-outermost beta normalisation; None when fuel runs out."""
    for _ in range(fuel):
        reducts = None
        for path in beta_redex_paths(t):
            redex = _pts_at(t, path)
            reducts = _pts_replace(t, path, subst_pts(redex.fn.body, redex.fn.var, redex.arg))
            break
        if reducts is None:
            return t
        t = reducts
    if next(beta_redex_paths(t), None) is None:
        return t
    return None


def whnf_pts(t: PtsTerm, fuel: int) -> Optional[PtsTerm]:
    for _ in range(fuel):
        if isinstance(t, App) and isinstance(t.fn, LamP):
            t = subst_pts(t.fn.body, t.fn.var, t.arg)
            continue
        if isinstance(t, App):
            fn = whnf_pts(t.fn, fuel)
            if fn is None:
                return None
            if fn is t.fn:
                return t
            t = App(fn, t.arg)
            continue
        return t
    return None


_fresh_translation = itertools.count()


def _fresh_trans_var() -> str:
    # translation-local namespace, disjoint from user variables
    return f"%z{next(_fresh_translation)}"


def encode(t: Term) -> PtsTerm:
    match t:
        case Pi(x, a, b):
            return PiP(x, encode(a), encode(b))
        case Lam(x, a, m):
            return LamP(x, encode(a), encode(m))
        case SortTm(s):
            return SortP(s)
        case VarApp(x, l):
            z = _fresh_trans_var()
            return subst_pts(encode_list(z, l), z, VarP(x))
        case TermApp(m, l):
            z = _fresh_trans_var()
            return subst_pts(encode_list(z, l), z, encode(m))
        case Cut(_, p, x, m):
            return subst_pts(encode(m), x, encode(p))
        case MetaTm(mv, args):
            out: PtsTerm = VarP(reserved_name(mv))
            for a in args:
                out = App(out, encode(a))
            return out
    raise TypeError(f"not a term: {t!r}")


def encode_list(y: str, l: ListTerm) -> PtsTerm:
    match l:
        case Nil():
            return VarP(y)
        case Cons(m, tail):
            z = _fresh_trans_var()
            return subst_pts(encode_list(z, tail), z, App(VarP(y), encode(m)))
        case Concat(l1, l2):
            z = _fresh_trans_var()
            return subst_pts(encode_list(z, l2), z, encode_list(y, l1))
        case CutL(_, p, x, body):
            return subst_pts(encode_list(y, body), x, encode(p))
        case MetaLs(mv, args):
            out: PtsTerm = App(VarP(reserved_name(mv)), VarP(y))
            for a in args:
                out = App(out, encode(a))
            return out
    raise TypeError(f"not a list: {l!r}")


def _spine(t: PtsTerm) -> tuple:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def _reserved_mv(head: PtsTerm, registry: MetaVarRegistry) -> Optional[MetaVar]:
    if isinstance(head, VarP) and is_reserved(head.name):
        mv = registry.lookup(head.name[len(RESERVED_PREFIX):])
        if mv is None:
            raise FragmentError(f"reserved variable {head.name!r} has no registered meta-variable")
        return mv
    return None


def needs_list(t: PtsTerm, l: ListTerm, registry: MetaVarRegistry) -> bool:
    """Whether the list-parameterised translation of t must consume l.

    Exactly when the translation of (t, l) would not be a B1 redex: false
    only for an empty l against a non-variable non-application, or against a
    saturated reserved term meta-variable spine.
    """
    if not isinstance(l, Nil):
        return True
    head, args = _spine(t)
    mv = _reserved_mv(head, registry)
    if mv is not None and mv.kind == "term" and len(args) == mv.arity:
        return False
    return isinstance(t, (App, VarP))


def decode(t: PtsTerm, registry: MetaVarRegistry) -> Term:
    head, args = _spine(t)
    mv = _reserved_mv(head, registry)
    if mv is not None:
        if mv.kind == "term" and len(args) == mv.arity:
            return MetaTm(mv, tuple(decode(a, registry) for a in args))
        if mv.kind == "list" and len(args) == mv.arity + 1:
            lst = MetaLs(mv, tuple(decode(a, registry) for a in args[1:]))
            return decode_with(lst, args[0], registry)
    match t:
        case SortP(s):
            return SortTm(s)
        case PiP(x, dom, body):
            _check_binder(x)
            return Pi(x, decode(dom, registry), decode(body, registry))
        case LamP(x, annot, body):
            _check_binder(x)
            return Lam(x, decode(annot, registry), decode(body, registry))
    return decode_with(NIL, t, registry)


def decode_with(l: ListTerm, t: PtsTerm, registry: MetaVarRegistry) -> Term:
    head, args = _spine(t)
    mv = _reserved_mv(head, registry)
    if mv is not None:
        if mv.kind == "term" and len(args) == mv.arity:
            return TermApp(MetaTm(mv, tuple(decode(a, registry) for a in args)), l)
        if mv.kind == "list" and len(args) == mv.arity + 1:
            lst = MetaLs(mv, tuple(decode(a, registry) for a in args[1:]))
            return decode_with(Concat(lst, l), args[0], registry)
        if not args:
            raise FragmentError(f"reserved variable {head.name!r} is under-applied")
    match t:
        case App(fn, arg):
            return decode_with(Cons(decode(arg, registry), l), fn, registry)
        case VarP(x):
            if is_reserved(x):
                raise FragmentError(f"reserved variable {x!r} is under-applied")
            return VarApp(x, l)
    return TermApp(decode(t, registry), l)


def _check_binder(x: str) -> None:
    if is_reserved(x):
        raise FragmentError(f"reserved variable {x!r} must not be bound")


def in_fragment(t: PtsTerm, registry: MetaVarRegistry) -> bool:
    """Reserved variables never bound and always sufficiently applied."""
    def walk(u: PtsTerm) -> bool:
        head, args = _spine(u)
        mv = _reserved_mv(head, registry) if isinstance(head, VarP) else None
        if mv is not None:
            need = mv.arity if mv.kind == "term" else mv.arity + 1
            if len(args) < need:
                return False
        else:
            match head:
                case PiP(x, dom, body) | LamP(x, dom, body):
                    if is_reserved(x) or not (walk(dom) and walk(body)):
                        return False
        return all(walk(a) for a in args)

    try:
        return walk(t)
    except FragmentError:
        return False
