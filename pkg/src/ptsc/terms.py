"""Syntax of the sequent-calculus language: terms, argument lists, meta-variables.

Two mutually recursive categories. A variable is never a term on its own:
every variable occurrence is an application ``x{l}`` of a variable to a list
of arguments (possibly ``nil``). Explicit substitutions ``[x := P : A] M``
(cuts) appear both as term and list constructors.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union


class Term:
    """Base class of the term category."""

    __slots__ = ()


class ListTerm:
    """Base class of the argument-list category."""

    __slots__ = ()


TermOrList = Union[Term, ListTerm]


@dataclass(frozen=True, eq=False)
class MetaVar:
    """A declared meta-variable. Identity-compared; the registry owns creation."""

    ident: int
    name: str
    kind: str  # "term" | "list"
    arity: int

    def __repr__(self) -> str:
        sigil = "?" if self.kind == "term" else "??"
        return f"{sigil}{self.name}/{self.arity}"


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class SortTm(Term):
    name: str


@dataclass(frozen=True)
class Pi(Term):
    var: str
    dom: Term
    body: Term  # binds var


@dataclass(frozen=True)
class Lam(Term):
    var: str
    annot: Term
    body: Term  # binds var


@dataclass(frozen=True)
class VarApp(Term):
    var: str
    args: "ListTerm"


@dataclass(frozen=True)
class TermApp(Term):
    head: Term
    args: "ListTerm"


@dataclass(frozen=True)
class Cut(Term):
    """Explicit substitution ``[var := payload : annot] body`` on terms.

    Binds var in body only; annot and payload sit outside the binder's scope.
    """

    annot: Term
    payload: Term
    var: str
    body: Term


@dataclass(frozen=True)
class MetaTm(Term):
    mv: MetaVar
    args: tuple

    def __post_init__(self):
        if self.mv.kind != "term":
            raise ArityError(f"{self.mv!r} is a list meta-variable used as a term")
        if len(self.args) != self.mv.arity:
            raise ArityError(
                f"{self.mv!r} applied to {len(self.args)} arguments, expected {self.mv.arity}"
            )


@dataclass(frozen=True)
class Nil(ListTerm):
    pass


@dataclass(frozen=True)
class Cons(ListTerm):
    head: Term
    tail: "ListTerm"


@dataclass(frozen=True)
class Concat(ListTerm):
    left: "ListTerm"
    right: "ListTerm"


@dataclass(frozen=True)
class CutL(ListTerm):
    annot: Term
    payload: Term
    var: str
    body: "ListTerm"


@dataclass(frozen=True)
class MetaLs(ListTerm):
    mv: MetaVar
    args: tuple

    def __post_init__(self):
        if self.mv.kind != "list":
            raise ArityError(f"{self.mv!r} is a term meta-variable used as a list")
        if len(self.args) != self.mv.arity:
            raise ArityError(
                f"{self.mv!r} applied to {len(self.args)} arguments, expected {self.mv.arity}"
            )


NIL = Nil()


def var(name: str) -> VarApp:
    """The term ``name{nil}``."""
    return VarApp(name, NIL)


def arrow(dom: Term, cod: Term) -> Pi:
    """Non-dependent function type; picks a binder unused in the codomain."""
    x = fresh_var("_", free_vars(cod))
    return Pi(x, dom, cod)


def cons_list(*items: Term) -> ListTerm:
    out: ListTerm = NIL
    for item in reversed(items):
        out = Cons(item, out)
    return out


class MetaVarRegistry:
    """Session-wide table of meta-variables.

    Names are unique; arity and kind are fixed at creation. Creation is
    serialized so concurrent proof branches can claim fresh meta-variables.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._by_name: dict[str, MetaVar] = {}
        self._by_id: dict[int, MetaVar] = {}
        self._next = 0

    def create(self, name: str, kind: str, arity: int) -> MetaVar:
        if kind not in ("term", "list"):
            raise ValueError(f"bad meta-variable kind {kind!r}")
        if arity < 0:
            raise ValueError("negative arity")
        with self._lock:
            if name in self._by_name:
                raise ValueError(f"meta-variable {name!r} already registered")
            mv = MetaVar(self._next, name, kind, arity)
            self._next += 1
            self._by_name[name] = mv
            self._by_id[mv.ident] = mv
            return mv

    def create_with_id(self, ident: int, name: str, kind: str, arity: int) -> MetaVar:
        """Re-create an entry with a pinned id (session import)."""
        with self._lock:
            if name in self._by_name or ident in self._by_id:
                raise ValueError(f"meta-variable {name!r}/{ident} already registered")
            mv = MetaVar(ident, name, kind, arity)
            self._next = max(self._next, ident + 1)
            self._by_name[name] = mv
            self._by_id[ident] = mv
            return mv

    def fresh(self, kind: str, arity: int, hint: str = "a") -> MetaVar:
        with self._lock:
            base = hint or "a"
            name = base
            k = 0
            while name in self._by_name:
                k += 1
                name = f"{base}{k}"
            mv = MetaVar(self._next, name, kind, arity)
            self._next += 1
            self._by_name[name] = mv
            self._by_id[mv.ident] = mv
            return mv

    def lookup(self, name: str) -> Optional[MetaVar]:
        return self._by_name.get(name)

    def by_id(self, ident: int) -> Optional[MetaVar]:
        return self._by_id.get(ident)

    def __iter__(self) -> Iterator[MetaVar]:
        return iter(list(self._by_name.values()))


def children(t: TermOrList) -> tuple:
    """Ordered immediate subterms/sublists, matching redex path indices."""
    match t:
        case SortTm() | Nil():
            return ()
        case Pi(_, dom, body):
            return (dom, body)
        case Lam(_, annot, body):
            return (annot, body)
        case VarApp(_, args):
            return (args,)
        case TermApp(head, args):
            return (head, args)
        case Cut(annot, payload, _, body) | CutL(annot, payload, _, body):
            return (annot, payload, body)
        case MetaTm(_, args) | MetaLs(_, args):
            return tuple(args)
        case Cons(head, tail):
            return (head, tail)
        case Concat(left, right):
            return (left, right)
    raise TypeError(f"not a term or list: {t!r}")


def replace_child(t: TermOrList, index: int, new: TermOrList) -> TermOrList:
    match t:
        case Pi(x, dom, body):
            return Pi(x, new, body) if index == 0 else Pi(x, dom, new)
        case Lam(x, annot, body):
            return Lam(x, new, body) if index == 0 else Lam(x, annot, new)
        case VarApp(x, _):
            return VarApp(x, new)
        case TermApp(head, args):
            return TermApp(new, args) if index == 0 else TermApp(head, new)
        case Cut(annot, payload, x, body):
            parts = [annot, payload, body]
            parts[index] = new
            return Cut(parts[0], parts[1], x, parts[2])
        case CutL(annot, payload, x, body):
            parts = [annot, payload, body]
            parts[index] = new
            return CutL(parts[0], parts[1], x, parts[2])
        case MetaTm(mv, args):
            args = list(args)
            args[index] = new
            return MetaTm(mv, tuple(args))
        case MetaLs(mv, args):
            args = list(args)
            args[index] = new
            return MetaLs(mv, tuple(args))
        case Cons(head, tail):
            return Cons(new, tail) if index == 0 else Cons(head, new)
        case Concat(left, right):
            return Concat(new, right) if index == 0 else Concat(left, new)
    raise TypeError(f"no child {index} in {t!r}")


def at_path(t: TermOrList, path: tuple) -> TermOrList:
    for i in path:
        t = children(t)[i]
    return t


def replace_at(t: TermOrList, path: tuple, new: TermOrList) -> TermOrList:
    if not path:
        return new
    i = path[0]
    return replace_child(t, i, replace_at(children(t)[i], path[1:], new))


def free_vars(t: TermOrList) -> frozenset:
    match t:
        case SortTm() | Nil():
            return frozenset()
        case Pi(x, dom, body) | Lam(x, dom, body):
            return free_vars(dom) | (free_vars(body) - {x})
        case VarApp(x, args):
            return frozenset({x}) | free_vars(args)
        case TermApp(head, args):
            return free_vars(head) | free_vars(args)
        case Cut(annot, payload, x, body) | CutL(annot, payload, x, body):
            return free_vars(annot) | free_vars(payload) | (free_vars(body) - {x})
        case MetaTm(_, args) | MetaLs(_, args):
            out: frozenset = frozenset()
            for a in args:
                out |= free_vars(a)
            return out
        case Cons(head, tail):
            return free_vars(head) | free_vars(tail)
        case Concat(left, right):
            return free_vars(left) | free_vars(right)
    raise TypeError(f"not a term or list: {t!r}")


def is_ground(t: TermOrList) -> bool:
    if isinstance(t, (MetaTm, MetaLs)):
        return False
    return all(is_ground(c) for c in children(t))


def meta_vars(t: TermOrList) -> set:
    out: set = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, (MetaTm, MetaLs)):
            out.add(u.mv)
        stack.extend(children(u))
    return out


def _canon(t: TermOrList, env: dict, depth: int, meta_ids: Optional[dict]) -> tuple:
    def mv_key(mv: MetaVar):
        if meta_ids is None:
            return mv.ident
        if mv not in meta_ids:
            meta_ids[mv] = len(meta_ids)
        return meta_ids[mv]

    match t:
        case SortTm(s):
            return ("s", s)
        case Pi(x, dom, body):
            inner = dict(env)
            inner[x] = depth
            return ("pi", _canon(dom, env, depth, meta_ids), _canon(body, inner, depth + 1, meta_ids))
        case Lam(x, annot, body):
            inner = dict(env)
            inner[x] = depth
            return ("lam", _canon(annot, env, depth, meta_ids), _canon(body, inner, depth + 1, meta_ids))
        case VarApp(x, args):
            ref = env.get(x)
            name = ("b", ref) if ref is not None else ("f", x)
            return ("v", name, _canon(args, env, depth, meta_ids))
        case TermApp(head, args):
            return ("ap", _canon(head, env, depth, meta_ids), _canon(args, env, depth, meta_ids))
        case Cut(annot, payload, x, body):
            inner = dict(env)
            inner[x] = depth
            return (
                "cut",
                _canon(annot, env, depth, meta_ids),
                _canon(payload, env, depth, meta_ids),
                _canon(body, inner, depth + 1, meta_ids),
            )
        case CutL(annot, payload, x, body):
            inner = dict(env)
            inner[x] = depth
            return (
                "cutl",
                _canon(annot, env, depth, meta_ids),
                _canon(payload, env, depth, meta_ids),
                _canon(body, inner, depth + 1, meta_ids),
            )
        case MetaTm(mv, args):
            return ("m", mv_key(mv)) + tuple(_canon(a, env, depth, meta_ids) for a in args)
        case MetaLs(mv, args):
            return ("ml", mv_key(mv)) + tuple(_canon(a, env, depth, meta_ids) for a in args)
        case Nil():
            return ("nil",)
        case Cons(head, tail):
            return ("::", _canon(head, env, depth, meta_ids), _canon(tail, env, depth, meta_ids))
        case Concat(left, right):
            return ("++", _canon(left, env, depth, meta_ids), _canon(right, env, depth, meta_ids))
    raise TypeError(f"not a term or list: {t!r}")


def canon_key(t: TermOrList, mod_meta: bool = False) -> tuple:
    """Alpha-invariant structural key. With mod_meta, meta-variables are
    numbered by first occurrence so keys also identify terms up to a
    renaming of meta-variables. The plain key is cached on the node."""
    if mod_meta:
        return _canon(t, {}, 0, {})
    cached = getattr(t, "_canon_cache", None)
    if cached is None:
        cached = _canon(t, {}, 0, None)
        object.__setattr__(t, "_canon_cache", cached)
    return cached


def canon_telescope(bindings, items, mod_meta: bool = False) -> tuple:
    """Joint key for judgments: environment entries bind positionally into
    the trailing items, so keys agree exactly when the whole judgment does
    up to alpha-renaming."""
    meta_ids = {} if mod_meta else None
    env_map: dict = {}
    parts = []
    depth = 0
    for x, a in bindings:
        parts.append(_canon(a, env_map, depth, meta_ids))
        env_map = dict(env_map)
        env_map[x] = depth
        depth += 1
    for it in items:
        parts.append(_canon(it, env_map, depth, meta_ids))
    return tuple(parts)


def alpha_eq(a: TermOrList, b: TermOrList) -> bool:
    if a is b:
        return True
    if isinstance(a, Term) != isinstance(b, Term):
        return False
    return canon_key(a) == canon_key(b)


def all_var_names(t: TermOrList) -> set:
    """Every variable name occurring in t, free or bound (freshness pool)."""
    out: set = set()
    stack = [t]
    while stack:
        u = stack.pop()
        match u:
            case Pi(x, _, _) | Lam(x, _, _) | Cut(_, _, x, _) | CutL(_, _, x, _):
                out.add(x)
            case VarApp(x, _):
                out.add(x)
        stack.extend(children(u))
    return out


_fresh_counter = itertools.count()


def fresh_var(base: str, avoid: Iterable) -> str:
    """base, base1, base2, ... first name not in avoid."""
    avoid = set(avoid)
    stripped = base.rstrip("0123456789") or base
    if base not in avoid:
        return base
    k = 1
    while f"{stripped}{k}" in avoid:
        k += 1
    return f"{stripped}{k}"


def rename_free(t, mapping: dict):
    """Capture-avoiding renaming of free variables (values are names)."""
    if not mapping:
        return t
    match t:
        case SortTm() | Nil():
            return t
        case VarApp(x, args):
            return VarApp(mapping.get(x, x), rename_free(args, mapping))
        case TermApp(head, args):
            return TermApp(rename_free(head, mapping), rename_free(args, mapping))
        case MetaTm(mv, args):
            return MetaTm(mv, tuple(rename_free(a, mapping) for a in args))
        case MetaLs(mv, args):
            return MetaLs(mv, tuple(rename_free(a, mapping) for a in args))
        case Cons(head, tail):
            return Cons(rename_free(head, mapping), rename_free(tail, mapping))
        case Concat(left, right):
            return Concat(rename_free(left, mapping), rename_free(right, mapping))
        case Pi(x, dom, body) | Lam(x, dom, body):
            ctor = Pi if isinstance(t, Pi) else Lam
            dom2 = rename_free(dom, mapping)
            inner = {k: v for k, v in mapping.items() if k != x}
            if x in set(inner.values()):
                x2 = fresh_var(x, set(inner.values()) | free_vars(body) | set(inner))
                body = rename_free(body, {x: x2})
                x = x2
            return ctor(x, dom2, rename_free(body, inner))
        case Cut(annot, payload, x, body) | CutL(annot, payload, x, body):
            ctor = Cut if isinstance(t, Cut) else CutL
            annot2 = rename_free(annot, mapping)
            payload2 = rename_free(payload, mapping)
            inner = {k: v for k, v in mapping.items() if k != x}
            if x in set(inner.values()):
                x2 = fresh_var(x, set(inner.values()) | free_vars(body) | set(inner))
                body = rename_free(body, {x: x2})
                x = x2
            return ctor(annot2, payload2, x, rename_free(body, inner))
    raise TypeError(f"not a term or list: {t!r}")


@dataclass(frozen=True)
class Environment:
    """Ordered typing environment; variables must be pairwise distinct for
    well-formedness, which is checked when asserted, not at construction."""

    entries: tuple = ()

    def extend(self, x: str, a: Term) -> "Environment":
        return Environment(self.entries + ((x, a),))

    def domain(self) -> list:
        return [x for x, _ in self.entries]

    def lookup(self, x: str) -> Optional[Term]:
        for y, a in reversed(self.entries):
            if y == x:
                return a
        return None

    def distinct(self) -> bool:
        dom = self.domain()
        return len(dom) == len(set(dom))

    def is_ground(self) -> bool:
        return all(is_ground(a) for _, a in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return True

    def canon_key(self, mod_meta: bool = False) -> tuple:
        if mod_meta:
            return tuple((x, canon_key(a, True)) for x, a in self.entries)
        cached = getattr(self, "_canon_cache", None)
        if cached is None:
            cached = tuple((x, canon_key(a)) for x, a in self.entries)
            object.__setattr__(self, "_canon_cache", cached)
        return cached


def env_domain_args(env: Environment) -> tuple:
    """The argument vector x1{nil}, ..., xn{nil} over an environment's domain."""
    return tuple(var(x) for x in env.domain())
