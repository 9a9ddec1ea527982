"""First-order termination oracle for the cut-propagation system.

Terms map into a first-order signature {blob/0, un/1, deux/2, cut/2, sub/2}
plus tuple_n/n for meta-variable nodes, ordered by the precedence

    blob < un < deux < tuple_0 < tuple_1 < ... < cut < sub

Every x' step strictly decreases the image under the induced lexicographic
path ordering, which is the termination argument the tests replay.
"""
from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    Concat,
    Cons,
    Cut,
    CutL,
    Lam,
    MetaLs,
    MetaTm,
    Nil,
    Pi,
    SortTm,
    TermApp,
    TermOrList,
    VarApp,
)


@dataclass(frozen=True)
class FoTerm:
    sym: str  # "blob" | "un" | "deux" | "cut" | "sub" | "tuple"
    args: tuple = ()

    def __post_init__(self):
        arity = {"blob": 0, "un": 1, "deux": 2, "cut": 2, "sub": 2}.get(self.sym)
        if arity is not None and len(self.args) != arity:
            raise ValueError(f"{self.sym} expects {arity} arguments")

    def __repr__(self) -> str:
        if not self.args:
            return "•" if self.sym == "blob" else self.sym
        name = self.sym if self.sym != "tuple" else f"tuple{len(self.args)}"
        return f"{name}({', '.join(map(repr, self.args))})"


BLOB = FoTerm("blob")


def _rank(t: FoTerm) -> tuple:
    order = {"blob": 0, "un": 1, "deux": 2, "tuple": 3, "cut": 4, "sub": 5}
    return (order[t.sym], len(t.args) if t.sym == "tuple" else 0)


def _prec_gt(a: FoTerm, b: FoTerm) -> bool:
    return _rank(a) > _rank(b)


def _same_symbol(a: FoTerm, b: FoTerm) -> bool:
    return _rank(a) == _rank(b)


def foe(t: TermOrList) -> FoTerm:
    match t:
        case SortTm() | Nil():
            return BLOB
        case Lam(_, a, m) | Pi(_, a, m):
            return FoTerm("deux", (foe(a), foe(m)))
        case VarApp(_, l):
            return FoTerm("un", (foe(l),))
        case TermApp(m, l):
            return FoTerm("cut", (foe(m), foe(l)))
        case Cut(_, m, _, n) | CutL(_, m, _, n):
            return FoTerm("sub", (foe(m), foe(n)))
        case MetaTm(_, args) | MetaLs(_, args):
            return FoTerm("tuple", tuple(foe(a) for a in args))
        case Cons(m, l):
            return FoTerm("deux", (foe(m), foe(l)))
        case Concat(l1, l2):
            return FoTerm("deux", (foe(l1), foe(l2)))
    raise TypeError(f"not a term or list: {t!r}")


def lpo_ge(a: FoTerm, b: FoTerm) -> bool:
    return a == b or lpo_gt(a, b)


def lpo_gt(a: FoTerm, b: FoTerm) -> bool:
    # subterm: some immediate argument of a dominates b
    for ai in a.args:
        if lpo_ge(ai, b):
            return True
    if _prec_gt(a, b):
        return all(lpo_gt(a, bj) for bj in b.args)
    if _same_symbol(a, b):
        if not all(lpo_gt(a, bj) for bj in b.args):
            return False
        for ai, bi in zip(a.args, b.args):
            if ai == bi:
                continue
            return lpo_gt(ai, bi)
    return False
