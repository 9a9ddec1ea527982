"""Shared test machinery: seeded random term generators, brute-force
oracles, and the typed corpus. Generators are size-bounded (default depth 7)
and meta-arity-bounded (at most 3); seeds are fixed in the tests that use
them so failures replay."""
from __future__ import annotations

import random
from typing import Optional

from ptsc import bridge
from ptsc.bridge import App, LamP, PiP, PtsTerm, SortP, VarP
from ptsc.grammar import parse_term
from ptsc.presets import PRESETS
from ptsc.rewrite import Verdict, convertible, whnf, Exhausted
from ptsc.terms import (
    NIL,
    Concat,
    Cons,
    Cut,
    CutL,
    Environment,
    Lam,
    ListTerm,
    MetaLs,
    MetaTm,
    MetaVarRegistry,
    Nil,
    Pi,
    SortTm,
    Term,
    TermApp,
    VarApp,
    fresh_var,
    rename_free,
)

SORTS = ("*", "#")
VARS = ("u", "v", "w", "p", "q")


def make_registry(n_term: int = 3, n_list: int = 2, max_arity: int = 3) -> MetaVarRegistry:
    reg = MetaVarRegistry()
    for i in range(n_term):
        reg.create(f"m{i}", "term", i % (max_arity + 1))
    for i in range(n_list):
        reg.create(f"k{i}", "list", i % (max_arity + 1))
    return reg


def random_term(rng: random.Random, depth: int, registry: Optional[MetaVarRegistry] = None,
                scope: tuple = VARS) -> Term:
    metas = [mv for mv in registry if mv.kind == "term"] if registry else []
    if depth <= 0:
        choice = rng.random()
        if choice < 0.5:
            return VarApp(rng.choice(scope), NIL)
        return SortTm(rng.choice(SORTS))
    r = rng.random()
    if r < 0.14:
        return SortTm(rng.choice(SORTS))
    if r < 0.30:
        return VarApp(rng.choice(scope), random_list(rng, depth - 1, registry, scope))
    if r < 0.44:
        x = rng.choice(scope)
        return Pi(x, random_term(rng, depth - 1, registry, scope),
                  random_term(rng, depth - 1, registry, scope + (x,)))
    if r < 0.58:
        x = rng.choice(scope)
        return Lam(x, random_term(rng, depth - 1, registry, scope),
                   random_term(rng, depth - 1, registry, scope + (x,)))
    if r < 0.72:
        return TermApp(random_term(rng, depth - 1, registry, scope),
                       random_list(rng, depth - 1, registry, scope))
    if r < 0.88 or not metas:
        x = rng.choice(scope)
        return Cut(random_term(rng, depth - 1, registry, scope),
                   random_term(rng, depth - 1, registry, scope),
                   x,
                   random_term(rng, depth - 1, registry, scope + (x,)))
    mv = rng.choice(metas)
    return MetaTm(mv, tuple(random_term(rng, depth - 1, registry, scope)
                            for _ in range(mv.arity)))


def random_list(rng: random.Random, depth: int, registry: Optional[MetaVarRegistry] = None,
                scope: tuple = VARS) -> ListTerm:
    metas = [mv for mv in registry if mv.kind == "list"] if registry else []
    if depth <= 0:
        return NIL
    r = rng.random()
    if r < 0.25:
        return NIL
    if r < 0.55:
        return Cons(random_term(rng, depth - 1, registry, scope),
                    random_list(rng, depth - 1, registry, scope))
    if r < 0.72:
        return Concat(random_list(rng, depth - 1, registry, scope),
                      random_list(rng, depth - 1, registry, scope))
    if r < 0.9 or not metas:
        x = rng.choice(scope)
        return CutL(random_term(rng, depth - 1, registry, scope),
                    random_term(rng, depth - 1, registry, scope),
                    x,
                    random_list(rng, depth - 1, registry, scope + (x,)))
    mv = rng.choice(metas)
    return MetaLs(mv, tuple(random_term(rng, depth - 1, registry, scope)
                            for _ in range(mv.arity)))


def random_term_or_list(rng, depth, registry=None, scope=VARS):
    if rng.random() < 0.7:
        return random_term(rng, depth, registry, scope)
    return random_list(rng, depth, registry, scope)


# -- lambda-side generators -------------------------------------------------


def random_pts(rng: random.Random, depth: int, registry: MetaVarRegistry,
               scope: tuple = VARS) -> PtsTerm:
    """Random lambda term inside the reserved-variable fragment."""
    if depth <= 0:
        if rng.random() < 0.6:
            return VarP(rng.choice(scope))
        return SortP(rng.choice(SORTS))
    r = rng.random()
    if r < 0.12:
        return SortP(rng.choice(SORTS))
    if r < 0.3:
        return VarP(rng.choice(scope))
    if r < 0.45:
        x = rng.choice(scope)
        return PiP(x, random_pts(rng, depth - 1, registry, scope),
                   random_pts(rng, depth - 1, registry, scope + (x,)))
    if r < 0.6:
        x = rng.choice(scope)
        return LamP(x, random_pts(rng, depth - 1, registry, scope),
                    random_pts(rng, depth - 1, registry, scope + (x,)))
    if r < 0.85:
        return App(random_pts(rng, depth - 1, registry, scope),
                   random_pts(rng, depth - 1, registry, scope))
    # a reserved spine, saturated and possibly over-applied
    mv = rng.choice(list(registry))
    need = mv.arity if mv.kind == "term" else mv.arity + 1
    out: PtsTerm = VarP(bridge.reserved_name(mv))
    for _ in range(need + rng.randrange(2)):
        out = App(out, random_pts(rng, depth - 1, registry, scope))
    return out


# -- brute-force proof-search oracle ----------------------------------------
#
# A direct recursive transcription of the search rules collecting every
# derivable inhabitant up to a depth bound. Premiss-less rules are free;
# rules with premisses cost one level, matching the engine's metric. Written
# independently of the engine: plain set recursion, no laziness, no pruning.


def brute_terms(spec, env: Environment, goal: Term, depth: int, fuel: int = 4000) -> set:
    out = set()
    w = whnf(goal, fuel)
    if isinstance(w, Exhausted):
        return out
    if depth < 0:
        return out
    if isinstance(w, SortTm):
        for s, s2 in spec.axioms:
            if s2 == w.name:
                out.add(SortTm(s))
        if depth > 0:
            for s1, s2, s3 in spec.rules:
                if s3 != w.name:
                    continue
                x = fresh_var("x", env.domain())
                for dom in brute_terms(spec, env, SortTm(s1), depth - 1, fuel):
                    for body in brute_terms(spec, env.extend(x, dom), SortTm(s2),
                                            depth - 1, fuel):
                        out.add(Pi(x, dom, body))
    if depth > 0 and isinstance(w, Pi):
        x = fresh_var(w.var if w.var != "_" else "x", env.domain())
        body_goal = rename_free(w.body, {w.var: x}) if x != w.var else w.body
        for body in brute_terms(spec, env.extend(x, w.dom), body_goal, depth - 1, fuel):
            out.add(Lam(x, w.dom, body))
    if depth > 0:
        for x, bound in env:
            for l in brute_lists(spec, env, bound, goal, depth - 1, fuel):
                out.add(VarApp(x, l))
    return out


def brute_lists(spec, env: Environment, stoup: Term, goal: Term, depth: int,
                fuel: int = 4000) -> set:
    out = set()
    if depth < 0:
        return out
    if convertible(stoup, goal, fuel) is Verdict.YES:
        out.add(NIL)
    if depth > 0:
        w = whnf(stoup, fuel)
        if not isinstance(w, Exhausted) and isinstance(w, Pi):
            for m in brute_terms(spec, env, w.dom, depth - 1, fuel):
                tail_stoup = Cut(w.dom, m, w.var, w.body)
                for tail in brute_lists(spec, env, tail_stoup, goal, depth - 1, fuel):
                    out.add(Cons(m, tail))
    return out


# -- typed corpus ------------------------------------------------------------

CONJ = "(Q:*) -> (A -> (B -> Q)) -> Q"
CONJ_BA = "(Q:*) -> (B -> (A -> Q)) -> Q"
DISJ = "(Q:*) -> (A -> Q) -> (B -> Q) -> Q"
NAT = "(Q:*) -> (Q -> Q) -> Q -> Q"
PROOF_CONJ_COMM = (
    rf"\x:{CONJ}. \Q:*. \y:B -> (A -> Q). "
    r"y{ x{ B :: (\x':A. \y':B. y') :: nil } :: x{ A :: (\x':A. \y':B. x') :: nil } :: nil }"
)

# (preset, environment, term, type)
CORPUS = [
    # simply typed combinators
    ("stlc", "A : *", r"\x:A. x", "A -> A"),
    ("stlc", "A : *, B : *", r"\x:A. \y:B. x", "A -> B -> A"),
    ("stlc", "A : *, B : *", r"\x:A. \y:B. y", "A -> B -> B"),
    ("stlc", "A : *, B : *, C : *",
     r"\f:B -> C. \g:A -> B. \x:A. f{ g{x :: nil} :: nil }",
     "(B -> C) -> (A -> B) -> A -> C"),
    ("stlc", "A : *, B : *",
     r"\f:A -> B. \x:A. f{x :: nil}", "(A -> B) -> A -> B"),
    ("stlc", "A : *, B : *, C : *",
     r"\f:A -> (B -> C). \y:B. \x:A. f{x :: y :: nil}",
     "(A -> (B -> C)) -> B -> A -> C"),
    ("stlc", "A : *, a : A", "a", "A"),
    ("stlc", "A : *, a : A", r"(\x:A. x){ a :: nil }", "A"),
    ("stlc", "A : *, a : A", "[x := a : A] x{nil}", "A"),
    ("stlc", "A : *, B : *, a : A, f : A -> B", "f{ (a :: nil) ++ nil }", "B"),
    ("stlc", "A : *, B : *, a : A, f : A -> B", "[x := a : A] f{x :: nil}", "B"),
    ("stlc", "A : *, B : *, a : A, f : A -> B",
     r"(\g:A -> B. g{ a :: nil }){ f :: nil }", "B"),
    ("stlc", "A : *", "A -> A", "*"),
    ("stlc", "A : *, B : *", "(A -> B) -> A -> B", "*"),
    ("stlc", "", "*", "#"),
    # System F
    ("systemF", "", r"\T:*. \x:T. x", "(T:*) -> T -> T"),
    ("systemF", "", "(T:*) -> T -> T", "*"),
    ("systemF", "A : *", r"(\T:*. \x:T. x){ A :: nil }", "A -> A"),
    ("systemF", "A : *, a : A", r"(\T:*. \x:T. x){ A :: a :: nil }", "A"),
    ("systemF", "", r"\T:*. \f:T -> T. \x:T. f{ f{x :: nil} :: nil }",
     "(T:*) -> (T -> T) -> T -> T"),
    ("systemF", "A : *, B : *", PROOF_CONJ_COMM, f"({CONJ}) -> ({CONJ_BA})"),
    ("systemF", "A : *, B : *",
     r"\a:A. \b:B. \Q:*. \f:A -> (B -> Q). f{a :: b :: nil}",
     f"A -> B -> ({CONJ})"),
    ("systemF", "A : *, B : *",
     rf"\p:{CONJ}. p{{ A :: (\a:A. \b:B. a) :: nil }}", f"({CONJ}) -> A"),
    ("systemF", "A : *, B : *",
     rf"\p:{CONJ}. p{{ B :: (\a:A. \b:B. b) :: nil }}", f"({CONJ}) -> B"),
    ("systemF", "A : *, B : *",
     rf"\a:A. \Q:*. \l:A -> Q. \r:B -> Q. l{{a :: nil}}", f"A -> ({DISJ})"),
    ("systemF", "",
     r"\n:" + NAT + r". \Q:*. \s:Q -> Q. \z:Q. s{ n{Q :: s :: z :: nil} :: nil }",
     f"({NAT}) -> ({NAT})"),
    ("systemF", "", r"\Q:*. \s:Q -> Q. \z:Q. z", NAT),
    ("systemF", "", r"\Q:*. \s:Q -> Q. \z:Q. s{z :: nil}", NAT),
    ("systemF", "A : *", "[T := A : *] (T -> T)", "*"),
    ("systemF", "A : *, a : A",
     r"(\p:(T:*) -> T -> T. p{ A :: a :: nil }){ (\T:*. \x:T. x) :: nil }", "A"),
    # more simply typed terms
    ("stlc", "A : *", r"\x:A. \y:A. x", "A -> A -> A"),
    ("stlc", "A : *", r"\x:A. \y:A. y", "A -> A -> A"),
    ("stlc", "A : *", r"\f:A -> A. \x:A. f{ f{x :: nil} :: nil }",
     "(A -> A) -> A -> A"),
    ("stlc", "A : *, B : *", r"\f:A -> (A -> B). \x:A. f{x :: x :: nil}",
     "(A -> (A -> B)) -> A -> B"),
    ("stlc", "A : *, B : *, C : *",
     r"\f:A -> B. \g:B -> C. \x:A. g{ f{x :: nil} :: nil }",
     "(A -> B) -> (B -> C) -> A -> C"),
    ("stlc", "A : *, a : A, f : A -> A", "f{ f{ a :: nil } :: nil }", "A"),
    ("stlc", "A : *, a : A, f : A -> A", "f{ a :: nil }", "A"),
    ("stlc", "A : *, a : A", r"(\x:A. (\y:A. y){ x :: nil }){ a :: nil }", "A"),
    ("stlc", "A : *, a : A", "[x := a : A] [y := x : A] y{nil}", "A"),
    ("stlc", "A : *, B : *, b : B", r"\x:A. b", "A -> B"),
    ("stlc", "A : *, B : *", "A -> B -> A", "*"),
    ("stlc", "A : *, B : *, C : *", "(A -> B) -> (B -> C) -> A -> C", "*"),
    ("stlc", "A : *, B : *, f : A -> B, a : A",
     r"(\g:A -> B. (\x:A. g{x :: nil}){ a :: nil }){ f :: nil }", "B"),
    ("stlc", "A : *, a : A", r"(\x:A. x){ (\y:A. y){ a :: nil } :: nil }", "A"),
    # more polymorphic terms
    ("systemF", "", r"\T:*. \U:*. \x:T. \y:U. x", "(T:*) -> (U:*) -> T -> U -> T"),
    ("systemF", "", r"\T:*. \U:*. \x:T. \y:U. y", "(T:*) -> (U:*) -> T -> U -> U"),
    ("systemF", "A : *, B : *, a : A, b : B",
     r"(\T:*. \U:*. \x:T. \y:U. x){ A :: B :: a :: b :: nil }", "A"),
    ("systemF", "", r"\T:*. \f:T -> T. \x:T. x", "(T:*) -> (T -> T) -> T -> T"),
    ("systemF", "",
     r"\n:" + NAT + r". \m:" + NAT + r". \Q:*. \s:Q -> Q. \z:Q. "
     r"n{ Q :: s :: m{ Q :: s :: z :: nil } :: nil }",
     f"({NAT}) -> ({NAT}) -> ({NAT})"),
    ("systemF", "A : *, B : *",
     rf"\b:B. \Q:*. \l:A -> Q. \r:B -> Q. r{{b :: nil}}", f"B -> ({DISJ})"),
    ("systemF", "A : *, B : *",
     rf"\d:{DISJ}. \Q:*. \l:A -> Q. \r:B -> Q. d{{ Q :: l :: r :: nil }}",
     f"({DISJ}) -> ({DISJ})"),
    ("systemF", "A : *",
     r"[I := \T:*. \x:T. x : (T:*) -> T -> T] I{ A :: nil }", "A -> A"),
    ("systemF", "A : *, B : *",
     rf"\p:{CONJ}. \Q:*. \f:B -> (A -> Q). "
     rf"f{{ p{{ B :: (\a:A. \b:B. b) :: nil }} :: p{{ A :: (\a:A. \b:B. a) :: nil }} :: nil }}",
     f"({CONJ}) -> ({CONJ_BA})"),
    ("systemF", "", "(T:*) -> (T -> T) -> T -> T", "*"),
    ("systemF", "A : *, B : *", f"({CONJ}) -> ({CONJ_BA})", "*"),
    ("systemF", "A : *, a : A",
     r"(\T:*. \f:T -> T. \x:T. f{ x :: nil }){ A :: (\y:A. y) :: a :: nil }", "A"),
]


def corpus_cases():
    for preset, env_text, term_text, type_text in CORPUS:
        spec = PRESETS[preset]
        sorts = set(spec.sorts)
        env = _parse_env(env_text, sorts)
        yield preset, spec, env, parse_term(term_text, sorts), parse_term(type_text, sorts)


def _parse_env(text: str, sorts) -> Environment:
    entries = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, _, ty = chunk.partition(":")
        entries.append((name.strip(), parse_term(ty.strip(), sorts)))
    return Environment(tuple(entries))


def T(src: str, registry=None) -> Term:
    return parse_term(src, {"*", "#"}, registry, auto_meta=False)


def env_of(text: str) -> Environment:
    return _parse_env(text, {"*", "#"})
