"""Syntax-directed proof search.

Search is goal-directed: the goal (or the type in the stoup) is reduced, the
rule matching its shape is applied bottom-up, and sub-goals are searched
recursively. There are no cut rules, so results are quasi-normal: every
remaining redex sits inside a lambda annotation copied from the goal.

Exploration is a depth-bounded depth-first walk over derivations, streaming
inhabitants lazily in a fixed documented order and pruning list judgments
whose rigid stoup codomain head can never meet a rigid goal head. Choice
points: which head variable for Contr (default: most recently bound first),
which rule triple for Piwf (declaration order), and the overlap between PiR
and Contr on Pi-shaped goals (both explored unless the eta-long bias is
enabled). On sort-shaped goals the default candidate order is sorted, Contr,
Piwf: head choices are few and die fast while Pi-formation enumerates a
whole type language, and only the relative order of the streamed results
depends on it; the declaration order sorted, Piwf, Contr remains available
through the configuration.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterator, Optional

from .presets import PtsSpec
from .rewrite import (
    ALL_RULES,
    DEFAULT_CONV_FUEL,
    Exhausted,
    Verdict,
    convertible,
    find_redexes,
    normalize_fast,
    whnf,
)
from .terms import (
    NIL,
    Cons,
    Cut,
    Environment,
    Lam,
    ListTerm,
    Nil,
    Pi,
    SortTm,
    Term,
    VarApp,
    alpha_eq,
    canon_key,
    canon_telescope,
    children,
    fresh_var,
    is_ground,
    rename_free,
)
from .typecheck import (
    ACCEPT,
    CheckResult,
    Outcome,
    UndecidedError,
    _Checker,
    check_env,
    reject,
)


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 8
    head_order: str = "last-bound-first"  # or "first-bound-first"
    conv_fuel: int = DEFAULT_CONV_FUEL
    max_results: Optional[int] = None
    eta_long_bias: bool = False
    piwf_before_contr: bool = False  # candidate order on sort-shaped goals

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.head_order not in ("last-bound-first", "first-bound-first"):
            raise ValueError(f"unknown head order {self.head_order!r}")


@dataclass(frozen=True)
class QuasiNormalWitness:
    term: Term
    offending: tuple
    annotation_redexes: tuple

    @property
    def ok(self) -> bool:
        return not self.offending


def _inside_lam_annotation(t, path) -> bool:
    for i in path:
        if isinstance(t, Lam) and i == 0:
            return True
        t = children(t)[i]
    return False


def quasi_normal_witness(m) -> QuasiNormalWitness:
    ann, bad = [], []
    for r in find_redexes(m, ALL_RULES):
        (ann if _inside_lam_annotation(m, r.path) else bad).append(r.path)
    return QuasiNormalWitness(m, tuple(bad), tuple(ann))


def is_quasi_normal(m) -> bool:
    return quasi_normal_witness(m).ok


def _whnf_or_raise(t, fuel):
    w = whnf(t, fuel)
    if isinstance(w, Exhausted):
        raise UndecidedError("head normalisation ran out of fuel")
    return w


# -- checking --------------------------------------------------------------


def ps_check(spec: PtsSpec, env: Environment, m: Term, a: Term,
             fuel: int = DEFAULT_CONV_FUEL) -> CheckResult:
    if not (is_ground(m) and is_ground(a) and env.is_ground()):
        return reject("inputs must be ground")
    try:
        return ACCEPT if _ps_check(spec, env, m, a, fuel) else reject(
            "not derivable by proof-search rules")
    except UndecidedError as e:
        return CheckResult(Outcome.UNDECIDED, str(e))


def ps_check_list(spec: PtsSpec, env: Environment, stoup: Term, l: ListTerm, c: Term,
                  fuel: int = DEFAULT_CONV_FUEL) -> CheckResult:
    if not (is_ground(stoup) and is_ground(l) and is_ground(c) and env.is_ground()):
        return reject("inputs must be ground")
    try:
        return ACCEPT if _ps_check_list(spec, env, stoup, l, c, fuel) else reject(
            "not derivable by proof-search rules")
    except UndecidedError as e:
        return CheckResult(Outcome.UNDECIDED, str(e))


def _conv_yes(a, b, fuel) -> bool:
    v = convertible(a, b, fuel)
    if v is Verdict.UNDECIDED:
        raise UndecidedError("conversion undecided at this fuel")
    return v is Verdict.YES


def _ps_check(spec, env, m, a, fuel) -> bool:
    match m:
        case SortTm(s):
            w = _whnf_or_raise(a, fuel)
            return isinstance(w, SortTm) and (s, w.name) in spec.axioms
        case Pi(x, dom, body):
            w = _whnf_or_raise(a, fuel)
            if not isinstance(w, SortTm):
                return False
            for s1, s2, s3 in spec.rules:
                if s3 != w.name:
                    continue
                if _ps_check(spec, env, dom, SortTm(s1), fuel):
                    x2 = fresh_var(x, env.domain())
                    body2 = rename_free(body, {x: x2}) if x2 != x else body
                    if _ps_check(spec, env.extend(x2, dom), body2, SortTm(s2), fuel):
                        return True
            return False
        case Lam(x, annot, body):
            w = _whnf_or_raise(a, fuel)
            if not isinstance(w, Pi):
                return False
            if not _conv_yes(annot, w.dom, fuel):
                return False
            x2 = fresh_var(x, env.domain())
            body2 = rename_free(body, {x: x2}) if x2 != x else body
            wbody = rename_free(w.body, {w.var: x2}) if w.var != x2 else w.body
            return _ps_check(spec, env.extend(x2, annot), body2, wbody, fuel)
        case VarApp(x, l):
            bound = env.lookup(x)
            if bound is None:
                return False
            return _ps_check_list(spec, env, bound, l, a, fuel)
    return False  # cuts, applications, meta nodes: no proof-search rule


def _ps_check_list(spec, env, stoup, l, c, fuel) -> bool:
    match l:
        case Nil():
            return _conv_yes(stoup, c, fuel)
        case Cons(m, tail):
            w = _whnf_or_raise(stoup, fuel)
            if not isinstance(w, Pi):
                return False
            if not _ps_check(spec, env, m, w.dom, fuel):
                return False
            return _ps_check_list(spec, env, Cut(w.dom, m, w.var, w.body), tail, c, fuel)
    return False


# -- searching -------------------------------------------------------------


class _Search:
    """Depth-bounded depth-first enumeration of proof-search derivations.

    Candidate order at a term goal: sorted, then (by default) Contr before
    Piwf on sort-shaped goals since head choices are few and cheap while
    Pi-formation enumerates a whole type language; PiR precedes Contr on
    Pi-shaped goals. List goals try the axiom, then the left rule. A list
    judgment whose peeled stoup codomain head is rigid and differs from a
    rigid non-Pi goal head is pruned outright.
    """

    def __init__(self, spec: PtsSpec, cfg: SearchConfig):
        self.spec = spec
        self.cfg = cfg
        self.explored = 0
        self._nf_keys: dict = {}
        self._whnfs: dict = {}
        self._cod_heads: dict = {}

    # cached reduction helpers -------------------------------------------

    def _nf_key(self, t):
        k = canon_key(t)
        if k in self._nf_keys:
            return self._nf_keys[k]
        n = normalize_fast(t, self.cfg.conv_fuel)
        out = None if isinstance(n, Exhausted) else canon_key(n)
        self._nf_keys[k] = out
        return out

    def conv(self, a, b) -> bool:
        # fuel exhaustion counts as non-convertible here: it only prunes
        if alpha_eq(a, b):
            return True
        ka, kb = self._nf_key(a), self._nf_key(b)
        return ka is not None and ka == kb

    def whnf(self, t):
        k = canon_key(t)
        if k in self._whnfs:
            return self._whnfs[k]
        w = whnf(t, self.cfg.conv_fuel)
        out = None if isinstance(w, Exhausted) else w
        self._whnfs[k] = out
        return out

    def heads(self, env: Environment):
        entries = list(env)
        if self.cfg.head_order == "last-bound-first":
            entries.reverse()
        return entries

    # rigid-head feasibility ------------------------------------------------
    #
    # A list judgment can only close by the axiom, whose sides must convert.
    # Instantiating the stoup's Pi-prefix never changes a head that is a sort
    # or a variable bound outside that prefix, and conversion preserves rigid
    # heads (confluence), so when the peeled stoup codomain and a non-Pi goal
    # are both rigid with different heads the branch is hopeless.

    def _codomain_head(self, stoup: Term):
        k = canon_key(stoup)
        if k in self._cod_heads:
            return self._cod_heads[k]
        bound = set()
        t = stoup
        out = None
        for _ in range(512):
            w = self.whnf(t)
            if w is None:
                out = None
                break
            if isinstance(w, Pi):
                bound.add(w.var)
                t = w.body
                continue
            if isinstance(w, SortTm):
                out = ("sort", w.name)
            elif isinstance(w, VarApp) and w.var not in bound:
                out = ("var", w.var)
            else:
                out = None  # flexible or prefix-dependent
            break
        self._cod_heads[k] = out
        return out

    def _goal_head(self, goal: Term):
        w = self.whnf(goal)
        if w is None:
            return None
        if isinstance(w, SortTm):
            return ("sort", w.name)
        if isinstance(w, VarApp):
            return ("var", w.var)
        return None  # Pi goals can still match a partially consumed prefix

    def list_feasible(self, stoup: Term, goal: Term) -> bool:
        g = self._goal_head(goal)
        if g is None:
            return True
        c = self._codomain_head(stoup)
        return c is None or c == g

    # enumeration ---------------------------------------------------------

    def terms(self, env: Environment, goal: Term, depth: int) -> Iterator[Term]:
        # leaf rules (no premisses) are free; rules with premisses cost one
        # level of depth each along their branch
        if depth < 0:
            return
        self.explored += 1
        w = self.whnf(goal)
        if w is None:
            return
        if isinstance(w, SortTm):
            for s, s2 in self.spec.axioms:
                if s2 == w.name:
                    yield SortTm(s)
            if depth <= 0:
                return
            if self.cfg.piwf_before_contr:
                yield from self._piwf(env, w, depth)
                yield from self._contr(env, goal, depth)
            else:
                yield from self._contr(env, goal, depth)
                yield from self._piwf(env, w, depth)
            return
        if depth <= 0:
            return
        pi_goal = isinstance(w, Pi)
        if pi_goal:
            x = fresh_var(w.var if w.var != "_" else "x", env.domain())
            body_goal = rename_free(w.body, {w.var: x}) if x != w.var else w.body
            inner = env.extend(x, w.dom)
            for body in self.terms(inner, body_goal, depth - 1):
                yield Lam(x, w.dom, body)
        if not (pi_goal and self.cfg.eta_long_bias):
            yield from self._contr(env, goal, depth)

    def _piwf(self, env: Environment, w: SortTm, depth: int) -> Iterator[Term]:
        for s1, s2, s3 in self.spec.rules:
            if s3 != w.name:
                continue
            x = fresh_var("x", env.domain())
            for dom in self.terms(env, SortTm(s1), depth - 1):
                inner = env.extend(x, dom)
                for body in self.terms(inner, SortTm(s2), depth - 1):
                    yield Pi(x, dom, body)

    def _contr(self, env: Environment, goal: Term, depth: int) -> Iterator[Term]:
        for x, bound in self.heads(env):
            for l in self.lists(env, bound, goal, depth - 1):
                yield VarApp(x, l)

    def lists(self, env: Environment, stoup: Term, goal: Term, depth: int) -> Iterator[ListTerm]:
        if depth < 0:
            return
        if not self.list_feasible(stoup, goal):
            return
        self.explored += 1
        if self.conv(stoup, goal):
            yield NIL  # the axiom closes a branch without premisses
        if depth <= 0:
            return
        w = self.whnf(stoup)
        if isinstance(w, Pi):
            for m in self.terms(env, w.dom, depth - 1):
                tail_stoup = Cut(w.dom, m, w.var, w.body)
                for tail in self.lists(env, tail_stoup, goal, depth - 1):
                    yield Cons(m, tail)


def check_search_inputs(spec: PtsSpec, env: Environment, goal: Term, fuel: int) -> None:
    """Report precondition violations before search starts. An ill-formed
    environment is a hard error; an unsorted goal only voids the soundness
    guarantee, so it warns and the search proceeds."""
    wf = check_env(spec, env, fuel)
    if not wf:
        raise ValueError(f"environment rejected before search: {wf.reason}")
    try:
        sorted_goal = bool(_Checker(spec, fuel).sorts_of(env, goal))
    except UndecidedError:
        sorted_goal = False
    if not sorted_goal:
        warnings.warn("goal is not sorted in this environment; "
                      "streamed inhabitants are not guaranteed well-typed")


def ps_search(spec: PtsSpec, env: Environment, goal: Term,
              cfg: SearchConfig = SearchConfig()) -> Iterator[Term]:
    """Stream pairwise distinct quasi-normal inhabitants of the goal."""
    check_search_inputs(spec, env, goal, cfg.conv_fuel)
    search = _Search(spec, cfg)
    seen: set = set()
    found = 0
    for t in search.terms(env, goal, cfg.max_depth):
        k = canon_key(t)
        if k in seen:
            continue
        seen.add(k)
        yield t
        found += 1
        if cfg.max_results is not None and found >= cfg.max_results:
            return


def ps_search_stats(spec, env, goal, cfg=SearchConfig(), stop_when=None):
    """Like ps_search but returns (results, explored-node count); optionally
    stops as soon as stop_when(term) holds."""
    check_search_inputs(spec, env, goal, cfg.conv_fuel)
    search = _Search(spec, cfg)
    seen: set = set()
    results = []
    for t in search.terms(env, goal, cfg.max_depth):
        k = canon_key(t)
        if k in seen:
            continue
        seen.add(k)
        results.append(t)
        if stop_when is not None and stop_when(t):
            break
        if cfg.max_results is not None and len(results) >= cfg.max_results:
            break
    return results, search.explored
