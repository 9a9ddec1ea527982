"""Proof enumeration with meta-variables.

A goal environment is an ordered telescope of term goals, list goals (with a
stoup) and unification constraints. Enumeration rules build a candidate term
for one goal, either descending into sub-goals or abandoning them as fresh
meta-variable claims; the axiom rule always closes a list by emitting the
constraint that the stoup meet the goal. The solver recursion picks goals,
binds their meta-variables to enumerated candidates, substitutes the binding
into the remainder of the telescope, and backtracks when a constraint fails a
simple syntactic check: ground sides that do not convert, or two rigid heads
that disagree. Constraints with a meta-variable at the head stay pending and
steer later choices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

from .presets import PtsSpec
from .rewrite import (
    DEFAULT_CONV_FUEL,
    Exhausted,
    Verdict,
    convertible,
    normalize_fast,
    normalize_x,
    whnf,
)
from .search import ps_check, ps_check_list
from .terms import (
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
    MetaVar,
    MetaVarRegistry,
    Nil,
    Pi,
    SortTm,
    Term,
    TermOrList,
    TermApp,
    VarApp,
    canon_key,
    env_domain_args,
    free_vars,
    fresh_var,
    is_ground,
    rename_free,
)
from .typecheck import Outcome

# cuts produced when instantiating a meta-variable carry no meaningful
# annotation; this placeholder is erased by x'-normalisation before any
# consumer sees it
OPAQUE_ANNOT = SortTm("%opaque")


@dataclass(frozen=True)
class TermGoal:
    env: Environment
    mv: MetaVar
    type: Term


@dataclass(frozen=True)
class ListGoal:
    env: Environment
    stoup: Term
    mv: MetaVar
    type: Term


@dataclass(frozen=True)
class Constraint:
    env: Environment
    lhs: Term
    rhs: Term


Entry = Union[TermGoal, ListGoal, Constraint]


@dataclass(frozen=True)
class GoalEnvironment:
    entries: tuple = ()

    def __post_init__(self):
        declared = set()
        for e in self.entries:
            if isinstance(e, (TermGoal, ListGoal)):
                if e.mv in declared:
                    raise ValueError(f"goal environment declares {e.mv!r} twice")
                if e.mv.arity != len(e.env):
                    raise ValueError(
                        f"{e.mv!r} has arity {e.mv.arity} but its goal binds {len(e.env)} variables"
                    )
                declared.add(e.mv)

    def goals(self) -> list:
        return [e for e in self.entries if isinstance(e, (TermGoal, ListGoal))]

    def constraints(self) -> list:
        return [e for e in self.entries if isinstance(e, Constraint)]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


class Substitution:
    """Finite map from meta-variables to closed binder-prefixed terms/lists."""

    def __init__(self, bindings: Optional[dict] = None):
        self.bindings: dict = {}
        if bindings:
            for mv, (binders, body) in bindings.items():
                self.bind(mv, binders, body)

    def bind(self, mv: MetaVar, binders, body: TermOrList) -> None:
        binders = tuple(binders)
        if len(binders) != mv.arity:
            raise ValueError(f"{mv!r} expects {mv.arity} binders, got {len(binders)}")
        if isinstance(body, Term) != (mv.kind == "term"):
            raise ValueError(f"binding for {mv!r} has the wrong category")
        escaped = free_vars(body) - set(binders)
        if escaped:
            raise ValueError(f"binding for {mv!r} lets {sorted(escaped)} escape")
        self.bindings[mv] = (binders, body)

    def get(self, mv: MetaVar):
        return self.bindings.get(mv)

    def __contains__(self, mv: MetaVar) -> bool:
        return mv in self.bindings

    def __len__(self) -> int:
        return len(self.bindings)

    def items(self):
        return self.bindings.items()

    def copy(self) -> "Substitution":
        out = Substitution()
        out.bindings = dict(self.bindings)
        return out


def apply_subst(sigma: Substitution, t):
    """Instantiate meta-variables, normalising each instantiation so that a
    binding of a normal form by its own environment is a pure renaming."""
    if isinstance(t, Environment):
        return Environment(tuple((x, apply_subst(sigma, a)) for x, a in t))
    if isinstance(t, GoalEnvironment):
        return GoalEnvironment(tuple(apply_subst(sigma, e) for e in t))
    if isinstance(t, TermGoal):
        return TermGoal(apply_subst(sigma, t.env), t.mv, apply_subst(sigma, t.type))
    if isinstance(t, ListGoal):
        return ListGoal(apply_subst(sigma, t.env), apply_subst(sigma, t.stoup), t.mv,
                        apply_subst(sigma, t.type))
    if isinstance(t, Constraint):
        return Constraint(apply_subst(sigma, t.env), apply_subst(sigma, t.lhs),
                          apply_subst(sigma, t.rhs))
    return _apply(sigma, t)


def _instantiate(binders, body, args):
    out = body
    for x, n in zip(reversed(binders), reversed(args)):
        ctor = Cut if isinstance(out, Term) else CutL
        out = ctor(OPAQUE_ANNOT, n, x, out)
    return normalize_x(out)


def _apply(sigma: Substitution, t: TermOrList) -> TermOrList:
    match t:
        case SortTm() | Nil():
            return t
        case Pi(x, a, b):
            return Pi(x, _apply(sigma, a), _apply(sigma, b))
        case Lam(x, a, b):
            return Lam(x, _apply(sigma, a), _apply(sigma, b))
        case VarApp(x, l):
            return VarApp(x, _apply(sigma, l))
        case Cut(a, p, x, b):
            return Cut(_apply(sigma, a), _apply(sigma, p), x, _apply(sigma, b))
        case CutL(a, p, x, b):
            return CutL(_apply(sigma, a), _apply(sigma, p), x, _apply(sigma, b))
        case Cons(h, tl):
            return Cons(_apply(sigma, h), _apply(sigma, tl))
        case MetaTm(mv, args) | MetaLs(mv, args):
            args2 = [_apply(sigma, a) for a in args]
            hit = sigma.get(mv)
            if hit is None:
                ctor = MetaTm if isinstance(t, MetaTm) else MetaLs
                return ctor(mv, tuple(args2))
            binders, body = hit
            return _instantiate(binders, body, args2)
        case Concat(l1, l2):
            return Concat(_apply(sigma, l1), _apply(sigma, l2))
        case TermApp(m, l):
            return TermApp(_apply(sigma, m), _apply(sigma, l))
    raise TypeError(f"not a term or list: {t!r}")


def is_solved_constraint(c: Constraint, fuel: int = DEFAULT_CONV_FUEL) -> Verdict:
    if not (is_ground(c.lhs) and is_ground(c.rhs)):
        return Verdict.NO
    return convertible(c.lhs, c.rhs, fuel)


def is_solved_env(sigma_env: GoalEnvironment, fuel: int = DEFAULT_CONV_FUEL) -> Verdict:
    undecided = False
    for e in sigma_env:
        if isinstance(e, (TermGoal, ListGoal)):
            return Verdict.NO
        v = is_solved_constraint(e, fuel)
        if v is Verdict.NO:
            return Verdict.NO
        if v is Verdict.UNDECIDED:
            undecided = True
    return Verdict.UNDECIDED if undecided else Verdict.YES


@dataclass(frozen=True)
class SimplifyFailure:
    constraint: Constraint
    reason: str


def simplify_constraints(sigma_env: GoalEnvironment, fuel: int = DEFAULT_CONV_FUEL):
    """Discharge solved constraints, fail fast on hopeless ones.

    Both sides are normalised head-first. Ground pairs are decided outright.
    Non-ground pairs whose weak heads are both rigid and disagree can never be
    solved by any instantiation, so they fail; anything head-flexible stays.
    Returns the reduced goal environment or a SimplifyFailure.
    """
    out = []
    for e in sigma_env:
        if not isinstance(e, Constraint):
            out.append(e)
            continue
        ln = normalize_fast(e.lhs, fuel)
        rn = normalize_fast(e.rhs, fuel)
        if not (isinstance(ln, Exhausted) or isinstance(rn, Exhausted)):
            e = Constraint(e.env, ln, rn)
        if is_ground(e.lhs) and is_ground(e.rhs):
            v = convertible(e.lhs, e.rhs, fuel)
            if v is Verdict.YES:
                continue
            if v is Verdict.NO:
                return SimplifyFailure(e, "ground sides are not convertible")
            out.append(e)
            continue
        if _rigid_clash(e.lhs, e.rhs, fuel, 16):
            return SimplifyFailure(e, "rigid structure disagrees")
        out.append(e)
    return GoalEnvironment(tuple(out))


# -- enumeration -----------------------------------------------------------

# premiss positions a policy may abandon as a claim
PIL_FIRST = "pil_first"
PIL_TAIL = "pil_tail"
PIR_BODY = "pir_body"
PIWF_DOM = "piwf_dom"
PIWF_COD = "piwf_cod"
CONTR_LIST = "contr_list"

Policy = Callable[[str, int], bool]  # (position, depth) -> claim?


def eager_policy(_pos: str, _depth: int) -> bool:
    return False


def lazy_policy(pos: str, _depth: int) -> bool:
    return pos == PIL_FIRST


def allclaim_policy(_pos: str, _depth: int) -> bool:
    return True


STRATEGY_POLICIES = {"eager": eager_policy, "lazy": lazy_policy}


@dataclass
class EnumContext:
    spec: PtsSpec
    registry: MetaVarRegistry
    policy: Policy
    fuel: int = DEFAULT_CONV_FUEL
    head_order: str = "last-bound-first"
    budget: Optional[list] = None  # single-element mutable node budget
    cancel: Optional[Callable[[], bool]] = None
    cutoff: bool = False  # a solve attempt hit its generation limit
    current_gen: int = 0  # claim generation of the goal being enumerated
    gens: dict = None  # meta-variable -> claim generation

    def __post_init__(self):
        if self.gens is None:
            self.gens = {}

    def tick(self):
        if self.cancel is not None and self.cancel():
            raise BudgetExhausted()
        if self.budget is not None:
            self.budget[0] -= 1
            if self.budget[0] < 0:
                raise BudgetExhausted()

    def heads(self, env: Environment):
        entries = list(env)
        if self.head_order == "last-bound-first":
            entries.reverse()
        return entries

    def claim_term(self, env: Environment, goal: Term):
        mv = self.registry.fresh("term", len(env), hint="a")
        self.gens[mv] = self.current_gen + 1
        return MetaTm(mv, env_domain_args(env)), (TermGoal(env, mv, goal),)

    def claim_list(self, env: Environment, stoup: Term, goal: Term):
        mv = self.registry.fresh("list", len(env), hint="b")
        self.gens[mv] = self.current_gen + 1
        return MetaLs(mv, env_domain_args(env)), (ListGoal(env, stoup, mv, goal),)


class BudgetExhausted(Exception):
    pass


def _whnf_or_skip(t, fuel):
    w = whnf(t, fuel)
    return None if isinstance(w, Exhausted) else w


def _rigid_head(t: Term, fuel: int):
    """Weak-head class when rigid: sorts, Pi, lambda, variable heads.
    Meta-headed or blocked terms are flexible (None)."""
    w = _whnf_or_skip(t, fuel)
    if w is None:
        return None
    match w:
        case SortTm(s):
            return ("sort", s)
        case Pi(_, _, _):
            return ("pi", None)
        case Lam(_, _, _):
            return ("lam", None)
        case VarApp(x, _):
            return ("var", x)
    return None


def _codomain_head(stoup: Term, fuel: int):
    bound = set()
    t = stoup
    for _ in range(512):
        w = _whnf_or_skip(t, fuel)
        if w is None:
            return None
        if isinstance(w, Pi):
            bound.add(w.var)
            t = w.body
            continue
        if isinstance(w, SortTm):
            return ("sort", w.name)
        if isinstance(w, VarApp) and w.var not in bound:
            return ("var", w.var)
        return None
    return None


def _list_goal_feasible(stoup: Term, goal: Term, fuel: int) -> bool:
    """Rigid-head pruning: instantiation and conversion preserve a stoup
    codomain head that is a sort or an outside variable, so it can never
    meet a rigid non-Pi goal with a different head."""
    g = _rigid_head(goal, fuel)
    if g is None or g[0] in ("pi", "lam"):
        return True
    c = _codomain_head(stoup, fuel)
    return c is None or c == g


def _constraint_hopeless(c: Constraint, fuel: int) -> bool:
    if is_ground(c.lhs) and is_ground(c.rhs):
        return convertible(c.lhs, c.rhs, fuel) is Verdict.NO
    return _rigid_clash(c.lhs, c.rhs, fuel, 16)


def _rigid_clash(a: Term, b: Term, fuel: int, depth: int) -> bool:
    """Structural rigid-rigid disagreement that no instantiation can repair:
    instantiation and conversion preserve rigid weak heads pointwise."""
    if depth <= 0:
        return False
    wa = _whnf_or_skip(a, fuel)
    wb = _whnf_or_skip(b, fuel)
    if wa is None or wb is None:
        return False
    ha, hb = _shape(wa), _shape(wb)
    if ha is None or hb is None:
        return False  # a flexible side can still adapt
    if ha != hb:
        return True
    match wa, wb:
        case SortTm(_), SortTm(_):
            return False  # identical by ha == hb
        case (Pi(x, a1, b1), Pi(y, a2, b2)) | (Lam(x, a1, b1), Lam(y, a2, b2)):
            if _rigid_clash(a1, a2, fuel, depth - 1):
                return True
            z = fresh_var(x, free_vars(b1) | free_vars(b2))
            b1r = rename_free(b1, {x: z}) if x != z else b1
            b2r = rename_free(b2, {y: z}) if y != z else b2
            return _rigid_clash(b1r, b2r, fuel, depth - 1)
        case VarApp(_, l1), VarApp(_, l2):
            return _rigid_list_clash(l1, l2, fuel, depth - 1)
    return False


def _shape(w: Term):
    match w:
        case SortTm(s):
            return ("sort", s)
        case Pi(_, _, _):
            return ("pi", None)
        case Lam(_, _, _):
            return ("lam", None)
        case VarApp(x, _):
            return ("var", x)
    return None


def _rigid_list_clash(l1: ListTerm, l2: ListTerm, fuel: int, depth: int) -> bool:
    if depth <= 0:
        return False
    w1 = whnf(l1, fuel)
    w2 = whnf(l2, fuel)
    if isinstance(w1, Exhausted) or isinstance(w2, Exhausted):
        return False
    match w1, w2:
        case Nil(), Nil():
            return False
        case (Nil(), Cons(_, _)) | (Cons(_, _), Nil()):
            return True
        case Cons(h1, t1), Cons(h2, t2):
            if _rigid_clash(h1, h2, fuel, depth - 1):
                return True
            return _rigid_list_clash(t1, t2, fuel, depth - 1)
    return False  # a meta list can still adapt


def enum_term(ctx: EnumContext, env: Environment, goal: Term, depth: int,
              rule_filter=None) -> Iterator[tuple]:
    """Yield (term, new-goal-entries) per the term enumeration rules.

    Premiss-less rules (sorted, Claim) are free of depth; rules with
    premisses each cost one level along their branch. On sort-shaped goals
    head choices are tried before Pi-formation, mirroring proof search.

    rule_filter pins the root rule for single-step use: ("sorted", s) /
    ("Piwf", (s1,s2,s3)) / ("PiR",) / ("Contr", x) / ("Claim",).
    """
    if depth < 0:
        return
    ctx.tick()
    want = rule_filter[0] if rule_filter else None
    if want == "Claim":
        yield ctx.claim_term(env, goal)
        return
    w = _whnf_or_skip(goal, ctx.fuel)
    if w is None:
        return
    if isinstance(w, SortTm):
        if want in (None, "sorted"):
            for s, s2 in ctx.spec.axioms:
                if s2 != w.name:
                    continue
                if want == "sorted" and len(rule_filter) > 1 and rule_filter[1] != s:
                    continue
                yield SortTm(s), ()
        if depth <= 0:
            return
        if want in (None, "Contr"):
            yield from _enum_contr(ctx, env, goal, depth, rule_filter, want)
        if want in (None, "Piwf"):
            for s1, s2, s3 in ctx.spec.rules:
                if s3 != w.name:
                    continue
                if want == "Piwf" and len(rule_filter) > 1 and tuple(rule_filter[1]) != (s1, s2, s3):
                    continue
                x = fresh_var("x", env.domain())
                for dom, sd in _premiss(ctx, env, SortTm(s1), depth, PIWF_DOM):
                    inner = env.extend(x, dom)
                    for body, sb in _premiss(ctx, inner, SortTm(s2), depth, PIWF_COD):
                        yield Pi(x, dom, body), sd + sb
        return
    if depth <= 0:
        return
    if isinstance(w, Pi) and want in (None, "PiR"):
        x = fresh_var(w.var if w.var != "_" else "x", env.domain())
        body_goal = rename_free(w.body, {w.var: x}) if x != w.var else w.body
        inner = env.extend(x, w.dom)
        for body, sb in _premiss(ctx, inner, body_goal, depth, PIR_BODY):
            yield Lam(x, w.dom, body), sb
    if want in (None, "Contr"):
        yield from _enum_contr(ctx, env, goal, depth, rule_filter, want)


def _enum_contr(ctx: EnumContext, env: Environment, goal: Term, depth: int,
                rule_filter, want) -> Iterator[tuple]:
    for x, bound in ctx.heads(env):
        if want == "Contr" and len(rule_filter) > 1 and rule_filter[1] != x:
            continue
        if ctx.policy(CONTR_LIST, depth):
            if not _list_goal_feasible(bound, goal, ctx.fuel):
                continue  # the claimed list goal could never be solved
            l, entries = ctx.claim_list(env, bound, goal)
            yield VarApp(x, l), entries
        else:
            for l, entries in enum_list(ctx, env, bound, goal, depth - 1):
                yield VarApp(x, l), entries


def _premiss(ctx: EnumContext, env: Environment, goal: Term, depth: int, pos: str):
    if ctx.policy(pos, depth):
        yield ctx.claim_term(env, goal)
    else:
        yield from enum_term(ctx, env, goal, depth - 1)


def enum_list(ctx: EnumContext, env: Environment, stoup: Term, goal: Term, depth: int,
              rule_filter=None) -> Iterator[tuple]:
    """Yield (list, new-goal-entries) per the list enumeration rules. The
    axiom is free of depth; hopeless judgments (rigid stoup codomain against
    a different rigid goal head) are pruned outright."""
    if depth < 0:
        return
    ctx.tick()
    want = rule_filter[0] if rule_filter else None
    if want == "Claim":
        yield ctx.claim_list(env, stoup, goal)
        return
    if want is None and not _list_goal_feasible(stoup, goal, ctx.fuel):
        return
    if want in (None, "axiom"):
        c = Constraint(env, stoup, goal)
        if not _constraint_hopeless(c, ctx.fuel):
            yield NIL, (c,)
    if depth <= 0:
        return
    if want in (None, "PiL"):
        w = _whnf_or_skip(stoup, ctx.fuel)
        if isinstance(w, Pi):
            if ctx.policy(PIL_FIRST, depth):
                first = [ctx.claim_term(env, w.dom)]
            else:
                first = enum_term(ctx, env, w.dom, depth - 1)
            for m, s1 in first:
                tail_stoup = Cut(w.dom, m, w.var, w.body)
                if ctx.policy(PIL_TAIL, depth):
                    if not _list_goal_feasible(tail_stoup, goal, ctx.fuel):
                        continue
                    l, s2 = ctx.claim_list(env, tail_stoup, goal)
                    yield Cons(m, l), s1 + s2
                else:
                    for l, s2 in enum_list(ctx, env, tail_stoup, goal, depth - 1):
                        yield Cons(m, l), s1 + s2


def enum_candidates(ctx: EnumContext, goal_entry, max_depth: int) -> Iterator[tuple]:
    """Depth-bounded candidate stream for one goal in rule order (invertible
    right rules descend before head choices), deduplicated up to renaming of
    freshly claimed meta-variables."""
    seen: set = set()
    if isinstance(goal_entry, TermGoal):
        gen = enum_term(ctx, goal_entry.env, goal_entry.type, max_depth)
    else:
        gen = enum_list(ctx, goal_entry.env, goal_entry.stoup, goal_entry.type, max_depth)
    for cand, entries in gen:
        key = (canon_key(cand, mod_meta=True),
               tuple(_entry_key(e) for e in entries))
        if key in seen:
            continue
        seen.add(key)
        yield cand, entries


def _entry_key(e: Entry):
    if isinstance(e, TermGoal):
        return ("tg", e.env.canon_key(True), canon_key(e.type, True))
    if isinstance(e, ListGoal):
        return ("lg", e.env.canon_key(True), canon_key(e.stoup, True), canon_key(e.type, True))
    return ("c", e.env.canon_key(True), canon_key(e.lhs, True), canon_key(e.rhs, True))


# -- solving ---------------------------------------------------------------


@dataclass(frozen=True)
class PeFailure:
    reason: str


@dataclass(frozen=True)
class PeExhausted:
    residual: GoalEnvironment
    bindings: tuple  # committed (mv, binders, body) in commit order


@dataclass
class PeState:
    pending: GoalEnvironment
    committed: tuple = ()
    log: tuple = ()


DEFAULT_BUDGET = 50_000
DEFAULT_ENUM_DEPTH = 10


def _resolve_bindings(committed) -> Substitution:
    sigma = Substitution()
    for mv, binders, body in reversed(committed):
        sigma.bind(mv, binders, apply_subst(sigma, body))
    return sigma


def _select_goal(entries) -> Optional[int]:
    """Leftmost goal whose environment and goal type are fully ground;
    falls back to the leftmost goal."""
    first = None
    for i, e in enumerate(entries):
        if not isinstance(e, (TermGoal, ListGoal)):
            continue
        if first is None:
            first = i
        ground = e.env.is_ground() and is_ground(e.type)
        if isinstance(e, ListGoal):
            ground = ground and is_ground(e.stoup)
        if ground:
            return i
    return first


def pe_solve(spec: PtsSpec, sigma_env: GoalEnvironment, registry: MetaVarRegistry,
             strategy: str = "lazy", budget: int = DEFAULT_BUDGET,
             fuel: int = DEFAULT_CONV_FUEL, enum_depth: int = DEFAULT_ENUM_DEPTH,
             head_order: str = "last-bound-first", cancel=None, check: bool = True):
    """Solve a goal environment: a Substitution, PeFailure, or PeExhausted.

    Claims may spawn goals forever (pick a head, claim its argument, repeat),
    so the solve tree is explored by iterative deepening on the number of
    committed bindings, under one global node budget."""
    if strategy not in STRATEGY_POLICIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    ctx = EnumContext(spec, registry, STRATEGY_POLICIES[strategy], fuel=fuel,
                      head_order=head_order, budget=[budget], cancel=cancel)
    limit = 8
    committed = None
    try:
        while True:
            ctx.cutoff = False
            committed = _solve(ctx, sigma_env, (), enum_depth, limit)
            if committed is not None or not ctx.cutoff:
                break
            limit *= 2
    except BudgetExhausted:
        return PeExhausted(sigma_env, ())
    if committed is None:
        return PeFailure("all enumeration branches failed")
    sigma = _resolve_bindings(committed)
    if check:
        verdict = check_solution(spec, sigma, sigma_env, fuel)
        if verdict is not Verdict.YES:
            raise RuntimeError(f"solver produced a substitution that fails its own check: {verdict}")
    return sigma


def _solve(ctx: EnumContext, sigma_env: GoalEnvironment, committed: tuple,
           enum_depth: int, limit: int):
    simplified = simplify_constraints(sigma_env, ctx.fuel)
    if isinstance(simplified, SimplifyFailure):
        return None
    entries = tuple(simplified.entries)
    idx = _select_goal(entries)
    if idx is None:
        if is_solved_env(GoalEnvironment(entries), ctx.fuel) is Verdict.YES:
            return committed
        return None
    goal = entries[idx]
    gen = ctx.gens.get(goal.mv, 0)
    if gen >= limit:
        ctx.cutoff = True
        return None
    left = entries[:idx]
    right = entries[idx + 1:]
    stream = enum_candidates(ctx, goal, enum_depth)
    while True:
        # claims made while enumerating this goal belong to the next generation
        ctx.current_gen = gen
        got = next(stream, None)
        if got is None:
            return None
        cand, new_entries = got
        binders = tuple(goal.env.domain())
        one = Substitution()
        one.bindings[goal.mv] = (binders, cand)  # cand may mention fresh claims
        new_right = tuple(apply_subst(one, e) for e in right)
        next_env = GoalEnvironment(left + new_entries + new_right)
        result = _solve(ctx, next_env, committed + ((goal.mv, binders, cand),),
                        enum_depth, limit)
        if result is not None:
            return result


def check_solution(spec: PtsSpec, sigma: Substitution, sigma_env: GoalEnvironment,
                   fuel: int = DEFAULT_CONV_FUEL) -> Verdict:
    """A substitution solves a goal environment when every instantiated goal
    is derivable by the proof-search rules and every instantiated constraint
    converts."""
    undecided = False
    for e in sigma_env:
        if isinstance(e, TermGoal):
            if sigma.get(e.mv) is None:
                raise ValueError(f"substitution misses {e.mv!r}")
            env = apply_subst(sigma, e.env)
            subject = apply_subst(sigma, MetaTm(e.mv, env_domain_args(e.env)))
            res = ps_check(spec, env, subject, apply_subst(sigma, e.type), fuel)
        elif isinstance(e, ListGoal):
            if sigma.get(e.mv) is None:
                raise ValueError(f"substitution misses {e.mv!r}")
            env = apply_subst(sigma, e.env)
            subject = apply_subst(sigma, MetaLs(e.mv, env_domain_args(e.env)))
            res = ps_check_list(spec, env, apply_subst(sigma, e.stoup), subject,
                                apply_subst(sigma, e.type), fuel)
        else:
            v = convertible(apply_subst(sigma, e.lhs), apply_subst(sigma, e.rhs), fuel)
            if v is Verdict.NO:
                return Verdict.NO
            if v is Verdict.UNDECIDED:
                undecided = True
            continue
        if res.outcome is Outcome.REJECT:
            return Verdict.NO
        if res.outcome is Outcome.UNDECIDED:
            undecided = True
    return Verdict.UNDECIDED if undecided else Verdict.YES
