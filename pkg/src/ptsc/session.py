"""Interactive proof sessions.

A session holds a parameter spec, a meta-variable registry, a root goal, the
current partial proof term, a goal environment of open sub-goals and
constraints, and an undo history. Actions apply one enumeration rule at an
indexed goal (recursive premisses become fresh claims), provide a term
outright, simplify constraints, run the automatic solver on what is left, or
undo. Replaying the recorded actions from the initial state reproduces the
current state bit for bit.
"""
from __future__ import annotations

import hashlib
import json
import secrets
from dataclasses import dataclass, field
from typing import Callable, Optional

from .enumeration import (
    Constraint,
    EnumContext,
    GoalEnvironment,
    ListGoal,
    PeExhausted,
    PeFailure,
    SimplifyFailure,
    Substitution,
    TermGoal,
    allclaim_policy,
    apply_subst,
    check_solution,
    enum_list,
    enum_term,
    is_solved_constraint,
    is_solved_env,
    pe_solve,
    simplify_constraints,
)
from .grammar import ParseError, parse_list, parse_term, print_term
from .presets import PtsSpec, get_spec
from .rewrite import DEFAULT_CONV_FUEL, Exhausted, Verdict, whnf
from .search import ps_check, ps_check_list
from .terms import (
    Environment,
    MetaLs,
    MetaTm,
    MetaVarRegistry,
    Pi,
    SortTm,
    Term,
    env_domain_args,
    is_ground,
)
from .typecheck import Outcome, _Checker, check_env, UndecidedError


class SessionError(ValueError):
    """User-level failure with a structured error envelope."""

    def __init__(self, code: str, message: str, goal_index: Optional[int] = None,
                 rule: Optional[str] = None, detail: str = ""):
        super().__init__(message)
        self.envelope = {"code": code, "message": message}
        if goal_index is not None:
            self.envelope["goal_index"] = goal_index
        if rule is not None:
            self.envelope["rule"] = rule
        if detail:
            self.envelope["detail"] = detail


@dataclass
class ProofSession:
    id: str
    spec: PtsSpec
    spec_name: str
    registry: MetaVarRegistry
    root_env: Environment
    root_goal: Term
    root_mv: object
    partial: Term
    sigma_env: GoalEnvironment
    bindings: tuple = ()  # committed (mv, binders, body) in commit order
    history: tuple = ()  # (action-dict, prior-state digest)
    status: str = "open"  # open | solved | failed
    failure: Optional[dict] = None
    fuel: int = DEFAULT_CONV_FUEL
    _undo_stack: list = field(default_factory=list)

    def snapshot(self) -> dict:
        return {
            "partial": self.partial,
            "sigma_env": self.sigma_env,
            "bindings": self.bindings,
            "history": self.history,
            "status": self.status,
            "failure": self.failure,
        }

    def restore(self, snap: dict) -> None:
        self.partial = snap["partial"]
        self.sigma_env = snap["sigma_env"]
        self.bindings = snap["bindings"]
        self.history = snap["history"]
        self.status = snap["status"]
        self.failure = snap["failure"]

    def digest(self) -> str:
        blob = json.dumps(self._state_doc(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def _state_doc(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "goals": [_entry_doc(e) for e in self.sigma_env],
            "partial": print_term(self.partial),
            "bindings": [
                [mv.name, list(binders), print_term(body)]
                for mv, binders, body in self.bindings
            ],
            "status": self.status,
            "failure": self.failure,
        }


def _entry_doc(e) -> dict:
    if isinstance(e, TermGoal):
        return {"kind": "term", "env": _env_doc(e.env), "metavar": e.mv.name,
                "type": print_term(e.type)}
    if isinstance(e, ListGoal):
        return {"kind": "list", "env": _env_doc(e.env), "stoup": print_term(e.stoup),
                "metavar": e.mv.name, "type": print_term(e.type)}
    return {"kind": "constraint", "env": _env_doc(e.env), "lhs": print_term(e.lhs),
            "rhs": print_term(e.rhs)}


def _env_doc(env: Environment) -> list:
    return [[x, print_term(a)] for x, a in env]


def parse_env(text: str, sorts, registry=None) -> Environment:
    """Environments read as comma/newline separated `x : type` bindings."""
    entries = []
    for chunk in text.replace("\n", ",").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, sep, ty = chunk.partition(":")
        if not sep:
            raise ParseError(f"binding {chunk!r} needs the form x : type", 1, 1)
        entries.append((name.strip(), parse_term(ty.strip(), sorts, registry)))
    return Environment(tuple(entries))


def create_session(spec_or_preset, env_text: str, goal_text: str,
                   fuel: int = DEFAULT_CONV_FUEL) -> ProofSession:
    if isinstance(spec_or_preset, PtsSpec):
        spec, spec_name = spec_or_preset, "custom"
    else:
        spec, spec_name = get_spec(spec_or_preset), spec_or_preset
    registry = MetaVarRegistry()
    sorts = set(spec.sorts)
    try:
        env = parse_env(env_text, sorts, registry)
        goal = parse_term(goal_text, sorts, registry)
    except ParseError as e:
        raise SessionError("parse_error", str(e))
    if not (env.is_ground() and is_ground(goal)):
        raise SessionError("open_input", "environment and goal must not contain meta-variables")
    wf = check_env(spec, env, fuel)
    if wf.outcome is Outcome.UNDECIDED:
        raise SessionError("undecided", "environment well-formedness undecided at this fuel")
    if not wf:
        raise SessionError("ill_typed", f"environment rejected: {wf.reason}")
    try:
        sorted_goal = bool(_Checker(spec, fuel).sorts_of(env, goal))
    except UndecidedError:
        raise SessionError("undecided", "goal sorting undecided at this fuel")
    if not sorted_goal:
        raise SessionError("ill_typed", "goal is not typed by any sort in this environment")
    mv = registry.fresh("term", len(env), hint="goal")
    session = ProofSession(
        id=secrets.token_hex(6),
        spec=spec,
        spec_name=spec_name,
        registry=registry,
        root_env=env,
        root_goal=goal,
        root_mv=mv,
        partial=MetaTm(mv, env_domain_args(env)),
        sigma_env=GoalEnvironment((TermGoal(env, mv, goal),)),
        fuel=fuel,
    )
    session.id = session.digest()[:6] + "-" + session.id
    return session


RULE_PARAM_KEYS = {"head", "triple", "sort"}


def applicable_rules(session: ProofSession, index: int) -> list:
    """Rules whose side conditions hold at the indexed goal, with parameters
    expanded for the pickers."""
    entry = session.sigma_env.entries[index]
    out = []
    if isinstance(entry, TermGoal):
        w = whnf(entry.type, session.fuel)
        if not isinstance(w, Exhausted):
            if isinstance(w, SortTm):
                for s, s2 in session.spec.axioms:
                    if s2 == w.name:
                        out.append({"rule": "sorted", "sort": s})
                for s1, s2, s3 in session.spec.rules:
                    if s3 == w.name:
                        out.append({"rule": "Piwf", "triple": [s1, s2, s3]})
            if isinstance(w, Pi):
                out.append({"rule": "PiR"})
        for x, _ in entry.env.entries:
            out.append({"rule": "Contr", "head": x})
        out.append({"rule": "Claim"})
        out.append({"rule": "ProvideTerm"})
    elif isinstance(entry, ListGoal):
        out.append({"rule": "axiom"})
        w = whnf(entry.stoup, session.fuel)
        if isinstance(w, Pi):
            out.append({"rule": "PiL"})
        out.append({"rule": "Claim"})
    return out


def _goal_at(session: ProofSession, index: int):
    entries = session.sigma_env.entries
    if not (0 <= index < len(entries)):
        raise SessionError("bad_goal", f"no goal at index {index}", goal_index=index)
    entry = entries[index]
    if not isinstance(entry, (TermGoal, ListGoal)):
        raise SessionError("bad_goal", f"entry {index} is a constraint, not a goal",
                           goal_index=index)
    return entry


def _splice(session: ProofSession, index: int, entry, cand, new_entries) -> None:
    binders = tuple(entry.env.domain())
    one = Substitution()
    one.bindings[entry.mv] = (binders, cand)
    entries = session.sigma_env.entries
    left = entries[:index]
    right = tuple(apply_subst(one, e) for e in entries[index + 1:])
    session.sigma_env = GoalEnvironment(left + new_entries + right)
    session.partial = apply_subst(one, session.partial)
    session.bindings = session.bindings + ((entry.mv, binders, cand),)
    _refresh_status(session)


def _refresh_status(session: ProofSession) -> None:
    if session.status == "failed":
        return
    v = is_solved_env(session.sigma_env, session.fuel)
    session.status = "solved" if v is Verdict.YES else "open"


def apply_action(session: ProofSession, action: dict) -> ProofSession:
    """Mutates the session in place; every action is undoable."""
    kind = action.get("type")
    prior = session.digest()
    snap = session.snapshot()
    try:
        if kind == "apply_rule":
            _do_rule(session, action)
        elif kind == "claim":
            _do_rule(session, {"type": "apply_rule", "goal": action["goal"], "rule": "Claim"})
        elif kind == "provide_term":
            _do_provide(session, action)
        elif kind == "simplify":
            _do_simplify(session)
        elif kind == "auto":
            _do_auto(session, action)
        elif kind == "undo":
            if not session._undo_stack:
                raise SessionError("nothing_to_undo", "history is empty")
            session.restore(session._undo_stack.pop())
            return session
        else:
            raise SessionError("bad_action", f"unknown action type {kind!r}")
    except SessionError:
        raise
    session._undo_stack.append(snap)
    session.history = session.history + ((action, prior),)
    return session


def _rule_filter(action: dict):
    rule = action.get("rule")
    if rule in ("sorted",):
        if "sort" in action:
            return ("sorted", action["sort"])
        return ("sorted",)
    if rule == "Piwf":
        if "triple" in action:
            return ("Piwf", tuple(action["triple"]))
        return ("Piwf",)
    if rule == "Contr":
        if "head" not in action:
            raise SessionError("missing_param", "Contr needs a head variable", rule="Contr")
        return ("Contr", action["head"])
    if rule in ("PiR", "PiL", "axiom", "Claim"):
        return (rule,)
    raise SessionError("bad_rule", f"unknown rule {action.get('rule')!r}")


def _do_rule(session: ProofSession, action: dict) -> None:
    index = action.get("goal")
    entry = _goal_at(session, index)
    rule_filter = _rule_filter(action)
    ctx = EnumContext(session.spec, session.registry, allclaim_policy, fuel=session.fuel)
    if isinstance(entry, TermGoal):
        gen = enum_term(ctx, entry.env, entry.type, 2, rule_filter=rule_filter)
    else:
        gen = enum_list(ctx, entry.env, entry.stoup, entry.type, 2, rule_filter=rule_filter)
    got = next(gen, None)
    if got is None:
        detail = "its premiss shape or reduction side condition failed"
        if action.get("rule") == "Contr":
            detail = ("the chosen head can never meet this goal: the stoup's rigid "
                      "codomain head disagrees with the goal head")
        raise SessionError("side_condition", f"rule {action.get('rule')} does not apply here",
                           goal_index=index, rule=action.get("rule"), detail=detail)
    cand, new_entries = got
    _splice(session, index, entry, cand, new_entries)


def _do_provide(session: ProofSession, action: dict) -> None:
    index = action.get("goal")
    entry = _goal_at(session, index)
    text = action.get("term", "")
    try:
        term = parse_term(text, set(session.spec.sorts), session.registry)
    except ParseError as e:
        raise SessionError("parse_error", str(e), goal_index=index)
    if not is_ground(term):
        raise SessionError("open_input", "provided terms must be ground", goal_index=index)
    if not (entry.env.is_ground() and is_ground(entry.type)):
        raise SessionError("open_goal", "this goal still depends on unsolved meta-variables",
                           goal_index=index)
    if isinstance(entry, ListGoal):
        raise SessionError("bad_goal", "provide a term at a term goal", goal_index=index)
    res = ps_check(session.spec, entry.env, term, entry.type, session.fuel)
    if res.outcome is Outcome.UNDECIDED:
        raise SessionError("undecided", "type check undecided at this fuel", goal_index=index)
    if not res:
        raise SessionError("ill_typed", f"provided term rejected: {res.reason}", goal_index=index)
    _splice(session, index, entry, term, ())


def _do_simplify(session: ProofSession) -> None:
    out = simplify_constraints(session.sigma_env, session.fuel)
    if isinstance(out, SimplifyFailure):
        # a recorded, undoable dead end rather than a rejected action
        session.status = "failed"
        session.failure = {
            "message": "a constraint has no solution",
            "lhs": print_term(out.constraint.lhs),
            "rhs": print_term(out.constraint.rhs),
            "reason": out.reason,
        }
        return
    session.sigma_env = out
    session.failure = None
    _refresh_status(session)


def _do_auto(session: ProofSession, action: dict) -> None:
    strategy = action.get("strategy", "lazy")
    budget = int(action.get("budget", 50_000))
    cancel = action.get("_cancel")
    out = pe_solve(session.spec, session.sigma_env, session.registry,
                   strategy=strategy, budget=budget, fuel=session.fuel,
                   cancel=cancel)
    if isinstance(out, PeFailure):
        raise SessionError("auto_failed", "automatic search failed on the residual goals",
                           detail=out.reason)
    if isinstance(out, PeExhausted):
        if cancel is not None and cancel():
            raise SessionError("auto_cancelled", "automatic search was cancelled")
        raise SessionError("auto_exhausted", "automatic search ran out of budget")
    while True:
        idx = next((i for i, e in enumerate(session.sigma_env.entries)
                    if isinstance(e, (TermGoal, ListGoal))), None)
        if idx is None:
            break
        entry = session.sigma_env.entries[idx]
        hit = out.get(entry.mv)
        if hit is None:
            raise SessionError("auto_failed", f"solver returned no binding for {entry.mv.name}")
        _splice(session, idx, entry, hit[1], ())
    session.sigma_env = GoalEnvironment(tuple(
        e for e in session.sigma_env.entries
        if not (isinstance(e, Constraint)
                and is_solved_constraint(e, session.fuel) is Verdict.YES)))
    _refresh_status(session)


def accumulated_substitution(session: ProofSession) -> Substitution:
    sigma = Substitution()
    for mv, binders, body in reversed(session.bindings):
        sigma.bind(mv, binders, apply_subst(sigma, body))
    return sigma


def final_term(session: ProofSession) -> Optional[Term]:
    if session.status != "solved":
        return None
    return session.partial


def verify_solved(session: ProofSession) -> bool:
    """When solved, the fully instantiated proof term must check against the
    root goal by the proof-search rules."""
    if session.status != "solved":
        return False
    res = ps_check(session.spec, session.root_env, session.partial, session.root_goal,
                   session.fuel)
    return bool(res)


# -- persistence -----------------------------------------------------------

FORMAT = "ptsc-session/1"


def export_session(session: ProofSession) -> dict:
    return {
        "format": FORMAT,
        "id": session.id,
        "spec": session.spec.to_dict(),
        "spec_name": session.spec_name,
        "registry": [[mv.ident, mv.name, mv.kind, mv.arity] for mv in session.registry],
        "root_env": _env_doc(session.root_env),
        "root_goal": print_term(session.root_goal),
        "root_metavar": session.root_mv.name,
        "partial": print_term(session.partial),
        "goals": [_entry_doc(e) for e in session.sigma_env],
        "bindings": [[mv.name, list(b), print_term(body)] for mv, b, body in session.bindings],
        "history": [[a, d] for a, d in session.history],
        "status": session.status,
        "digest": session.digest(),
    }


def import_session(doc: dict) -> ProofSession:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise SessionError("bad_format", f"expected a {FORMAT} document")
    try:
        spec = PtsSpec.from_dict(doc["spec"])
        registry = MetaVarRegistry()
        for ident, name, kind, arity in doc["registry"]:
            registry.create_with_id(ident, name, kind, arity)
        sorts = set(spec.sorts)

        def term(s):
            return parse_term(s, sorts, registry)

        def env(pairs):
            return Environment(tuple((x, term(t)) for x, t in pairs))

        def entry(d):
            if d["kind"] == "term":
                return TermGoal(env(d["env"]), registry.lookup(d["metavar"]), term(d["type"]))
            if d["kind"] == "list":
                return ListGoal(env(d["env"]), term(d["stoup"]),
                                registry.lookup(d["metavar"]), term(d["type"]))
            return Constraint(env(d["env"]), term(d["lhs"]), term(d["rhs"]))

        session = ProofSession(
            id=doc["id"],
            spec=spec,
            spec_name=doc.get("spec_name", "custom"),
            registry=registry,
            root_env=env(doc["root_env"]),
            root_goal=term(doc["root_goal"]),
            root_mv=registry.lookup(doc["root_metavar"]),
            partial=term(doc["partial"]),
            sigma_env=GoalEnvironment(tuple(entry(d) for d in doc["goals"])),
            bindings=tuple(
                (registry.lookup(name), tuple(b),
                 (parse_list if registry.lookup(name).kind == "list" else parse_term)(
                     body, sorts, registry))
                for name, b, body in doc["bindings"]
            ),
            history=tuple((a, d) for a, d in doc["history"]),
            status=doc["status"],
        )
    except (KeyError, TypeError, ParseError) as e:
        raise SessionError("bad_format", f"malformed session document: {e}")
    return session
