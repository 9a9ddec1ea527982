"""Typing for ground terms: the sequent-calculus judgments, an algorithmic
checker, an explicit-derivation validator, and the natural-deduction side.

The checker is the generation-lemma reading of the rules: synthesise the
structural type of a term (no trailing conversion), then compare with the
requested type, allowing conversion only when the requested type is itself
sorted. Cuts are checked through the minimal rule instance that extends the
current environment by the cut binder. Conversion fuel exhaustion surfaces as
a distinct Undecided verdict, never as a rejection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import bridge
from .bridge import App, LamP, PiP, PtsTerm, SortP, VarP
from .presets import PtsSpec
from .rewrite import (
    DEFAULT_CONV_FUEL,
    Exhausted,
    Verdict,
    convertible,
    normalize_bx,
    normalize_fast,
    whnf,
)
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
    Nil,
    Pi,
    SortTm,
    Term,
    TermApp,
    VarApp,
    alpha_eq,
    canon_key,
    free_vars,
    fresh_var,
    is_ground,
    rename_free,
)


class Outcome(Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class CheckResult:
    outcome: Outcome
    reason: str = ""

    def __bool__(self) -> bool:
        return self.outcome is Outcome.ACCEPT


ACCEPT = CheckResult(Outcome.ACCEPT)


def reject(reason: str) -> CheckResult:
    return CheckResult(Outcome.REJECT, reason)


class UndecidedError(Exception):
    """Conversion fuel ran out somewhere underneath."""


def _conv(a, b, fuel) -> bool:
    v = convertible(a, b, fuel)
    if v is Verdict.UNDECIDED:
        raise UndecidedError("conversion undecided at this fuel")
    return v is Verdict.YES


def _whnf(t, fuel):
    w = whnf(t, fuel)
    if isinstance(w, Exhausted):
        raise UndecidedError("head normalisation ran out of fuel")
    return w


def _nf(t, fuel):
    n = normalize_fast(t, fuel)
    if isinstance(n, Exhausted):
        raise UndecidedError("normalisation ran out of fuel")
    return n


def _soft_nf(t, fuel):
    # synthesised types are normalised so instantiation cuts never stack;
    # everything stays convertible to the raw candidate
    n = normalize_fast(t, fuel)
    return t if isinstance(n, Exhausted) else n


def _dedup(cands: list) -> list:
    seen = set()
    out = []
    for c in cands:
        k = canon_key(c)
        if k not in seen:
            seen.add(k)
            out.append(c)
    return out


def _fresh_binder(x: str, body, env: Environment, *extra):
    avoid = set(env.domain())
    for e in extra:
        avoid |= set(e)
    if x in avoid:
        x2 = fresh_var(x, avoid | free_vars(body))
        return x2, rename_free(body, {x: x2})
    return x, body


class _Checker:
    def __init__(self, spec: PtsSpec, fuel: int):
        self.spec = spec
        self.fuel = fuel

    # -- structural type synthesis --------------------------------------

    def synth(self, env: Environment, t: Term) -> list:
        match t:
            case SortTm(s):
                return [SortTm(s2) for s2 in self.spec.axioms_from(s)]
            case Pi(x, a, b):
                sa = self.sorts_of(env, a)
                if not sa:
                    return []
                x, b = _fresh_binder(x, b, env)
                sb = self.sorts_of(env.extend(x, a), b)
                out = []
                for s1, s2, s3 in self.spec.rules:
                    if s1 in sa and s2 in sb:
                        out.append(SortTm(s3))
                return _dedup(out)
            case Lam(x, a, m):
                if not self.sorts_of(env, a):
                    return []
                x, m = _fresh_binder(x, m, env)
                inner = env.extend(x, a)
                out = []
                for b in self.synth(inner, m):
                    if self._pi_sorted(env, x, a, b, inner):
                        out.append(Pi(x, a, b))
                return _dedup(out)
            case VarApp(x, l):
                a = env.lookup(x)
                if a is None:
                    return []
                return self.synth_list(env, a, l)
            case TermApp(m, l):
                out = []
                for a in self.synth(env, m):
                    out.extend(self.synth_list(env, a, l))
                return _dedup(out)
            case Cut(a0, p, x, n):
                if not self.sorts_of(env, a0):
                    return []
                if not self._checks(env, p, a0, target_sorted=True):
                    return []
                x, n = _fresh_binder(x, n, env, free_vars(p), free_vars(a0))
                out = []
                for c in self.synth(env.extend(x, a0), n):
                    if isinstance(c, SortTm) and c.name in self.spec.sorts:
                        out.append(c)
                    else:
                        out.append(_soft_nf(Cut(a0, p, x, c), self.fuel))
                return _dedup(out)
            case MetaTm():
                return []
        raise TypeError(f"not a term: {t!r}")

    def synth_list(self, env: Environment, stoup: Term, l: ListTerm) -> list:
        match l:
            case Nil():
                if not self.sorts_of(env, stoup):
                    return []
                return [stoup]
            case Cons(m, tail):
                w = _whnf(stoup, self.fuel)
                if not isinstance(w, Pi):
                    return []
                if not self.sorts_of(env, w):
                    return []
                x, b = _fresh_binder(w.var, w.body, env, free_vars(m), free_vars(w.dom))
                if not self._checks(env, m, w.dom, target_sorted=True):
                    return []
                return self.synth_list(env, _soft_nf(Cut(w.dom, m, x, b), self.fuel), tail)
            case Concat(l1, l2):
                out = []
                for a in self.synth_list(env, stoup, l1):
                    out.extend(self.synth_list(env, a, l2))
                return _dedup(out)
            case CutL(a0, p, x, body):
                if not self.sorts_of(env, a0):
                    return []
                if not self._checks(env, p, a0, target_sorted=True):
                    return []
                x, body = _fresh_binder(x, body, env, free_vars(p), free_vars(a0), free_vars(stoup))
                out = []
                for c in self.synth_list(env.extend(x, a0), stoup, body):
                    out.append(_soft_nf(Cut(a0, p, x, c), self.fuel))
                return _dedup(out)
            case MetaLs():
                return []
        raise TypeError(f"not a list: {l!r}")

    def _pi_sorted(self, env: Environment, x: str, a: Term, b: Term, inner: Environment) -> bool:
        sa = self.sorts_of(env, a)
        if not sa:
            return False
        sb = self.sorts_of(inner, b)
        for s1, s2, _ in self.spec.rules:
            if s1 in sa and s2 in sb:
                return True
        return False

    def sorts_of(self, env: Environment, a: Term) -> list:
        """Sorts s with a checkable against s (empty when a is not a type)."""
        out = []
        for c in self.synth(env, a):
            n = _nf(c, self.fuel)
            if isinstance(n, SortTm) and n.name not in out:
                out.append(n.name)
        return out

    def _checks(self, env: Environment, m: Term, target: Term, target_sorted: Optional[bool] = None) -> bool:
        cands = self.synth(env, m)
        for c in cands:
            if alpha_eq(c, target):
                return True
        if not cands:
            return False
        if target_sorted is None:
            target_sorted = bool(self.sorts_of(env, target))
        if not target_sorted:
            return False
        return any(_conv(c, target, self.fuel) for c in cands)

    def env_ok(self, env: Environment) -> Optional[str]:
        seen = set()
        prefix = Environment()
        for x, a in env:
            if x in seen:
                return f"duplicate variable {x!r}"
            if not self.sorts_of(prefix, a):
                return f"type of {x!r} is not sorted"
            seen.add(x)
            prefix = prefix.extend(x, a)
        return None


def check_env(spec: PtsSpec, env: Environment, fuel: int = DEFAULT_CONV_FUEL) -> CheckResult:
    if not env.is_ground():
        return reject("environment contains meta-variables")
    try:
        bad = _Checker(spec, fuel).env_ok(env)
    except UndecidedError as e:
        return CheckResult(Outcome.UNDECIDED, str(e))
    return ACCEPT if bad is None else reject(bad)


def check_term(spec: PtsSpec, env: Environment, m: Term, a: Term,
               fuel: int = DEFAULT_CONV_FUEL) -> CheckResult:
    if not (is_ground(m) and is_ground(a) and env.is_ground()):
        return reject("inputs must be ground")
    ck = _Checker(spec, fuel)
    try:
        bad = ck.env_ok(env)
        if bad is not None:
            return reject(f"ill-formed environment: {bad}")
        if ck._checks(env, m, a):
            return ACCEPT
        return reject("no structural type matches the requested type")
    except UndecidedError as e:
        return CheckResult(Outcome.UNDECIDED, str(e))


def check_list(spec: PtsSpec, env: Environment, stoup: Term, l: ListTerm, c: Term,
               fuel: int = DEFAULT_CONV_FUEL) -> CheckResult:
    if not (is_ground(stoup) and is_ground(l) and is_ground(c) and env.is_ground()):
        return reject("inputs must be ground")
    ck = _Checker(spec, fuel)
    try:
        bad = ck.env_ok(env)
        if bad is not None:
            return reject(f"ill-formed environment: {bad}")
        cands = ck.synth_list(env, stoup, l)
        for cand in cands:
            if alpha_eq(cand, c):
                return ACCEPT
        if cands and ck.sorts_of(env, c) and any(_conv(x, c, fuel) for x in cands):
            return ACCEPT
        return reject("no structural type matches the requested type")
    except UndecidedError as e:
        return CheckResult(Outcome.UNDECIDED, str(e))


def env_included(spec: PtsSpec, small: Environment, big: Environment,
                 fuel: int = DEFAULT_CONV_FUEL) -> Verdict:
    undecided = False
    for x, a in small:
        b = big.lookup(x)
        if b is None:
            return Verdict.NO
        v = convertible(a, b, fuel)
        if v is Verdict.NO:
            return Verdict.NO
        if v is Verdict.UNDECIDED:
            undecided = True
    return Verdict.UNDECIDED if undecided else Verdict.YES


def cut_env(annot: Term, payload: Term, x: str, env: Environment) -> Environment:
    """Apply an explicit substitution to every type of an environment."""
    return Environment(tuple((y, Cut(annot, payload, x, t)) for y, t in env))


# -- explicit derivations -------------------------------------------------


@dataclass(frozen=True)
class EnvWf:
    env: Environment


@dataclass(frozen=True)
class TermTy:
    env: Environment
    term: Term
    type: Term


@dataclass(frozen=True)
class ListTy:
    env: Environment
    stoup: Term
    lst: ListTerm
    type: Term


RULE_NAMES = (
    "empty", "extend", "sorted", "Piwf", "PiR", "Contr", "axiom",
    "convR", "convR'", "convL", "PiL", "Cut1", "Cut2", "Cut3", "Cut4",
)


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: object
    premises: tuple = ()
    side: dict = field(default_factory=dict)


def _env_eq(a: Environment, b: Environment) -> bool:
    if len(a) != len(b):
        return False
    return all(x == y and alpha_eq(s, t) for (x, s), (y, t) in zip(a, b))


class _Validator:
    def __init__(self, spec: PtsSpec, fuel: int):
        self.spec = spec
        self.fuel = fuel
        self.diags: list = []

    def fail(self, path, msg) -> bool:
        self.diags.append((path, msg))
        return False

    def conv(self, a, b, path, what) -> bool:
        v = convertible(a, b, self.fuel)
        if v is Verdict.YES:
            return True
        if v is Verdict.UNDECIDED:
            return self.fail(path, f"{what}: conversion undecided at this fuel")
        return self.fail(path, f"{what}: sides are not convertible")

    def sort_premise(self, p, path) -> Optional[str]:
        if not isinstance(p, TermTy) or not isinstance(p.type, SortTm):
            self.fail(path, "premise must type against a sort")
            return None
        if p.type.name not in self.spec.sorts:
            self.fail(path, f"{p.type.name!r} is not a declared sort")
            return None
        return p.type.name

    def validate(self, d: Derivation, path=()) -> bool:
        ok = all(self.validate(p, path + (i,)) for i, p in enumerate(d.premises))
        return self.node(d, path) and ok

    def node(self, d: Derivation, path) -> bool:
        c = d.conclusion
        ps = d.premises
        match d.rule:
            case "empty":
                if ps or not isinstance(c, EnvWf) or len(c.env) != 0:
                    return self.fail(path, "empty concludes the empty environment with no premises")
                return True
            case "extend":
                if len(ps) != 1 or not isinstance(c, EnvWf) or len(c.env) == 0:
                    return self.fail(path, "extend needs one premise and a non-empty environment")
                (p,) = ps
                p = p.conclusion
                if self.sort_premise(p, path) is None:
                    return False
                x, a = c.env.entries[-1]
                prefix = Environment(c.env.entries[:-1])
                if not _env_eq(p.env, prefix):
                    return self.fail(path, "premise environment must be the conclusion minus its last entry")
                if not alpha_eq(p.term, a):
                    return self.fail(path, "premise must type the new binding's type")
                if x in prefix.domain():
                    return self.fail(path, f"variable {x!r} already bound")
                return True
            case "sorted":
                if len(ps) != 1 or not isinstance(c, TermTy):
                    return self.fail(path, "sorted needs one well-formedness premise")
                p = ps[0].conclusion
                if not isinstance(p, EnvWf) or not _env_eq(p.env, c.env):
                    return self.fail(path, "premise must assert the conclusion environment well-formed")
                if not (isinstance(c.term, SortTm) and isinstance(c.type, SortTm)):
                    return self.fail(path, "sorted concludes a sort typed by a sort")
                if (c.term.name, c.type.name) not in self.spec.axioms:
                    return self.fail(path, f"({c.term.name},{c.type.name}) is not an axiom")
                return True
            case "Piwf":
                if len(ps) != 2 or not isinstance(c, TermTy) or not isinstance(c.term, Pi):
                    return self.fail(path, "Piwf concludes a Pi-type with two premises")
                p1, p2 = ps[0].conclusion, ps[1].conclusion
                s1 = self.sort_premise(p1, path)
                s2 = self.sort_premise(p2, path)
                if s1 is None or s2 is None:
                    return False
                if not isinstance(c.type, SortTm) or (s1, s2, c.type.name) not in self.spec.rules:
                    return self.fail(path, f"({s1},{s2},?) does not produce the conclusion sort")
                if not _env_eq(p1.env, c.env) or not alpha_eq(p1.term, c.term.dom):
                    return self.fail(path, "first premise must type the domain in the same environment")
                if len(p2.env) != len(c.env) + 1 or not _env_eq(Environment(p2.env.entries[:-1]), c.env):
                    return self.fail(path, "second premise must extend the environment by the binder")
                x2, a2 = p2.env.entries[-1]
                if not alpha_eq(a2, c.term.dom) or not alpha_eq(Pi(x2, a2, p2.term), c.term):
                    return self.fail(path, "second premise must type the codomain under the binder")
                return True
            case "PiR":
                if len(ps) != 2 or not isinstance(c, TermTy) or not isinstance(c.term, Lam):
                    return self.fail(path, "PiR concludes a lambda with two premises")
                p1, p2 = ps[0].conclusion, ps[1].conclusion
                if self.sort_premise(p1, path) is None:
                    return False
                if not _env_eq(p1.env, c.env) or not alpha_eq(p1.term, c.type):
                    return self.fail(path, "first premise must sort the conclusion type")
                if len(p2.env) != len(c.env) + 1 or not _env_eq(Environment(p2.env.entries[:-1]), c.env):
                    return self.fail(path, "second premise must extend the environment by the binder")
                x2, a2 = p2.env.entries[-1]
                if not alpha_eq(Lam(x2, a2, p2.term), c.term):
                    return self.fail(path, "second premise must type the body")
                if not alpha_eq(Pi(x2, a2, p2.type), c.type):
                    return self.fail(path, "conclusion type must be the Pi over the premise type")
                return True
            case "Contr":
                if len(ps) != 1 or not isinstance(c, TermTy) or not isinstance(c.term, VarApp):
                    return self.fail(path, "Contr concludes a variable application")
                p = ps[0].conclusion
                if not isinstance(p, ListTy) or not _env_eq(p.env, c.env):
                    return self.fail(path, "premise must be a list judgment in the same environment")
                a = c.env.lookup(c.term.var)
                if a is None:
                    return self.fail(path, f"{c.term.var!r} is not bound in the environment")
                if not alpha_eq(p.stoup, a):
                    return self.fail(path, "stoup must be the bound type of the head variable")
                if not alpha_eq(p.lst, c.term.args) or not alpha_eq(p.type, c.type):
                    return self.fail(path, "premise must type the argument list against the goal")
                return True
            case "axiom":
                if len(ps) != 1 or not isinstance(c, ListTy) or not isinstance(c.lst, Nil):
                    return self.fail(path, "axiom concludes the empty list")
                if not alpha_eq(c.stoup, c.type):
                    return self.fail(path, "axiom requires stoup and goal to coincide")
                p = ps[0].conclusion
                if self.sort_premise(p, path) is None:
                    return False
                if not _env_eq(p.env, c.env) or not alpha_eq(p.term, c.stoup):
                    return self.fail(path, "premise must sort the stoup")
                return True
            case "convR":
                if len(ps) != 2 or not isinstance(c, TermTy):
                    return self.fail(path, "convR needs two premises")
                p1, p2 = ps[0].conclusion, ps[1].conclusion
                if not isinstance(p1, TermTy) or not _env_eq(p1.env, c.env) or not alpha_eq(p1.term, c.term):
                    return self.fail(path, "first premise must type the same term")
                if self.sort_premise(p2, path) is None:
                    return False
                if not _env_eq(p2.env, c.env) or not alpha_eq(p2.term, c.type):
                    return self.fail(path, "second premise must sort the new type")
                return self.conv(p1.type, c.type, path, "convR")
            case "convR'":
                if len(ps) != 2 or not isinstance(c, ListTy):
                    return self.fail(path, "convR' needs two premises")
                p1, p2 = ps[0].conclusion, ps[1].conclusion
                if not isinstance(p1, ListTy) or not _env_eq(p1.env, c.env) \
                        or not alpha_eq(p1.stoup, c.stoup) or not alpha_eq(p1.lst, c.lst):
                    return self.fail(path, "first premise must type the same list and stoup")
                if self.sort_premise(p2, path) is None:
                    return False
                if not _env_eq(p2.env, c.env) or not alpha_eq(p2.term, c.type):
                    return self.fail(path, "second premise must sort the new goal")
                return self.conv(p1.type, c.type, path, "convR'")
            case "convL":
                if len(ps) != 2 or not isinstance(c, ListTy):
                    return self.fail(path, "convL needs two premises")
                p1, p2 = ps[0].conclusion, ps[1].conclusion
                if not isinstance(p1, ListTy) or not _env_eq(p1.env, c.env) \
                        or not alpha_eq(p1.lst, c.lst) or not alpha_eq(p1.type, c.type):
                    return self.fail(path, "first premise must type the same list and goal")
                if self.sort_premise(p2, path) is None:
                    return False
                if not _env_eq(p2.env, c.env) or not alpha_eq(p2.term, c.stoup):
                    return self.fail(path, "second premise must sort the new stoup")
                return self.conv(p1.stoup, c.stoup, path, "convL")
            case "PiL":
                if len(ps) != 3 or not isinstance(c, ListTy) or not isinstance(c.lst, Cons):
                    return self.fail(path, "PiL concludes a cons with three premises")
                w = c.stoup
                if not isinstance(w, Pi):
                    return self.fail(path, "PiL requires a Pi-shaped stoup")
                p1, p2, p3 = (p.conclusion for p in ps)
                if self.sort_premise(p1, path) is None:
                    return False
                if not _env_eq(p1.env, c.env) or not alpha_eq(p1.term, w):
                    return self.fail(path, "first premise must sort the stoup")
                if not isinstance(p2, TermTy) or not _env_eq(p2.env, c.env) \
                        or not alpha_eq(p2.term, c.lst.head) or not alpha_eq(p2.type, w.dom):
                    return self.fail(path, "second premise must type the head against the domain")
                expect = Cut(w.dom, c.lst.head, w.var, w.body)
                if not isinstance(p3, ListTy) or not _env_eq(p3.env, c.env) \
                        or not alpha_eq(p3.stoup, expect) \
                        or not alpha_eq(p3.lst, c.lst.tail) or not alpha_eq(p3.type, c.type):
                    return self.fail(path, "third premise must type the tail in the substituted stoup")
                return True
            case "Cut1":
                if len(ps) != 2 or not isinstance(c, ListTy) or not isinstance(c.lst, Concat):
                    return self.fail(path, "Cut1 concludes a concatenation")
                p1, p2 = ps[0].conclusion, ps[1].conclusion
                if not isinstance(p1, ListTy) or not isinstance(p2, ListTy):
                    return self.fail(path, "both premises must be list judgments")
                if not (_env_eq(p1.env, c.env) and _env_eq(p2.env, c.env)):
                    return self.fail(path, "premise environments must match")
                if not (alpha_eq(p1.stoup, c.stoup) and alpha_eq(p1.lst, c.lst.left)):
                    return self.fail(path, "first premise must type the left part from the stoup")
                if not alpha_eq(p1.type, p2.stoup):
                    return self.fail(path, "intermediate type must hand over to the second premise")
                if not (alpha_eq(p2.lst, c.lst.right) and alpha_eq(p2.type, c.type)):
                    return self.fail(path, "second premise must type the right part to the goal")
                return True
            case "Cut3":
                if len(ps) != 2 or not isinstance(c, TermTy) or not isinstance(c.term, TermApp):
                    return self.fail(path, "Cut3 concludes a term application")
                p1, p2 = ps[0].conclusion, ps[1].conclusion
                if not isinstance(p1, TermTy) or not isinstance(p2, ListTy):
                    return self.fail(path, "premises must be a term and a list judgment")
                if not (_env_eq(p1.env, c.env) and _env_eq(p2.env, c.env)):
                    return self.fail(path, "premise environments must match")
                if not alpha_eq(p1.term, c.term.head):
                    return self.fail(path, "first premise must type the head")
                if not alpha_eq(p1.type, p2.stoup):
                    return self.fail(path, "head type must enter the stoup")
                if not (alpha_eq(p2.lst, c.term.args) and alpha_eq(p2.type, c.type)):
                    return self.fail(path, "second premise must type the arguments to the goal")
                return True
            case "Cut2" | "Cut4":
                return self._cut_subst(d, path)
        return self.fail(path, f"unknown rule {d.rule!r}")

    def _cut_subst(self, d: Derivation, path) -> bool:
        c = d.conclusion
        ps = d.premises
        if len(ps) != 2:
            return self.fail(path, "substitution cuts need two premises")
        p1, p2 = ps[0].conclusion, ps[1].conclusion
        if not isinstance(p1, TermTy):
            return self.fail(path, "first premise must type the payload")
        gamma = p1.env
        if d.rule == "Cut4":
            if not isinstance(c, TermTy) or not isinstance(c.term, Cut):
                return self.fail(path, "Cut4 concludes an explicit substitution on a term")
            node = c.term
            if not isinstance(p2, TermTy):
                return self.fail(path, "second premise must be a term judgment")
            inner_subject, inner_type = p2.term, p2.type
        else:
            if not isinstance(c, ListTy) or not isinstance(c.lst, CutL):
                return self.fail(path, "Cut2 concludes an explicit substitution on a list")
            node = c.lst
            if not isinstance(p2, ListTy):
                return self.fail(path, "second premise must be a list judgment")
            inner_subject, inner_type = p2.lst, p2.type
        if not alpha_eq(p1.term, node.payload) or not alpha_eq(p1.type, node.annot):
            return self.fail(path, "first premise must type the payload against the annotation")
        if len(p2.env) <= len(gamma) or not _env_eq(Environment(p2.env.entries[: len(gamma)]), gamma):
            return self.fail(path, "second premise environment must extend the first premise's")
        x2, a2 = p2.env.entries[len(gamma)]
        if x2 != node.var or not alpha_eq(a2, node.annot):
            return self.fail(path, "the extension binder must be the cut variable at its annotation")
        delta = Environment(p2.env.entries[len(gamma) + 1:])
        if not alpha_eq(inner_subject, node.body):
            return self.fail(path, "second premise must type the cut body")
        if d.rule == "Cut2":
            if not alpha_eq(c.stoup, Cut(node.annot, node.payload, node.var, p2.stoup)):
                return self.fail(path, "conclusion stoup must be the substituted premise stoup")
            if not alpha_eq(c.type, Cut(node.annot, node.payload, node.var, inner_type)):
                return self.fail(path, "conclusion goal must be the substituted premise goal")
        else:
            if isinstance(inner_type, SortTm) and inner_type.name in self.spec.sorts:
                if not alpha_eq(c.type, inner_type):
                    return self.fail(path, "a sort premise type must be kept unchanged")
            else:
                if not alpha_eq(c.type, Cut(node.annot, node.payload, node.var, inner_type)):
                    return self.fail(path, "conclusion type must be the substituted premise type")
        subst_delta = cut_env(node.annot, node.payload, node.var, delta)
        expected = Environment(gamma.entries + subst_delta.entries)
        target_env = c.env
        v = env_included(self.spec, expected, target_env, self.fuel)
        if v is Verdict.UNDECIDED:
            return self.fail(path, "environment inclusion undecided at this fuel")
        if v is Verdict.NO:
            return self.fail(path, "substituted environment is not included in the conclusion's")
        wf = check_env(self.spec, target_env, self.fuel)
        if wf.outcome is Outcome.UNDECIDED:
            return self.fail(path, "conclusion environment well-formedness undecided")
        if not wf:
            return self.fail(path, "conclusion environment is not well-formed")
        return True


def validate_derivation(spec: PtsSpec, d: Derivation, fuel: int = DEFAULT_CONV_FUEL):
    """Check every node against its rule schema. Returns (ok, diagnostics)."""
    v = _Validator(spec, fuel)
    ok = v.validate(d)
    return ok, v.diags


# -- natural-deduction side ------------------------------------------------


PtsEnv = tuple  # of (name, PtsTerm)


def _pts_lookup(env: PtsEnv, x: str):
    for y, t in reversed(env):
        if y == x:
            return t
    return None


def _conv_pts(a: PtsTerm, b: PtsTerm, fuel: int) -> bool:
    if bridge.alpha_eq_pts(a, b):
        return True
    na = bridge.beta_normalize(a, fuel)
    nb = bridge.beta_normalize(b, fuel)
    if na is None or nb is None:
        raise UndecidedError("beta conversion ran out of fuel")
    return bridge.alpha_eq_pts(na, nb)


class _PtsChecker:
    def __init__(self, spec: PtsSpec, fuel: int):
        self.spec = spec
        self.fuel = fuel

    def synth(self, env: PtsEnv, t: PtsTerm) -> list:
        match t:
            case VarP(x):
                a = _pts_lookup(env, x)
                return [a] if a is not None else []
            case SortP(s):
                return [SortP(s2) for s2 in self.spec.axioms_from(s)]
            case PiP(x, dom, body):
                sa = self.sorts_of(env, dom)
                if not sa:
                    return []
                x, body = self._freshen(x, body, env)
                sb = self.sorts_of(env + ((x, dom),), body)
                return [SortP(s3) for s1, s2, s3 in self.spec.rules if s1 in sa and s2 in sb]
            case LamP(x, dom, body):
                if not self.sorts_of(env, dom):
                    return []
                x, body = self._freshen(x, body, env)
                inner = env + ((x, dom),)
                out = []
                for b in self.synth(inner, body):
                    sb = self.sorts_of(inner, b)
                    sa = self.sorts_of(env, dom)
                    if any(s1 in sa and s2 in sb for s1, s2, _ in self.spec.rules):
                        out.append(PiP(x, dom, b))
                return out
            case App(fn, arg):
                out = []
                for tfn in self.synth(env, fn):
                    w = bridge.whnf_pts(tfn, self.fuel)
                    if w is None:
                        raise UndecidedError("head normalisation ran out of fuel")
                    if isinstance(w, PiP) and self._checks(env, arg, w.dom):
                        out.append(bridge.subst_pts(w.body, w.var, arg))
                return out
        raise TypeError(f"not a lambda term: {t!r}")

    def _freshen(self, x: str, body: PtsTerm, env: PtsEnv):
        dom = {y for y, _ in env}
        if x in dom:
            x2 = fresh_var(x, dom | bridge.free_vars_pts(body))
            return x2, bridge.subst_pts(body, x, VarP(x2))
        return x, body

    def sorts_of(self, env: PtsEnv, a: PtsTerm) -> list:
        out = []
        for c in self.synth(env, a):
            n = bridge.beta_normalize(c, self.fuel)
            if n is None:
                raise UndecidedError("normalisation ran out of fuel")
            if isinstance(n, SortP) and n.name not in out:
                out.append(n.name)
        return out

    def _checks(self, env: PtsEnv, t: PtsTerm, target: PtsTerm) -> bool:
        cands = self.synth(env, t)
        for c in cands:
            if bridge.alpha_eq_pts(c, target):
                return True
        if not cands or not self.sorts_of(env, target):
            return False
        return any(_conv_pts(c, target, self.fuel) for c in cands)

    def env_ok(self, env: PtsEnv) -> Optional[str]:
        seen = set()
        for i, (x, a) in enumerate(env):
            if x in seen:
                return f"duplicate variable {x!r}"
            if not self.sorts_of(env[:i], a):
                return f"type of {x!r} is not sorted"
            seen.add(x)
        return None


def check_env_pts(spec: PtsSpec, env: PtsEnv, fuel: int = DEFAULT_CONV_FUEL) -> CheckResult:
    try:
        bad = _PtsChecker(spec, fuel).env_ok(env)
    except UndecidedError as e:
        return CheckResult(Outcome.UNDECIDED, str(e))
    return ACCEPT if bad is None else reject(bad)


def check_pts(spec: PtsSpec, env: PtsEnv, t: PtsTerm, ty: PtsTerm,
              fuel: int = DEFAULT_CONV_FUEL) -> CheckResult:
    ck = _PtsChecker(spec, fuel)
    try:
        bad = ck.env_ok(env)
        if bad is not None:
            return reject(f"ill-formed environment: {bad}")
        if ck._checks(env, t, ty):
            return ACCEPT
        return reject("no structural type matches the requested type")
    except UndecidedError as e:
        return CheckResult(Outcome.UNDECIDED, str(e))
