import random

import pytest

from ptsc import bridge
from ptsc.bridge import LamP, PiP, SortP, VarP
from ptsc.presets import PRESETS, PtsSpec
from ptsc.rewrite import ALL_RULES, Verdict, find_redexes, step
from ptsc.terms import (
    NIL,
    Cons,
    Cut,
    Environment,
    Lam,
    Pi,
    SortTm,
    VarApp,
    alpha_eq,
    canon_key,
    var,
)
from ptsc.typecheck import (
    Derivation,
    EnvWf,
    ListTy,
    Outcome,
    TermTy,
    check_env,
    check_env_pts,
    check_list,
    check_pts,
    check_term,
    env_included,
    validate_derivation,
)

from helpers import CORPUS, PROOF_CONJ_COMM, CONJ, CONJ_BA, T, corpus_cases, env_of

sysF = PRESETS["systemF"]
stlc = PRESETS["stlc"]


def test_axiom_pairs():
    assert check_term(sysF, Environment(), T("*"), T("#"))
    assert check_term(sysF, Environment(), T("#"), T("*")).outcome is Outcome.REJECT


def test_check_env_examples():
    assert check_env(sysF, Environment())
    assert check_env(sysF, env_of("A : *, B : *"))
    assert check_env(sysF, env_of("x : x")).outcome is Outcome.REJECT
    assert check_env(sysF, env_of("A : *, A : *")).outcome is Outcome.REJECT


def test_identity_checks():
    env = env_of("A : *, B : *")
    assert check_term(sysF, env, T(r"\x:A. x"), T("A -> A"))
    assert check_term(sysF, env, T(r"\x:A. x"), T("A -> B")).outcome is Outcome.REJECT


def test_conjunction_commutativity_proof():
    env = env_of("A : *, B : *")
    assert check_term(sysF, env, T(PROOF_CONJ_COMM), T(f"({CONJ}) -> ({CONJ_BA})"))


def test_check_list_rows():
    env = env_of("A : *, a : A")
    assert check_list(sysF, env, T("A"), NIL, T("A"))
    assert check_list(sysF, env, T("*"), NIL, T("#")).outcome is Outcome.REJECT
    # consuming one argument instantiates the codomain
    assert check_list(sysF, env, T("A -> A"), Cons(var("a"), NIL), T("A"))


def test_conversion_in_the_requested_type():
    env = env_of("A : *, a : A")
    # the requested type reduces to A by cut propagation
    assert check_term(sysF, env, var("a"), T("[T := A : *] T"))
    # with the eta-free type language, a lambda-headed type needs a kind rule
    fom = PRESETS["fomega"]
    assert check_term(fom, env, var("a"), T(r"(\T:*. T){ A :: nil }"))


def test_undecided_is_distinct_from_reject():
    fom = PRESETS["fomega"]
    env = env_of("A : *, a : A")
    ty = "A"
    for _ in range(6):
        ty = rf"(\T:*. T){{ ({ty}) :: nil }}"
    r = check_term(fom, env, var("a"), T(ty), fuel=5)
    assert r.outcome is Outcome.UNDECIDED


def test_env_included():
    env1 = env_of("A : *, a : A")
    env2 = env_of("A : *, B : *, a : A")
    assert env_included(sysF, env1, env2) is Verdict.YES
    assert env_included(sysF, Environment(), env1) is Verdict.YES
    conv = Environment((("x", T(r"(\y:*. y){ A :: nil }")),))
    target = env_of("A : *, x : A")
    assert env_included(sysF, conv, target) is Verdict.YES
    assert env_included(sysF, env2, env1) is Verdict.NO


def test_whole_corpus_checks():
    for preset, spec, env, term, ty in corpus_cases():
        r = check_term(spec, env, term, ty)
        assert r.outcome is Outcome.ACCEPT, (preset, term, r)


def test_subject_reduction_on_corpus_one_step():
    regressions = []
    for preset, spec, env, term, ty in corpus_cases():
        for redex in find_redexes(term, ALL_RULES):
            reduct = step(term, redex)
            r = check_term(spec, env, reduct, ty)
            if r.outcome is not Outcome.ACCEPT:
                regressions.append((preset, term, redex.rule, r))
    assert not regressions, regressions


def test_thinning_with_randomized_weakenings():
    rng = random.Random(8128)
    cases = [c for c in corpus_cases()]
    extras = [("Zfresh", T("*")), ("wfresh", T("A -> A"))]
    for preset, spec, env, term, ty in cases:
        if preset != "systemF" or "A" not in env.domain():
            continue
        entries = list(env.entries)
        pos = rng.randrange(len(entries) + 1)
        name, t_extra = extras[rng.randrange(2)]
        if name in env.domain():
            continue
        bigger = Environment(tuple(entries[:pos] + [(name, t_extra)] + entries[pos:]))
        if not check_env(spec, bigger):
            continue
        assert env_included(spec, env, bigger) is Verdict.YES
        assert check_term(spec, bigger, term, ty), (term,)


# -- explicit derivations ----------------------------------------------------


def _sorted_node(env, s, s2):
    return Derivation("sorted", TermTy(env, SortTm(s), SortTm(s2)), (_wf_node(env),))


def _type_deriv(env, ty):
    """Derive env |- ty : sort for the simple types these goldens use."""
    if ty == SortTm("*"):
        return _sorted_node(env, "*", "#")
    assert isinstance(ty, VarApp) and ty.args == NIL
    bound = env.lookup(ty.var)
    assert bound == SortTm("*")
    return Derivation("Contr", TermTy(env, ty, SortTm("*")), (
        Derivation("axiom", ListTy(env, SortTm("*"), NIL, SortTm("*")), (
            _sorted_node(env, "*", "#"),)),))


def _wf_node(env):
    if len(env) == 0:
        return Derivation("empty", EnvWf(Environment()))
    prefix = Environment(env.entries[:-1])
    x, a = env.entries[-1]
    return Derivation("extend", EnvWf(env), (_type_deriv(prefix, a),))


def golden_variable_derivation():
    """x : s1 |- x{nil} : s1 via Contr over the axiom."""
    env = Environment((("x", SortTm("*")),))
    wf = _wf_node(env)
    sorted_x = Derivation("sorted", TermTy(env, SortTm("*"), SortTm("#")), (wf,))
    ax = Derivation("axiom", ListTy(env, SortTm("*"), NIL, SortTm("*")), (sorted_x,))
    return Derivation("Contr", TermTy(env, var("x"), SortTm("*")), (ax,))


def test_golden_variable_derivation_validates():
    ok, diags = validate_derivation(sysF, golden_variable_derivation())
    assert ok, diags


def test_sorted_node_with_bad_axiom_fails():
    env = Environment()
    bad = Derivation("sorted", TermTy(env, SortTm("#"), SortTm("*")),
                     (Derivation("empty", EnvWf(env)),))
    ok, diags = validate_derivation(sysF, bad)
    assert not ok
    assert any("axiom" in msg for _, msg in diags)


def _identity_derivation():
    """|-  \\x:A. x : A -> A over env A:*, with the full rule set."""
    envA = Environment((("A", SortTm("*")),))
    wfA = _wf_node(envA)
    # A : * inside envA
    a_star = Derivation("Contr", TermTy(envA, var("A"), SortTm("*")), (
        Derivation("axiom", ListTy(envA, SortTm("*"), NIL, SortTm("*")), (
            _sorted_node(envA, "*", "#"),)),))
    pi = Pi("x", var("A"), var("A"))
    envAx = envA.extend("x", var("A"))
    wfAx = Derivation("extend", EnvWf(envAx), (a_star,))
    a_star_inner = Derivation("Contr", TermTy(envAx, var("A"), SortTm("*")), (
        Derivation("axiom", ListTy(envAx, SortTm("*"), NIL, SortTm("*")), (
            Derivation("sorted", TermTy(envAx, SortTm("*"), SortTm("#")), (wfAx,)),)),))
    piwf = Derivation("Piwf", TermTy(envA, pi, SortTm("*")), (a_star, a_star_inner))
    x_of_a = Derivation("Contr", TermTy(envAx, var("x"), var("A")), (
        Derivation("axiom", ListTy(envAx, var("A"), NIL, var("A")), (a_star_inner,)),))
    return Derivation("PiR", TermTy(envA, Lam("x", var("A"), var("x")), pi), (piwf, x_of_a))


def test_identity_derivation_validates_and_checker_agrees():
    d = _identity_derivation()
    ok, diags = validate_derivation(sysF, d)
    assert ok, diags
    c = d.conclusion
    assert check_term(sysF, c.env, c.term, c.type)


def test_conversion_node_validates():
    envA = Environment((("A", SortTm("*")), ("a", var("A"))))
    red = Cut(SortTm("*"), var("A"), "T", var("T"))  # [T := A : *] T
    a_star = Derivation("Contr", TermTy(envA, var("A"), SortTm("*")), (
        Derivation("axiom", ListTy(envA, SortTm("*"), NIL, SortTm("*")), (
            _sorted_node(envA, "*", "#"),)),))
    inner = Derivation("Contr", TermTy(envA, var("a"), var("A")), (
        Derivation("axiom", ListTy(envA, var("A"), NIL, var("A")), (a_star,)),))
    ext = envA.extend("T", SortTm("*"))
    t_star = Derivation("Contr", TermTy(ext, var("T"), SortTm("*")), (
        Derivation("axiom", ListTy(ext, SortTm("*"), NIL, SortTm("*")), (
            Derivation("sorted", TermTy(ext, SortTm("*"), SortTm("#")), (
                Derivation("extend", EnvWf(ext), (_sorted_node(envA, "*", "#"),)),)),)),))
    sort_red = Derivation("Cut4", TermTy(envA, red, SortTm("*")), (a_star, t_star))
    conv = Derivation("convR", TermTy(envA, var("a"), red), (inner, sort_red))
    ok, diags = validate_derivation(sysF, conv)
    assert ok, diags
    # checker and validator agree on this judgment
    assert check_term(sysF, envA, var("a"), red)


def test_cut4_case_split_enforced():
    # a sort premise type must be kept unchanged in the conclusion
    envA = Environment((("A", SortTm("*")),))
    a_star = Derivation("Contr", TermTy(envA, var("A"), SortTm("*")), (
        Derivation("axiom", ListTy(envA, SortTm("*"), NIL, SortTm("*")), (
            _sorted_node(envA, "*", "#"),)),))
    ext = envA.extend("T", SortTm("*"))
    star_hash = _sorted_node(ext, "*", "#")
    good = Derivation("Cut4", TermTy(envA, Cut(SortTm("*"), var("A"), "T", SortTm("*")),
                                     SortTm("#")), (a_star, star_hash))
    ok, _ = validate_derivation(sysF, good)
    assert ok
    bad = Derivation("Cut4", TermTy(envA, Cut(SortTm("*"), var("A"), "T", SortTm("*")),
                                    Cut(SortTm("*"), var("A"), "T", SortTm("#"))),
                     (a_star, star_hash))
    ok, diags = validate_derivation(sysF, bad)
    assert not ok


def test_checker_validator_agreement_on_goldens():
    goldens = [golden_variable_derivation(), _identity_derivation()]
    for d in goldens:
        ok, diags = validate_derivation(sysF, d)
        c = d.conclusion
        r = check_term(sysF, c.env, c.term, c.type)
        assert ok == (r.outcome is Outcome.ACCEPT)


# -- the natural-deduction side ----------------------------------------------


def test_pts_axiom_and_identity():
    assert check_pts(sysF, (), SortP("*"), SortP("#"))
    envA = (("A", SortP("*")),)
    ident = LamP("x", VarP("A"), VarP("x"))
    assert check_pts(sysF, envA, ident, PiP("x", VarP("A"), VarP("A")))
    assert check_pts(sysF, (), SortP("#"), SortP("*")).outcome is Outcome.REJECT


def test_type_preservation_both_directions_on_corpus():
    for preset, spec, env, term, ty in corpus_cases():
        env_l = tuple((x, bridge.encode(a)) for x, a in env)
        r = check_pts(spec, env_l, bridge.encode(term), bridge.encode(ty))
        assert r.outcome is Outcome.ACCEPT, (preset, term, r)


def test_decode_preserves_typing_on_lambda_corpus():
    from ptsc.terms import MetaVarRegistry

    reg = MetaVarRegistry()
    lam_corpus = [
        ((), SortP("*"), SortP("#")),
        ((("A", SortP("*")),), LamP("x", VarP("A"), VarP("x")),
         PiP("x", VarP("A"), VarP("A"))),
        ((), LamP("T", SortP("*"), LamP("x", VarP("T"), VarP("x"))),
         PiP("T", SortP("*"), PiP("x", VarP("T"), VarP("T")))),
        ((("A", SortP("*")), ("a", VarP("A"))),
         bridge.App(LamP("x", VarP("A"), VarP("x")), VarP("a")), VarP("A")),
    ]
    for env_l, t, ty in lam_corpus:
        assert check_pts(sysF, env_l, t, ty)
        env_s = Environment(tuple((x, bridge.decode(a, reg)) for x, a in env_l))
        r = check_term(sysF, env_s, bridge.decode(t, reg), bridge.decode(ty, reg))
        assert r.outcome is Outcome.ACCEPT, (t,)
