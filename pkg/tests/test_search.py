import random

import pytest

from ptsc.presets import PRESETS
from ptsc.rewrite import X_RULES, find_redexes, normalize_bx, step
from ptsc.search import (
    SearchConfig,
    is_quasi_normal,
    ps_check,
    ps_check_list,
    ps_search,
    ps_search_stats,
    quasi_normal_witness,
)
from ptsc.terms import (
    NIL,
    Cons,
    Environment,
    Lam,
    SortTm,
    TermApp,
    alpha_eq,
    canon_key,
    var,
)
from ptsc.typecheck import Outcome, check_term

from helpers import CONJ, CONJ_BA, PROOF_CONJ_COMM, T, brute_terms, env_of

sysF = PRESETS["systemF"]
stlc = PRESETS["stlc"]


def test_quasi_normal_examples():
    assert is_quasi_normal(SortTm("*"))
    assert not is_quasi_normal(TermApp(Lam("x", var("A"), var("M")), Cons(var("N"), NIL)))
    inside = Lam("x", TermApp(Lam("y", SortTm("*"), var("B")), Cons(var("C"), NIL)), var("x"))
    assert is_quasi_normal(inside)
    w = quasi_normal_witness(inside)
    assert w.annotation_redexes and not w.offending


def test_ps_check_accepts_the_conjunction_proof():
    env = env_of("A : *, B : *")
    assert ps_check(sysF, env, T(PROOF_CONJ_COMM), T(f"({CONJ}) -> ({CONJ_BA})"))


def test_ps_check_sort_through_reduction():
    env = env_of("A : *")
    assert ps_check(sysF, env, T("*"), T("#"))
    assert ps_check(sysF, env, T("*"), T("[T := # : #] T"))


def test_lambda_against_a_sort_is_rejected():
    env = env_of("A : *")
    r = ps_check(sysF, env, T(r"\x:A. x"), T("*"))
    assert r.outcome is Outcome.REJECT


def test_ps_check_has_no_cut_rules():
    env = env_of("A : *, a : A")
    r = ps_check(sysF, env, T("[x := a : A] x{nil}"), T("A"))
    assert r.outcome is Outcome.REJECT  # cuts are not quasi-normal output


def test_search_identity_first():
    env = env_of("A : *")
    out = list(ps_search(stlc, env, T("A -> A"), SearchConfig(max_depth=3, max_results=1)))
    assert out and alpha_eq(out[0], T(r"\x:A. x"))


def test_search_goal_hash_yields_star():
    with pytest.warns(UserWarning):
        out = list(ps_search(sysF, Environment(), T("#"),
                             SearchConfig(max_depth=2, max_results=5)))
    assert any(alpha_eq(t, SortTm("*")) for t in out)


def test_search_rejects_bad_environment():
    with pytest.raises(ValueError):
        list(ps_search(stlc, env_of("x : x"), T("x"), SearchConfig(max_depth=2)))


def test_streamed_terms_sound_and_quasi_normal():
    # deep goals only stream their first inhabitants: exhausting the rest of
    # the space behind them is unbounded by design
    goals = [
        (stlc, "A : *", "A -> A", 5, 6),
        (stlc, "A : *, B : *", "A -> B -> A", 6, 6),
        (stlc, "A : *, B : *", "(A -> B) -> A -> B", 7, 6),
        (sysF, "", "(T:*) -> T -> T", 5, 6),
        (sysF, "A : *, B : *", f"({CONJ}) -> A", 8, 1),
    ]
    for spec, env_text, goal, depth, k in goals:
        env = env_of(env_text)
        out = list(ps_search(spec, env, T(goal),
                             SearchConfig(max_depth=depth, max_results=k)))
        assert out, goal
        for t in out:
            assert is_quasi_normal(t), (goal, t)
            assert check_term(spec, env, t, T(goal)).outcome is Outcome.ACCEPT


def test_no_duplicate_results():
    env = env_of("A : *, B : *")
    out = list(ps_search(stlc, env, T("A -> A"), SearchConfig(max_depth=6, max_results=8)))
    keys = [canon_key(t) for t in out]
    assert len(keys) == len(set(keys))


SMALL_GOALS = [
    (stlc, "A : *", "A -> A"),
    (stlc, "A : *", "A -> A -> A"),
    (stlc, "A : *, B : *", "A -> B -> A"),
    (stlc, "A : *, B : *", "A -> B -> B"),
    (stlc, "A : *, a : A", "A"),
    (stlc, "A : *", "*"),
    (sysF, "", "#"),
    (sysF, "A : *", "A -> A"),
    (sysF, "A : *, B : *", "*"),
    (sysF, "A : *, a : A, f : A -> A", "A"),
]


def test_bounded_completeness_matches_brute_force():
    for spec, env_text, goal in SMALL_GOALS:
        env = env_of(env_text)
        expected = {canon_key(t) for t in brute_terms(spec, env, T(goal), 4)}
        got = {canon_key(t) for t in ps_search(spec, env, T(goal), SearchConfig(max_depth=4))}
        assert got == expected, (env_text, goal)


def test_conversion_stability_under_goal_reduction():
    rng = random.Random(12321)
    env = env_of("A : *, B : *")
    goal = T(r"(\T:*. T -> T){ A :: nil }")
    term = T(r"\x:A. x")
    assert ps_check(sysF, env, term, goal)
    current = goal
    for _ in range(6):
        redexes = find_redexes(current, None or X_RULES + ("B",))
        if not redexes:
            break
        current = step(current, rng.choice(redexes))
        assert ps_check(sysF, env, term, current), current


def test_eta_long_bias_suppresses_head_choices_on_pi_goals():
    env = env_of("A : *, f : A -> A")
    # with the bias, only the expansion \x:A. ... is explored at the root
    out = list(ps_search(stlc, env, T("A -> A"),
                         SearchConfig(max_depth=5, max_results=4, eta_long_bias=True)))
    assert all(isinstance(t, Lam) for t in out)
    plain = list(ps_search(stlc, env, T("A -> A"),
                           SearchConfig(max_depth=5, max_results=8)))
    assert any(not isinstance(t, Lam) for t in plain)  # f itself inhabits it


def test_head_order_changes_the_stream_order():
    env = env_of("A : *, a : A, b : A")
    last = list(ps_search(stlc, env, T("A"), SearchConfig(max_depth=2, max_results=1)))
    first = list(ps_search(stlc, env, T("A"),
                           SearchConfig(max_depth=2, max_results=1,
                                        head_order="first-bound-first")))
    assert alpha_eq(last[0], var("b"))
    assert alpha_eq(first[0], var("a"))


def test_deep_conjunction_search_streams_the_paper_proof():
    env = env_of("A : *, B : *")
    target_nf = normalize_bx(T(PROOF_CONJ_COMM), 10_000)

    def hit(t):
        n = normalize_bx(t, 10_000)
        return alpha_eq(n, target_nf)

    results, explored = ps_search_stats(sysF, env, T(f"({CONJ}) -> ({CONJ_BA})"),
                                        SearchConfig(max_depth=12), stop_when=hit)
    assert any(hit(t) for t in results)
    assert len(results) <= 10
