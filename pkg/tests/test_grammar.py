import random

import pytest
from hypothesis import given, settings, strategies as st

from ptsc.grammar import ParseError, parse, parse_list, parse_term, print_term
from ptsc.terms import Cons, MetaVarRegistry, NIL, SortTm, VarApp, alpha_eq, var

from helpers import make_registry, random_term_or_list

SORTS = {"*", "#"}


def test_lambda_sugar():
    t = parse_term(r"\x:*. x", SORTS)
    assert print_term(t) == r"\x:*. x{nil}"


def test_meta_sugar():
    reg = MetaVarRegistry()
    reg.create("a", "term", 2)
    t = parse_term("?a(x, y)", SORTS, reg)
    assert print_term(t) == "?a(x{nil}, y{nil})"


def test_variable_application():
    t = parse_term("y{ M :: nil }", SORTS)
    assert t == VarApp("y", Cons(var("M"), NIL))


def test_arrow_is_pi_with_fresh_binder():
    t = parse_term("A -> B", SORTS)
    assert t.var not in ("A", "B")
    assert print_term(t) == "A{nil} -> B{nil}"


def test_cut_syntax_payload_variable_annotation():
    t = parse_term("[x := P : G] x{nil}", SORTS)
    assert t.var == "x"
    assert print_term(t.payload) == "P{nil}"
    assert print_term(t.annot) == "G{nil}"


def test_unknown_meta_is_an_error():
    with pytest.raises(ParseError):
        parse_term("?nope(x)", SORTS, MetaVarRegistry())


def test_meta_arity_mismatch_is_an_error():
    reg = MetaVarRegistry()
    reg.create("a", "term", 2)
    with pytest.raises(ParseError):
        parse_term("?a(x)", SORTS, reg)


def test_list_meta_marker_distinguishes_category():
    reg = MetaVarRegistry()
    reg.create("b", "list", 1)
    l = parse_list("??b(x)", SORTS, reg)
    assert print_term(l) == "??b(x{nil})"
    with pytest.raises(ParseError):
        parse_term("?b(x)", SORTS, reg)


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as e:
        parse_term("\\x:*.", SORTS)
    assert e.value.line == 1


def test_compact_printing():
    assert print_term(parse_term("x", SORTS), compact=True) == "x"
    assert print_term(parse_term("x", SORTS)) == "x{nil}"
    assert print_term(NIL) == "nil"
    t = parse_term(r"\x:*. x", SORTS)
    assert print_term(t, compact=True) == r"\x. x"
    dropped = parse_term("[x := P : A] y{nil}", SORTS)
    assert print_term(dropped, compact=True) == "y"


def test_parse_dispatches_between_categories():
    assert isinstance(parse("nil", SORTS), type(NIL))
    assert isinstance(parse("x", SORTS), VarApp)
    assert print_term(parse("x :: nil", SORTS)) == "x{nil} :: nil"


def test_sorts_come_from_the_active_sort_set():
    assert parse_term("*", SORTS) == SortTm("*")
    assert isinstance(parse_term("star", SORTS), VarApp)
    assert parse_term("star", {"star"}) == SortTm("star")


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_round_trip_parse_print(seed):
    rng = random.Random(seed)
    reg = make_registry()
    t = random_term_or_list(rng, rng.randint(0, 5), reg)
    text = print_term(t)
    back = parse(text, SORTS, reg)
    assert alpha_eq(t, back), text
    # printing is stable across one round trip
    assert print_term(back) == text
