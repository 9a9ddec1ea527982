"""Command line interface: normalize, translate, check, search, solve, serve."""
from __future__ import annotations

import os
import sys

import click

from . import bridge
from .enumeration import (
    GoalEnvironment,
    PeExhausted,
    PeFailure,
    Substitution,
    TermGoal,
    pe_solve,
)
from .grammar import ParseError, parse, parse_term, print_term
from .presets import PRESETS, get_spec
from .rewrite import Exhausted, normalize_bx, normalize_x
from .search import SearchConfig, _Search, check_search_inputs
from .session import parse_env
from .terms import MetaVarRegistry, env_domain_args, MetaTm, canon_key
from .typecheck import Outcome, check_term


def _load(value: str) -> str:
    """Arguments name either a file or a literal in the grammar."""
    if value and os.path.exists(value):
        with open(value, encoding="utf-8") as fh:
            return fh.read().strip()
    return value


@click.group()
def main():
    """Proof-search workbench for pure type sequent calculi."""
    # the solver holds suspended enumeration frames across its recursion
    sys.setrecursionlimit(100_000)


@main.command()
@click.argument("term")
@click.option("--system", type=click.Choice(["x", "bx"]), default="x",
              help="cut propagation only, or with the key step B")
@click.option("--fuel", default=10_000, show_default=True)
@click.option("--trace", is_flag=True, help="print each step as `rule path`")
@click.option("--spec", "spec_name", default="systemF", show_default=True)
@click.option("--compact", is_flag=True)
def normalize(term, system, fuel, trace, spec_name, compact):
    """Normalize a term or list."""
    spec = get_spec(spec_name)
    registry = MetaVarRegistry()
    try:
        t = parse(_load(term), set(spec.sorts), registry, auto_meta=True)
    except ParseError as e:
        raise click.ClickException(str(e))

    def emit(redex):
        path = ".".join(str(i) for i in redex.path) or "root"
        click.echo(f"{redex.rule} {path}")

    on_step = emit if trace else None
    if system == "x":
        out = normalize_x(t, on_step=on_step)
    else:
        out = normalize_bx(t, fuel, on_step=on_step)
        if isinstance(out, Exhausted):
            click.echo(f"exhausted after {fuel} steps; partial result:")
            out = out.partial
    click.echo(print_term(out, compact=compact))


@main.command()
@click.argument("term")
@click.option("--to", "target", type=click.Choice(["pts", "ptsc"]), required=True)
@click.option("--spec", "spec_name", default="systemF", show_default=True)
def translate(term, target, spec_name):
    """Translate between the sequent-style and lambda-style syntaxes."""
    spec = get_spec(spec_name)
    registry = MetaVarRegistry()
    src = _load(term)
    try:
        if target == "pts":
            t = parse(src, set(spec.sorts), registry, auto_meta=True)
            from .terms import Term as _Term

            if not isinstance(t, _Term):
                raise click.ClickException("only terms translate; lists need a head")
            click.echo(print_pts(bridge.encode(t)))
        else:
            t = parse_pts(src, set(spec.sorts), registry)
            click.echo(print_term(bridge.decode(t, registry)))
    except (ParseError, bridge.FragmentError) as e:
        raise click.ClickException(str(e))


def print_pts(t: bridge.PtsTerm) -> str:
    match t:
        case bridge.VarP(x):
            return x
        case bridge.SortP(s):
            return s
        case bridge.PiP(x, dom, body):
            if x in bridge.free_vars_pts(body):
                return f"({x}:{print_pts(dom)}) -> {print_pts(body)}"
            left = print_pts(dom)
            if isinstance(dom, (bridge.PiP, bridge.LamP)):
                left = f"({left})"
            return f"{left} -> {print_pts(body)}"
        case bridge.LamP(x, dom, body):
            return f"\\{x}:{_pts_atom(dom)}. {print_pts(body)}"
        case bridge.App(fn, arg):
            fs = print_pts(fn)
            if isinstance(fn, (bridge.LamP, bridge.PiP)):
                fs = f"({fs})"
            as_ = print_pts(arg)
            if isinstance(arg, (bridge.App, bridge.LamP, bridge.PiP)):
                as_ = f"({as_})"
            return f"{fs} {as_}"
    raise TypeError(f"not a lambda term: {t!r}")


def _pts_atom(t) -> str:
    s = print_pts(t)
    if isinstance(t, (bridge.LamP,)):
        return f"({s})"
    return s


class _PtsParser:
    """Var | SORT | (x:T)->U | \\x:T.t | t u, application left-associative."""

    def __init__(self, src, sorts, registry):
        from .grammar import _Parser

        self.inner = _Parser(src, frozenset(sorts), registry, auto_meta=False)
        self.sorts = sorts
        self.registry = registry

    def parse(self) -> bridge.PtsTerm:
        t = self.term()
        if self.inner.peek().kind != "eof":
            self.inner.fail("trailing input after term")
        return t

    def term(self) -> bridge.PtsTerm:
        left = self.app()
        if self.inner.peek().kind == "->":
            self.inner.next()
            x = bridge.fresh_var("_", bridge.free_vars_pts(left))
            return bridge.PiP(x, left, self.term())
        return left

    def app(self) -> bridge.PtsTerm:
        t = self.atom()
        while self.inner.peek().kind in ("ident", "(", "\\"):
            t = bridge.App(t, self.atom())
        return t

    def atom(self) -> bridge.PtsTerm:
        p = self.inner
        tok = p.peek()
        if tok.kind == "\\":
            p.next()
            x = p.ident()
            p.expect(":")
            annot = self.app()
            p.expect(".")
            return bridge.LamP(x, annot, self.term())
        if tok.kind == "(" and p.peek(1).kind == "ident" and p.peek(2).kind == ":":
            p.next()
            x = p.ident()
            p.expect(":")
            dom = self.term()
            p.expect(")")
            p.expect("->")
            return bridge.PiP(x, dom, self.term())
        if tok.kind == "(":
            p.next()
            t = self.term()
            p.expect(")")
            return t
        if tok.kind == "ident":
            name = p.next().text
            if name in self.sorts:
                return bridge.SortP(name)
            return bridge.VarP(name)
        p.fail(f"expected a lambda term, found {tok.text!r}")


def parse_pts(src, sorts, registry) -> bridge.PtsTerm:
    return _PtsParser(src, sorts, registry).parse()


@main.command()
@click.option("--spec", "spec_name", required=True, help="preset name or spec file")
@click.option("--env", default="", help="environment: `x : A, y : B` or a file")
@click.option("--term", required=True)
@click.option("--type", "type_", required=True)
@click.option("--fuel", default=10_000, show_default=True)
def check(spec_name, env, term, type_, fuel):
    """Type-check a term against a type."""
    spec = get_spec(spec_name)
    sorts = set(spec.sorts)
    try:
        environment = parse_env(_load(env), sorts)
        t = parse_term(_load(term), sorts)
        ty = parse_term(_load(type_), sorts)
    except ParseError as e:
        raise click.ClickException(str(e))
    res = check_term(spec, environment, t, ty, fuel)
    click.echo(res.outcome.value + (f": {res.reason}" if res.reason else ""))
    sys.exit(0 if res.outcome is Outcome.ACCEPT else 1)


@main.command()
@click.option("--spec", "spec_name", required=True)
@click.option("--env", default="")
@click.option("--goal", required=True)
@click.option("--depth", default=8, show_default=True)
@click.option("--max", "max_results", default=10, show_default=True)
@click.option("--eta-long-bias", is_flag=True)
@click.option("--head-order", type=click.Choice(["last-bound-first", "first-bound-first"]),
              default="last-bound-first", show_default=True)
@click.option("--compact", is_flag=True)
def search(spec_name, env, goal, depth, max_results, eta_long_bias, head_order, compact):
    """Stream quasi-normal inhabitants of a goal."""
    spec = get_spec(spec_name)
    sorts = set(spec.sorts)
    try:
        environment = parse_env(_load(env), sorts)
        g = parse_term(_load(goal), sorts)
    except ParseError as e:
        raise click.ClickException(str(e))
    cfg = SearchConfig(max_depth=depth, max_results=max_results,
                       eta_long_bias=eta_long_bias, head_order=head_order)
    try:
        check_search_inputs(spec, environment, g, cfg.conv_fuel)
    except ValueError as e:
        raise click.ClickException(str(e))
    engine = _Search(spec, cfg)
    found = 0
    seen = set()
    for t in engine.terms(environment, g, cfg.max_depth):
        key = canon_key(t)
        if key in seen:
            continue
        seen.add(key)
        click.echo(print_term(t, compact=compact))
        found += 1
        if found >= max_results:
            break
    click.echo(f"found={found} explored={engine.explored}")


@main.command()
@click.option("--spec", "spec_name", required=True)
@click.option("--env", default="")
@click.option("--goal", required=True)
@click.option("--strategy", type=click.Choice(["eager", "lazy"]), default="lazy",
              show_default=True)
@click.option("--budget", default=50_000, show_default=True)
@click.option("--trace", is_flag=True)
@click.option("--compact", is_flag=True)
def solve(spec_name, env, goal, strategy, budget, trace, compact):
    """Solve a goal through the meta-variable calculus; prints bindings."""
    spec = get_spec(spec_name)
    sorts = set(spec.sorts)
    registry = MetaVarRegistry()
    try:
        environment = parse_env(_load(env), sorts, registry)
        g = parse_term(_load(goal), sorts, registry)
    except ParseError as e:
        raise click.ClickException(str(e))
    root = registry.fresh("term", len(environment), hint="goal")
    sigma_env = GoalEnvironment((TermGoal(environment, root, g),))
    out = pe_solve(spec, sigma_env, registry, strategy=strategy, budget=budget)
    if isinstance(out, PeFailure):
        raise click.ClickException(f"no solution: {out.reason}")
    if isinstance(out, PeExhausted):
        click.echo("exhausted; residual goal environment:")
        for e in out.residual:
            click.echo(f"  {e}")
        sys.exit(2)
    assert isinstance(out, Substitution)
    for mv, (binders, body) in sorted(out.items(), key=lambda kv: kv[0].ident):
        prefix = f"<{' '.join(binders)}>. " if binders else ""
        click.echo(f"?{mv.name} := {prefix}{print_term(body, compact=compact)}")
    inst = out.get(root)
    if inst is not None:
        from .enumeration import apply_subst

        term = apply_subst(out, MetaTm(root, env_domain_args(environment)))
        click.echo(f"proof := {print_term(term, compact=compact)}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--state-dir", default=None, help="snapshot directory, one file per session")
@click.option("--static-dir", default=None, help="directory with the web frontend build")
def serve(port, host, state_dir, static_dir):
    """Serve the HTTP+JSON session API (and the web frontend, if built)."""
    import uvicorn

    from .service import SessionStore, create_app

    store = SessionStore(state_dir)
    n = store.load_snapshots()
    if n:
        click.echo(f"restored {n} session(s) from {state_dir}")
    if static_dir is None:
        guess = os.path.join(os.path.dirname(__file__), "..", "..", "frontend", "dist")
        if os.path.isdir(guess):
            static_dir = os.path.abspath(guess)
    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
def presets():
    """List the shipped parameter presets."""
    for name, spec in PRESETS.items():
        click.echo(f"{name}: sorts={list(spec.sorts)} axioms={list(spec.axioms)} "
                   f"rules={list(spec.rules)}")


if __name__ == "__main__":
    main()
