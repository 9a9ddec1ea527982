"""Concrete syntax.

Term  := SORT | "(" VAR ":" Term ")" "->" Term | Term "->" Term
       | "\\" VAR ":" Term "." Term
       | VAR | VAR "{" List "}" | "(" Term ")" "{" List "}"
       | "[" VAR ":=" Term ":" Term "]" Term
       | "?" IDENT "(" Term ("," Term)* ")" | "?" IDENT "()"
List  := "nil" | Term "::" List | List "++" List
       | "[" VAR ":=" Term ":" Term "]" List
       | "??" IDENT "(" Term ("," Term)* ")" | "??" IDENT "()"

``[x := P : A] M`` is the explicit substitution (cut). ``->`` is right
associative and binds loosest; lambda and cut bodies extend as far right as
possible; ``::`` binds tighter than ``++``. A bare variable is sugar for the
variable applied to ``nil``. Sort names come from the active sort set.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .terms import (
    NIL,
    Concat,
    Cons,
    Cut,
    CutL,
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
    TermOrList,
    VarApp,
    arrow,
    free_vars,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*|\*|\#)
  | (?P<op>\?\?|\?|::|:=|\+\+|->|[(){}\[\],.:\\])
    """,
    re.VERBOSE,
)

_RESERVED = {"nil"}


@dataclass
class Token:
    kind: str  # "ident" | an operator string | "eof"
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list:
    out = []
    line, col = 1, 1
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group(0)
        if m.lastgroup == "ident":
            out.append(Token("ident", text, line, col))
        elif m.lastgroup == "op":
            out.append(Token(text, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, src: str, sorts: frozenset, registry: Optional[MetaVarRegistry], auto_meta: bool):
        self.toks = _tokenize(src)
        self.pos = 0
        self.sorts = sorts
        self.registry = registry
        self.auto_meta = auto_meta

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok

    def fail(self, msg: str):
        tok = self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def ident(self) -> str:
        tok = self.expect("ident")
        if tok.text in _RESERVED:
            raise ParseError(f"{tok.text!r} is reserved", tok.line, tok.col)
        return tok.text

    # -- terms ---------------------------------------------------------

    def term(self) -> Term:
        left = self.term_noarrow()
        if self.peek().kind == "->":
            self.next()
            return arrow(left, self.term())
        return left

    def term_noarrow(self) -> Term:
        tok = self.peek()
        if tok.kind == "\\":
            self.next()
            x = self.ident()
            self.expect(":")
            annot = self.term_noarrow_tight()
            self.expect(".")
            return Lam(x, annot, self.term())
        if tok.kind == "[":
            annot, payload, x = self.cut_prefix()
            return Cut(annot, payload, x, self.term())
        if tok.kind == "(" and self.peek(1).kind == "ident" and self.peek(2).kind == ":":
            self.next()
            x = self.ident()
            self.expect(":")
            dom = self.term()
            self.expect(")")
            self.expect("->")
            return Pi(x, dom, self.term())
        return self.atom()

    def term_noarrow_tight(self) -> Term:
        # lambda annotations: arrows allowed, but "." must stay visible
        tok = self.peek()
        if tok.kind == "[":
            annot, payload, x = self.cut_prefix()
            return Cut(annot, payload, x, self.term_noarrow_tight())
        if tok.kind == "(" and self.peek(1).kind == "ident" and self.peek(2).kind == ":":
            self.next()
            x = self.ident()
            self.expect(":")
            dom = self.term()
            self.expect(")")
            self.expect("->")
            return Pi(x, dom, self.term_noarrow_tight())
        left = self.atom()
        if self.peek().kind == "->":
            self.next()
            return arrow(left, self.term_noarrow_tight())
        return left

    def cut_prefix(self):
        self.expect("[")
        x = self.ident()
        self.expect(":=")
        payload = self.term()
        self.expect(":")
        annot = self.term()
        self.expect("]")
        return annot, payload, x

    def atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "?":
            self.next()
            return self.meta("term")
        if tok.kind == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return self.app_suffix(inner)
        if tok.kind == "ident":
            name = self.next().text
            if name == "nil":
                self.fail("'nil' is a list, not a term")
            if name in self.sorts:
                return SortTm(name)
            if self.peek().kind == "{":
                self.next()
                args = self.list_term()
                self.expect("}")
                return self.app_suffix(VarApp(name, args))
            return VarApp(name, NIL)
        self.fail(f"expected a term, found {tok.text or 'end of input'!r}")

    def app_suffix(self, head: Term) -> Term:
        while self.peek().kind == "{":
            self.next()
            args = self.list_term()
            self.expect("}")
            head = TermApp(head, args)
        return head

    def meta(self, kind: str):
        name = self.ident()
        self.expect("(")
        args = []
        if self.peek().kind != ")":
            args.append(self.term())
            while self.peek().kind == ",":
                self.next()
                args.append(self.term())
        self.expect(")")
        if self.registry is None:
            self.fail("meta-variables need a registry")
        mv = self.registry.lookup(name)
        if mv is None:
            if not self.auto_meta:
                self.fail(f"unknown meta-variable {name!r}")
            mv = self.registry.create(name, kind, len(args))
        if mv.kind != kind:
            self.fail(f"meta-variable {name!r} is a {mv.kind} meta-variable")
        if mv.arity != len(args):
            self.fail(f"meta-variable {name!r} expects {mv.arity} arguments, got {len(args)}")
        ctor = MetaTm if kind == "term" else MetaLs
        return ctor(mv, tuple(args))

    # -- lists ---------------------------------------------------------

    def list_term(self) -> ListTerm:
        left = self.list_cons()
        while self.peek().kind == "++":
            self.next()
            left = Concat(left, self.list_cons())
        return left

    def list_cons(self) -> ListTerm:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "nil":
            self.next()
            return NIL
        if tok.kind == "??":
            self.next()
            return self.meta("list")
        if tok.kind == "[":
            annot, payload, x = self.cut_prefix()
            return CutL(annot, payload, x, self.list_term())
        if tok.kind == "(" and self._paren_is_list():
            self.next()
            inner = self.list_term()
            self.expect(")")
            if self.peek().kind == "::":
                self.fail("a list cannot be a '::' head")
            return inner
        if tok.kind == "(":
            # ambiguous: a cons head or a parenthesized list; try the head
            save = self.pos
            try:
                head = self.term()
                self.expect("::")
                return Cons(head, self.list_term())
            except ParseError:
                self.pos = save
            self.next()
            inner = self.list_term()
            self.expect(")")
            if self.peek().kind == "::":
                self.fail("a list cannot be a '::' head")
            return inner
        head = self.term()
        self.expect("::")
        # the tail extends maximally: M :: l ++ l' reads M :: (l ++ l')
        return Cons(head, self.list_term())

    def _paren_is_list(self) -> bool:
        # disambiguate "(l ++ l')" and "(nil)" from a parenthesized term head
        depth = 0
        i = self.pos
        while i < len(self.toks):
            k = self.toks[i].kind
            if k in ("(", "{", "["):
                depth += 1
            elif k in (")", "}", "]"):
                depth -= 1
                if depth == 0:
                    break
            elif depth == 1 and k in ("++", "::"):
                return True
            elif depth == 1 and k == "ident" and self.toks[i].text == "nil":
                return True
            elif k == "eof":
                break
            i += 1
        return False


def parse_term(src: str, sorts, registry: Optional[MetaVarRegistry] = None, auto_meta: bool = False) -> Term:
    p = _Parser(src, frozenset(sorts), registry, auto_meta)
    t = p.term()
    if p.peek().kind != "eof":
        p.fail("trailing input after term")
    return t


def parse_list(src: str, sorts, registry: Optional[MetaVarRegistry] = None, auto_meta: bool = False) -> ListTerm:
    p = _Parser(src, frozenset(sorts), registry, auto_meta)
    l = p.list_term()
    if p.peek().kind != "eof":
        p.fail("trailing input after list")
    return l


def parse(src: str, sorts, registry: Optional[MetaVarRegistry] = None, auto_meta: bool = False) -> TermOrList:
    """Parse either category: tries the term grammar first, then lists."""
    try:
        return parse_term(src, sorts, registry, auto_meta)
    except ParseError as term_err:
        try:
            return parse_list(src, sorts, registry, auto_meta)
        except ParseError:
            raise term_err


# -- printing ------------------------------------------------------------


def _simplify_compact(t):
    # display shortcut: drop a cut whose variable is not free in its body
    match t:
        case Cut(_, _, x, body) if x not in free_vars(body):
            return _simplify_compact(body)
        case CutL(_, _, x, body) if x not in free_vars(body):
            return _simplify_compact(body)
    return t


def _print_term(t: Term, compact: bool) -> str:
    if compact:
        t = _simplify_compact(t)
    match t:
        case SortTm(s):
            return s
        case Pi(x, dom, body):
            if x not in free_vars(body):
                return f"{_print_arrow_left(dom, compact)} -> {_print_term(body, compact)}"
            return f"({x}:{_print_term(dom, compact)}) -> {_print_term(body, compact)}"
        case Lam(x, annot, body):
            if compact:
                return f"\\{x}. {_print_term(body, compact)}"
            return f"\\{x}:{_print_annot(annot, compact)}. {_print_term(body, compact)}"
        case VarApp(x, args):
            if isinstance(args, Nil):
                return x if compact else f"{x}{{nil}}"
            return f"{x}{{{_print_list(args, compact)}}}"
        case TermApp(head, args):
            return f"({_print_term(head, compact)}){{{_print_list(args, compact)}}}"
        case Cut(annot, payload, x, body):
            return (
                f"[{x} := {_print_term(payload, compact)} : {_print_term(annot, compact)}] "
                f"{_print_term(body, compact)}"
            )
        case MetaTm(mv, args):
            inner = ", ".join(_print_term(a, compact) for a in args)
            return f"?{mv.name}({inner})"
    raise TypeError(f"not a term: {t!r}")


def _print_annot(t: Term, compact: bool) -> str:
    # lambda annotations: parenthesize anything that could swallow the dot
    s = _print_term(t, compact)
    if isinstance(t, (SortTm, VarApp, TermApp, MetaTm)):
        return s
    return f"({s})"


def _print_arrow_left(t: Term, compact: bool) -> str:
    s = _print_term(t, compact)
    if isinstance(t, (Pi, Lam, Cut)):
        return f"({s})"
    return s


def _print_list(l: ListTerm, compact: bool) -> str:
    if compact:
        l = _simplify_compact(l)
    match l:
        case Nil():
            return "nil"
        case Cons(head, tail):
            hs = _print_term(head, compact)
            if isinstance(head, (Lam, Cut, Pi)):
                hs = f"({hs})"
            return f"{hs} :: {_print_list(tail, compact)}"
        case Concat(left, right):
            ls = _print_list(left, compact)
            if isinstance(left, (Cons, CutL)):
                ls = f"({ls})"
            rs = _print_list(right, compact)
            if isinstance(right, (Cons, CutL, Concat)):
                rs = f"({rs})"
            return f"{ls} ++ {rs}"
        case CutL(annot, payload, x, body):
            return (
                f"[{x} := {_print_term(payload, compact)} : {_print_term(annot, compact)}] "
                f"{_print_list(body, compact)}"
            )
        case MetaLs(mv, args):
            inner = ", ".join(_print_term(a, compact) for a in args)
            return f"??{mv.name}({inner})"
    raise TypeError(f"not a list: {l!r}")


def print_term(t: TermOrList, compact: bool = False) -> str:
    if isinstance(t, Term):
        return _print_term(t, compact)
    return _print_list(t, compact)
