"""Reader and printer for the .tlp program format.

A program interleaves declarations and clauses::

    kind list/1.                     % type constructor
    func nil : list(U).              % constant
    func cons(U, list(U)) : list(U). % function with argument types
    pred app(list(U), list(U), list(U)).
    partition app(h, h, h).          % optional h/b position annotation

    app([], Ys, Ys).
    app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).

Identifiers starting with an uppercase letter are variables (in terms) or
parameters (in types).  `[a,b|T]` is sugar for cons/nil, infix `=` is the
built-in equality predicate, and infix `-` is the built-in integer
subtraction `minus`.  `%` starts a comment.  Declarations must appear
before their first use.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    CONS, EQ, GO, INT, MINUS, NIL,
    Atom, Clause, Fun, FuncDecl, Param, PredDecl, Program, Query, Signature,
    TCon, TermSubst, Type, TypeSubst, Var, is_int_literal, pars,
)

RESERVED = {"kind", "func", "pred", "partition", "true"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<arrow>:-)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<punct>[().\[\],|=\-/:])
""", re.VERBOSE)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


@dataclass
class Diagnostics:
    entries: list[Diagnostic] = field(default_factory=list)

    def error(self, line: int, col: int, message: str) -> None:
        self.entries.append(Diagnostic("error", line, col, message))

    @property
    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.entries)

    def __str__(self) -> str:
        return "\n".join(str(d) for d in self.entries)


class ParseError(Exception):
    def __init__(self, diagnostics: Diagnostics):
        self.diagnostics = diagnostics
        super().__init__(str(diagnostics))


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | var | int | punct | arrow | eof
    text: str
    line: int
    col: int


def _tokenize(text: str, diags: Diagnostics) -> list[_Tok]:
    toks = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            diags.error(line, col, f"unexpected character {text[pos]!r}")
            pos += 1
            col += 1
            continue
        kind = m.lastgroup
        raw = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, raw, line, col))
        nl = raw.count("\n")
        if nl:
            line += nl
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], diags: Diagnostics, sig: Signature):
        self.toks = toks
        self.i = 0
        self.diags = diags
        self.sig = sig

    # -- token plumbing

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def eat(self, kind: str, text: str | None = None) -> _Tok | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if self.at(kind, text):
            return self.next()
        want = text or kind
        raise _Bail(t, f"expected {want!r}, found {t.text!r}" if t.kind != "eof"
                    else f"expected {want!r}, found end of input")

    def skip_to_dot(self) -> None:
        while not self.at("eof"):
            if self.next().text == ".":
                return

    # -- types

    def parse_type(self) -> Type:
        t = self.peek()
        if t.kind == "var":
            self.next()
            return Param(t.text)
        if t.kind == "ident":
            self.next()
            args: list[Type] = []
            if self.eat("punct", "("):
                args.append(self.parse_type())
                while self.eat("punct", ","):
                    args.append(self.parse_type())
                self.expect("punct", ")")
            return TCon(t.text, tuple(args))
        raise _Bail(t, f"expected a type, found {t.text!r}")

    def check_type_decl(self, ty: Type, tok: _Tok) -> None:
        if isinstance(ty, Param):
            return
        arity = self.sig.kinds.get(ty.name)
        if arity is None:
            self.diags.error(tok.line, tok.col, f"constructor {ty.name} not declared")
        elif arity != len(ty.args):
            self.diags.error(tok.line, tok.col,
                             f"constructor {ty.name}/{arity} used with {len(ty.args)} arguments")
        for a in ty.args:
            self.check_type_decl(a, tok)

    # -- declarations

    def parse_kind(self) -> None:
        self.expect("ident", "kind")
        name = self.expect("ident")
        self.expect("punct", "/")
        arity = self.expect("int")
        self.expect("punct", ".")
        try:
            self.sig.declare_kind(name.text, int(arity.text))
        except ValueError as e:
            self.diags.error(name.line, name.col, str(e))

    def parse_func(self) -> None:
        self.expect("ident", "func")
        name = self.expect("ident")
        args: list[Type] = []
        if self.eat("punct", "("):
            args.append(self.parse_type())
            while self.eat("punct", ","):
                args.append(self.parse_type())
            self.expect("punct", ")")
        self.expect("punct", ":")
        result = self.parse_type()
        self.expect("punct", ".")
        for ty in args + [result]:
            self.check_type_decl(ty, name)
        extra = pars(tuple(args)) - pars(result)
        if extra:
            names = ", ".join(sorted(p.printed() for p in extra))
            self.diags.error(name.line, name.col,
                             f"func {name.text} is not transparent: {names} missing from result type")
        if name.text in RESERVED:
            self.diags.error(name.line, name.col, f"{name.text} is reserved")
            return
        try:
            self.sig.declare_func(FuncDecl(name.text, tuple(args), result))
        except ValueError as e:
            self.diags.error(name.line, name.col, str(e))

    def parse_pred(self) -> None:
        self.expect("ident", "pred")
        name = self.expect("ident")
        args: list[Type] = []
        if self.eat("punct", "("):
            args.append(self.parse_type())
            while self.eat("punct", ","):
                args.append(self.parse_type())
            self.expect("punct", ")")
        self.expect("punct", ".")
        for ty in args:
            self.check_type_decl(ty, name)
        if name.text in RESERVED:
            self.diags.error(name.line, name.col, f"{name.text} is reserved")
            return
        try:
            self.sig.declare_pred(PredDecl(name.text, tuple(args)))
        except ValueError as e:
            self.diags.error(name.line, name.col, str(e))

    def parse_partition(self, partitions: dict[str, tuple[str, ...]]) -> None:
        self.expect("ident", "partition")
        name = self.expect("ident")
        marks: list[str] = []
        if self.eat("punct", "("):
            marks.append(self.expect("ident").text)
            while self.eat("punct", ","):
                marks.append(self.expect("ident").text)
            self.expect("punct", ")")
        self.expect("punct", ".")
        decl = self.sig.pred_decl(name.text)
        if decl is None or name.text not in self.sig.preds:
            self.diags.error(name.line, name.col, f"partition for undeclared predicate {name.text}")
            return
        if len(marks) != len(decl.arg_types):
            self.diags.error(name.line, name.col,
                             f"partition for {name.text} has {len(marks)} marks, expected {len(decl.arg_types)}")
            return
        bad = [m for m in marks if m not in ("h", "b")]
        if bad:
            self.diags.error(name.line, name.col, f"partition marks must be h or b, got {bad[0]}")
            return
        if name.text in partitions:
            self.diags.error(name.line, name.col, f"partition for {name.text} given twice")
            return
        partitions[name.text] = tuple(marks)

    # -- terms

    def parse_term(self) -> Term:
        left = self.parse_primary()
        while self.at("punct", "-"):
            tok = self.next()
            right = self.parse_primary()
            self.check_minus(tok)
            left = Fun(MINUS, (left, right))
        return left

    def check_minus(self, tok: _Tok) -> None:
        if not self.sig.has_int():
            self.diags.error(tok.line, tok.col, "integer subtraction requires kind int/0")

    def parse_primary(self) -> Term:
        t = self.peek()
        if t.kind == "var":
            self.next()
            return Var(t.text)
        if t.kind == "int":
            self.next()
            self.check_int(t)
            return Fun(t.text)
        if t.text == "-":
            self.next()
            n = self.expect("int")
            self.check_int(n)
            return Fun(f"-{n.text}")
        if t.text == "(":
            self.next()
            inner = self.parse_term()
            self.expect("punct", ")")
            return inner
        if t.text == "[":
            return self.parse_list()
        if t.kind == "ident":
            self.next()
            args: list[Term] = []
            if self.eat("punct", "("):
                args.append(self.parse_term())
                while self.eat("punct", ","):
                    args.append(self.parse_term())
                self.expect("punct", ")")
            return Fun(t.text, tuple(args))
        raise _Bail(t, f"expected a term, found {t.text!r}")

    def parse_list(self) -> Term:
        self.expect("punct", "[")
        if self.eat("punct", "]"):
            self.check_func_name(NIL, self.toks[self.i - 1])
            return Fun(NIL)
        items = [self.parse_term()]
        while self.eat("punct", ","):
            items.append(self.parse_term())
        tail: Term = Fun(NIL)
        if self.eat("punct", "|"):
            tail = self.parse_term()
        else:
            self.check_func_name(NIL, self.peek())
        close = self.expect("punct", "]")
        self.check_func_name(CONS, close)
        for item in reversed(items):
            tail = Fun(CONS, (item, tail))
        return tail

    def check_int(self, tok: _Tok) -> None:
        if not self.sig.has_int():
            self.diags.error(tok.line, tok.col, "integer literals require kind int/0")

    def check_func_name(self, name: str, tok: _Tok) -> None:
        if self.sig.func_decl(name) is None:
            self.diags.error(tok.line, tok.col, f"list syntax requires func {name} to be declared")

    def validate_term(self, t: Term, tok: _Tok) -> None:
        """Function symbols are only identifiable once the atom context is
        known, so terms are validated after atom construction."""
        if isinstance(t, Var):
            return
        if not (is_int_literal(t.name) or t.name == MINUS):
            decl = self.sig.func_decl(t.name)
            if decl is None:
                self.diags.error(tok.line, tok.col, f"function {t.name} not declared")
            elif len(decl.arg_types) != len(t.args):
                self.diags.error(tok.line, tok.col,
                                 f"function {t.name}/{len(decl.arg_types)} used with {len(t.args)} arguments")
        for a in t.args:
            self.validate_term(a, tok)

    # -- atoms and clauses

    def parse_body_atom(self) -> Atom:
        start = self.peek()
        left = self.parse_term()
        if self.eat("punct", "="):
            right = self.parse_term()
            self.validate_term(left, start)
            self.validate_term(right, start)
            return Atom(EQ, (left, right))
        if isinstance(left, Fun) and not is_int_literal(left.name) and left.name != MINUS:
            return self.to_atom(left, start)
        raise _Bail(start, "a body atom must be a predicate call or an equation")

    def to_atom(self, f: Fun, tok: _Tok) -> Atom:
        decl = self.sig.pred_decl(f.name)
        if decl is None:
            self.diags.error(tok.line, tok.col, f"predicate {f.name} not declared")
        elif len(decl.arg_types) != len(f.args):
            self.diags.error(tok.line, tok.col,
                             f"predicate {f.name}/{len(decl.arg_types)} used with {len(f.args)} arguments")
        for a in f.args:
            self.validate_term(a, tok)
        return Atom(f.name, f.args)

    def parse_head(self) -> Atom:
        tok = self.expect("ident")
        args: list[Term] = []
        if self.eat("punct", "("):
            args.append(self.parse_term())
            while self.eat("punct", ","):
                args.append(self.parse_term())
            self.expect("punct", ")")
        return self.to_atom(Fun(tok.text, tuple(args)), tok)

    def parse_conj(self) -> Query:
        if self.at("ident", "true"):
            self.next()
            return ()
        atoms = [self.parse_body_atom()]
        while self.eat("punct", ","):
            atoms.append(self.parse_body_atom())
        return tuple(atoms)

    def parse_clause(self) -> Clause:
        head = self.parse_head()
        body: Query = ()
        if self.eat("arrow"):
            body = self.parse_conj()
        self.expect("punct", ".")
        return Clause(head, body)


class _Bail(Exception):
    """Internal: abort the current item and resynchronise at the next dot."""

    def __init__(self, tok: _Tok, message: str):
        self.tok = tok
        self.message = message


def parse_program(text: str) -> Program:
    """Parse a .tlp source text.  Raises ParseError carrying Diagnostics
    when the text (or its signature) is ill-formed."""
    diags = Diagnostics()
    toks = _tokenize(text, diags)
    sig = Signature()
    partitions: dict[str, tuple[str, ...]] = {}
    clauses: list[Clause] = []
    p = _Parser(toks, diags, sig)
    while not p.at("eof"):
        try:
            if p.at("ident", "kind"):
                p.parse_kind()
            elif p.at("ident", "func"):
                p.parse_func()
            elif p.at("ident", "pred"):
                p.parse_pred()
            elif p.at("ident", "partition"):
                p.parse_partition(partitions)
            else:
                clauses.append(p.parse_clause())
        except _Bail as b:
            diags.error(b.tok.line, b.tok.col, b.message)
            p.skip_to_dot()
    if diags.has_errors:
        raise ParseError(diags)
    return Program(sig, tuple(clauses), partitions)


def parse_query(text: str, sig: Signature) -> Query:
    """Parse a query (a comma-separated conjunction, or `true`)."""
    diags = Diagnostics()
    toks = _tokenize(text, diags)
    p = _Parser(toks, diags, sig)
    try:
        q = p.parse_conj()
        p.expect("eof")
    except _Bail as b:
        diags.error(b.tok.line, b.tok.col, b.message)
        q = ()
    if diags.has_errors:
        raise ParseError(diags)
    return q


def parse_term(text: str, sig: Signature) -> Term:
    """Parse a single term against an existing signature."""
    diags = Diagnostics()
    toks = _tokenize(text, diags)
    p = _Parser(toks, diags, sig)
    try:
        t = p.parse_term()
        p.expect("eof")
    except _Bail as b:
        diags.error(b.tok.line, b.tok.col, b.message)
        t = None
    if diags.has_errors or t is None:
        raise ParseError(diags)
    return t


def parse_clause(text: str, sig: Signature) -> Clause:
    """Parse a single clause against an existing signature."""
    diags = Diagnostics()
    toks = _tokenize(text, diags)
    p = _Parser(toks, diags, sig)
    try:
        c = p.parse_clause()
        p.expect("eof")
    except _Bail as b:
        diags.error(b.tok.line, b.tok.col, b.message)
        c = None
    if diags.has_errors or c is None:
        raise ParseError(diags)
    return c


# ---------------------------------------------------------------- printing

def _render_term(t) -> str:
    if isinstance(t, Var):
        return t.printed()
    if isinstance(t, Fun):
        if t.name == NIL and not t.args:
            return "[]"
        if t.name == CONS and len(t.args) == 2:
            items = []
            cur = t
            while isinstance(cur, Fun) and cur.name == CONS and len(cur.args) == 2:
                items.append(cur.args[0])
                cur = cur.args[1]
            inner = ", ".join(_render_term(x) for x in items)
            if isinstance(cur, Fun) and cur.name == NIL and not cur.args:
                return f"[{inner}]"
            return f"[{inner}|{_render_term(cur)}]"
        if t.name == MINUS and len(t.args) == 2:
            left, right = t.args
            rs = _render_term(right)
            if isinstance(right, Fun) and (right.name == MINUS or right.name.startswith("-")):
                rs = f"({rs})"
            return f"{_render_term(left)}-{rs}"
        if not t.args:
            return t.name
        return f"{t.name}({', '.join(_render_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


def _render_type(t: Type) -> str:
    if isinstance(t, Param):
        return t.printed()
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(_render_type(a) for a in t.args)})"


def render_types(types) -> str:
    """A tuple of types, e.g. `(list(A), list(A))`."""
    return f"({', '.join(_render_type(t) for t in types)})"


def _render_atom(a: Atom) -> str:
    if a.pred == EQ and len(a.args) == 2:
        return f"{_render_term(a.args[0])} = {_render_term(a.args[1])}"
    if not a.args:
        return a.pred
    return f"{a.pred}({', '.join(_render_term(x) for x in a.args)})"


def _render_query(q) -> str:
    if not q:
        return "true"
    return ", ".join(_render_atom(a) for a in q)


def _render_clause(c: Clause) -> str:
    if not c.body:
        return f"{_render_atom(c.head)}."
    return f"{_render_atom(c.head)} :- {_render_query(c.body)}."


def _render_program(p: Program) -> str:
    lines = []
    for name, arity in p.signature.kinds.items():
        lines.append(f"kind {name}/{arity}.")
    for f in p.signature.funcs.values():
        if f.arg_types:
            lines.append(f"func {f.name}({', '.join(_render_type(t) for t in f.arg_types)}) : {_render_type(f.result)}.")
        else:
            lines.append(f"func {f.name} : {_render_type(f.result)}.")
    for pd in p.signature.preds.values():
        if pd.arg_types:
            lines.append(f"pred {pd.name}({', '.join(_render_type(t) for t in pd.arg_types)}).")
        else:
            lines.append(f"pred {pd.name}.")
    for name, marks in p.partitions.items():
        lines.append(f"partition {name}({', '.join(marks)}).")
    if lines:
        lines.append("")
    for c in p.clauses:
        lines.append(_render_clause(c))
    return "\n".join(lines) + "\n"


def render(obj) -> str:
    """Source text for any syntax object.  Parsing the result of rendering
    a parsed object gives the object back."""
    if isinstance(obj, (Var, Fun)):
        return _render_term(obj)
    if isinstance(obj, (Param, TCon)):
        return _render_type(obj)
    if isinstance(obj, Atom):
        return _render_atom(obj)
    if isinstance(obj, Clause):
        return _render_clause(obj)
    if isinstance(obj, Program):
        return _render_program(obj)
    if isinstance(obj, TermSubst):
        return "{" + ", ".join(f"{v.printed()}/{_render_term(t)}"
                               for v, t in sorted(obj.items(), key=lambda kv: (kv[0].name, kv[0].idx))) + "}"
    if isinstance(obj, TypeSubst):
        return "{" + ", ".join(f"{p.printed()}/{_render_type(t)}"
                               for p, t in sorted(obj.items(), key=lambda kv: (kv[0].name, kv[0].idx))) + "}"
    if isinstance(obj, tuple):
        if obj and all(isinstance(x, (Param, TCon)) for x in obj):
            return render_types(obj)
        return _render_query(obj)
    raise TypeError(f"cannot render {obj!r}")
