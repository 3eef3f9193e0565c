"""Syntax of typed logic programs.

Types are terms built from declared constructors and parameters; program
terms are built from declared functions and variables.  Both levels share
the same substitution machinery.  Variables and parameters carry a numeric
index so machine-made copies never collide with source names (index 0).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .reports import CheckReport, Finding

GO = "go"
EQ = "="
MINUS = "minus"
INT = "int"
NIL = "nil"
CONS = "cons"

_INT_LITERAL = re.compile(r"-?\d+\Z")


def is_int_literal(name: str) -> bool:
    return bool(_INT_LITERAL.match(name))


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class Param:
    """Type parameter (type-level variable)."""
    name: str
    idx: int = 0

    def printed(self) -> str:
        return self.name if self.idx == 0 else f"{self.name}_{self.idx}"

    def __repr__(self) -> str:
        return self.printed()


@dataclass(frozen=True)
class TCon:
    """Constructor application, e.g. list(int)."""
    name: str
    args: tuple["Type", ...] = ()

    def __repr__(self) -> str:
        from .parser import render
        return render(self)


Type = Union[Param, TCon]

INT_TYPE = TCon(INT)


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str
    idx: int = 0

    def printed(self) -> str:
        return self.name if self.idx == 0 else f"{self.name}_{self.idx}"

    def __repr__(self) -> str:
        return self.printed()


@dataclass(frozen=True)
class Fun:
    """Function application.  Integer literals are 0-ary functions whose
    name is the decimal spelling."""
    name: str
    args: tuple["Term", ...] = ()

    def __repr__(self) -> str:
        from .parser import render
        return render(self)


Term = Union[Var, Fun]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __repr__(self) -> str:
        from .parser import render
        return render(self)


Query = tuple[Atom, ...]


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: Query = ()

    def atoms(self) -> tuple[Atom, ...]:
        return (self.head,) + self.body

    def __repr__(self) -> str:
        from .parser import render
        return render(self)


# ------------------------------------------------------- fresh names

class NameSource:
    """Monotone counter handing out variables/parameters never seen before."""

    def __init__(self, start: int = 1):
        self._next = start

    def _tick(self) -> int:
        n = self._next
        self._next += 1
        return n

    def fresh_var(self, base: str = "X") -> Var:
        return Var(base, self._tick())

    def fresh_param(self, base: str = "U") -> Param:
        return Param(base, self._tick())


# ------------------------------------------------------- walkers

def pars_in_order(obj) -> list[Param]:
    """Parameters of a type-level object, first occurrence first."""
    seen: list[Param] = []

    def walk(o):
        if isinstance(o, Param):
            if o not in seen:
                seen.append(o)
        elif isinstance(o, TCon):
            for a in o.args:
                walk(a)
        elif isinstance(o, tuple):
            for x in o:
                walk(x)
        elif isinstance(o, Mapping):
            for v in o.values():
                walk(v)
        elif o is None:
            pass
        else:
            raise TypeError(f"no parameters in {o!r}")

    walk(obj)
    return seen


def pars(obj) -> set[Param]:
    return set(pars_in_order(obj))


def vars_in_order(obj) -> list[Var]:
    """Variables of a term-level object, first occurrence first."""
    seen: list[Var] = []

    def walk(o):
        if isinstance(o, Var):
            if o not in seen:
                seen.append(o)
        elif isinstance(o, Fun):
            for a in o.args:
                walk(a)
        elif isinstance(o, Atom):
            for a in o.args:
                walk(a)
        elif isinstance(o, Clause):
            walk(o.head)
            for a in o.body:
                walk(a)
        elif isinstance(o, tuple):
            for x in o:
                walk(x)
        elif isinstance(o, Mapping):
            for v in o.values():
                walk(v)
        elif o is None:
            pass
        else:
            raise TypeError(f"no variables in {o!r}")

    walk(obj)
    return seen


def vars_of(obj) -> set[Var]:
    return set(vars_in_order(obj))


# ------------------------------------------------------- substitutions

def apply_type_subst(obj, theta: Mapping[Param, Type]):
    """Apply a parameter substitution to a Type, tuple, or mapping of types."""
    if isinstance(obj, Param):
        return theta.get(obj, obj)
    if isinstance(obj, TCon):
        return TCon(obj.name, tuple(apply_type_subst(a, theta) for a in obj.args))
    if isinstance(obj, tuple):
        return tuple(apply_type_subst(x, theta) for x in obj)
    if isinstance(obj, Mapping):
        return {k: apply_type_subst(v, theta) for k, v in obj.items()}
    raise TypeError(f"cannot substitute in {obj!r}")


def apply_term_subst(obj, theta: Mapping[Var, Term]):
    """Apply a variable substitution to a Term, Atom, Query, or Clause."""
    if isinstance(obj, Var):
        return theta.get(obj, obj)
    if isinstance(obj, Fun):
        return Fun(obj.name, tuple(apply_term_subst(a, theta) for a in obj.args))
    if isinstance(obj, Atom):
        return Atom(obj.pred, tuple(apply_term_subst(a, theta) for a in obj.args))
    if isinstance(obj, Clause):
        return Clause(apply_term_subst(obj.head, theta),
                      tuple(apply_term_subst(a, theta) for a in obj.body))
    if isinstance(obj, tuple):
        return tuple(apply_term_subst(x, theta) for x in obj)
    if isinstance(obj, Mapping):
        return {k: apply_term_subst(v, theta) for k, v in obj.items()}
    raise TypeError(f"cannot substitute in {obj!r}")


class TypeSubst(Mapping):
    """Finite idempotent map from parameters to types.

    Identity bindings are dropped; a domain parameter occurring in the
    range is rejected (the substitution would not be idempotent).
    """

    __slots__ = ("_m",)

    def __init__(self, mapping=()):
        m = {p: t for p, t in dict(mapping).items() if t != p}
        dom = set(m)
        for t in m.values():
            hit = dom & pars(t)
            if hit:
                raise ValueError(f"not idempotent: {sorted(p.printed() for p in hit)} bound and in range")
        self._m = m

    def __getitem__(self, k):
        return self._m[k]

    def __iter__(self):
        return iter(self._m)

    def __len__(self):
        return len(self._m)

    def __eq__(self, other):
        if isinstance(other, TypeSubst):
            return self._m == other._m
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._m.items()))

    def __repr__(self) -> str:
        from .parser import render
        return render(self)

    def apply(self, obj):
        return apply_type_subst(obj, self._m)

    def compose(self, other: "TypeSubst") -> "TypeSubst":
        m = {p: other.apply(t) for p, t in self._m.items()}
        for p, t in other.items():
            m.setdefault(p, t)
        return TypeSubst(m)

    def restrict(self, params) -> "TypeSubst":
        keep = set(params)
        return TypeSubst({p: t for p, t in self._m.items() if p in keep})


class TermSubst(Mapping):
    """Finite idempotent map from variables to terms."""

    __slots__ = ("_m",)

    def __init__(self, mapping=()):
        m = {v: t for v, t in dict(mapping).items() if t != v}
        dom = set(m)
        for t in m.values():
            hit = dom & vars_of(t)
            if hit:
                raise ValueError(f"not idempotent: {sorted(v.printed() for v in hit)} bound and in range")
        self._m = m

    def __getitem__(self, k):
        return self._m[k]

    def __iter__(self):
        return iter(self._m)

    def __len__(self):
        return len(self._m)

    def __eq__(self, other):
        if isinstance(other, TermSubst):
            return self._m == other._m
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._m.items()))

    def __repr__(self) -> str:
        from .parser import render
        return render(self)

    def apply(self, obj):
        return apply_term_subst(obj, self._m)

    def compose(self, other: "TermSubst") -> "TermSubst":
        m = {v: other.apply(t) for v, t in self._m.items()}
        for v, t in other.items():
            m.setdefault(v, t)
        return TermSubst(m)

    def restrict(self, obj) -> "TermSubst":
        """Restriction to the variables of obj (a term-level object or a set)."""
        keep = obj if isinstance(obj, (set, frozenset)) else vars_of(obj)
        return TermSubst({v: t for v, t in self._m.items() if v in keep})


def rename_apart(c: Clause, fresh: NameSource) -> Clause:
    """Copy of c whose variables are fresh (never issued before)."""
    ren = TermSubst({v: fresh.fresh_var(v.name) for v in vars_in_order(c)})
    return ren.apply(c)


def rename_query_apart(q: Query, fresh: NameSource) -> Query:
    ren = TermSubst({v: fresh.fresh_var(v.name) for v in vars_in_order(q)})
    return ren.apply(q)


# ------------------------------------------------------- canonical names

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _canonical_names(avoid: set[str]) -> Iterator[str]:
    rnd = 0
    while True:
        for ch in _LETTERS:
            name = ch if rnd == 0 else f"{ch}{rnd}"
            if name not in avoid:
                yield name
        rnd += 1


def canonical_param_map(obj, keep=()) -> TypeSubst:
    """Left-to-right renaming of parameters to A, B, C, ...

    Parameters in `keep` stay untouched; fresh canonical names avoid them.
    """
    keep = set(keep)
    avoid = {p.name for p in keep if p.idx == 0}
    names = _canonical_names(avoid)
    m = {}
    for p in pars_in_order(obj):
        if p not in keep:
            m[p] = Param(next(names))
    return TypeSubst(m)


def canonical_types(obj, keep=()):
    return canonical_param_map(obj, keep).apply(obj)


def variant_types(a, b) -> bool:
    """Equality of type-level objects up to bijective parameter renaming."""
    return canonical_types(a) == canonical_types(b)


def variant_terms(a, b) -> bool:
    """Equality of term-level objects up to bijective variable renaming."""

    def canon(o):
        m = {v: Var("V", i + 1) for i, v in enumerate(vars_in_order(o))}
        return apply_term_subst(o, m)

    return canon(a) == canon(b)


# ------------------------------------------------------- signatures

@dataclass(frozen=True)
class FuncDecl:
    name: str
    arg_types: tuple[Type, ...]
    result: Type


@dataclass(frozen=True)
class PredDecl:
    name: str
    arg_types: tuple[Type, ...]


_EQ_DECL = PredDecl(EQ, (Param("U"), Param("U")))
_GO_DECL = PredDecl(GO, ())
_MINUS_DECL = FuncDecl(MINUS, (INT_TYPE, INT_TYPE), INT_TYPE)


@dataclass
class Signature:
    """Declared constructors (kinds), functions, and predicates.

    `=`, `go`, integer literals, and `minus` are built in; the latter two
    need the kind int/0 to be declared.
    """
    kinds: dict[str, int] = field(default_factory=dict)
    funcs: dict[str, FuncDecl] = field(default_factory=dict)
    preds: dict[str, PredDecl] = field(default_factory=dict)

    def declare_kind(self, name: str, arity: int) -> None:
        if name in self.kinds:
            raise ValueError(f"kind {name} declared twice")
        self.kinds[name] = arity

    def declare_func(self, decl: FuncDecl) -> None:
        if decl.name in self.funcs or decl.name == MINUS or is_int_literal(decl.name):
            raise ValueError(f"function {decl.name} declared twice")
        self.funcs[decl.name] = decl

    def declare_pred(self, decl: PredDecl) -> None:
        if decl.name in self.preds or decl.name == EQ:
            raise ValueError(f"predicate {decl.name} declared twice")
        if decl.name == GO and decl.arg_types:
            raise ValueError("go must be 0-ary")
        self.preds[decl.name] = decl

    def has_int(self) -> bool:
        return self.kinds.get(INT) == 0

    def func_decl(self, name: str) -> FuncDecl | None:
        if name in self.funcs:
            return self.funcs[name]
        if self.has_int():
            if is_int_literal(name):
                return FuncDecl(name, (), INT_TYPE)
            if name == MINUS:
                return _MINUS_DECL
        return None

    def pred_decl(self, name: str) -> PredDecl | None:
        if name == EQ:
            return _EQ_DECL
        if name in self.preds:
            return self.preds[name]
        if name == GO:
            return _GO_DECL
        return None


@dataclass(frozen=True)
class Program:
    signature: Signature
    clauses: tuple[Clause, ...]
    partitions: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __repr__(self) -> str:
        from .parser import render
        return render(self)


# The built-in clause resolving equality atoms, and reserved clause indices.
EQ_CLAUSE = Clause(Atom(EQ, (Var("X"), Var("X"))))
EQ_CLAUSE_INDEX = -2
GO_CLAUSE_INDEX = -1


def wrap_query(q: Query) -> Clause:
    return Clause(Atom(GO), tuple(q))


def resolution_clauses(p: Program) -> list[tuple[int, Clause]]:
    """Program clauses plus the built-in equality clause, with indices."""
    out = list(enumerate(p.clauses))
    out.append((EQ_CLAUSE_INDEX, EQ_CLAUSE))
    return out


# ------------------------------------------------------- signature checks

def _check_type_wf(sig: Signature, t: Type, where: str, findings: list[Finding]) -> None:
    if isinstance(t, Param):
        return
    arity = sig.kinds.get(t.name)
    if arity is None:
        findings.append(Finding("unknown-constructor", f"{where}: constructor {t.name} not declared"))
    elif arity != len(t.args):
        findings.append(Finding("constructor-arity",
                                f"{where}: {t.name}/{arity} used with {len(t.args)} arguments"))
    for a in t.args:
        _check_type_wf(sig, a, where, findings)


def validate_signature(sig: Signature) -> CheckReport:
    """Well-formedness of all declarations, including transparency: the
    parameters of a function's argument types must occur in its result type."""
    findings: list[Finding] = []
    for f in sig.funcs.values():
        for t in f.arg_types + (f.result,):
            _check_type_wf(sig, t, f"func {f.name}", findings)
        extra = pars(f.arg_types) - pars(f.result)
        if extra:
            names = ", ".join(sorted(p.printed() for p in extra))
            findings.append(Finding(
                "transparency",
                f"func {f.name}: parameter(s) {names} occur in argument types but not in the result type"))
    for pd in sig.preds.values():
        for t in pd.arg_types:
            _check_type_wf(sig, t, f"pred {pd.name}", findings)
    return CheckReport(tuple(findings))
