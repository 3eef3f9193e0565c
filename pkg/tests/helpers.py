"""Generators and brute-force oracles shared by the test modules.

The randomized suites work over one small fixed signature (ints, lists,
pairs).  The matching/substitution helpers here are deliberately
independent re-implementations so they can serve as oracles for the
library's unification and tree machinery.
"""
from __future__ import annotations

import itertools
from pathlib import Path

from hypothesis import strategies as st

from tlpc import corpus as _corpus_pkg
from tlpc.core import Atom, Fun, Param, TCon, TermSubst, Var
from tlpc.parser import parse_program, parse_query
from tlpc.trees import BOTTOM, DerivationTree


def corpus_path(name: str) -> str:
    return str(Path(_corpus_pkg.__file__).parent / f"{name}.tlp")

SMALL_SIG_TEXT = """
kind int/0.
kind list/1.
kind pair/2.

func nil : list(U).
func cons(U, list(U)) : list(U).
func pr(U, V) : pair(U, V).

pred p1(U).
pred p2(U, list(U)).
pred rel(pair(U, V)).
"""

SMALL = parse_program(SMALL_SIG_TEXT)
SIG = SMALL.signature

INT = TCon("int")
A, B = Param("A"), Param("B")

PRED_DECLS = {
    "p1": (Param("U"),),
    "p2": (Param("U"), TCon("list", (Param("U"),))),
    "rel": (TCon("pair", (Param("U"), Param("V"))),),
}

CORPUS_QUERIES = [
    ("hqpr", "h(X)"),
    ("nest", "p(X)"),
    ("append", "app(Xs, [], Zs), r(Xs)"),
    ("eqnil", "p"),
    ("nestcount", "r(J, X)"),
    ("semigen", "p(X, Y)"),
    ("fgs1", "fgs1(2, Y)"),
    ("fgs3", "fgs3(1, Y)"),
]


def corpus_query(corpus, name, text):
    program = corpus[name]
    return program, parse_query(text, program.signature)


# ---------------------------------------------------------------- types

def types_st(with_params=True):
    leaves = [INT] + ([A, B] if with_params else [])
    return st.recursive(
        st.sampled_from(leaves),
        lambda sub: st.one_of(
            st.builds(lambda t: TCon("list", (t,)), sub),
            st.builds(lambda s, t: TCon("pair", (s, t)), sub, sub),
        ),
        max_leaves=3,
    )


# ------------------------------------------------- well-typed generation

def _type_pars(ty):
    if isinstance(ty, Param):
        return {ty}
    out = set()
    for a in ty.args:
        out |= _type_pars(a)
    return out


def _apply_ty(ty, theta):
    if isinstance(ty, Param):
        return theta.get(ty, ty)
    return TCon(ty.name, tuple(_apply_ty(a, theta) for a in ty.args))


class TypedBuilder:
    """Builds terms/atoms that are well typed by construction, recording a
    variable typing as it goes.  Follows the typing rules directly, so it
    is independent of the inference engine under test."""

    def __init__(self, draw):
        self.draw = draw
        self.u: dict[Var, TCon | Param] = {}
        self._n = itertools.count()

    def var_of(self, ty) -> Var:
        matching = [v for v, t in self.u.items() if t == ty]
        if matching and self.draw(st.booleans()):
            return self.draw(st.sampled_from(matching))
        v = Var(f"X{next(self._n)}")
        self.u[v] = ty
        return v

    def term_of(self, ty, depth=2):
        options = ["var"]
        if isinstance(ty, TCon):
            if ty.name == "int":
                options.append("lit")
            elif ty.name == "list":
                options.append("nil")
                if depth > 0:
                    options.append("cons")
            elif ty.name == "pair" and depth > 0:
                options.append("pr")
        pick = self.draw(st.sampled_from(options))
        if pick == "var":
            return self.var_of(ty)
        if pick == "lit":
            return Fun(self.draw(st.sampled_from(["0", "1", "2"])))
        if pick == "nil":
            return Fun("nil")
        if pick == "cons":
            return Fun("cons", (self.term_of(ty.args[0], depth - 1),
                                self.term_of(ty, depth - 1)))
        return Fun("pr", (self.term_of(ty.args[0], depth - 1),
                          self.term_of(ty.args[1], depth - 1)))

    def atom(self, depth=2) -> Atom:
        pred = self.draw(st.sampled_from(sorted(PRED_DECLS)))
        decl = PRED_DECLS[pred]
        pars = sorted({p for t in decl for p in _type_pars(t)},
                      key=lambda p: p.name)
        theta = {p: self.draw(types_st()) for p in pars}
        return Atom(pred, tuple(self.term_of(_apply_ty(t, theta), depth)
                                for t in decl))

    def equation(self, depth=2) -> Atom:
        ty = self.draw(types_st())
        return Atom("=", (self.term_of(ty, depth), self.term_of(ty, depth)))


@st.composite
def wt_term(draw):
    b = TypedBuilder(draw)
    ty = draw(types_st())
    t = b.term_of(ty)
    return b.u, t, ty


@st.composite
def wt_atom(draw):
    b = TypedBuilder(draw)
    a = b.atom()
    return b.u, a


@st.composite
def wt_equations(draw, max_eqs=2, extra_atom=False):
    b = TypedBuilder(draw)
    n = draw(st.integers(1, max_eqs))
    eqs = tuple(b.equation() for _ in range(n))
    if extra_atom:
        return b.u, eqs, b.atom()
    return b.u, eqs


def ground_subst_st(params):
    if not params:
        return st.just({})
    return st.fixed_dictionaries({p: types_st(with_params=False)
                                  for p in sorted(params, key=lambda p: p.name)})


# --------------------------------------------------- raw (untyped) terms

def raw_terms(max_leaves=4):
    return st.recursive(
        st.sampled_from([Var("X"), Var("Y"), Var("Z"),
                         Fun("nil"), Fun("1"), Fun("2")]),
        lambda sub: st.one_of(
            st.builds(lambda a, b: Fun("cons", (a, b)), sub, sub),
            st.builds(lambda a, b: Fun("pr", (a, b)), sub, sub),
        ),
        max_leaves=max_leaves,
    )


def raw_equations(max_eqs=3):
    return st.lists(st.tuples(raw_terms(), raw_terms()),
                    min_size=1, max_size=max_eqs)


# --------------------------------------------------- brute-force oracles

def ground_universe(depth=1):
    terms = {Fun("nil"), Fun("1"), Fun("2")}
    for _ in range(depth):
        grown = set(terms)
        for a in terms:
            for b in terms:
                grown.add(Fun("cons", (a, b)))
                grown.add(Fun("pr", (a, b)))
        terms = grown
    return sorted(terms, key=repr)


def _head_name(x):
    return x.pred if isinstance(x, Atom) else x.name


def subst_ground(obj, binding):
    if isinstance(obj, Var):
        return binding.get(obj, obj)
    if isinstance(obj, tuple):
        return tuple(subst_ground(o, binding) for o in obj)
    if isinstance(obj, Atom):
        return Atom(obj.pred, subst_ground(obj.args, binding))
    return Fun(obj.name, subst_ground(obj.args, binding))


def free_vars(obj):
    if isinstance(obj, Var):
        return {obj}
    if isinstance(obj, tuple):
        return set().union(*(free_vars(o) for o in obj)) if obj else set()
    return free_vars(obj.args)


def match_onto(pattern, target, binding=None):
    """One-sided structural match: bind pattern variables so that the
    pattern becomes the target.  Returns the binding or None."""
    b = dict(binding or {})

    def go(p, t):
        if isinstance(p, Var):
            if p in b:
                return b[p] == t
            b[p] = t
            return True
        if isinstance(p, tuple):
            return (isinstance(t, tuple) and len(p) == len(t)
                    and all(map(go, p, t)))
        if isinstance(t, Var) or type(p) is not type(t):
            return False
        return (_head_name(p) == _head_name(t)
                and len(p.args) == len(t.args)
                and all(map(go, p.args, t.args)))

    return b if go(pattern, target) else None


def brute_ground_unifiers(eqs, universe, max_vars=2):
    """All assignments of the equations' variables to universe terms that
    equalise every equation; None when there are too many variables to
    enumerate."""
    vs = sorted(free_vars(tuple(eqs)), key=lambda v: (v.name, v.idx))
    if len(vs) > max_vars:
        return None
    found = []
    for combo in itertools.product(universe, repeat=len(vs)):
        binding = dict(zip(vs, combo))
        if all(subst_ground(l, binding) == subst_ground(r, binding)
               for l, r in eqs):
            found.append(binding)
    return found


def ground_trees(skeleton, universe, max_free=3):
    """Brute-force enumeration of the ground derivation trees based on a
    skeleton: the root's variables range over the universe, every child
    head is matched structurally onto its parent's body atom, and any
    variables left free then range over the universe too.  Returns None
    when some node would leave too many variables to enumerate."""
    overflow = False

    def at_node(node, forced):
        nonlocal overflow
        free = sorted(free_vars((node.clause.head, node.clause.body))
                      - set(forced), key=lambda v: (v.name, v.idx))
        if len(free) > max_free:
            overflow = True
            return
        for combo in itertools.product(universe, repeat=len(free)):
            binding = {**forced, **dict(zip(free, combo))}
            child_lists = []
            ok = True
            for a, child in zip(node.clause.body, node.children):
                if child is BOTTOM:
                    child_lists.append([BOTTOM])
                    continue
                got = match_onto(child.clause.head, subst_ground(a, binding))
                if got is None:
                    ok = False
                    break
                subtrees = list(at_node(child, got))
                if not subtrees:
                    ok = False
                    break
                child_lists.append(subtrees)
            if not ok:
                continue
            for kids in itertools.product(*child_lists):
                yield DerivationTree(node.clause, node.clause_index,
                                     TermSubst(binding), tuple(kids))

    trees = list(at_node(skeleton, {}))
    return None if overflow else trees


def variant_queries(a, b):
    from tlpc.core import variant_terms
    return variant_terms(tuple(a), tuple(b))
