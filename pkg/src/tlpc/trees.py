"""Proof skeletons, derivation trees, derivations, and bounded consequences.

A skeleton fixes which clause resolves each call without committing to any
bindings; gluing its node interfaces together (parent body atom against child
head) gives an equation set whose unifiability decides whether the skeleton
describes a real derivation.  When it does, applying the most general unifier
node by node yields the most general derivation tree of that shape.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal

from .core import (
    Atom,
    Clause,
    EQ,
    GO_CLAUSE_INDEX,
    Fun,
    NameSource,
    Program,
    Query,
    Signature,
    Term,
    TermSubst,
    Var,
    apply_term_subst,
    is_int_literal,
    rename_apart,
    resolution_clauses,
    variant_terms,
    vars_in_order,
    vars_of,
    wrap_query,
    MINUS,
)
from .unify import UnificationError, match_terms, mgu_terms


class _Bottom:
    """Marker for an unexpanded call site (an incomplete leaf)."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "BOTTOM"


BOTTOM = _Bottom()


@dataclass(frozen=True)
class Skeleton:
    """A clause-labelled tree.  `children` has one entry per body atom of the
    node's clause, each either a Skeleton or BOTTOM.  Clause copies at
    distinct nodes share no variables."""
    clause: Clause
    clause_index: int
    children: tuple = ()

    def __post_init__(self):
        if len(self.children) != len(self.clause.body):
            raise ValueError("one child per body atom required")


@dataclass(frozen=True)
class DerivationTree:
    """A skeleton whose nodes additionally carry a substitution for the
    variables of their clause copy."""
    clause: Clause
    clause_index: int
    subst: TermSubst
    children: tuple = ()

    def __post_init__(self):
        if len(self.children) != len(self.clause.body):
            raise ValueError("one child per body atom required")


def height(node) -> int:
    """Levels of complete nodes below the root (BOTTOM leaves do not count)."""
    kids = [height(c) for c in node.children if c is not BOTTOM]
    return 1 + max(kids) if kids else 0


def complete_node_count(node) -> int:
    return 1 + sum(complete_node_count(c) for c in node.children if c is not BOTTOM)


def is_complete(node) -> bool:
    return all(c is not BOTTOM and is_complete(c) for c in node.children)


# ------------------------------------------------------------ enumeration

def _matching(clauses, atom: Atom):
    for idx, c in clauses:
        if c.head.pred == atom.pred and len(c.head.args) == len(atom.args):
            yield idx, c


def _subtrees(clauses, atom: Atom, budget: int, ns: NameSource,
              allow_bottom: bool) -> list:
    """Subtree options for one call site: BOTTOM (if allowed) plus every
    skeleton of height <= budget rooted at a matching clause."""
    out: list = [BOTTOM] if allow_bottom else []
    if budget < 0:
        return out
    for idx, c in _matching(clauses, atom):
        copy = rename_apart(c, ns)
        slots = [_subtrees(clauses, b, budget - 1, ns, allow_bottom)
                 for b in copy.body]
        for combo in itertools.product(*slots):
            out.append(Skeleton(copy, idx, combo))
    return out


def _rooted(clauses, root: Clause, root_index: int, budget: int,
            ns: NameSource, allow_bottom: bool) -> Iterator[Skeleton]:
    slots = [_subtrees(clauses, b, budget - 1, ns, allow_bottom)
             for b in root.body]
    for combo in itertools.product(*slots):
        yield Skeleton(root, root_index, combo)


def enumerate_skeletons(program: Program, query: Query,
                        depth: int = 5) -> Iterator[Skeleton]:
    """All skeletons for the query against the program, in order of height.

    The root is the wrapper clause whose body is the query; it keeps the
    query's own variables.  Every other node gets a fresh clause copy.  The
    builtin equality clause participates like a program clause.  Heights run
    from 0 up to `depth`.
    """
    clauses = resolution_clauses(program)
    root = wrap_query(query)
    ns = NameSource()
    for h in range(depth + 1):
        for s in _rooted(clauses, root, GO_CLAUSE_INDEX, h, ns, True):
            if height(s) == h:
                yield s


def enumerate_proof_skeletons(program: Program, depth: int) -> Iterator[Skeleton]:
    """Complete skeletons (no BOTTOM leaves) of height <= depth rooted at each
    clause of the program, including the builtin equality clause."""
    clauses = resolution_clauses(program)
    ns = NameSource()
    for h in range(depth + 1):
        for idx, c in clauses:
            copy = rename_apart(c, ns)
            for s in _rooted(clauses, copy, idx, h, ns, False):
                if height(s) == h:
                    yield s


# ------------------------------------------------------------- properness

def eq_of_skeleton(s: Skeleton) -> list[tuple[Atom, Atom]]:
    """Interface equations: each expanded body atom equated with its child's
    head, parent before child, left to right."""
    eqs: list[tuple[Atom, Atom]] = []

    def walk(node: Skeleton) -> None:
        for a, child in zip(node.clause.body, node.children):
            if child is not BOTTOM:
                eqs.append((a, child.clause.head))
                walk(child)

    walk(s)
    return eqs


def is_proper_skeleton(s: Skeleton) -> TermSubst | None:
    """The most general unifier of the skeleton's interface equations, or
    None when they do not unify."""
    try:
        return mgu_terms(eq_of_skeleton(s))
    except UnificationError:
        return None


def most_general_derivation_tree(s: Skeleton) -> DerivationTree | None:
    """Label each node of a proper skeleton with the interface unifier
    restricted to that node's clause variables."""
    theta = is_proper_skeleton(s)
    if theta is None:
        return None

    def label(node: Skeleton) -> DerivationTree:
        local = theta.restrict(vars_of(node.clause))
        kids = tuple(BOTTOM if c is BOTTOM else label(c) for c in node.children)
        return DerivationTree(node.clause, node.clause_index, local, kids)

    return label(s)


def head_atom(t: DerivationTree) -> Atom:
    return t.subst.apply(t.clause.head)


def node_atoms(t: DerivationTree) -> list[Atom]:
    """All atoms of the tree in prefix order: each node's instantiated head,
    with unexpanded body atoms appearing where their child would."""
    out: list[Atom] = []

    def walk(node: DerivationTree) -> None:
        out.append(node.subst.apply(node.clause.head))
        for a, child in zip(node.clause.body, node.children):
            if child is BOTTOM:
                out.append(node.subst.apply(a))
            else:
                walk(child)

    walk(t)
    return out


def frontier(t: DerivationTree) -> Query:
    """The instantiated unexpanded body atoms, left to right: the query still
    to be solved."""
    out: list[Atom] = []

    def walk(node: DerivationTree) -> None:
        for a, child in zip(node.clause.body, node.children):
            if child is BOTTOM:
                out.append(node.subst.apply(a))
            else:
                walk(child)

    walk(t)
    return tuple(out)


def skeleton_of(t: DerivationTree) -> Skeleton:
    kids = tuple(BOTTOM if c is BOTTOM else skeleton_of(c) for c in t.children)
    return Skeleton(t.clause, t.clause_index, kids)


def check_derivation_tree(t: DerivationTree) -> bool:
    """Do the node labels actually agree on every interface?  (Each expanded
    body atom instance must equal its child's head instance.)"""
    for a, child in zip(t.clause.body, t.children):
        if child is BOTTOM:
            continue
        if t.subst.apply(a) != child.subst.apply(child.clause.head):
            return False
        if not check_derivation_tree(child):
            return False
    return True


def same_shape(a, b) -> bool:
    """Same clause choices in the same arrangement; node clauses may be
    renamed copies of one another."""
    if a is BOTTOM or b is BOTTOM:
        return a is b
    if a.clause_index != b.clause_index or len(a.children) != len(b.children):
        return False
    if not variant_terms((a.clause.head,) + a.clause.body,
                         (b.clause.head,) + b.clause.body):
        return False
    return all(same_shape(x, y) for x, y in zip(a.children, b.children))


# ------------------------------------------------------------- derivations

def eval_arith(obj):
    """Replace every ground subtraction of integer literals with its value.
    Works on terms, atoms, queries, and clauses."""
    if isinstance(obj, Var):
        return obj
    if isinstance(obj, tuple):
        return tuple(eval_arith(a) for a in obj)
    if isinstance(obj, Atom):
        return Atom(obj.pred, tuple(eval_arith(a) for a in obj.args))
    if isinstance(obj, Clause):
        return Clause(eval_arith(obj.head), eval_arith(obj.body))
    if isinstance(obj, Fun):
        args = tuple(eval_arith(a) for a in obj.args)
        if (obj.name == MINUS and len(args) == 2
                and all(isinstance(a, Fun) and not a.args and is_int_literal(a.name)
                        for a in args)):
            return Fun(str(int(args[0].name) - int(args[1].name)))
        return Fun(obj.name, args)
    raise TypeError(f"cannot evaluate {obj!r}")


@dataclass(frozen=True)
class Step:
    """One resolution step: the selected atom's position (1-based), the
    clause used (as the renamed copy actually unified with), the unifier,
    and the query it produced."""
    position: int
    clause_index: int
    clause: Clause
    mgu: TermSubst
    query: Query


@dataclass(frozen=True)
class Derivation:
    query: Query
    steps: tuple[Step, ...]
    answer: TermSubst

    @property
    def final(self) -> Query:
        return self.steps[-1].query if self.steps else self.query

    @property
    def succeeded(self) -> bool:
        return not self.final


def derive_step(query: Query, position: int, clause: Clause) -> tuple[TermSubst, Query] | None:
    """Resolve the atom at `position` (1-based) with `clause`, which must
    already be renamed apart from the query.  Ground subtractions in the
    result are evaluated.  None when the head does not unify."""
    if not 1 <= position <= len(query):
        raise IndexError(f"no atom at position {position}")
    a = query[position - 1]
    if clause.head.pred != a.pred or len(clause.head.args) != len(a.args):
        return None
    try:
        theta = mgu_terms([(a, clause.head)])
    except UnificationError:
        return None
    rest = query[:position - 1] + clause.body + query[position:]
    return theta, eval_arith(theta.apply(rest))


def derivations(program: Program, query: Query, depth: int = 5,
                selection: Literal["leftmost", "all"] = "leftmost") -> Iterator[Derivation]:
    """Every derivation of at most `depth` steps, including all prefixes.

    Clauses are tried in program order (builtin equality last); under
    "leftmost" only the first atom is selected, under "all" every position
    is tried.  Each yielded Derivation carries the answer substitution
    accumulated so far, restricted to the query's variables.
    """
    if selection not in ("leftmost", "all"):
        raise ValueError(f"unknown selection rule: {selection}")
    clauses = resolution_clauses(program)
    ns = NameSource()
    qvars = vars_in_order(query)

    def answer(binding: dict) -> TermSubst:
        return TermSubst({v: t for v, t in binding.items() if t != v})

    def rec(cur: Query, binding: dict, steps: tuple) -> Iterator[Derivation]:
        yield Derivation(query, steps, answer(binding))
        if len(steps) >= depth or not cur:
            return
        positions = range(1, len(cur) + 1) if selection == "all" else (1,)
        for k in positions:
            for idx, c in _matching(clauses, cur[k - 1]):
                copy = rename_apart(c, ns)
                got = derive_step(cur, k, copy)
                if got is None:
                    continue
                theta, nxt = got
                nb = {v: eval_arith(theta.apply(t)) for v, t in binding.items()}
                step = Step(k, idx, copy, theta, nxt)
                yield from rec(nxt, binding=nb, steps=steps + (step,))

    yield from rec(query, {v: v for v in qvars}, ())


def answers(program: Program, query: Query, depth: int = 5,
            selection: Literal["leftmost", "all"] = "leftmost") -> list[TermSubst]:
    """Answer substitutions of the successful derivations, in search order."""
    return [d.answer for d in derivations(program, query, depth, selection)
            if d.succeeded and d.steps]


# ------------------------------------------------- bounded consequences

def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def atom_depth(a: Atom) -> int:
    return max((term_depth(t) for t in a.args), default=0)


def int_literals(program: Program, query: Query = ()) -> list[str]:
    """Integer constants appearing anywhere in the program or query text."""
    seen: set[str] = set()

    def walk(o):
        if isinstance(o, Fun):
            if not o.args and is_int_literal(o.name):
                seen.add(o.name)
            for a in o.args:
                walk(a)

    for c in program.clauses:
        for a in c.atoms():
            for t in a.args:
                walk(t)
    for a in query:
        for t in a.args:
            walk(t)
    return sorted(seen, key=int)


def ground_terms(sig: Signature, depth: int, literals: Iterable[str] = ()) -> set[Term]:
    """All ground terms of depth <= depth over the declared functions.  The
    integer type contributes only the supplied literals (the type itself is
    infinite)."""
    funcs = list(sig.funcs.values())
    base: set[Term] = {Fun(f.name) for f in funcs if not f.arg_types}
    if sig.has_int():
        base |= {Fun(l) for l in literals}
    cur = set(base)
    for _ in range(depth):
        nxt = set(cur)
        for f in funcs:
            if f.arg_types:
                for combo in itertools.product(cur, repeat=len(f.arg_types)):
                    nxt.add(Fun(f.name, combo))
        cur = nxt
    return {t for t in cur if term_depth(t) <= depth}


@dataclass(frozen=True)
class GroundAtomSet:
    atoms: frozenset[Atom]
    depth_bound: int

    def __contains__(self, a: Atom) -> bool:
        return a in self.atoms

    def __len__(self) -> int:
        return len(self.atoms)


def _var_occ_depths(a: Atom) -> dict[Var, int]:
    """Deepest occurrence of each variable below the atom's argument roots."""
    out: dict[Var, int] = {}

    def walk(t: Term, d: int) -> None:
        if isinstance(t, Var):
            out[t] = max(out.get(t, 0), d)
        else:
            for s in t.args:
                walk(s, d + 1)

    for t in a.args:
        walk(t, 0)
    return out


def _extend(binding: dict, more) -> dict:
    out = {v: apply_term_subst(t, more) for v, t in binding.items()}
    for v, t in more.items():
        out.setdefault(v, t)
    return out


def _body_matches(body: Query, by_pred: dict, binding: dict) -> Iterator[dict]:
    if not body:
        yield binding
        return
    first = apply_term_subst(body[0], binding)
    if first.pred == EQ and len(first.args) == 2:
        # Equality holds for any instance making both sides equal; grounding
        # of leftover variables is deferred to the head.
        try:
            theta = mgu_terms([(first.args[0], first.args[1])])
        except UnificationError:
            return
        yield from _body_matches(body[1:], by_pred, _extend(binding, theta))
        return
    for g in by_pred.get((first.pred, len(first.args)), ()):
        more = match_terms(first, g)
        if more is not None:
            yield from _body_matches(body[1:], by_pred, _extend(binding, more))


def tp_step(program: Program, current: GroundAtomSet,
            universe: set[Term] | None = None) -> GroundAtomSet:
    """One application of the immediate-consequence operator, keeping only
    ground heads within the depth bound.  Head variables not fixed by the
    body are instantiated from the ground-term universe.  Only program
    clauses produce heads; body equations are satisfied by unification.
    Subtraction is treated as a plain constructor here."""
    bound = current.depth_bound
    if universe is None:
        universe = ground_terms(program.signature, bound, int_literals(program))
    depth_of = {t: term_depth(t) for t in universe}
    pool_cache: dict[int, list[Term]] = {}

    def pool(allowed: int) -> list[Term]:
        if allowed not in pool_cache:
            pool_cache[allowed] = [t for t, d in depth_of.items()
                                   if d <= allowed]
        return pool_cache[allowed]

    by_pred: dict[tuple[str, int], list[Atom]] = {}
    for a in current.atoms:
        by_pred.setdefault((a.pred, len(a.args)), []).append(a)

    produced: set[Atom] = set()
    for c in program.clauses:
        for binding in _body_matches(c.body, by_pred, {}):
            h = apply_term_subst(c.head, binding)
            # Variables add at least nothing to the depth, so this minimum
            # rules the head out for every grounding.
            if atom_depth(h) > bound:
                continue
            frees = vars_in_order(h)
            if not frees:
                produced.add(h)
                continue
            depths = _var_occ_depths(h)
            pools = [pool(bound - depths[v]) for v in frees]
            for combo in itertools.product(*pools):
                g = apply_term_subst(h, dict(zip(frees, combo)))
                if atom_depth(g) <= bound:
                    produced.add(g)
    return GroundAtomSet(frozenset(produced), bound)


def tp_fixpoint(program: Program, depth: int,
                max_iters: int | None = None,
                extra_literals: Iterable[str] = ()) -> GroundAtomSet:
    """Iterate the bounded consequence operator from the empty set until it
    stabilises (the universe is finite, so it always does) or until
    `max_iters` applications have been made."""
    lits = set(int_literals(program)) | set(extra_literals)
    universe = ground_terms(program.signature, depth, lits)
    m = GroundAtomSet(frozenset(), depth)
    done = 0
    while max_iters is None or done < max_iters:
        nxt = tp_step(program, m, universe)
        done += 1
        if nxt.atoms == m.atoms:
            return nxt
        m = nxt
    return m


# ---------------------------------------------------------------- JSON

def skeleton_to_json(s) -> dict:
    """Serialise a Skeleton or DerivationTree.  Nodes are listed in prefix
    order; each refers to its children by id."""
    from .parser import render

    nodes: list[dict] = []

    def emit(node) -> int:
        me = len(nodes)
        if node is BOTTOM:
            nodes.append({"id": me, "kind": "bottom"})
            return me
        rec = {
            "id": me,
            "kind": "clause",
            "clauseIndex": node.clause_index,
            "clause": render(node.clause),
        }
        if isinstance(node, DerivationTree):
            rec["subst"] = {v.printed(): render(t) for v, t in node.subst.items()}
        nodes.append(rec)
        rec["children"] = [emit(c) for c in node.children]
        return me

    emit(s)
    return {"root": 0, "nodes": nodes}


def skeleton_from_json(doc: dict, sig: Signature) -> Skeleton | DerivationTree:
    """Rebuild a skeleton (or, when substitutions are present, a derivation
    tree) from its JSON form.  Node clauses come back exactly as serialised
    (variable names included)."""
    from .parser import parse_clause, parse_term

    nodes = {n["id"]: n for n in doc["nodes"]}

    def build(nid: int):
        n = nodes[nid]
        if n["kind"] == "bottom":
            return BOTTOM
        clause = parse_clause(n["clause"], sig)
        kids = tuple(build(k) for k in n["children"])
        if "subst" in n:
            theta = TermSubst({Var(name): parse_term(text, sig)
                               for name, text in n["subst"].items()})
            return DerivationTree(clause, n["clauseIndex"], theta, kids)
        return Skeleton(clause, n["clauseIndex"], kids)

    root = build(doc["root"])
    if root is BOTTOM:
        raise ValueError("root cannot be an unexpanded leaf")
    return root
