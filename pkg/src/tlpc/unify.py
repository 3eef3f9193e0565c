"""First-order unification, shared by the term and type levels.

One engine serves both alphabets; the two levels only differ in what counts
as a variable and how applications decompose.  The occur check is always on,
and equations are processed leftmost first, so results are deterministic.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .core import (
    Atom, Fun, Param, TCon, TermSubst, Type, TypeSubst, Var,
    apply_term_subst, apply_type_subst, pars, vars_of,
)


class UnificationError(Exception):
    """Raised on a clash or a failed occur check; carries the offending
    equation (after the bindings accumulated so far were applied)."""

    def __init__(self, kind: str, left, right, index: int):
        self.kind = kind
        self.left = left
        self.right = right
        self.index = index
        super().__init__(f"{kind}: {left!r} = {right!r} (equation {index + 1})")


class _Level:
    is_var: staticmethod
    functor: staticmethod
    args: staticmethod
    apply: staticmethod
    free: staticmethod
    subst: type


class _TermLevel(_Level):
    is_var = staticmethod(lambda x: isinstance(x, Var))
    functor = staticmethod(lambda x: ("atom", x.pred, len(x.args)) if isinstance(x, Atom)
                           else ("fun", x.name, len(x.args)))
    args = staticmethod(lambda x: x.args)
    apply = staticmethod(apply_term_subst)
    free = staticmethod(vars_of)
    subst = TermSubst


class _TypeLevel(_Level):
    is_var = staticmethod(lambda x: isinstance(x, Param))
    functor = staticmethod(lambda x: ("con", x.name, len(x.args)))
    args = staticmethod(lambda x: x.args)
    apply = staticmethod(apply_type_subst)
    free = staticmethod(pars)
    subst = TypeSubst


def _level_of(x) -> _Level:
    if isinstance(x, (Var, Fun, Atom)):
        return _TermLevel
    if isinstance(x, (Param, TCon)):
        return _TypeLevel
    raise TypeError(f"not a term or type: {x!r}")


def _mgu(eqs: Sequence[tuple], level: _Level, rigid: frozenset):
    binding: dict = {}
    work = [(l, r, i) for i, (l, r) in enumerate(eqs)]
    work.reverse()
    while work:
        left, right, i = work.pop()
        left = level.apply(left, binding)
        right = level.apply(right, binding)
        if left == right:
            continue
        if level.is_var(left) or level.is_var(right):
            if level.is_var(right) and (not level.is_var(left) or left in rigid):
                left, right = right, left
            if left in rigid:
                raise UnificationError("clash", left, right, i)
            if left in level.free(right):
                raise UnificationError("occur", left, right, i)
            one = {left: right}
            binding = {v: level.apply(t, one) for v, t in binding.items()}
            binding[left] = right
            continue
        if level.functor(left) != level.functor(right):
            raise UnificationError("clash", left, right, i)
        pairs = list(zip(level.args(left), level.args(right)))
        for l, r in reversed(pairs):
            work.append((l, r, i))
    return level.subst(binding)


def mgu_terms(eqs: Iterable[tuple]) -> TermSubst:
    """Most general unifier of term (or atom) equations.

    Raises UnificationError on clash or occur-check failure; the result is
    idempotent and binds only variables of the input.
    """
    return _mgu(list(eqs), _TermLevel, frozenset())


def mgu_types(eqs: Iterable[tuple], rigid: Iterable[Param] = ()) -> TypeSubst:
    """Most general unifier of type equations.  Parameters in `rigid` act
    as constants: binding one fails with a clash."""
    return _mgu(list(eqs), _TypeLevel, frozenset(rigid))


def _match(pattern, target, level: _Level, binding: dict) -> dict | None:
    if level.is_var(pattern):
        bound = binding.get(pattern)
        if bound is None:
            binding[pattern] = target
            return binding
        return binding if bound == target else None
    if level.is_var(target):
        return None
    if level.functor(pattern) != level.functor(target):
        return None
    for p, t in zip(level.args(pattern), level.args(target)):
        if _match(p, t, level, binding) is None:
            return None
    return binding


def match_terms(pattern, target) -> dict | None:
    """One-sided unification: a plain mapping m with pattern.m == target,
    or None.  (The mapping need not be idempotent: matching X against f(X)
    legitimately yields X -> f(X).)"""
    return _match(pattern, target, _TermLevel, {})


def match_types(pattern, target) -> dict | None:
    return _match(pattern, target, _TypeLevel, {})


def is_instance_of(target, pattern) -> bool:
    level = _level_of(target)
    return _match(pattern, target, level, {}) is not None


def is_typed_substitution(theta: TermSubst, u, sig) -> bool:
    """Does binding each variable read as a well-typed equation query under
    the variable typing u?  (Checked with the typing judgements.)"""
    from .typecheck import UntypableError, judge
    items = sorted(theta.items(), key=lambda kv: (kv[0].name, kv[0].idx))
    query = tuple(Atom("=", (v, t)) for v, t in items)
    try:
        judge(u, query, sig=sig)
        return True
    except UntypableError:
        return False


def ordered_unifiable(eqs: Sequence[tuple]) -> str:
    """Sufficient unifiability test for an oriented equation list.

    Returns "guaranteed" when (1) right-hand sides are pairwise
    variable-disjoint, (2) the dependency relation "r_i shares a variable
    with l_j" is acyclic, and (3) every left side is an instance of its
    right side.  Returns "unknown" otherwise; never claims non-unifiability.
    """
    eqs = list(eqs)
    if not eqs:
        return "guaranteed"
    level = _level_of(eqs[0][0])
    lv = [level.free(l) for l, _ in eqs]
    rv = [level.free(r) for _, r in eqs]
    for i in range(len(eqs)):
        for j in range(i + 1, len(eqs)):
            if rv[i] & rv[j]:
                return "unknown"
    for (l, r) in eqs:
        if _match(r, l, level, {}) is None:
            return "unknown"
    succ = {i: [j for j in range(len(eqs))
                if (rv[i] & lv[j]) and not (i == j and eqs[i][0] == eqs[i][1])]
            for i in range(len(eqs))}
    state = {i: 0 for i in succ}  # 0 new, 1 open, 2 done
    for start in succ:
        if state[start]:
            continue
        stack = [(start, iter(succ[start]))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if state[nxt] == 1:
                    return "unknown"
                if state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if not advanced:
                state[node] = 2
                stack.pop()
    return "guaranteed"
