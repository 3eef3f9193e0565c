"""Type skeletons, the two per-clause conditions, partition search, and the
bounded subject-reduction checks."""
from __future__ import annotations

import pytest

from tlpc.core import EQ, GO, GO_CLAUSE_INDEX, Param, TCon
from tlpc.parser import parse_query
from tlpc.srcheck import (
    Partition,
    all_head_partition,
    assembled_variable_typing,
    check_head_condition,
    check_semi_generic,
    check_subject_reduction_bounded,
    eq_of_type_skeleton,
    eq_prime_of_type_skeleton,
    is_proper_type_skeleton,
    label,
    make_partition,
    monitor_derivation,
    search_partition,
    subject_reduction_counterexamples,
    type_properness_failure,
    type_skeleton_of,
    type_skeleton_to_json,
)
from tlpc.trees import (
    BOTTOM,
    enumerate_skeletons,
    frontier,
    height,
    is_proper_skeleton,
    most_general_derivation_tree,
)
from tlpc.typecheck import UntypableError, judge
from tlpc.unify import ordered_unifiable

INT = TCon("int")


def list_of(t):
    return TCon("list", (t,))


def proper_skeletons(program, query_text, depth):
    q = parse_query(query_text, program.signature)
    for s in enumerate_skeletons(program, q, depth):
        if is_proper_skeleton(s) is not None:
            yield s


def chain_skeleton(nest, levels):
    """go over the p-clause over `levels - 1` nested r-clauses."""
    q = parse_query("p(X)", nest.signature)
    return next(s for s in enumerate_skeletons(nest, q, depth=levels)
                if height(s) == levels)


# ------------------------------------------------------------ type skeletons

def test_type_skeleton_of_nesting_chain(nest):
    ts = type_skeleton_of(chain_skeleton(nest, 3), nest.signature)
    assert label(ts) == "go <- p(list(int))"
    p = ts.children[0]
    assert label(p) == "p(list(int)) <- r(list(int))"
    r1 = p.children[0]
    a = r1.head_types[0].args[0].args[0]
    assert isinstance(a, Param)
    assert r1.head_types == (list_of(list_of(a)),)
    assert r1.body_types == ((list_of(a),),)
    assert r1.children[0].children == (BOTTOM,)


def test_type_skeleton_parameters_disjoint_per_node(nest, semigen):
    for program, qt in ((nest, "p(X)"), (semigen, "p(X, Y)")):
        for s in proper_skeletons(program, qt, 2):
            ts = type_skeleton_of(s, program.signature)
            seen: set = set()

            def walk(node):
                from tlpc.core import pars
                here = pars(node.head_types + tuple(t for v in node.body_types
                                                    for t in v))
                assert not (here & seen)
                seen.update(here)
                for c in node.children:
                    if c is not BOTTOM:
                        walk(c)

            walk(ts)


def test_type_skeleton_preserves_shape(append):
    for s in proper_skeletons(append, "app(Xs, [], Zs), r(Xs)", 2):
        ts = type_skeleton_of(s, append.signature)

        def walk(sk, tk):
            assert len(sk.children) == len(tk.children)
            assert tk.clause_index == sk.clause_index
            assert tk.head_pred == sk.clause.head.pred
            assert tk.body_preds == tuple(a.pred for a in sk.clause.body)
            for a, b in zip(sk.children, tk.children):
                assert (a is BOTTOM) == (b is BOTTOM)
                if a is not BOTTOM:
                    walk(a, b)

        walk(s, ts)


def test_type_skeleton_of_untypable_clause_reports_node(append):
    import dataclasses
    from tlpc.parser import parse_clause
    bad = parse_clause("r([[1]]).", append.signature)
    broken = dataclasses.replace(append,
                                 clauses=append.clauses[:2] + (bad,) + append.clauses[3:])
    with pytest.raises(UntypableError) as exc:
        for s in proper_skeletons(broken, "r(Xs)", 1):
            type_skeleton_of(s, broken.signature)
    assert "r([[1]])" in str(exc.value)


def test_append_type_skeleton_proper_all_int(append):
    hit = None
    for s in proper_skeletons(append, "app(Xs, [], Zs), r(Xs)", 2):
        kids = s.children
        if (len(kids) == 2 and kids[0] is not BOTTOM
                and kids[0].clause_index == 1
                and kids[0].children[0] is not BOTTOM
                and kids[1] is not BOTTOM):
            hit = s
            break
    assert hit is not None
    ts = type_skeleton_of(hit, append.signature)
    assert label(ts) == "go <- app(list(int), list(int), list(int)), r(list(int))"
    theta = is_proper_type_skeleton(ts)
    assert theta is not None
    assert set(dict(theta).values()) == {INT}


def test_nesting_type_skeleton_not_proper(nest):
    ts = type_skeleton_of(chain_skeleton(nest, 2), nest.signature)
    assert is_proper_type_skeleton(ts) is None
    err = type_properness_failure(ts)
    assert err.kind == "clash"
    assert {err.left, err.right} == {INT, list_of(Param("A", 1))}


def test_single_node_type_skeleton(nest):
    q = parse_query("p(X)", nest.signature)
    root = next(enumerate_skeletons(nest, q, depth=0))
    ts = type_skeleton_of(root, nest.signature)
    assert eq_of_type_skeleton(ts) == []
    assert dict(is_proper_type_skeleton(ts)) == {}


def test_semigen_root_label(semigen):
    root = next(s for s in proper_skeletons(semigen, "p(X, Y)", 1)
                if height(s) == 1)
    ts = type_skeleton_of(root, semigen.signature)
    child = ts.children[0]
    a, b = child.head_types
    assert isinstance(a, Param) and b.name == "list"
    v = b.args[0]
    assert child.body_types[0][0] == list_of(a)
    w = child.body_types[0][1]
    assert child.body_types[1] == (list_of(w), v)


def test_type_skeleton_json(append):
    s = next(proper_skeletons(append, "app(Xs, [], Zs), r(Xs)", 1))
    ts = type_skeleton_of(s, append.signature)
    doc = type_skeleton_to_json(ts)
    assert doc["root"] == 0
    root = doc["nodes"][0]
    assert root["kind"] == "clause"
    assert root["clauseIndex"] == GO_CLAUSE_INDEX
    assert root["label"].startswith("go <- app(")
    assert all("label" in n for n in doc["nodes"] if n["kind"] == "clause")


# ---------------------------------------------------------------- partitions

def test_partition_marks_and_builtins(nestcount):
    part = make_partition(nestcount, {"r": ("h", "b")})
    assert part.marks("r", 2) == ("h", "b")
    assert part.marks(EQ, 2) == ("h", "h")
    assert part.marks(GO, 0) == ()
    with pytest.raises(ValueError):
        part.marks("r", 3)
    with pytest.raises(ValueError):
        part.marks("missing", 1)


def test_make_partition_validation(nestcount):
    assert all_head_partition(nestcount).by_pred == {"r": ("h", "h")}
    with pytest.raises(ValueError):
        make_partition(nestcount, {"r": ("h",)})
    with pytest.raises(ValueError):
        make_partition(nestcount, {"r": ("h", "x")})
    with pytest.raises(ValueError):
        make_partition(nestcount, {"s": ("h",)})


def test_annotated_partition_from_source(nestcount):
    assert nestcount.partitions == {"r": ("h", "b")}
    part = make_partition(nestcount, nestcount.partitions)
    assert check_semi_generic(nestcount, part).passed


# ------------------------------------------------------------- head condition

def test_head_condition_verdicts(corpus):
    failing = {
        "fgs1": [3],
        "fgs2": [4],
        "nest": [1],
        "nestcount": [1],
        "semigen": [0, 1],
    }
    for name, program in corpus.items():
        rep = check_head_condition(program)
        got = [f.clause for f in rep.findings]
        assert got == failing.get(name, []), name
        assert rep.verdict == ("fail" if name in failing else "pass")


def test_head_condition_witness_text(fgs1):
    f = check_head_condition(fgs1).findings[0]
    assert f.condition == "head-condition"
    assert "(int, t(t(A)))" in f.witness
    assert "(int, t(U))" in f.witness


# ------------------------------------------------------------- semi-generic

def test_semi_generic_passes(semigen, nestcount):
    part = make_partition(semigen, {"p": ("h", "b"), "q": ("h", "b")})
    assert check_semi_generic(semigen, part).passed
    assert check_semi_generic(
        nestcount, make_partition(nestcount, {"r": ("h", "b")})).passed


def test_semi_generic_failures_move_with_the_partition(fgs1):
    # Marking only gs1's value position body-generic trips the sharing
    # condition where fs1 hands its variable over to gs1.
    rep = check_semi_generic(fgs1, make_partition(fgs1, {"gs1": ("h", "b")}))
    assert [(f.clause, f.condition) for f in rep.findings] == \
        [(2, "semi-generic-1")]
    # Also freeing fs1's value position moves the failure to the recursive
    # fs1 clause: t(t(A)) is a proper instance of the declared t(U).
    rep = check_semi_generic(
        fgs1, make_partition(fgs1, {"gs1": ("h", "b"), "fs1": ("h", "b", "h")}))
    assert (1, "semi-generic-3") in [(f.clause, f.condition) for f in rep.findings]


def test_all_head_partition_makes_every_query_semi_generic(append):
    q = parse_query("app(Xs, [], Zs), r(Xs)", append.signature)
    rep = check_semi_generic(append, all_head_partition(append), queries=(q,))
    assert rep.passed


def test_non_semi_generic_query_reported(semigen):
    part = make_partition(semigen, {"p": ("h", "b"), "q": ("h", "b")})
    q = parse_query("p(X, [Y|X])", semigen.signature)
    rep = check_semi_generic(semigen, part, queries=(q,))
    assert {f.clause for f in rep.findings} == {GO_CLAUSE_INDEX}
    assert {f.condition for f in rep.findings} == \
        {"semi-generic-2", "semi-generic-3"}


# ------------------------------------------------------------------- search

def test_search_partition_results(corpus):
    expected = {
        "semigen": {"p": ("h", "b"), "q": ("h", "b")},
        "nestcount": {"r": ("h", "b")},
        "fgs1": None,
        "fgs2": None,
        "nest": None,
    }
    for name, program in corpus.items():
        got = search_partition(program)
        if name in expected:
            want = expected[name]
            assert (got.by_pred == want if want is not None else got is None), name
        else:
            # Programs passing the head condition settle for all-head.
            assert got is not None
            assert got.by_pred == all_head_partition(program).by_pred, name


def test_search_partition_is_deterministic(semigen):
    assert search_partition(semigen) == search_partition(semigen)


def test_search_result_actually_passes(corpus):
    for program in corpus.values():
        part = search_partition(program)
        if part is not None:
            assert check_semi_generic(program, part).passed


# --------------------------------------------------------------- bounded SR

def test_bounded_check_fails_on_nesting(nest):
    q = parse_query("p(X)", nest.signature)
    rep = check_subject_reduction_bounded(nest, q, depth=4)
    assert rep.verdict == "fail"
    assert rep.depth_bound == 4
    f = rep.findings[0]
    assert f.condition == "type-skeleton-nonproper"
    assert "go <- p(list(int))" in f.witness
    assert "clash" in f.witness


def test_counterexamples_smallest_first(nest):
    q = parse_query("p(X)", nest.signature)
    ces = list(subject_reduction_counterexamples(nest, q, depth=4))
    assert [height(s) for s, _, _ in ces] == [2, 3, 4]
    for s, ts, err in ces:
        assert is_proper_skeleton(s) is not None
        assert is_proper_type_skeleton(ts) is None
        assert err.kind == "clash"


def test_bounded_check_passes(append, semigen):
    qa = parse_query("app(Xs, [], Zs), r(Xs)", append.signature)
    rep = check_subject_reduction_bounded(append, qa, depth=5)
    assert rep.passed and rep.depth_bound == 5
    qs = parse_query("p(X, Y)", semigen.signature)
    assert check_subject_reduction_bounded(semigen, qs, depth=5).passed


def test_bounded_check_requires_typable_query(nest):
    q = parse_query("p([[X]])", nest.signature)
    with pytest.raises(UntypableError):
        check_subject_reduction_bounded(nest, q, depth=2)
    with pytest.raises(UntypableError):
        monitor_derivation(nest, q, depth=2)


# ----------------------------------------------------------------- monitor

def test_monitor_passes_where_static_fails(nest):
    q = parse_query("p(X)", nest.signature)
    assert monitor_derivation(nest, q, depth=10).passed
    assert check_subject_reduction_bounded(nest, q, depth=3).verdict == "fail"


def test_monitor_append_and_fgs1(append, fgs1):
    qa = parse_query("app(Xs, [], Zs), r(Xs)", append.signature)
    assert monitor_derivation(append, qa, depth=10).passed
    qf = parse_query("fgs1(2, Y)", fgs1.signature)
    assert monitor_derivation(fgs1, qf, depth=12).passed


def test_monitor_reports_depth_and_selection(nest):
    q = parse_query("p(X)", nest.signature)
    rep = monitor_derivation(nest, q, depth=6, selection="all")
    assert rep.passed and rep.depth_bound == 6


# ------------------------------------------------ ordered split equations

def test_eq_prime_structure_and_order(semigen):
    part = make_partition(semigen, {"p": ("h", "b"), "q": ("h", "b")})
    root = next(s for s in proper_skeletons(semigen, "p(X, Y)", 1)
                if height(s) == 1)
    ts = type_skeleton_of(root, semigen.signature)
    child = ts.children[0]
    pack = lambda ts_: TCon("$vec", ts_)
    assert eq_prime_of_type_skeleton(ts, part) == [
        (pack(ts.body_types[0][:1]), pack(child.head_types[:1])),
        (pack(child.head_types[1:]), pack(ts.body_types[0][1:])),
    ]


def test_eq_prime_guaranteed_for_semi_generic(semigen):
    part = make_partition(semigen, {"p": ("h", "b"), "q": ("h", "b")})
    seen = 0
    for s in proper_skeletons(semigen, "p(X, Y)", 3):
        ts = type_skeleton_of(s, semigen.signature)
        assert ordered_unifiable(eq_prime_of_type_skeleton(ts, part)) == \
            "guaranteed"
        seen += 1
    assert seen >= 5


# ------------------------------------------------------------ instantiation

def test_assembled_typing_types_the_frontier(nest, semigen):
    checked = 0
    for program, qt in ((nest, "p(X)"), (semigen, "p(X, Y)"),
                        (nest, "r(X), p(Y)")):
        for s in proper_skeletons(program, qt, 2):
            ts = type_skeleton_of(s, program.signature)
            theta = is_proper_type_skeleton(ts)
            if theta is None:
                continue
            u = assembled_variable_typing(ts, theta)
            t = most_general_derivation_tree(s)
            judge(u, frontier(t), sig=program.signature)
            checked += 1
    assert checked >= 10


def test_report_json_shape(nest):
    q = parse_query("p(X)", nest.signature)
    doc = check_subject_reduction_bounded(nest, q, depth=3).to_json()
    assert doc["verdict"] == "fail"
    assert doc["depthBound"] == 3
    f = doc["findings"][0]
    assert set(f) == {"clause", "condition", "witness"}
    assert f["clause"] is None
