"""Command-line front end.

Exit codes: 0 when the requested analysis finds no violations, 1 when it
reports at least one, 2 when the input is rejected before analysis (file,
syntax, or typing errors).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .core import EQ_CLAUSE_INDEX, GO_CLAUSE_INDEX, Program
from .parser import ParseError, parse_program, parse_query, render, render_types
from .reports import CheckReport, Finding
from .srcheck import (
    check_head_condition,
    check_semi_generic,
    check_subject_reduction_bounded,
    label,
    make_partition,
    monitor_derivation,
    search_partition,
    subject_reduction_counterexamples,
    type_skeleton_of,
    type_skeleton_to_json,
)
from .trees import (
    BOTTOM,
    answers,
    enumerate_skeletons,
    height,
    is_proper_skeleton,
    skeleton_to_json,
)
from .typecheck import UntypableError, is_typable, most_general_type


def _use_color() -> bool:
    env = os.environ.get("TLPC_COLOR")
    if env is not None:
        return env != "0"
    return sys.stdout.isatty()


def _verdict(text: str) -> str:
    if not _use_color():
        return text
    code = "32" if text == "pass" else "31"
    return f"\x1b[{code}m{text}\x1b[0m"


def _clause_ref(i: int | None) -> str | None:
    if i is None:
        return None
    if i == GO_CLAUSE_INDEX:
        return "query"
    if i == EQ_CLAUSE_INDEX:
        return "builtin ="
    return f"clause {i + 1}"


def _print_report(title: str, rep: CheckReport) -> None:
    bound = f" (up to depth {rep.depth_bound})" if rep.depth_bound is not None else ""
    print(f"{title}: {_verdict(rep.verdict)}{bound}")
    for f in rep.findings:
        where = _clause_ref(f.clause)
        loc = f"{where}: " if where else ""
        print(f"  {loc}{f.condition}: {f.witness}")


def _skeleton_lines(node, depth: int = 0) -> list[str]:
    pad = "  " * depth
    if node is BOTTOM:
        return [f"{pad}_|_"]
    out = [f"{pad}{render(node.clause)}   [{_clause_ref(node.clause_index)}]"]
    for c in node.children:
        out.extend(_skeleton_lines(c, depth + 1))
    return out


def _type_skeleton_lines(node, depth: int = 0) -> list[str]:
    pad = "  " * depth
    if node is BOTTOM:
        return [f"{pad}_|_"]
    out = [f"{pad}{label(node)}"]
    for c in node.children:
        out.extend(_type_skeleton_lines(c, depth + 1))
    return out


def _load(path: str) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def _resolve_partition(program: Program, source: str | None):
    """The partition to check against and where it came from: explicit
    annotations win by default, otherwise an automatic search."""
    if source == "annotated" and not program.partitions:
        raise ValueError("the program has no partition annotations")
    if source != "auto" and program.partitions:
        return "annotated", make_partition(program, program.partitions)
    found = search_partition(program)
    if found is None:
        return "search", None
    return "search", found


def cmd_check(args) -> int:
    program = _load(args.file)
    doc: dict = {"file": args.file, "mode": args.mode}
    reports: list[CheckReport] = []
    if args.mode in ("semi", "both"):
        # Resolve before any output so a bad partition source fails cleanly.
        source, part = _resolve_partition(program, args.partition)

    if args.mode in ("head", "both"):
        head = check_head_condition(program)
        reports.append(head)
        doc["head"] = head.to_json()
        if not args.json:
            _print_report("head condition", head)

    if args.mode in ("semi", "both"):
        if part is None:
            semi = CheckReport((Finding(
                "semi-generic",
                "no head/body marking of the argument positions makes "
                "every clause semi-generic"),))
        else:
            semi = check_semi_generic(program, part)
        reports.append(semi)
        doc["semi"] = semi.to_json()
        doc["partition"] = None if part is None else {p: list(m) for p, m in part.by_pred.items()}
        doc["partitionSource"] = source
        if not args.json:
            if part is not None:
                marks = "; ".join(f"{p}({', '.join(m)})" for p, m in part.by_pred.items())
                print(f"partition ({source}): {marks if marks else 'none needed'}")
            _print_report("semi-generic", semi)

    ok = all(r.passed for r in reports)
    doc["verdict"] = "pass" if ok else "fail"
    if args.json:
        print(json.dumps(doc, indent=2))
    return 0 if ok else 1


def cmd_infer(args) -> int:
    program = _load(args.file)
    entries = []
    failures = 0
    for c in program.clauses:
        try:
            ct = most_general_type(c, program.signature)
            entries.append({"clause": render(c), "types": render_types(ct.types),
                            "atomTypes": [render_types(v) for v in ct.atom_types]})
        except UntypableError as e:
            failures += 1
            entries.append({"clause": render(c), "untypable": str(e)})
    if args.json:
        print(json.dumps({"file": args.file, "clauses": entries}, indent=2))
    else:
        for i, e in enumerate(entries):
            if "types" in e:
                print(f"clause {i + 1}: {e['types']}")
            else:
                print(f"clause {i + 1}: untypable: {e['untypable']}")
            print(f"  {e['clause']}")
    return 0 if failures == 0 else 1


def _typable_query(file: str, query_text: str):
    program = _load(file)
    query = parse_query(query_text, program.signature)
    if not is_typable(query, program.signature):
        raise UntypableError(f"query is not typable: {render(query)}")
    return program, query


def cmd_run(args) -> int:
    program, query = _typable_query(args.file, args.query)
    monitor = monitor_derivation(program, query, args.depth, args.selection)
    found = answers(program, query, args.depth, args.selection)
    if args.json:
        print(json.dumps({
            "file": args.file,
            "query": render(query),
            "answers": [{v.printed(): render(t) for v, t in a.items()} for a in found],
            "monitor": monitor.to_json(),
        }, indent=2))
    else:
        for a in found:
            if not a:
                print("answer: true")
            else:
                print("answer: " + ", ".join(
                    f"{v.printed()} = {render(t)}"
                    for v, t in sorted(a.items(), key=lambda kv: (kv[0].name, kv[0].idx))))
        if not found:
            print(f"no answers within {args.depth} steps")
        _print_report("derived queries typable", monitor)
    return 0 if monitor.passed else 1


def cmd_sr(args) -> int:
    program = _load(args.file)
    query = parse_query(args.query, program.signature)
    rep = check_subject_reduction_bounded(program, query, args.depth)
    doc: dict = {"file": args.file, "query": render(query), "report": rep.to_json(),
                 "counterexample": None}
    lines: list[str] = []
    if not rep.passed:
        s, ts, err = next(subject_reduction_counterexamples(program, query, args.depth))
        doc["counterexample"] = {
            "skeleton": skeleton_to_json(s),
            "typeSkeleton": type_skeleton_to_json(ts),
            "equation": f"{render(err.left)} = {render(err.right)}",
        }
        lines.append("counterexample skeleton:")
        lines.extend(_skeleton_lines(s, 1))
        lines.append("its type skeleton:")
        lines.extend(_type_skeleton_lines(ts, 1))
        lines.append(f"failing type equation: {render(err.left)} = {render(err.right)}")
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        _print_report("all type skeletons proper", rep)
        for ln in lines:
            print(ln)
    return 0 if rep.passed else 1


def cmd_skeletons(args) -> int:
    program, query = _typable_query(args.file, args.query)
    if not args.json:
        shown = 0
        for s in enumerate_skeletons(program, query, args.depth):
            shown += 1
            theta = is_proper_skeleton(s)
            status = "proper" if theta is not None else "not proper"
            extra = f", mgu {render(theta)}" if theta else ""
            print(f"skeleton {shown} (height {height(s)}): {status}{extra}")
            for ln in _skeleton_lines(s, 1):
                print(ln)
            if args.types:
                ts = type_skeleton_of(s, program.signature)
                tstat = "proper" if _type_proper(ts) else "not proper"
                print(f"  type skeleton ({tstat}):")
                for ln in _type_skeleton_lines(ts, 2):
                    print(ln)
        print(f"{shown} skeleton(s) up to depth {args.depth}")
        return 0
    entries = []
    for s in enumerate_skeletons(program, query, args.depth):
        theta = is_proper_skeleton(s)
        entry = {
            "height": height(s),
            "proper": theta is not None,
            "mgu": render(theta) if theta is not None else None,
            "skeleton": skeleton_to_json(s),
        }
        if args.types:
            ts = type_skeleton_of(s, program.signature)
            entry["typeSkeleton"] = type_skeleton_to_json(ts)
            entry["typeProper"] = _type_proper(ts)
        entries.append(entry)
    print(json.dumps({"file": args.file, "query": render(query),
                      "depth": args.depth, "skeletons": entries}, indent=2))
    return 0


def _type_proper(ts) -> bool:
    from .srcheck import is_proper_type_skeleton
    return is_proper_type_skeleton(ts) is not None


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tlpc",
        description="Type-check, run, and statically analyse typed logic programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, query=False):
        p.add_argument("file", help="program file (.tlp)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if query:
            p.add_argument("--query", required=True, help="query text, e.g. 'p(X), q(X)'")
            p.add_argument("--depth", type=int, default=5,
                           help="bound on derivation steps / tree height (default 5)")

    p = sub.add_parser("check", help="static checks: head condition, semi-genericity")
    common(p)
    p.add_argument("--mode", choices=("head", "semi", "both"), default="both")
    p.add_argument("--partition", choices=("auto", "annotated"), default=None,
                   help="partition source for the semi-generic check "
                        "(default: annotations when present, else search)")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("infer", help="most general type of every clause")
    common(p)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("run", help="answers within a step bound, with typability monitor")
    common(p, query=True)
    p.add_argument("--selection", choices=("leftmost", "all"), default="leftmost")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sr", help="bounded check that type skeletons stay unifiable")
    common(p, query=True)
    p.set_defaults(fn=cmd_sr)

    p = sub.add_parser("skeletons", help="dump skeletons for a query")
    common(p, query=True)
    p.add_argument("--types", action="store_true", help="include type skeletons")
    p.set_defaults(fn=cmd_skeletons)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "depth", 0) < 0:
        print("error: --depth must be >= 0", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except ParseError as e:
        for d in e.diagnostics.entries:
            print(str(d), file=sys.stderr)
        return 2
    except UntypableError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
