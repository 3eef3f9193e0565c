"""Prescriptively typed logic programs: parsing, type checking, bounded
resolution, and static subject-reduction analysis."""

from .core import (
    Atom,
    Clause,
    Fun,
    FuncDecl,
    Param,
    PredDecl,
    Program,
    Signature,
    TCon,
    TermSubst,
    TypeSubst,
    Var,
    validate_signature,
    variant_terms,
    variant_types,
    wrap_query,
)
from .corpus import corpus_names, corpus_text, load_corpus
from .parser import (
    ParseError,
    parse_clause,
    parse_program,
    parse_query,
    parse_term,
    render,
)
from .reports import CheckReport, Finding
from .srcheck import (
    Partition,
    TypeSkeleton,
    all_head_partition,
    check_head_condition,
    check_semi_generic,
    check_subject_reduction_bounded,
    is_proper_type_skeleton,
    make_partition,
    monitor_derivation,
    search_partition,
    type_skeleton_of,
)
from .trees import (
    BOTTOM,
    Derivation,
    DerivationTree,
    GroundAtomSet,
    Skeleton,
    answers,
    derivations,
    enumerate_skeletons,
    frontier,
    head_atom,
    is_proper_skeleton,
    most_general_derivation_tree,
    node_atoms,
    skeleton_of,
    tp_fixpoint,
)
from .typecheck import (
    ClauseTyping,
    JudgementProof,
    UntypableError,
    is_typable,
    judge,
    most_general_type,
    most_general_type_wrt,
)
from .unify import UnificationError, mgu_terms, mgu_types, ordered_unifiable

__version__ = "0.1.0"

__all__ = [
    "Atom", "BOTTOM", "CheckReport", "Clause", "ClauseTyping", "Derivation",
    "DerivationTree", "Finding", "Fun", "FuncDecl", "GroundAtomSet",
    "JudgementProof", "ParseError", "Param", "Partition", "PredDecl",
    "Program", "Signature", "Skeleton", "TCon", "TermSubst", "TypeSkeleton",
    "TypeSubst", "UnificationError", "UntypableError", "Var",
    "all_head_partition", "answers", "check_head_condition",
    "check_semi_generic", "check_subject_reduction_bounded", "corpus_names",
    "corpus_text", "derivations", "enumerate_skeletons", "frontier",
    "head_atom", "is_proper_skeleton", "is_proper_type_skeleton",
    "is_typable", "judge", "load_corpus", "make_partition", "mgu_terms",
    "mgu_types", "monitor_derivation", "most_general_derivation_tree",
    "most_general_type", "most_general_type_wrt", "node_atoms",
    "ordered_unifiable", "parse_clause", "parse_program", "parse_query",
    "parse_term", "render", "search_partition", "skeleton_of", "tp_fixpoint",
    "type_skeleton_of", "validate_signature", "variant_terms",
    "variant_types", "wrap_query",
]
