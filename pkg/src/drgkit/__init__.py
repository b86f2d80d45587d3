"""Discourse Representation Structures as graphs: encode, decode and score."""
from .clausal import ClausalDrs, Clause, equivalent, parse_clf, read_clf, serialize_clf, validate
from .encoding import ENCODINGS, EncodingSpec, decode, edge_reduction, encode
from .estimators import DrgEncoder, DrgMatcher
from .exceptions import (
    DocIdMismatch,
    DrgkitError,
    IllFormed,
    IllFormedInput,
    MalformedClause,
    NoMostSpecificConcept,
    NonConformingGraph,
    SchemaError,
)
from .graph import Drg, Edge, Node, NodeKind, from_interchange, read_jsonl, to_interchange, write_jsonl
from .lattice import ConceptLattice
from .matching import MatchResult, SearchBudget, clause_match, mces, schedule_candidates, score_corpus

__version__ = "0.1.0"

__all__ = [
    "Clause",
    "ClausalDrs",
    "parse_clf",
    "read_clf",
    "serialize_clf",
    "validate",
    "equivalent",
    "EncodingSpec",
    "ENCODINGS",
    "encode",
    "decode",
    "edge_reduction",
    "DrgEncoder",
    "DrgMatcher",
    "Drg",
    "Node",
    "Edge",
    "NodeKind",
    "to_interchange",
    "from_interchange",
    "read_jsonl",
    "write_jsonl",
    "ConceptLattice",
    "SearchBudget",
    "MatchResult",
    "schedule_candidates",
    "mces",
    "score_corpus",
    "clause_match",
    "DrgkitError",
    "MalformedClause",
    "IllFormed",
    "IllFormedInput",
    "NoMostSpecificConcept",
    "NonConformingGraph",
    "SchemaError",
    "DocIdMismatch",
]
