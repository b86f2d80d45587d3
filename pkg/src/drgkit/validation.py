"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

from collections.abc import Iterable

from .clausal import ClausalDrs
from .encoding import ENCODINGS, EncodingSpec
from .graph import Drg
from .lattice import ConceptLattice
from .matching import SearchBudget

__all__ = [
    "check_encoding",
    "check_lattice",
    "check_budget",
    "check_clausal_corpus",
    "check_graph_corpus",
]


def check_encoding(encoding):
    """Accept an :class:`EncodingSpec` or one of the canonical names."""
    if isinstance(encoding, EncodingSpec):
        return encoding
    if isinstance(encoding, str) and encoding in ENCODINGS:
        return ENCODINGS[encoding]
    raise ValueError(f"unknown encoding {encoding!r}; expected one of {', '.join(ENCODINGS)}")


def check_lattice(hypernyms):
    """``None`` -> bundled lattice, a path -> loaded file, a lattice -> itself."""
    if isinstance(hypernyms, ConceptLattice):
        return hypernyms
    return ConceptLattice.load(hypernyms)


def check_budget(max_candidate_pairs, max_expansions, wall_clock_ms=None):
    return SearchBudget(max_candidate_pairs, max_expansions, wall_clock_ms)


def _as_list(X, kind, name):
    if isinstance(X, kind):
        X = [X]
    if isinstance(X, (str, bytes)) or not isinstance(X, Iterable):
        raise TypeError(f"{name} must be a {kind.__name__} or an iterable of them")
    items = list(X)
    for i, item in enumerate(items):
        if not isinstance(item, kind):
            raise TypeError(f"{name}[{i}] is {type(item).__name__}, expected {kind.__name__}")
    return items


def _unique_ids(items, name):
    seen = set()
    for item in items:
        if item.doc_id in seen:
            raise ValueError(f"duplicate document id {item.doc_id!r} in {name}")
        seen.add(item.doc_id)


def check_clausal_corpus(X, name="X"):
    docs = _as_list(X, ClausalDrs, name)
    _unique_ids(docs, name)
    return docs


def check_graph_corpus(X, name="X"):
    graphs = _as_list(X, Drg, name)
    _unique_ids(graphs, name)
    return graphs
