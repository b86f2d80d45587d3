"""Estimator-style wrappers: configure once, then apply to whole corpora."""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .encoding import decode, encode
from .exceptions import DrgkitError
from .graph import Drg
from .matching import score_corpus
from .validation import (
    check_budget,
    check_clausal_corpus,
    check_encoding,
    check_graph_corpus,
    check_lattice,
)

__all__ = ["DrgEncoder", "DrgMatcher"]


class DrgEncoder(TransformerMixin, BaseEstimator):
    """Turn clausal DRSs into graphs of one encoding.

    Parameters
    ----------
    encoding : str or EncodingSpec
    hypernyms : path, ConceptLattice or None
        Only consulted by the ``cref`` encodings; ``None`` uses the bundled lattice.
    on_error : {"null", "raise"}
        ``"null"`` turns a failing document into a null graph that carries the
        reason, so that corpora stay aligned by document id.
    """

    def __init__(self, encoding="chain-bnode-cref-implicit", hypernyms=None, on_error="null"):
        self.encoding = encoding
        self.hypernyms = hypernyms
        self.on_error = on_error

    def fit(self, X=None, y=None):
        if self.on_error not in ("null", "raise"):
            raise ValueError(f"on_error must be 'null' or 'raise', got {self.on_error!r}")
        self.spec_ = check_encoding(self.encoding)
        self.lattice_ = check_lattice(self.hypernyms) if self.spec_.lossy else None
        return self

    def _encode_one(self, drs):
        try:
            return encode(drs, self.spec_, self.lattice_)
        except DrgkitError as exc:
            if self.on_error == "raise":
                raise
            return Drg.null(drs.doc_id, self.spec_.name, exc)

    def transform(self, X):
        check_is_fitted(self, "spec_")
        return [self._encode_one(d) for d in check_clausal_corpus(X)]

    def inverse_transform(self, X):
        """Decode graphs back to clausal DRSs; null graphs give ``None``."""
        check_is_fitted(self, "spec_")
        return [None if g.is_null else decode(g, self.spec_) for g in check_graph_corpus(X)]


class DrgMatcher(BaseEstimator):
    """Score system graphs against a gold corpus given to :meth:`fit`.

    Per-document scores come from a budgeted maximum common edge subgraph
    search; :meth:`score` is their macro average.
    """

    def __init__(self, max_expansions=500_000, max_candidate_pairs=10_000, wall_clock_ms=None,
                 seed=0, workers=1, anchors=False, tops=True):
        self.max_expansions = max_expansions
        self.max_candidate_pairs = max_candidate_pairs
        self.wall_clock_ms = wall_clock_ms
        self.seed = seed
        self.workers = workers
        self.anchors = anchors
        self.tops = tops

    def fit(self, X, y=None):
        self.gold_ = check_graph_corpus(X, "gold")
        self.budget_ = check_budget(self.max_candidate_pairs, self.max_expansions, self.wall_clock_ms)
        return self

    def report(self, X):
        """Full :class:`CorpusScore` for the system graphs ``X``."""
        check_is_fitted(self, "gold_")
        return score_corpus(
            check_graph_corpus(X, "system"),
            self.gold_,
            budget=self.budget_,
            seed=self.seed,
            workers=self.workers,
            anchors=self.anchors,
            tops=self.tops,
        )

    def predict(self, X):
        """Per-document F1, in gold order (gold nulls left out)."""
        return [d.f1 for d in self.report(X).docs]

    def score(self, X, y=None):
        return self.report(X).macro_f1
