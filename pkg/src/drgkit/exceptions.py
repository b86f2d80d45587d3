"""Exception classes raised across drgkit."""


class DrgkitError(Exception):
    """Base class for all drgkit errors."""


class MalformedClause(DrgkitError, ValueError):
    """A clausal-form line has the wrong arity or an unclassifiable token."""

    def __init__(self, line_no, reason, doc_id=None):
        self.line_no = line_no
        self.reason = reason
        self.doc_id = doc_id
        where = f"line {line_no}" if doc_id is None else f"{doc_id}, line {line_no}"
        super().__init__(f"{where}: {reason}")


class Unclassifiable(DrgkitError, ValueError):
    def __init__(self, token):
        self.token = token
        super().__init__(f"cannot classify token {token!r}")


class IllFormed(DrgkitError, ValueError):
    """Raised by strict parsing when a document is not a well-formed DRS."""

    def __init__(self, doc_id, reason):
        self.doc_id = doc_id
        self.reason = reason
        super().__init__(f"{doc_id}: {reason}")


class IllFormedInput(IllFormed):
    """Encoding was requested for a DRS that fails validation."""

    def __init__(self, doc_id, issues):
        self.issues = list(issues)
        super().__init__(doc_id, "; ".join(str(i) for i in self.issues))


class NoMostSpecificConcept(DrgkitError, ValueError):
    def __init__(self, referent, concepts):
        self.referent = referent
        self.concepts = tuple(concepts)
        super().__init__(
            f"NoMostSpecificConcept: referent {referent} has no unique most "
            f"specific concept among {', '.join(self.concepts)}"
        )


class NonConformingGraph(DrgkitError, ValueError):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)


class SchemaError(DrgkitError, ValueError):
    """Interchange JSON does not follow the graph schema; ``path`` names the field."""

    def __init__(self, path, reason=""):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}" if reason else path)


class GraphError(DrgkitError, ValueError):
    """A graph violates a structural invariant (dangling edge, self-loop, ...)."""


class CyclicHypernymy(DrgkitError, ValueError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("hypernym cycle: " + " -> ".join(self.cycle))


class MalformedLine(DrgkitError, ValueError):
    def __init__(self, line_no, line):
        self.line_no = line_no
        super().__init__(f"line {line_no}: expected 'child<TAB>parent', got {line!r}")


class DocIdMismatch(DrgkitError, ValueError):
    def __init__(self, unmatched):
        self.unmatched = sorted(unmatched)
        super().__init__("system documents without gold counterpart: " + ", ".join(self.unmatched))
