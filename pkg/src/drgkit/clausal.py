"""Clausal-form DRSs: data model, parser, serializer and well-formedness checks.

A clausal-form file holds one clause per line::

    b1 REF x1                % 0:3
    b1 house "n.05" x1       % 4:9
    b2 Agent e1 x1           % 14:19

Documents are separated by blank lines.  ``%%% id: <id>`` and
``%%% text: <raw text>`` comment lines in front of a document set its id and
raw text; any other line that is entirely a comment is skipped.
"""
from __future__ import annotations

import enum
import io
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .exceptions import IllFormed, MalformedClause, Unclassifiable

__all__ = [
    "SymbolClass",
    "Position",
    "Signature",
    "Clause",
    "ClausalDrs",
    "classify",
    "parse_clf",
    "read_clf",
    "serialize_clf",
    "validate",
    "equivalent",
    "WellFormednessIssue",
    "UnintroducedReferent",
    "DuplicateRef",
    "DanglingBox",
    "WrongArity",
    "IllTypedArgument",
    "DuplicateClause",
    "SelfConnective",
    "Disconnected",
]

BOX_RE = re.compile(r"b\d+$")
REFERENT_RE = re.compile(r"[xestp]\d+$")
CONSTANT_RE = re.compile(r'"[^"]+"$')
SENSE_RE = re.compile(r'"([nvasr])\.(\d+)"$')
CONCEPT_RE = re.compile(r"(.+)\.([nvasr])\.(\d+)$")
SPAN_RE = re.compile(r"(?<![\d:])(\d+):(\d+)(?![\d:])")
HEADER_RE = re.compile(r"%%%\s*(id|text):\s?(.*)$")
TOKEN_RE = re.compile(r'"[^"]*"|[^\s"]+')
ROLE_RE = re.compile(r"[A-Z][A-Za-z0-9-]*$")


class SymbolClass(enum.Enum):
    BOX = "BoxLabel"
    REFERENT = "DiscourseReferent"
    CONSTANT = "Constant"
    ROLE = "SemanticRole"
    COMPARISON = "ComparisonRelation"
    CONCEPT = "Concept"
    RELATION = "DiscourseRelation"
    OPERATOR = "DrsOperator"
    REF = "RefIntroducer"

    @property
    def is_binary(self):
        return self in (SymbolClass.ROLE, SymbolClass.COMPARISON)

    @property
    def is_connective(self):
        return self in (SymbolClass.RELATION, SymbolClass.OPERATOR)


class Position(enum.Enum):
    BOX = "box"
    HEAD = "head"
    ARG = "arg"


@dataclass(frozen=True)
class Signature:
    """Closed inventories of operator, relation and comparison symbols."""

    operators: frozenset = frozenset()
    relations: frozenset = frozenset()
    comparisons: frozenset = frozenset()

    @classmethod
    def load(cls, path=None):
        if path is None:
            text = resources.files("drgkit.data").joinpath("signature.yaml").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        data = yaml.safe_load(text) or {}
        return cls(
            operators=frozenset(data.get("operators") or ()),
            relations=frozenset(data.get("relations") or ()),
            comparisons=frozenset(data.get("comparisons") or ()),
        )

    @property
    def connectives(self):
        return self.operators | self.relations


@lru_cache(maxsize=None)
def default_signature():
    return Signature.load()


def classify(token, position=Position.HEAD, sense=None, signature=None):
    """Return the :class:`SymbolClass` of ``token`` at ``position``.

    For a concept head pass the quoted sense that follows the lemma, e.g.
    ``classify("house", sense='"n.05"')``.  Raises :class:`Unclassifiable`.
    """
    sig = signature or default_signature()
    position = Position(position)
    if position is Position.BOX:
        if BOX_RE.match(token):
            return SymbolClass.BOX
        raise Unclassifiable(token)
    if position is Position.ARG:
        if BOX_RE.match(token):
            return SymbolClass.BOX
        if REFERENT_RE.match(token):
            return SymbolClass.REFERENT
        if CONSTANT_RE.match(token):
            return SymbolClass.CONSTANT
        raise Unclassifiable(token)
    if token == "REF":
        return SymbolClass.REF
    if token in sig.operators:
        return SymbolClass.OPERATOR
    if token in sig.relations:
        return SymbolClass.RELATION
    if token in sig.comparisons:
        return SymbolClass.COMPARISON
    if sense is not None:
        if SENSE_RE.match(sense) and token and '"' not in token:
            return SymbolClass.CONCEPT
        raise Unclassifiable(f"{token} {sense}")
    if ROLE_RE.match(token) and not token.isupper():
        return SymbolClass.ROLE
    raise Unclassifiable(token)


def term_class(token):
    """Classify an argument token, or return None when it is not a term."""
    if BOX_RE.match(token):
        return SymbolClass.BOX
    if REFERENT_RE.match(token):
        return SymbolClass.REFERENT
    if CONSTANT_RE.match(token):
        return SymbolClass.CONSTANT
    return None


def is_variable(token):
    return bool(BOX_RE.match(token) or REFERENT_RE.match(token))


@dataclass(frozen=True)
class Clause:
    """One clause.  Concept heads are stored canonically as ``lemma.pos.NN``."""

    box: str
    head: str
    args: tuple
    kind: SymbolClass
    anchor: Optional[tuple] = None
    comment: Optional[str] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if self.anchor is not None and not isinstance(self.anchor, tuple):
            object.__setattr__(self, "anchor", tuple(self.anchor))

    @property
    def key(self):
        """Content of the clause without anchor metadata."""
        return (self.box, self.head, self.args)

    @property
    def lemma(self):
        return CONCEPT_RE.match(self.head).group(1)

    @property
    def sense(self):
        m = CONCEPT_RE.match(self.head)
        return f'"{m.group(2)}.{m.group(3)}"'

    def fields(self):
        if self.kind is SymbolClass.CONCEPT:
            return (self.box, self.lemma, self.sense) + self.args
        return (self.box, self.head) + self.args

    def to_line(self):
        line = " ".join(self.fields())
        comment = self.comment
        if comment is not None and _first_span(comment) != self.anchor:
            comment = None
        if comment is None and self.anchor is not None:
            comment = f"{self.anchor[0]}:{self.anchor[1]}"
        if comment is not None:
            line += " % " + comment if comment else " %"
        return line


@dataclass(frozen=True)
class ClausalDrs:
    """An ordered multiset of clauses making up one document's DRS."""

    doc_id: str
    clauses: tuple
    raw_text: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.clauses, tuple):
            object.__setattr__(self, "clauses", tuple(self.clauses))

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    @cached_property
    def boxes(self):
        """Box labels in first-mention order."""
        seen = {}
        for c in self.clauses:
            seen.setdefault(c.box, None)
            for a in c.args:
                if BOX_RE.match(a):
                    seen.setdefault(a, None)
        return tuple(seen)

    @cached_property
    def referents(self):
        seen = {}
        for c in self.clauses:
            for a in c.args:
                if REFERENT_RE.match(a):
                    seen.setdefault(a, None)
        return tuple(seen)

    @cached_property
    def constants(self):
        seen = {}
        for c in self.clauses:
            for a in c.args:
                if CONSTANT_RE.match(a):
                    seen.setdefault(a, None)
        return tuple(seen)

    @cached_property
    def introducer(self):
        """referent -> box of its (first) REF clause."""
        out = {}
        for c in self.clauses:
            if c.kind is SymbolClass.REF and c.args:
                out.setdefault(c.args[0], c.box)
        return out

    @cached_property
    def introduced(self):
        """box -> referents introduced in it, in clause order."""
        out = defaultdict(list)
        for ref, box in self.introducer.items():
            out[box].append(ref)
        return {b: tuple(rs) for b, rs in out.items()}

    @cached_property
    def concepts(self):
        """referent -> distinct concepts applied to it, in clause order."""
        out = defaultdict(dict)
        for c in self.clauses:
            if c.kind is SymbolClass.CONCEPT and c.args:
                out[c.args[0]].setdefault(c.head, None)
        return {r: tuple(cs) for r, cs in out.items()}


def _find_comment(line):
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "%" and not in_quote:
            return i
    return -1


def _first_span(comment):
    m = SPAN_RE.search(comment)
    if m is None:
        return None
    return (int(m.group(1)), int(m.group(2)))


def parse_clause(line, line_no=0, signature=None, doc_id=None):
    """Parse a single non-empty, non-comment line into a :class:`Clause`."""
    sig = signature or default_signature()
    cut = _find_comment(line)
    if cut >= 0:
        content, comment = line[:cut], line[cut + 1:].strip()
    else:
        content, comment = line, None
    content = content.strip()
    tokens = TOKEN_RE.findall(content)
    if "".join(tokens) != "".join(content.split()):
        raise MalformedClause(line_no, f"unbalanced quotes in {content!r}", doc_id)
    anchor = _first_span(comment) if comment is not None else None
    try:
        return _build_clause(tokens, sig, anchor, comment)
    except Unclassifiable as exc:
        raise MalformedClause(line_no, str(exc), doc_id) from None
    except ValueError as exc:
        raise MalformedClause(line_no, str(exc), doc_id) from None


def _build_clause(tokens, sig, anchor, comment):
    if len(tokens) not in (3, 4):
        raise ValueError(f"wrong arity: {len(tokens)} fields in {' '.join(tokens)!r}")
    box = tokens[0]
    classify(box, Position.BOX)
    if len(tokens) == 4 and SENSE_RE.match(tokens[2]):
        lemma, sense, ref = tokens[1], tokens[2], tokens[3]
        classify(lemma, Position.HEAD, sense=sense, signature=sig)
        if classify(ref, Position.ARG) is not SymbolClass.REFERENT:
            raise ValueError(f"concept argument {ref!r} is not a discourse referent")
        head = f"{lemma}.{sense[1:-1]}"
        return Clause(box, head, (ref,), SymbolClass.CONCEPT, anchor, comment)
    head = tokens[1]
    kind = classify(head, Position.HEAD, signature=sig)
    args = tuple(tokens[2:])
    arg_kinds = [classify(a, Position.ARG) for a in args]
    if kind is SymbolClass.REF:
        if len(args) != 1:
            raise ValueError("wrong arity: REF takes one argument")
        if arg_kinds[0] is not SymbolClass.REFERENT:
            raise ValueError(f"REF argument {args[0]!r} is not a discourse referent")
    elif kind.is_connective:
        if len(args) != 1:
            raise ValueError(f"wrong arity: {head} relates two boxes")
        if arg_kinds[0] is not SymbolClass.BOX:
            raise ValueError(f"{head} argument {args[0]!r} is not a box label")
    elif kind.is_binary:
        if len(args) != 2:
            raise ValueError(f"wrong arity: {head} takes two arguments")
        for a, k in zip(args, arg_kinds):
            if k is SymbolClass.BOX:
                raise ValueError(f"{head} argument {a!r} is a box label")
    else:
        raise Unclassifiable(head)
    return Clause(box, head, args, kind, anchor, comment)


def parse_clf(text, signature=None, strict=False):
    """Parse clausal-form text (a string or text stream) into documents.

    With ``strict=True`` an :class:`IllFormed` error is raised for the first
    document that fails :func:`validate`; otherwise ill-formed documents are
    returned as parsed and left for the caller to check.
    """
    if not isinstance(text, str):
        text = text.read()
    docs = []
    current = []
    doc_id = raw = None

    def flush():
        nonlocal current, doc_id, raw
        if current:
            drs = ClausalDrs(doc_id if doc_id is not None else f"doc{len(docs)}", tuple(current), raw)
            if strict:
                issues = validate(drs, signature)
                if issues:
                    raise IllFormed(drs.doc_id, "; ".join(map(str, issues)))
            docs.append(drs)
            current, doc_id, raw = [], None, None

    for line_no, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped:
            flush()
            continue
        if stripped.startswith("%"):
            m = HEADER_RE.match(stripped)
            if m:
                if current:
                    flush()
                if m.group(1) == "id":
                    doc_id = m.group(2).strip()
                else:
                    raw = m.group(2)
            continue
        pending = doc_id if doc_id is not None else f"doc{len(docs)}"
        current.append(parse_clause(stripped, line_no, signature, pending))
    flush()
    return docs


def read_clf(path, signature=None, strict=False):
    with open(path, encoding="utf-8", newline=None) as fh:
        return parse_clf(fh.read(), signature, strict)


def serialize_clf(docs):
    """Render documents as clausal-form text that :func:`parse_clf` reads back."""
    if isinstance(docs, ClausalDrs):
        docs = [docs]
    chunks = []
    for d in docs:
        lines = [f"%%% id: {d.doc_id}"]
        if d.raw_text is not None:
            lines.append(f"%%% text: {d.raw_text}")
        lines.extend(c.to_line() for c in d.clauses)
        chunks.append("\n".join(lines) + "\n")
    return "\n".join(chunks)


# --------------------------------------------------------------------------
# well-formedness

@dataclass(frozen=True)
class WellFormednessIssue:
    subject: str

    def __str__(self):
        return f"{type(self).__name__}({self.subject})"


class UnintroducedReferent(WellFormednessIssue):
    pass


class DuplicateRef(WellFormednessIssue):
    pass


class DanglingBox(WellFormednessIssue):
    """A box that only occurs as the argument of discourse connectives."""


class WrongArity(WellFormednessIssue):
    pass


class IllTypedArgument(WellFormednessIssue):
    pass


class DuplicateClause(WellFormednessIssue):
    pass


class SelfConnective(WellFormednessIssue):
    pass


class Disconnected(WellFormednessIssue):
    """Part of the DRS shares no box, referent or connective with the rest."""


def _check_clause(c):
    arity = {
        SymbolClass.REF: 1,
        SymbolClass.CONCEPT: 1,
        SymbolClass.OPERATOR: 1,
        SymbolClass.RELATION: 1,
        SymbolClass.ROLE: 2,
        SymbolClass.COMPARISON: 2,
    }.get(c.kind)
    text = " ".join(c.fields()) if arity == len(c.args) else f"{c.box} {c.head} {' '.join(c.args)}"
    if arity is None or len(c.args) != arity or not BOX_RE.match(c.box):
        return WrongArity(text)
    kinds = [term_class(a) for a in c.args]
    if c.kind in (SymbolClass.REF, SymbolClass.CONCEPT):
        ok = kinds[0] is SymbolClass.REFERENT
    elif c.kind.is_connective:
        ok = kinds[0] is SymbolClass.BOX
    else:
        ok = all(k in (SymbolClass.REFERENT, SymbolClass.CONSTANT) for k in kinds)
    return None if ok else IllTypedArgument(text)


def validate(drs, signature=None):
    """Return the list of well-formedness issues of ``drs`` (empty iff well-formed)."""
    issues = []
    for c in drs.clauses:
        problem = _check_clause(c)
        if problem is not None:
            issues.append(problem)
    if issues:
        return issues

    ref_counts = Counter(c.args[0] for c in drs.clauses if c.kind is SymbolClass.REF)
    for ref, n in ref_counts.items():
        if n > 1:
            issues.append(DuplicateRef(ref))
    reported = set()
    for c in drs.clauses:
        if c.kind is SymbolClass.REF:
            continue
        for a in c.args:
            if REFERENT_RE.match(a) and a not in ref_counts and a not in reported:
                reported.add(a)
                issues.append(UnintroducedReferent(a))
    clause_counts = Counter(c.key for c in drs.clauses if c.kind is not SymbolClass.REF)
    for key, n in clause_counts.items():
        if n > 1:
            issues.append(DuplicateClause(" ".join((key[0], key[1]) + key[2])))
    for c in drs.clauses:
        if c.kind.is_connective and c.args[0] == c.box:
            issues.append(SelfConnective(c.box))
    owners = {c.box for c in drs.clauses}
    for b in drs.boxes:
        if b not in owners:
            issues.append(DanglingBox(b))
    if not issues:
        stray = _disconnected(drs)
        if stray is not None:
            issues.append(Disconnected(stray))
    return issues


def _disconnected(drs):
    """First variable not reachable from the first box, ignoring concept clauses."""
    adj = defaultdict(set)
    for c in drs.clauses:
        if c.kind is SymbolClass.CONCEPT:
            continue
        for a in c.args:
            if is_variable(a):
                adj[c.box].add(a)
                adj[a].add(c.box)
        if c.kind.is_binary and all(is_variable(a) for a in c.args):
            adj[c.args[0]].add(c.args[1])
            adj[c.args[1]].add(c.args[0])
    nodes = list(drs.boxes) + list(drs.referents)
    if not nodes:
        return None
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    for n in nodes:
        if n not in seen:
            return n
    return None


# --------------------------------------------------------------------------
# equality up to renaming

def _variables(clauses):
    seen = {}
    for c in clauses:
        for tok in (c.box,) + c.args:
            if is_variable(tok):
                seen.setdefault(tok, None)
    return list(seen)


def _profile(var, clauses):
    prof = Counter()
    for c in clauses:
        toks = (c.box,) + c.args
        for i, tok in enumerate(toks):
            if tok == var:
                shape = tuple("*" if is_variable(t) else t for t in toks)
                prof[(c.head, i, shape)] += 1
    return prof


def equivalent(a, b):
    """True when ``a`` and ``b`` have the same clause multiset up to a
    bijective renaming of box labels and discourse referents.

    Anchors, comments, clause order and document ids are ignored.
    """
    ca = Counter(c.key for c in a.clauses)
    cb = Counter(c.key for c in b.clauses)
    if sum(ca.values()) != sum(cb.values()):
        return False
    if Counter(k[1] for k in ca.elements()) != Counter(k[1] for k in cb.elements()):
        return False
    va, vb = _variables(a.clauses), _variables(b.clauses)
    if len(va) != len(vb):
        return False
    pa = {v: _profile(v, a.clauses) for v in va}
    pb = {v: _profile(v, b.clauses) for v in vb}
    cands = {}
    for v in va:
        kind = term_class(v)
        cands[v] = [w for w in vb if term_class(w) is kind and pb[w] == pa[v]]
        if not cands[v]:
            return False
    order = sorted(va, key=lambda v: len(cands[v]))
    by_var = defaultdict(list)
    for key in ca:
        for tok in (key[0],) + key[2]:
            if is_variable(tok):
                by_var[tok].append(key)

    mapping, used = {}, set()

    def rename(key):
        return (mapping[key[0]], key[1], tuple(mapping.get(t, t) if is_variable(t) else t for t in key[2]))

    def consistent(v):
        for key in by_var[v]:
            toks = (key[0],) + key[2]
            if all(t in mapping for t in toks if is_variable(t)):
                if cb.get(rename(key), 0) != ca[key]:
                    return False
        return True

    def search(i):
        if i == len(order):
            return True
        v = order[i]
        for w in cands[v]:
            if w in used:
                continue
            mapping[v] = w
            used.add(w)
            if consistent(v) and search(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return search(0)


def rename(drs, mapping, doc_id=None):
    """Return ``drs`` with variables renamed through ``mapping``."""
    def sub(tok):
        return mapping.get(tok, tok)

    clauses = tuple(
        Clause(sub(c.box), c.head, tuple(sub(a) for a in c.args), c.kind, c.anchor, c.comment)
        for c in drs.clauses
    )
    return ClausalDrs(doc_id or drs.doc_id, clauses, drs.raw_text)
