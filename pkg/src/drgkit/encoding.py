"""The family of DRS-to-graph encodings and their inverse.

An encoding is a point on four axes:

* argument positions of binary predicates: ``fork`` (predicate node with
  ``a1``/``a2`` out-edges), ``chain`` (``arg1 -> predicate -> arg2``,
  unlabeled) or ``chainlab`` (chain plus ``a1``/``a2`` labels);
* binary predicates: labeled node (``bnode``) or unlabeled node reached by an
  edge carrying the predicate name (``breif``);
* concepts: labeled node (``cnode``), reified node (``creif``), labeled edge
  from box to referent (``cedge``) or label on the referent node (``cref``,
  lossy: only the most specific concept survives);
* box membership of binary predicates: explicit ``in`` edges, or
  ``implicit`` where the edge is dropped whenever the predicate sits in the
  box that introduces its first argument.

Only the thirteen combinations in :data:`ENCODINGS` can be constructed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .clausal import (
    CONCEPT_RE,
    CONSTANT_RE,
    Clause,
    ClausalDrs,
    SymbolClass,
    classify,
    default_signature,
    validate,
)
from .exceptions import IllFormedInput, NoMostSpecificConcept, NonConformingGraph, Unclassifiable
from .graph import Drg, Edge, Node, NodeKind, stats
from .lattice import ConceptLattice, most_specific

__all__ = [
    "ArgStyle",
    "BinaryStyle",
    "ConceptStyle",
    "Membership",
    "EncodingSpec",
    "ENCODINGS",
    "ALIASES",
    "encode",
    "decode",
    "edge_reduction",
    "most_specific_concepts",
    "tops_of",
]

ARG1, ARG2 = "a1", "a2"
IN = "in"
BB_REFERENT, BB_CONDITION = "referent", "condition"
PRESUPPOSITION = "PRESUPPOSITION"


class ArgStyle(enum.Enum):
    FORK = "fork"
    CHAIN = "chain"
    CHAIN_LABELED = "chainlab"


class BinaryStyle(enum.Enum):
    NODE = "bnode"
    REIFIED = "breif"


class ConceptStyle(enum.Enum):
    NODE = "cnode"
    REIFIED = "creif"
    EDGE = "cedge"
    ON_REFERENT = "cref"


class Membership(enum.Enum):
    EXPLICIT = "explicit"
    IMPLICIT_A1 = "implicit"


_F, _C, _CL = ArgStyle.FORK, ArgStyle.CHAIN, ArgStyle.CHAIN_LABELED
_BN, _BR = BinaryStyle.NODE, BinaryStyle.REIFIED
_CN, _CR, _CE, _CO = ConceptStyle.NODE, ConceptStyle.REIFIED, ConceptStyle.EDGE, ConceptStyle.ON_REFERENT
_EX, _IM = Membership.EXPLICIT, Membership.IMPLICIT_A1

# (args, binary, concept, membership, bb_star), in the column order of the evaluation table
_TABLE = (
    (_F, _BN, _CN, _EX, True),
    (_F, _BN, _CN, _EX, False),
    (_F, _BR, _CR, _EX, False),
    (_F, _BR, _CE, _EX, False),
    (_F, _BN, _CE, _EX, False),
    (_C, _BN, _CE, _EX, False),
    (_CL, _BN, _CE, _EX, False),
    (_F, _BR, _CO, _EX, False),
    (_F, _BN, _CO, _EX, False),
    (_C, _BN, _CO, _EX, False),
    (_CL, _BN, _CO, _EX, False),
    (_C, _BN, _CO, _IM, False),
    (_CL, _BN, _CO, _IM, False),
)

ALIASES = {"bb-star": "BB*", "fork-breif-creif": "Liu18", "fork-breif-cedge": "Liu18*"}


@dataclass(frozen=True)
class EncodingSpec:
    args: ArgStyle
    binary: BinaryStyle
    concept: ConceptStyle
    membership: Membership = Membership.EXPLICIT
    bb_star: bool = False
    # one constant node per occurrence instead of one per distinct constant
    share_constants: bool = True

    def __post_init__(self):
        combo = (self.args, self.binary, self.concept, self.membership, self.bb_star)
        if combo not in _TABLE:
            raise ValueError(
                "unsupported encoding combination "
                f"({self.args.value}, {self.binary.value}, {self.concept.value}, "
                f"{self.membership.value}, bb_star={self.bb_star})"
            )

    @property
    def name(self):
        if self.bb_star:
            return "bb-star"
        name = f"{self.args.value}-{self.binary.value}-{self.concept.value}"
        if self.membership is Membership.IMPLICIT_A1:
            name += "-implicit"
        return name

    @property
    def lossy(self):
        return self.concept is ConceptStyle.ON_REFERENT

    @classmethod
    def from_name(cls, name, share_constants=True):
        try:
            base = ENCODINGS[name]
        except KeyError:
            raise ValueError(
                f"unknown encoding {name!r}; choose one of: {', '.join(ENCODINGS)}"
            ) from None
        if share_constants:
            return base
        return cls(base.args, base.binary, base.concept, base.membership, base.bb_star, False)

    def axes(self):
        return {
            "args": self.args.value,
            "binary": self.binary.value,
            "concept": self.concept.value,
            "membership": self.membership.value,
            "membership_labels": "typed" if self.bb_star else "uniform",
        }


ENCODINGS = {}
for _combo in _TABLE:
    _spec = EncodingSpec(*_combo)
    ENCODINGS[_spec.name] = _spec


def _resolve(spec):
    if isinstance(spec, EncodingSpec):
        return spec
    return EncodingSpec.from_name(spec)


def most_specific_concepts(drs, lattice):
    """referent -> most specific concept; raises :class:`NoMostSpecificConcept`."""
    out = {}
    for ref, concepts in drs.concepts.items():
        best = most_specific(concepts, lattice)
        if best is None:
            raise NoMostSpecificConcept(ref, concepts)
        out[ref] = best
    return out


def tops_of(drs):
    """Boxes not dominated by a discourse connective.

    ``b OP b'`` makes ``b`` dominate ``b'``, except for PRESUPPOSITION where
    the presupposed box (the first argument) is the dominated one.
    """
    dominated = set()
    for c in drs.clauses:
        if c.kind.is_connective:
            dominated.add(c.box if c.head == PRESUPPOSITION else c.args[0])
    tops = [b for b in drs.boxes if b not in dominated]
    if not tops and drs.boxes:
        tops = [drs.boxes[0]]
    return tops


class _Builder:
    def __init__(self):
        self.labels = []
        self.kinds = []
        self.anchors = []
        self.edges = []

    def node(self, label, kind, anchors=()):
        self.labels.append(label)
        self.kinds.append(kind)
        self.anchors.append(set(a for a in anchors if a is not None))
        return len(self.labels) - 1

    def edge(self, source, target, label=None):
        self.edges.append(Edge(source, target, label))

    def build(self, doc_id, encoding, tops):
        nodes = tuple(
            Node(i, lab, kind, tuple(sorted(anc)))
            for i, (lab, kind, anc) in enumerate(zip(self.labels, self.kinds, self.anchors))
        )
        return Drg(doc_id, encoding, nodes, tuple(self.edges), tuple(tops))


def encode(drs, spec, lattice=None):
    """Convert a well-formed :class:`ClausalDrs` into a :class:`Drg`.

    Raises :class:`IllFormedInput` for DRSs failing :func:`validate` and
    :class:`NoMostSpecificConcept` when a ``cref`` encoding meets a referent
    whose concepts have no unique most specific member.
    """
    spec = _resolve(spec)
    issues = validate(drs)
    if issues:
        raise IllFormedInput(drs.doc_id, issues)
    ref_label = {}
    if spec.concept is ConceptStyle.ON_REFERENT:
        if lattice is None:
            lattice = ConceptLattice.load()
        ref_label = most_specific_concepts(drs, lattice)

    def member(role):
        if not spec.bb_star:
            return IN
        return BB_REFERENT if role == "referent" else BB_CONDITION

    b = _Builder()
    box_node = {box: b.node(None, NodeKind.BOX) for box in drs.boxes}

    ref_anchors = {r: [] for r in drs.referents}
    for c in drs.clauses:
        if c.kind is SymbolClass.REF:
            ref_anchors[c.args[0]].append(c.anchor)
        elif c.kind is SymbolClass.CONCEPT and spec.concept is ConceptStyle.ON_REFERENT:
            ref_anchors[c.args[0]].append(c.anchor)
    ref_node = {
        r: b.node(ref_label.get(r), NodeKind.REFERENT, ref_anchors[r]) for r in drs.referents
    }

    const_node = {}
    if spec.share_constants:
        const_anchors = {k: [] for k in drs.constants}
        for c in drs.clauses:
            for a in c.args:
                if CONSTANT_RE.match(a):
                    const_anchors[a].append(c.anchor)
        for k in drs.constants:
            const_node[k] = b.node(k, NodeKind.CONSTANT, const_anchors[k])
    else:
        for i, c in enumerate(drs.clauses):
            for j, a in enumerate(c.args):
                if CONSTANT_RE.match(a):
                    const_node[(i, j)] = b.node(a, NodeKind.CONSTANT, [c.anchor])

    def term(i, j, tok):
        if tok in ref_node:
            return ref_node[tok]
        return const_node[tok] if spec.share_constants else const_node[(i, j)]

    for i, c in enumerate(drs.clauses):
        box = box_node[c.box]
        if c.kind is SymbolClass.REF:
            b.edge(ref_node[c.args[0]], box, member("referent"))
        elif c.kind.is_connective:
            b.edge(box, box_node[c.args[0]], c.head)
        elif c.kind.is_binary:
            first, second = term(i, 0, c.args[0]), term(i, 1, c.args[1])
            if spec.binary is BinaryStyle.NODE:
                p = b.node(c.head, NodeKind.PREDICATE, [c.anchor])
                implied = (
                    spec.membership is Membership.IMPLICIT_A1
                    and drs.introducer.get(c.args[0]) == c.box
                )
                if not implied:
                    b.edge(p, box, member("condition"))
            else:
                p = b.node(None, NodeKind.REIFIED, [c.anchor])
                b.edge(box, p, c.head)
            if spec.args is ArgStyle.FORK:
                b.edge(p, first, ARG1)
                b.edge(p, second, ARG2)
            elif spec.args is ArgStyle.CHAIN:
                b.edge(first, p)
                b.edge(p, second)
            else:
                b.edge(first, p, ARG1)
                b.edge(p, second, ARG2)
        elif c.kind is SymbolClass.CONCEPT:
            ref = ref_node[c.args[0]]
            if spec.concept is ConceptStyle.NODE:
                p = b.node(c.head, NodeKind.PREDICATE, [c.anchor])
                b.edge(p, ref, ARG1)
                b.edge(p, box, member("condition"))
            elif spec.concept is ConceptStyle.REIFIED:
                p = b.node(None, NodeKind.REIFIED, [c.anchor])
                b.edge(box, p, c.head)
                b.edge(p, ref, ARG1)
            elif spec.concept is ConceptStyle.EDGE:
                b.edge(box, ref, c.head)
    tops = [box_node[t] for t in tops_of(drs)]
    return b.build(drs.doc_id, spec.name, tops)


# --------------------------------------------------------------------------
# decoding

_ROLE, _CONCEPT, _CONST, _CONNECTIVE, _MEMBER, _ARG = (
    "role", "concept", "constant", "connective", "member", "arg",
)


def _label_class(label, sig, member_labels):
    if label is None:
        return None
    if label in member_labels:
        return _MEMBER
    if label in (ARG1, ARG2):
        return _ARG
    if CONSTANT_RE.match(label):
        return _CONST
    if label in sig.connectives:
        return _CONNECTIVE
    if CONCEPT_RE.match(label) and label[:1].islower():
        return _CONCEPT
    try:
        kind = classify(label, signature=sig)
    except Unclassifiable:
        kind = None
    if kind is not None and kind.is_binary:
        return _ROLE
    raise NonConformingGraph(f"label {label!r} is outside the encoding's vocabulary")


def decode(g, spec=None, signature=None):
    """Recover a :class:`ClausalDrs` from a graph produced by :func:`encode`.

    Box labels and referents are renamed ``b1..`` and ``x1..`` in node order.
    Implicit membership is restored from the box introducing a predicate's
    first argument.  For ``cref`` encodings only the concept carried by each
    referent node is recovered, placed in the referent's box.  Raises
    :class:`NonConformingGraph` when ``g`` does not follow the encoding.
    """
    spec = _resolve(spec if spec is not None else g.encoding)
    sig = signature or default_signature()
    if g.is_null:
        raise NonConformingGraph(f"{g.doc_id} is a null graph: {g.error}")
    member_labels = {BB_REFERENT, BB_CONDITION} if spec.bb_star else {IN}
    node_cls = {n.id: _label_class(n.label, sig, member_labels) for n in g.nodes}
    edge_cls = {e: _label_class(e.label, sig, member_labels) for e in g.edges}
    for n in g.nodes:
        if node_cls[n.id] in (_MEMBER, _ARG, _CONNECTIVE):
            raise NonConformingGraph(f"node {n.id} carries edge label {n.label!r}")
    outs = {n.id: [] for n in g.nodes}
    ins = {n.id: [] for n in g.nodes}
    for e in g.edges:
        outs[e.source].append(e)
        ins[e.target].append(e)

    boxes = set()
    for e, cls in edge_cls.items():
        if cls is _MEMBER:
            boxes.add(e.target)
        elif cls is _CONNECTIVE:
            boxes.update((e.source, e.target))
        elif cls in (_ROLE, _CONCEPT):
            boxes.add(e.source)
    for bx in boxes:
        if g.nodes[bx].label is not None:
            raise NonConformingGraph(f"box node {bx} is labeled {g.nodes[bx].label!r}")

    concept_on_ref = spec.concept is ConceptStyle.ON_REFERENT
    referents, predicates, concept_nodes, reified = [], [], [], []
    for n in g.nodes:
        if n.id in boxes:
            continue
        cls = node_cls[n.id]
        if cls is _CONST:
            continue
        if cls is _ROLE:
            if spec.binary is not BinaryStyle.NODE:
                raise NonConformingGraph(f"node {n.id}: labeled predicate in {spec.name}")
            predicates.append(n.id)
        elif cls is _CONCEPT and not concept_on_ref:
            if spec.concept is not ConceptStyle.NODE:
                raise NonConformingGraph(f"node {n.id}: concept node in {spec.name}")
            concept_nodes.append(n.id)
        elif any(edge_cls[e] is _MEMBER for e in outs[n.id]):
            referents.append(n.id)
        elif any(edge_cls[e] in (_ROLE, _CONCEPT) for e in ins[n.id]):
            reified.append(n.id)
        else:
            raise NonConformingGraph(f"node {n.id} plays no role in {spec.name}")

    box_name = {bx: f"b{i}" for i, bx in enumerate(sorted(boxes), start=1)}
    ref_name = {r: f"x{i}" for i, r in enumerate(referents, start=1)}
    used = set()
    clauses = []

    def take(e):
        used.add(e)
        return e

    def term(node_id):
        if node_id in ref_name:
            return ref_name[node_id]
        if node_cls[node_id] is _CONST and node_id not in boxes:
            return g.nodes[node_id].label
        raise NonConformingGraph(f"node {node_id} cannot be a predicate argument")

    ref_box = {}
    for r in referents:
        mem = [e for e in outs[r] if edge_cls[e] is _MEMBER]
        if len(mem) != 1 or mem[0].target not in boxes:
            raise NonConformingGraph(f"referent node {r} needs exactly one membership edge")
        if spec.bb_star and mem[0].label != BB_REFERENT:
            raise NonConformingGraph(f"referent node {r} has membership label {mem[0].label!r}")
        ref_box[r] = box_name[take(mem[0]).target]
        clauses.append(Clause(ref_box[r], "REF", (ref_name[r],), SymbolClass.REF))
    if concept_on_ref:
        for r in referents:
            label = g.nodes[r].label
            if label is not None:
                clauses.append(Clause(ref_box[r], label, (ref_name[r],), SymbolClass.CONCEPT))
    intro = {ref_name[r]: ref_box[r] for r in referents}

    def split_args(p, box_edge=None):
        arg_in = [e for e in ins[p] if e is not box_edge and edge_cls[e] in (_ARG, None)]
        arg_out = [e for e in outs[p] if edge_cls[e] in (_ARG, None)]
        if spec.args is ArgStyle.FORK:
            a1 = [e for e in arg_out if e.label == ARG1]
            a2 = [e for e in arg_out if e.label == ARG2]
            if arg_in or len(a1) != 1 or len(a2) != 1 or len(arg_out) != 2:
                raise NonConformingGraph(f"fork predicate {p} needs exactly one a1 and one a2 out-edge")
            return take(a1[0]).target, take(a2[0]).target
        want = None if spec.args is ArgStyle.CHAIN else ARG1
        if len(arg_in) != 1 or arg_in[0].label != want:
            raise NonConformingGraph(f"chain predicate {p} needs in-degree 1 from its first argument")
        want = None if spec.args is ArgStyle.CHAIN else ARG2
        if len(arg_out) != 1 or arg_out[0].label != want:
            raise NonConformingGraph(f"chain predicate {p} needs out-degree 1 toward its second argument")
        return take(arg_in[0]).source, take(arg_out[0]).target

    def binary_kind(label):
        return classify(label, signature=sig)

    for p in predicates:
        first, second = split_args(p)
        args = (term(first), term(second))
        mem = [e for e in outs[p] if edge_cls[e] is _MEMBER]
        if len(mem) > 1:
            raise NonConformingGraph(f"predicate node {p} has {len(mem)} membership edges")
        if mem:
            if spec.bb_star and mem[0].label != BB_CONDITION:
                raise NonConformingGraph(f"predicate node {p} has membership label {mem[0].label!r}")
            box = box_name[take(mem[0]).target]
        elif spec.membership is Membership.IMPLICIT_A1 and args[0] in intro:
            box = intro[args[0]]
        else:
            raise NonConformingGraph(f"predicate node {p} has no box")
        label = g.nodes[p].label
        clauses.append(Clause(box, label, args, binary_kind(label)))

    for p in reified:
        entry = [e for e in ins[p] if edge_cls[e] in (_ROLE, _CONCEPT)]
        if len(entry) != 1 or entry[0].source not in boxes:
            raise NonConformingGraph(f"reified node {p} needs exactly one labeled edge from a box")
        e0 = take(entry[0])
        box = box_name[e0.source]
        if edge_cls[e0] is _ROLE:
            if spec.binary is not BinaryStyle.REIFIED:
                raise NonConformingGraph(f"reified predicate {p} in {spec.name}")
            first, second = split_args(p, e0)
            clauses.append(Clause(box, e0.label, (term(first), term(second)), binary_kind(e0.label)))
        else:
            if spec.concept is not ConceptStyle.REIFIED:
                raise NonConformingGraph(f"reified concept {p} in {spec.name}")
            tgt = [e for e in outs[p] if e.label == ARG1]
            if len(tgt) != 1 or len(outs[p]) != 1 or tgt[0].target not in ref_name:
                raise NonConformingGraph(f"reified concept {p} needs one a1 edge to a referent")
            clauses.append(Clause(box, e0.label, (ref_name[take(tgt[0]).target],), SymbolClass.CONCEPT))

    for p in concept_nodes:
        tgt = [e for e in outs[p] if e.label == ARG1]
        mem = [e for e in outs[p] if edge_cls[e] is _MEMBER]
        if len(tgt) != 1 or tgt[0].target not in ref_name or len(mem) != 1 or ins[p]:
            raise NonConformingGraph(f"concept node {p} needs one a1 edge and one membership edge")
        if spec.bb_star and mem[0].label != BB_CONDITION:
            raise NonConformingGraph(f"concept node {p} has membership label {mem[0].label!r}")
        box = box_name[take(mem[0]).target]
        clauses.append(
            Clause(box, g.nodes[p].label, (ref_name[take(tgt[0]).target],), SymbolClass.CONCEPT)
        )

    for e in g.edges:
        cls = edge_cls[e]
        if cls is _CONNECTIVE:
            clauses.append(
                Clause(box_name[e.source], e.label, (box_name[take(e).target],), classify(e.label, signature=sig))
            )
        elif cls is _CONCEPT and e not in used:
            if spec.concept is not ConceptStyle.EDGE or e.target not in ref_name:
                raise NonConformingGraph(f"concept edge {e} does not point at a referent")
            clauses.append(Clause(box_name[e.source], e.label, (ref_name[take(e).target],), SymbolClass.CONCEPT))

    leftover = [e for e in g.edges if e not in used]
    if leftover:
        raise NonConformingGraph(f"edge {leftover[0]} is not explained by {spec.name}")
    return ClausalDrs(g.doc_id, tuple(clauses))


def edge_reduction(drs, a, b, lattice=None):
    """Relative edge saving of encoding ``b`` over encoding ``a`` on ``drs``."""
    ea = stats(encode(drs, a, lattice))["edge_count"]
    eb = stats(encode(drs, b, lattice))["edge_count"]
    if ea == 0:
        return 0.0
    return (ea - eb) / ea
