import pytest
from hypothesis import given, settings

from drgkit.clausal import equivalent, parse_clf, serialize_clf
from drgkit.encoding import (
    ALIASES,
    ENCODINGS,
    ArgStyle,
    BinaryStyle,
    ConceptStyle,
    EncodingSpec,
    Membership,
    decode,
    edge_reduction,
    encode,
    tops_of,
)
from drgkit.exceptions import IllFormedInput, NoMostSpecificConcept, NonConformingGraph
from drgkit.graph import Drg, Edge, Node, NodeKind, stats, to_interchange
from drgkit.lattice import ConceptLattice

from conftest import load
from strategies import drs

HOUSE = 'b1 REF x1\nb1 Name x1 "house"\nb1 house "n.05" x1\n'

# Counts for the 24-clause document, derived by hand from the construction rules:
# 5 boxes + 6 referents + 3 constants ("now" is shared) + 8 binary predicates = 22
# nodes, plus 6 concept nodes for cnode/creif.  Edges: 6 referent memberships,
# 8 predicate memberships, 16 argument edges, 4 connectives, and per concept
# 2 (cnode/creif), 1 (cedge) or 0 (cref).  All 8 predicates sit in the box of
# their first argument, so the implicit variants drop 8 more.
FIG1E_COUNTS = {
    "bb-star": (28, 46),
    "fork-bnode-cnode": (28, 46),
    "fork-breif-creif": (28, 46),
    "fork-breif-cedge": (22, 40),
    "fork-bnode-cedge": (22, 40),
    "chain-bnode-cedge": (22, 40),
    "chainlab-bnode-cedge": (22, 40),
    "fork-breif-cref": (22, 34),
    "fork-bnode-cref": (22, 34),
    "chain-bnode-cref": (22, 34),
    "chainlab-bnode-cref": (22, 34),
    "chain-bnode-cref-implicit": (22, 26),
    "chainlab-bnode-cref-implicit": (22, 26),
}


def labeled(g):
    return {(e.source, e.target, e.label) for e in g.edges}


def test_exactly_thirteen_encodings():
    assert list(ENCODINGS) == list(FIG1E_COUNTS)
    assert ALIASES["fork-breif-creif"] == "Liu18"
    assert ALIASES["fork-breif-cedge"] == "Liu18*"


def test_other_combinations_are_not_constructible():
    with pytest.raises(ValueError):
        EncodingSpec(ArgStyle.FORK, BinaryStyle.NODE, ConceptStyle.ON_REFERENT, Membership.IMPLICIT_A1)
    with pytest.raises(ValueError):
        EncodingSpec(ArgStyle.CHAIN, BinaryStyle.NODE, ConceptStyle.EDGE, Membership.IMPLICIT_A1)
    with pytest.raises(ValueError):
        EncodingSpec(ArgStyle.CHAIN, BinaryStyle.REIFIED, ConceptStyle.EDGE)
    with pytest.raises(ValueError):
        EncodingSpec.from_name("fork-bnode-creif")


def test_name_roundtrip():
    for name, spec in ENCODINGS.items():
        assert spec.name == name
        assert EncodingSpec.from_name(name) is spec


def test_house_fragment_under_implicit_chain():
    (d,) = parse_clf(HOUSE)
    g = encode(d, ENCODINGS["chain-bnode-cref-implicit"])
    assert [(n.label, n.kind) for n in g.nodes] == [
        (None, NodeKind.BOX),
        ("house.n.05", NodeKind.REFERENT),
        ('"house"', NodeKind.CONSTANT),
        ("Name", NodeKind.PREDICATE),
    ]
    assert labeled(g) == {(1, 0, "in"), (1, 3, None), (3, 2, None)}
    assert stats(g)["node_count"] == 4 and stats(g)["edge_count"] == 3


def test_fig1e_counts(fig1e):
    for name, spec in ENCODINGS.items():
        g = encode(fig1e, spec)
        assert (len(g.nodes), len(g.edges)) == FIG1E_COUNTS[name], name


def test_fig1e_top_is_b2(fig1e):
    assert tops_of(fig1e) == ["b2"]
    g = encode(fig1e, ENCODINGS["bb-star"])
    assert g.tops == (fig1e.boxes.index("b2"),)


def test_concept_node_structure(fig1e):
    g = encode(fig1e, ENCODINGS["fork-bnode-cnode"])
    (house,) = [n.id for n in g.nodes if n.label == "house.n.05"]
    x1 = len(fig1e.boxes) + fig1e.referents.index("x1")
    b1 = fig1e.boxes.index("b1")
    assert {(e.target, e.label) for e in g.out_edges(house)} == {(x1, "a1"), (b1, "in")}


def test_bb_star_uses_typed_membership(fig1e):
    g = encode(fig1e, ENCODINGS["bb-star"])
    labels = {e.label for e in g.edges}
    assert {"referent", "condition"} <= labels
    assert "in" not in labels
    plain = encode(fig1e, ENCODINGS["fork-bnode-cnode"])
    assert len(plain.edges) == len(g.edges)


def test_chain_encodings_have_no_argument_labels(corpus):
    for name, spec in ENCODINGS.items():
        for d in corpus:
            labels = {e.label for e in encode(d, spec).edges}
            if spec.args is ArgStyle.CHAIN:
                assert not labels & {"a1", "a2"}, name
            else:
                assert {"a1", "a2"} & labels or not any(c.kind.is_binary for c in d.clauses)


def test_szp_keeps_membership_under_implicit(szp):
    for name in ("chain-bnode-cref-implicit", "chainlab-bnode-cref-implicit"):
        g = encode(szp, ENCODINGS[name])
        (szp_node,) = [n.id for n in g.nodes if n.label == "SZP"]
        b2 = szp.boxes.index("b2")
        assert (szp_node, b2, "in") in labeled(g)
        patient = [n.id for n in g.nodes if n.label == "Patient"][0]
        assert not any(e.label == "in" for e in g.out_edges(patient))


def test_szp_reattached_to_b2(szp):
    for name in ("chain-bnode-cref-implicit", "chainlab-bnode-cref-implicit"):
        back = decode(encode(szp, ENCODINGS[name]))
        assert equivalent(back, szp)
        (clause,) = [c for c in back.clauses if c.head == "SZP"]
        (ref,) = [c for c in back.clauses if c.head == "REF" and c.args[0] == clause.args[0]]
        assert clause.box != ref.box


def test_male_person_keeps_most_specific():
    (d,) = load("male_person.clf")
    for name, spec in ENCODINGS.items():
        back = decode(encode(d, spec), spec)
        concepts = sorted(c.head for c in back.clauses if c.kind.name == "CONCEPT")
        if spec.lossy:
            assert concepts == ["male.n.02", "sleep.v.01"]
        else:
            assert equivalent(back, d)


def test_measure_book_fails_only_under_cref():
    (d,) = load("measure_book.clf")
    for spec in ENCODINGS.values():
        if spec.lossy:
            with pytest.raises(NoMostSpecificConcept) as info:
                encode(d, spec)
            assert info.value.referent == "x1"
            assert str(info.value).startswith("NoMostSpecificConcept")
        else:
            encode(d, spec)


def test_ill_formed_input_is_rejected():
    (d,) = parse_clf("b1 REF x1\nb1 Agent x1 x9\n")
    with pytest.raises(IllFormedInput):
        encode(d, ENCODINGS["bb-star"])


def test_custom_lattice_changes_the_referent_label():
    (d,) = load("measure_book.clf")
    lat = ConceptLattice([("book.n.01", "measure.n.02")])
    g = encode(d, ENCODINGS["fork-bnode-cref"], lat)
    assert "book.n.01" in {n.label for n in g.nodes}


def test_anchors_are_unions(fig1e):
    g = encode(fig1e, ENCODINGS["chain-bnode-cref"])
    x1 = len(fig1e.boxes) + fig1e.referents.index("x1")
    assert set(g.nodes[x1].anchors) == {(0, 3), (4, 9)}
    now = [n for n in g.nodes if n.label == '"now"'][0]
    assert set(now.anchors) == {(10, 13), (35, 39)}


def test_unshared_constants(fig1e):
    spec = EncodingSpec.from_name("fork-bnode-cedge", share_constants=False)
    g = encode(fig1e, spec)
    assert sum(1 for n in g.nodes if n.label == '"now"') == 2
    assert len(g.nodes) == FIG1E_COUNTS["fork-bnode-cedge"][0] + 1


def test_node_order(fig1e):
    g = encode(fig1e, ENCODINGS["fork-bnode-cedge"])
    kinds = [n.kind for n in g.nodes]
    order = [NodeKind.BOX, NodeKind.REFERENT, NodeKind.CONSTANT, NodeKind.PREDICATE]
    assert kinds == sorted(kinds, key=order.index)


def test_edge_reduction_examples(fig1e):
    assert edge_reduction(fig1e, "bb-star", "bb-star") == 0.0
    assert edge_reduction(fig1e, "fork-bnode-cedge", "fork-bnode-cref") == pytest.approx(6 / 40)
    assert edge_reduction(fig1e, "chainlab-bnode-cref", "chainlab-bnode-cref-implicit") == pytest.approx(8 / 34)


def test_lossless_roundtrip_on_fixtures(corpus):
    assert len(corpus) >= 20
    for d in corpus:
        for name, spec in ENCODINGS.items():
            assert equivalent(decode(encode(d, spec), spec), d), (d.doc_id, name)


def test_decode_reads_the_encoding_from_the_graph(fig1e):
    g = encode(fig1e, ENCODINGS["fork-breif-creif"])
    assert equivalent(decode(g), fig1e)


def _graph(encoding, nodes, edges, tops=(0,)):
    return Drg("bad", encoding, tuple(Node(i, lab) for i, lab in enumerate(nodes)),
               tuple(Edge(*e) for e in edges), tops)


def test_non_conforming_graphs():
    # chain predicate with two outgoing argument edges
    g = _graph("chain-bnode-cref", [None, None, None, None, "Agent"],
               [(1, 0, "in"), (2, 0, "in"), (3, 0, "in"), (4, 0, "in"), (1, 4), (4, 2), (4, 3)])
    with pytest.raises(NonConformingGraph):
        decode(g)
    # an edge with an unknown label
    g = _graph("fork-bnode-cedge", [None, None], [(1, 0, "in"), (0, 1, "mystery")])
    with pytest.raises(NonConformingGraph):
        decode(g)
    # a fork predicate missing its a2 edge
    g = _graph("fork-bnode-cedge", [None, None, "Agent"], [(1, 0, "in"), (2, 0, "in"), (2, 1, "a1")])
    with pytest.raises(NonConformingGraph):
        decode(g)


def test_encode_is_deterministic(corpus):
    for spec in ENCODINGS.values():
        for d in corpus:
            assert to_interchange(encode(d, spec)) == to_interchange(encode(d, spec))


@settings(max_examples=150, deadline=None)
@given(drs())
def test_random_roundtrip(d):
    for name, spec in ENCODINGS.items():
        assert equivalent(decode(encode(d, spec), spec), d), name


@settings(max_examples=100, deadline=None)
@given(drs())
def test_convert_decode_convert_is_stable(d):
    for spec in ENCODINGS.values():
        g = encode(d, spec)
        again = encode(decode(g, spec), spec)
        assert (len(again.nodes), len(again.edges)) == (len(g.nodes), len(g.edges))
        assert sorted(n.label or "" for n in again.nodes) == sorted(n.label or "" for n in g.nodes)
        assert sorted((e.label or "") for e in again.edges) == sorted((e.label or "") for e in g.edges)


@settings(max_examples=100, deadline=None)
@given(drs())
def test_lossy_roundtrip_keeps_most_specific(d):
    # give every concept-bearing referent an extra, more general concept
    extra = []
    for c in d.clauses:
        if c.kind.name == "CONCEPT":
            extra.append(f'{c.box} entity "n.01" {c.args[0]}')
    lat = ConceptLattice([(c.head, "entity.n.01") for c in d.clauses if c.kind.name == "CONCEPT"])
    (wide,) = parse_clf(serialize_clf(d) + "\n".join(dict.fromkeys(extra)) + "\n")
    if len(wide.clauses) == len(d.clauses):
        return
    for spec in ENCODINGS.values():
        if spec.lossy:
            assert equivalent(decode(encode(wide, spec, lat), spec), d)


@settings(max_examples=100, deadline=None)
@given(drs())
def test_edge_counts_are_monotone(d):
    n = {name: len(encode(d, spec).edges) for name, spec in ENCODINGS.items()}
    has_concepts = any(c.kind.name == "CONCEPT" for c in d.clauses)
    if has_concepts:
        assert n["fork-breif-creif"] > n["fork-breif-cedge"] > n["fork-breif-cref"]
        assert n["fork-bnode-cnode"] > n["fork-bnode-cedge"] > n["fork-bnode-cref"]
        assert n["chain-bnode-cedge"] > n["chain-bnode-cref"]
    shared = any(c.kind.is_binary and d.introducer.get(c.args[0]) == c.box for c in d.clauses)
    for base in ("chain-bnode-cref", "chainlab-bnode-cref"):
        if shared:
            assert n[base + "-implicit"] < n[base]
        else:
            assert n[base + "-implicit"] == n[base]
