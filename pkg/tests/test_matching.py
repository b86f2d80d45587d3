import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drgkit.clausal import parse_clf, rename
from drgkit.encoding import ENCODINGS, encode
from drgkit.exceptions import DocIdMismatch
from drgkit.graph import Drg, Edge, Node
from drgkit.matching import (
    SearchBudget,
    clause_match,
    count_matched,
    match_items,
    mces,
    schedule_candidates,
    score_corpus,
)

from oracles import brute_force_matched, random_graph, random_pair
from strategies import drs


def permute(g, perm, doc_id=None):
    nodes = tuple(Node(perm[n.id], n.label, n.kind, n.anchors) for n in g.nodes)
    edges = tuple(Edge(perm[e.source], perm[e.target], e.label) for e in g.edges)
    return Drg(doc_id or g.doc_id, g.encoding, nodes, edges, tuple(perm[t] for t in g.tops), g.error)


def drop_edge(g, k):
    edges = g.edges[:k] + g.edges[k + 1:]
    return Drg(g.doc_id, g.encoding, g.nodes, edges, g.tops)


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        SearchBudget(max_expansions=0)
    with pytest.raises(ValueError):
        SearchBudget(wall_clock_ms=-5)


def test_items():
    g = Drg("d", "bb-star", (Node(0, "a", anchors=((0, 3),)), Node(1)), (Edge(1, 0, "in"),), (0,))
    assert sorted(match_items(g), key=str) == sorted(
        [("label", 0, "a"), ("top", 0), ("edge", 1, 0, "in")], key=str)
    assert ("anchor", 0, (0, 3)) in match_items(g, anchors=True)
    assert ("top", 0) not in match_items(g, tops=False)


def test_identity(fig1e):
    for spec in ENCODINGS.values():
        g = encode(fig1e, spec)
        r = mces(g, g)
        assert r.f1 == 1.0 and r.exact
        assert r.mapping == {i: i for i in range(len(g.nodes))}


def test_edge_label_mismatch():
    a = Drg("a", "bb-star", (Node(0), Node(1)), (Edge(0, 1, "in"),))
    b = Drg("b", "bb-star", (Node(0), Node(1)), (Edge(0, 1, "Agent"),))
    r = mces(a, b)
    assert r.matched == 0 and r.f1 == 0.0 and r.exact


def test_empty_graphs():
    e = Drg("e", "bb-star")
    one = Drg("o", "bb-star", (Node(0, "x"),))
    assert mces(e, e).f1 == 1.0
    assert mces(e, one).f1 == 0.0
    assert mces(one, e).f1 == 0.0


def test_schedule_identity_pairs_are_best(corpus):
    for d in corpus[:8]:
        g = encode(d, ENCODINGS["fork-bnode-cedge"])
        cands = schedule_candidates(g, g)
        best = {}
        for c in cands:
            best[c.sys] = max(best.get(c.sys, 0.0), c.score)
        scores = {(c.sys, c.gold): c.score for c in cands}
        for n in g.nodes:
            assert scores[(n.id, n.id)] == best[n.id]
        assert [c.score for c in cands] == sorted((c.score for c in cands), reverse=True)


def test_schedule_with_one_relabeled_concept(fig1e):
    spec = ENCODINGS["chain-bnode-cref-implicit"]
    g = encode(fig1e, spec)
    i = next(n.id for n in g.nodes if n.label == "vote.v.01")
    nodes = tuple(Node(n.id, "walk.v.01" if n.id == i else n.label, n.kind) for n in g.nodes)
    h = Drg(g.doc_id, g.encoding, nodes, g.edges, g.tops)
    pairs = {(c.sys, c.gold) for c in schedule_candidates(h, g)}
    assert all((n.id, n.id) in pairs for n in g.nodes)


def test_schedule_skips_hopeless_pairs():
    a = Drg("a", "bb-star", (Node(0, "p"), Node(1, "q")), (Edge(0, 1, "in"),))
    b = Drg("b", "bb-star", (Node(0, "r"), Node(1, "s")), (Edge(0, 1, "Agent"),))
    assert schedule_candidates(a, b) == []


def test_mapping_reproduces_matched(fig1e, szp):
    for spec in ENCODINGS.values():
        a, b = encode(fig1e, spec), encode(szp, spec)
        r = mces(a, b)
        assert count_matched(a, b, r.mapping) == r.matched
        assert r.matched <= min(r.system_items, r.gold_items)


def test_oracle_equivalence_sample():
    for seed in range(60):
        a, b = random_pair(seed)
        r = mces(a, b)
        assert r.exact
        assert r.matched == brute_force_matched(a, b), seed


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_oracle_equivalence_property(seed):
    a, b = random_pair(seed, max_nodes=7)
    assert mces(a, b).matched == brute_force_matched(a, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_symmetry_when_exact(seed):
    a, b = random_pair(seed)
    ab, ba = mces(a, b), mces(b, a)
    assert ab.exact and ba.exact
    assert ab.matched == ba.matched


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 200))
def test_more_expansions_never_hurt(seed, small):
    rng = random.Random(seed)
    a, b = random_graph(rng, 10), random_graph(rng, 10)
    lo = mces(a, b, SearchBudget(max_expansions=small))
    hi = mces(a, b, SearchBudget(max_expansions=small * 3))
    assert hi.matched >= lo.matched


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 30))
def test_more_pairs_never_hurt_when_exact(seed, small):
    a, b = random_pair(seed)
    lo = mces(a, b, SearchBudget(max_candidate_pairs=small))
    hi = mces(a, b, SearchBudget(max_candidate_pairs=small * 4))
    full = mces(a, b)
    assert full.exact and full.matched >= max(lo.matched, hi.matched)
    if hi.exact:
        assert hi.matched >= lo.matched
    if lo.exact:
        assert lo.matched == full.matched


def test_truncated_search_is_flagged():
    rng = random.Random(7)
    a, b = random_graph(rng, 12), random_graph(rng, 12)
    r = mces(a, b, SearchBudget(max_expansions=5))
    assert r.expansions <= 5
    assert not r.exact


def test_pair_truncation_is_flagged():
    rng = random.Random(3)
    a = random_graph(rng, 8, node_labels=("a",), edge_labels=("in",))
    r = mces(a, a, SearchBudget(max_candidate_pairs=3))
    assert r.matched < mces(a, a).matched
    assert not r.exact


def test_wall_clock_budget_returns_a_result():
    rng = random.Random(11)
    a, b = random_graph(rng, 14), random_graph(rng, 14)
    r = mces(a, b, SearchBudget(wall_clock_ms=1))
    assert count_matched(a, b, r.mapping) == r.matched


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_renaming_invariance(seed):
    a, b = random_pair(seed)
    rng = random.Random(seed)
    pa = list(range(len(a.nodes)))
    pb = list(range(len(b.nodes)))
    rng.shuffle(pa)
    rng.shuffle(pb)
    assert mces(permute(a, pa), permute(b, pb)).f1 == mces(a, b).f1


def test_determinism(fig1e, szp):
    a, b = encode(fig1e, ENCODINGS["bb-star"]), encode(szp, ENCODINGS["bb-star"])
    assert mces(a, b, seed=3) == mces(a, b, seed=3)
    budget = SearchBudget(max_expansions=50)
    assert mces(a, b, budget) == mces(a, b, budget)


def test_anchors_add_items(fig1e):
    g = encode(fig1e, ENCODINGS["bb-star"])
    plain, anchored = mces(g, g), mces(g, g, anchors=True)
    assert anchored.system_items > plain.system_items
    assert anchored.f1 == 1.0


def test_tops_toggle(fig1e):
    g = encode(fig1e, ENCODINGS["bb-star"])
    assert mces(g, g, tops=False).system_items == mces(g, g).system_items - len(g.tops)


# --------------------------------------------------------------------------
# corpus scoring

def graphs_of(docs, name="chain-bnode-cref-implicit"):
    return [encode(d, ENCODINGS[name]) for d in docs]


def test_self_score(corpus):
    gold = graphs_of(corpus)
    s = score_corpus(gold, gold)
    assert s.macro_f1 == 1.0 and s.approx_rate == 0.0
    report = s.to_dict()
    assert set(report) >= {"macro_f1", "docs", "approx_rate", "budget", "seed"}
    assert set(report["docs"][0]) == {"id", "p", "r", "f1", "exact"}


def test_missing_system_document(corpus):
    gold = graphs_of(corpus[:2])
    sys = [gold[0]]
    s = score_corpus(sys, gold)
    assert s.macro_f1 == pytest.approx(0.5)
    assert s.docs[1].f1 == 0.0 and s.docs[1].error == "missing"


def test_null_handling(corpus):
    gold = graphs_of(corpus[:3])
    sys = list(gold)
    sys[1] = Drg.null(gold[1].doc_id, gold[1].encoding, "IllFormedInput")
    s = score_corpus(sys, gold)
    assert s.macro_f1 == pytest.approx(2 / 3)
    gold_with_null = [Drg.null(gold[0].doc_id, gold[0].encoding, "boom")] + gold[1:]
    s = score_corpus(gold, gold_with_null)
    assert len(s.docs) == 2 and s.excluded == (gold[0].doc_id,)
    assert s.macro_f1 == 1.0


def test_unknown_system_ids(corpus):
    gold = graphs_of(corpus[:2])
    stray = Drg("nowhere", gold[0].encoding)
    with pytest.raises(DocIdMismatch) as info:
        score_corpus(gold + [stray], gold)
    assert info.value.unmatched == ["nowhere"]


def test_shuffled_order_gives_identical_macro(corpus):
    gold = graphs_of(corpus)
    sys = [drop_edge(g, 0) for g in gold]
    base = score_corpus(sys, gold).macro_f1
    rng = random.Random(0)
    for _ in range(3):
        s2, g2 = list(sys), list(gold)
        rng.shuffle(s2)
        rng.shuffle(g2)
        assert score_corpus(s2, g2).macro_f1 == base


def test_perturbed_corpus_matches_oracle():
    gold, sys = [], []
    for seed in range(12):
        g = random_graph(random.Random(seed), 7, extra_edges=2, doc_id=f"d{seed}")
        gold.append(g)
        sys.append(drop_edge(g, seed % len(g.edges)))
    s = score_corpus(sys, gold)
    assert 0.0 < s.macro_f1 < 1.0
    for d, g, h in zip(s.docs, gold, sys):
        n_sys, n_gold = len(match_items(h)), len(match_items(g))
        m = brute_force_matched(h, g)
        assert d.f1 == pytest.approx(2 * m / (n_sys + n_gold))


def test_workers_do_not_change_results(corpus):
    gold = graphs_of(corpus, "bb-star")
    sys = [drop_edge(g, 1) for g in gold]
    assert score_corpus(sys, gold, workers=2) == score_corpus(sys, gold, workers=1)


def test_tiny_budget_reports_approximations(corpus):
    gold = graphs_of(corpus, "bb-star")
    sys = [drop_edge(g, 1) for g in gold]
    s = score_corpus(sys, gold, budget=SearchBudget(max_expansions=3))
    assert s.approx_rate > 0.0
    assert all(d.f1 <= 1.0 for d in s.docs)


# --------------------------------------------------------------------------
# clause matching

def test_clause_match_identity(fig1e):
    assert clause_match(fig1e, fig1e) == 1.0


def test_clause_match_disjoint():
    (a,) = parse_clf('b1 REF x1\nb1 dog "n.01" x1\n')
    (b,) = parse_clf('b1 NEGATION b2\nb2 Agent e1 x1\n')
    assert clause_match(a, b) == 0.0


def test_clause_match_single_change(fig1e):
    (changed,) = parse_clf(open_text(fig1e).replace("b5 Agent e2 x2", "b5 Agent e2 t2"))
    assert clause_match(changed, fig1e) == pytest.approx(23 / 24)


def open_text(d):
    from drgkit.clausal import serialize_clf
    return serialize_clf(d)


@settings(max_examples=30, deadline=None)
@given(drs(), st.randoms(use_true_random=False))
def test_clause_match_renaming_invariance(d, rng):
    variables = sorted(set(d.boxes) | set(d.referents))
    boxes = [v for v in variables if v.startswith("b")]
    refs = [v for v in variables if not v.startswith("b")]
    new_boxes = [f"b{i + 50}" for i in range(len(boxes))]
    new_refs = [f"{v[0]}{i + 50}" for i, v in enumerate(refs)]
    rng.shuffle(new_boxes)
    mapping = dict(zip(boxes, new_boxes)) | dict(zip(refs, new_refs))
    renamed = rename(d, mapping)
    assert clause_match(renamed, d) == 1.0
    (other,) = parse_clf('b1 REF x1\nb1 dog "n.01" x1\nb1 Agent x1 "now"\n')
    assert clause_match(renamed, other) == clause_match(d, other)
