"""Graph matching and scoring.

Graphs are compared by the number of *items* they share under a partial
injective node correspondence (system -> gold):

* one item per labeled node (its label),
* one item per edge (source, target, label),
* one item per top node (``tops=True``, default),
* one item per anchor span (``anchors=True``, off by default).

:func:`mces` searches for the correspondence maximizing the shared item count
with a depth-first branch and bound.  When the search budget runs out the best
correspondence seen so far is returned with ``exact=False``.
"""
from __future__ import annotations

import math
import random
import time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

from .clausal import is_variable, term_class
from .exceptions import DocIdMismatch

__all__ = [
    "SearchBudget",
    "MatchResult",
    "Candidate",
    "match_items",
    "count_matched",
    "schedule_candidates",
    "mces",
    "fscore",
    "DocScore",
    "CorpusScore",
    "score_corpus",
    "clause_counts",
    "clause_match",
]


@dataclass(frozen=True)
class SearchBudget:
    max_candidate_pairs: int = 10_000
    max_expansions: int = 500_000
    wall_clock_ms: Optional[int] = None

    def __post_init__(self):
        for name in ("max_candidate_pairs", "max_expansions", "wall_clock_ms"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value <= 0):
                raise ValueError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class MatchResult:
    mapping: dict
    matched: int
    system_items: int
    gold_items: int
    precision: float
    recall: float
    f1: float
    exact: bool
    expansions: int = 0


class Candidate(NamedTuple):
    sys: int
    gold: int
    score: float


def fscore(matched, n_system, n_gold):
    """Precision, recall and F1; two empty graphs score 1.0."""
    if n_system == 0 and n_gold == 0:
        return 1.0, 1.0, 1.0
    p = matched / n_system if n_system else 0.0
    r = matched / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def match_items(g, anchors=False, tops=True):
    """The multiset of credit items of ``g``, as tuples."""
    items = []
    for n in g.nodes:
        if n.label is not None:
            items.append(("label", n.id, n.label))
        if anchors:
            for a in n.anchors:
                items.append(("anchor", n.id, tuple(a)))
    if tops:
        items.extend(("top", t) for t in g.tops)
    items.extend(("edge", e.source, e.target, e.label) for e in g.edges)
    return items


def count_matched(sys, gold, mapping, anchors=False, tops=True):
    """Number of items of ``sys`` preserved in ``gold`` under ``mapping``."""
    if len(set(mapping.values())) != len(mapping):
        raise ValueError("mapping is not injective")
    gold_nodes = {n.id: n for n in gold.nodes}
    total = 0
    for n in sys.nodes:
        v = mapping.get(n.id)
        if v is None:
            continue
        gn = gold_nodes[v]
        if n.label is not None and n.label == gn.label:
            total += 1
        if anchors:
            total += sum((Counter(map(tuple, n.anchors)) & Counter(map(tuple, gn.anchors))).values())
    if tops:
        gold_tops = set(gold.tops)
        total += sum(1 for t in sys.tops if mapping.get(t) in gold_tops)
    gold_edges = {(e.source, e.target, e.label) for e in gold.edges}
    for e in sys.edges:
        s, t = mapping.get(e.source), mapping.get(e.target)
        if s is not None and t is not None and (s, t, e.label) in gold_edges:
            total += 1
    return total


class _Prepared:
    """Integer view of a graph for the search."""

    def __init__(self, g, interner, anchors, tops):
        self.n = len(g.nodes)
        self.labels = [interner(n.label) if n.label is not None else -1 for n in g.nodes]
        self.kinds = [n.kind for n in g.nodes]
        self.anchors = [Counter(map(tuple, n.anchors)) if anchors else Counter() for n in g.nodes]
        self.top = [False] * self.n
        if tops:
            for t in g.tops:
                self.top[t] = True
        self.edges = [(e.source, e.target, interner(e.label)) for e in g.edges]
        self.edge_set = set(self.edges)
        self.out = [[] for _ in range(self.n)]
        self.inc = [[] for _ in range(self.n)]
        for s, t, lab in self.edges:
            self.out[s].append((t, lab))
            self.inc[t].append((s, lab))
        self.profile = [
            Counter([("o", lab) for _, lab in self.out[i]] + [("i", lab) for _, lab in self.inc[i]])
            for i in range(self.n)
        ]
        self.items = (
            sum(1 for lab in self.labels if lab >= 0)
            + sum(sum(c.values()) for c in self.anchors)
            + sum(self.top)
            + len(self.edges)
        )


def _prepare(sys, gold, anchors, tops):
    table = {None: 0}

    def intern(label):
        if label not in table:
            table[label] = len(table)
        return table[label]

    return _Prepared(sys, intern, anchors, tops), _Prepared(gold, intern, anchors, tops)


def _pair_score(S, G, u, v):
    """(potential, score) of mapping sys node ``u`` to gold node ``v``."""
    label_eq = S.labels[u] >= 0 and S.labels[u] == G.labels[v]
    top_eq = S.top[u] and G.top[v]
    anchor_overlap = sum((S.anchors[u] & G.anchors[v]).values())
    overlap = sum((S.profile[u] & G.profile[v]).values())
    potential = label_eq or top_eq or anchor_overlap > 0 or overlap > 0
    if not potential:
        return False, 0.0
    du, dv = sum(S.profile[u].values()), sum(G.profile[v].values())
    score = 4.0 * label_eq + 1.0 * top_eq + 2.0 * overlap / max(du, dv, 1)
    if S.kinds[u] is not None and S.kinds[u] == G.kinds[v]:
        score += 1.0
    if anchor_overlap:
        score += anchor_overlap / max(sum(S.anchors[u].values()), sum(G.anchors[v].values()))
    score += 0.5 * (1.0 - abs(du - dv) / max(du, dv, 1))
    return True, score


def _schedule(S, G):
    cands = []
    for u in range(S.n):
        for v in range(G.n):
            ok, score = _pair_score(S, G, u, v)
            if ok:
                cands.append(Candidate(u, v, round(score, 9)))
    cands.sort(key=lambda c: (-c.score, c.sys, c.gold))
    return cands


def schedule_candidates(sys, gold, anchors=False, tops=True, limit=None):
    """Candidate node pairs ordered by decreasing compatibility.

    Only pairs that could share at least one item are listed: equal labels,
    both tops, overlapping anchors, or a common incident (direction, label)
    edge signature.  Ties are broken by ``(sys id, gold id)``.
    """
    S, G = _prepare(sys, gold, anchors, tops)
    cands = _schedule(S, G)
    return cands if limit is None else cands[:limit]


class _Search:
    def __init__(self, S, G, cands, budget):
        self.S, self.G = S, G
        self.budget = budget
        self.domain = [[] for _ in range(S.n)]
        self.pair_score = {}
        for c in cands:
            self.domain[c.sys].append(c.gold)
            self.pair_score[(c.sys, c.gold)] = c.score
        self.assign = [None] * S.n      # gold id, or -1 for "left unmapped"
        self.used = [False] * G.n
        self.best = 0
        self.best_map = {}
        self.expansions = 0
        self.truncated = False
        self.deadline = None
        if budget.wall_clock_ms is not None:
            self.deadline = time.perf_counter() + budget.wall_clock_ms / 1000.0
        # computed before candidate-less nodes are settled, so it also bounds
        # the problem with the unscheduled pairs put back
        self.unrestricted_bound = self.bound()
        for u in range(S.n):
            if not self.domain[u]:
                self.assign[u] = -1
        self.order = self._order()

    def _order(self):
        S = self.S
        free = [u for u in range(S.n) if self.assign[u] is None]
        if not free:
            return []
        gold_label_count = Counter(self.G.labels)
        placed = set()
        order = []
        links = Counter()
        remaining = set(free)
        while remaining:
            def key(u):
                lab = S.labels[u]
                rare = 1.0 / gold_label_count[lab] if lab >= 0 and gold_label_count[lab] else 0.0
                deg = len(S.out[u]) + len(S.inc[u])
                return (-links[u], -rare, -deg, u)

            u = min(remaining, key=key)
            remaining.discard(u)
            order.append(u)
            placed.add(u)
            for t, _ in S.out[u]:
                links[t] += 1
            for s, _ in S.inc[u]:
                links[s] += 1
        return order

    def gain(self, u, v):
        S, G, assign = self.S, self.G, self.assign
        g = 0
        if S.labels[u] >= 0 and S.labels[u] == G.labels[v]:
            g += 1
        if S.top[u] and G.top[v]:
            g += 1
        if S.anchors[u]:
            g += sum((S.anchors[u] & G.anchors[v]).values())
        ge = G.edge_set
        for t, lab in S.out[u]:
            w = assign[t]
            if w is not None and w >= 0 and (v, w, lab) in ge:
                g += 1
        for s, lab in S.inc[u]:
            w = assign[s]
            if w is not None and w >= 0 and (w, v, lab) in ge:
                g += 1
        return g

    def bound(self):
        """Upper bound on items still obtainable from undecided nodes."""
        S, G, assign, used = self.S, self.G, self.assign, self.used
        total = 0
        sys_labels = Counter(S.labels[u] for u in range(S.n) if assign[u] is None and S.labels[u] >= 0)
        if sys_labels:
            gold_labels = Counter(G.labels[v] for v in range(G.n) if not used[v] and G.labels[v] >= 0)
            total += sum(min(c, gold_labels[lab]) for lab, c in sys_labels.items())
        sys_tops = sum(1 for u in range(S.n) if assign[u] is None and S.top[u])
        if sys_tops:
            total += min(sys_tops, sum(1 for v in range(G.n) if not used[v] and G.top[v]))
        sys_anchor = Counter()
        for u in range(S.n):
            if assign[u] is None and S.anchors[u]:
                sys_anchor.update(S.anchors[u])
        if sys_anchor:
            gold_anchor = Counter()
            for v in range(G.n):
                if not used[v] and G.anchors[v]:
                    gold_anchor.update(G.anchors[v])
            total += sum((sys_anchor & gold_anchor).values())

        free_sys = Counter()
        half_sys = Counter()
        for s, t, lab in S.edges:
            a, b = assign[s], assign[t]
            if a is None and b is None:
                free_sys[lab] += 1
            elif a is None and b >= 0:
                half_sys[(b, "i", lab)] += 1
            elif b is None and a >= 0:
                half_sys[(a, "o", lab)] += 1
        if free_sys or half_sys:
            free_gold = Counter()
            half_gold = Counter()
            for s, t, lab in G.edges:
                us, ut = used[s], used[t]
                if not us and not ut:
                    free_gold[lab] += 1
                elif us and not ut:
                    half_gold[(s, "o", lab)] += 1
                elif ut and not us:
                    half_gold[(t, "i", lab)] += 1
            total += sum(min(c, free_gold[k]) for k, c in free_sys.items())
            total += sum(min(c, half_gold[k]) for k, c in half_sys.items())
        return total

    def out_of_budget(self):
        if self.expansions >= self.budget.max_expansions:
            return True
        if self.deadline is not None and self.expansions % 64 == 0:
            return time.perf_counter() > self.deadline
        return False

    def node_bound(self):
        """Bound from the best image of each undecided node, injectivity relaxed.

        Edges between two undecided nodes are credited half at each end.
        """
        S, G, assign, used = self.S, self.G, self.assign, self.used
        gold_free = {}
        total = 0.0
        for u in range(S.n):
            if assign[u] is not None:
                continue
            prof = Counter()
            for t, lab in S.out[u]:
                if assign[t] is None:
                    prof[("o", lab)] += 1
            for s, lab in S.inc[u]:
                if assign[s] is None:
                    prof[("i", lab)] += 1
            best = 0.0
            for v in self.domain[u]:
                if used[v]:
                    continue
                value = self.gain(u, v)
                if prof:
                    gp = gold_free.get(v)
                    if gp is None:
                        gp = Counter()
                        for t, lab in G.out[v]:
                            if not used[t]:
                                gp[("o", lab)] += 1
                        for s, lab in G.inc[v]:
                            if not used[s]:
                                gp[("i", lab)] += 1
                        gold_free[v] = gp
                    value += 0.5 * sum(min(c, gp[k]) for k, c in prof.items())
                if value > best:
                    best = value
            total += best
        return int(math.floor(total + 1e-9))

    def run(self, pairs_complete=True):
        if pairs_complete:
            self.root_bound = min(self.bound(), self.node_bound())
        else:
            self.root_bound = self.unrestricted_bound
        self._dfs(0, 0)
        return self.best

    def _record(self, value):
        if value > self.best:
            self.best = value
            self.best_map = {u: v for u, v in enumerate(self.assign) if v is not None and v >= 0}

    def _dfs(self, depth, current):
        if self.truncated:
            return
        if self.out_of_budget():
            self.truncated = True
            return
        self.expansions += 1
        self._record(current)
        if depth == len(self.order) or self.best >= self.root_bound:
            return
        if current + self.bound() <= self.best:
            return
        if current + self.node_bound() <= self.best:
            return
        u = self.order[depth]
        options = []
        for v in self.domain[u]:
            if not self.used[v]:
                options.append((-self.gain(u, v), -self.pair_score[(u, v)], v))
        options.sort()
        for neg_gain, _, v in options:
            self.assign[u] = v
            self.used[v] = True
            self._dfs(depth + 1, current - neg_gain)
            self.used[v] = False
            self.assign[u] = None
            if self.truncated or self.best >= self.root_bound:
                return
        self.assign[u] = -1
        self._dfs(depth + 1, current)
        self.assign[u] = None


def mces(sys, gold, budget=None, seed=0, anchors=False, tops=True):
    """Maximum common edge subgraph (in items) between ``sys`` and ``gold``.

    ``seed`` is accepted for interface parity with the randomized clause
    matcher; the graph search itself is deterministic.
    """
    budget = budget or SearchBudget()
    S, G = _prepare(sys, gold, anchors, tops)
    cands = _schedule(S, G)
    pairs_truncated = len(cands) > budget.max_candidate_pairs
    cands = cands[: budget.max_candidate_pairs]
    search = _Search(S, G, cands, budget)
    search.run(pairs_complete=not pairs_truncated)
    matched = search.best
    if pairs_truncated:
        exact = matched >= search.root_bound
    else:
        exact = not search.truncated or matched >= search.root_bound
    p, r, f = fscore(matched, S.items, G.items)
    return MatchResult(
        mapping=dict(sorted(search.best_map.items())),
        matched=matched,
        system_items=S.items,
        gold_items=G.items,
        precision=p,
        recall=r,
        f1=f,
        exact=exact,
        expansions=search.expansions,
    )


# --------------------------------------------------------------------------
# corpus scoring

@dataclass(frozen=True)
class DocScore:
    id: str
    p: float
    r: float
    f1: float
    exact: Optional[bool]
    error: Optional[str] = None


@dataclass(frozen=True)
class CorpusScore:
    macro_f1: float
    docs: tuple
    approx_rate: float
    budget: SearchBudget
    seed: int
    excluded: tuple = field(default=())

    def to_dict(self):
        docs = []
        for d in self.docs:
            row = {"id": d.id, "p": d.p, "r": d.r, "f1": d.f1, "exact": d.exact}
            if d.error is not None:
                row["error"] = d.error
            docs.append(row)
        return {
            "macro_f1": self.macro_f1,
            "docs": docs,
            "approx_rate": self.approx_rate,
            "excluded": list(self.excluded),
            "budget": asdict(self.budget),
            "seed": self.seed,
        }


def _match_job(args):
    sys, gold, budget, seed, anchors, tops = args
    return mces(sys, gold, budget, seed, anchors, tops)


def score_corpus(sys_graphs, gold_graphs, budget=None, seed=0, workers=1, anchors=False, tops=True):
    """Macro-averaged F1 of system graphs against gold graphs, aligned by id.

    Gold null graphs are left out of the average; a system graph that is null
    or missing scores 0 for its document.  ``approx_rate`` is the share of
    scored (non-null) pairs whose match is not proved maximal.
    """
    budget = budget or SearchBudget()
    gold_by_id = {}
    for g in gold_graphs:
        if g.doc_id in gold_by_id:
            raise ValueError(f"duplicate gold document id {g.doc_id!r}")
        gold_by_id[g.doc_id] = g
    sys_by_id = {}
    for g in sys_graphs:
        if g.doc_id in sys_by_id:
            raise ValueError(f"duplicate system document id {g.doc_id!r}")
        sys_by_id[g.doc_id] = g
    stray = set(sys_by_id) - set(gold_by_id)
    if stray:
        raise DocIdMismatch(stray)

    jobs, job_ids = [], []
    excluded = []
    for doc_id, g in gold_by_id.items():
        if g.is_null:
            excluded.append(doc_id)
            continue
        s = sys_by_id.get(doc_id)
        if s is not None and not s.is_null:
            jobs.append((s, g, budget, seed, anchors, tops))
            job_ids.append(doc_id)

    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_match_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_match_job(j) for j in jobs]
    by_id = dict(zip(job_ids, results))

    docs = []
    for doc_id, g in gold_by_id.items():
        if g.is_null:
            continue
        res = by_id.get(doc_id)
        if res is None:
            s = sys_by_id.get(doc_id)
            reason = "missing" if s is None else (s.error or "null graph")
            docs.append(DocScore(doc_id, 0.0, 0.0, 0.0, None, reason))
        else:
            docs.append(DocScore(doc_id, res.precision, res.recall, res.f1, res.exact))
    macro = math.fsum(d.f1 for d in docs) / len(docs) if docs else 0.0
    approx = sum(1 for r in results if not r.exact) / len(results) if results else 0.0
    return CorpusScore(macro, tuple(docs), approx, budget, seed, tuple(excluded))


# --------------------------------------------------------------------------
# clause-level matching

class _ClauseIndex:
    def __init__(self, drs):
        keys = list(dict.fromkeys(c.key for c in drs.clauses))
        self.vars = []
        index = {}
        for box, head, args in keys:
            for tok in (box,) + args:
                if is_variable(tok) and tok not in index:
                    index[tok] = len(self.vars)
                    self.vars.append(tok)
        self.kind = [term_class(v) for v in self.vars]
        self.clauses = []
        for box, head, args in keys:
            slots = tuple(("v", index[t]) if is_variable(t) else ("c", t) for t in (box,) + args)
            self.clauses.append((head, slots))
        self.by_var = defaultdict(list)
        for ci, (_, slots) in enumerate(self.clauses):
            for kind, val in slots:
                if kind == "v" and ci not in self.by_var[val]:
                    self.by_var[val].append(ci)
        self.profiles = []
        for i in range(len(self.vars)):
            prof = Counter()
            for ci in self.by_var[i]:
                head, slots = self.clauses[ci]
                shape = tuple("*" if k == "v" else x for k, x in slots)
                for pos, (k, x) in enumerate(slots):
                    if k == "v" and x == i:
                        prof[(head, pos, shape)] += 1
            self.profiles.append(prof)


def _clause_hit(clause, mapping, gold_keys):
    head, slots = clause
    out = []
    for kind, val in slots:
        if kind == "v":
            m = mapping[val]
            if m < 0:
                return False
            out.append(("v", m))
        else:
            out.append(("c", val))
    return (head, tuple(out)) in gold_keys


def _total(sys_idx, mapping, gold_keys):
    return sum(1 for c in sys_idx.clauses if _clause_hit(c, mapping, gold_keys))


def _hill_climb(sys_idx, gold_idx, mapping, gold_keys):
    n_gold = len(gold_idx.vars)
    owner = [-1] * n_gold
    for i, m in enumerate(mapping):
        if m >= 0:
            owner[m] = i
    score = _total(sys_idx, mapping, gold_keys)

    def local(vars_):
        cis = set()
        for v in vars_:
            cis.update(sys_idx.by_var[v])
        return sum(1 for ci in cis if _clause_hit(sys_idx.clauses[ci], mapping, gold_keys)), cis

    while True:
        best_delta, best_move = 0, None
        for i in range(len(sys_idx.vars)):
            for j in [-1] + list(range(n_gold)):
                if j == mapping[i] or (j >= 0 and gold_idx.kind[j] is not sys_idx.kind[i]):
                    continue
                k = owner[j] if j >= 0 else -1
                touched = [i] if k < 0 else [i, k]
                before, _ = local(touched)
                old_i = mapping[i]
                mapping[i] = j
                if k >= 0:
                    mapping[k] = old_i
                after, _ = local(touched)
                mapping[i] = old_i
                if k >= 0:
                    mapping[k] = j
                if after - before > best_delta:
                    best_delta, best_move = after - before, (i, j, k)
        if best_move is None:
            return score, mapping
        i, j, k = best_move
        old_i = mapping[i]
        if old_i >= 0:
            owner[old_i] = -1
        mapping[i] = j
        if j >= 0:
            owner[j] = i
        if k >= 0:
            mapping[k] = old_i
            if old_i >= 0:
                owner[old_i] = k
        score += best_delta


def _smart_start(sys_idx, gold_idx):
    pairs = []
    for i, pi in enumerate(sys_idx.profiles):
        for j, pj in enumerate(gold_idx.profiles):
            if sys_idx.kind[i] is gold_idx.kind[j]:
                overlap = sum((pi & pj).values())
                if overlap:
                    pairs.append((-overlap, i, j))
    pairs.sort()
    mapping = [-1] * len(sys_idx.vars)
    taken = set()
    for _, i, j in pairs:
        if mapping[i] < 0 and j not in taken:
            mapping[i] = j
            taken.add(j)
    return mapping


def _random_start(sys_idx, gold_idx, rng):
    mapping = [-1] * len(sys_idx.vars)
    for kind in set(sys_idx.kind):
        src = [i for i, k in enumerate(sys_idx.kind) if k is kind]
        dst = [j for j, k in enumerate(gold_idx.kind) if k is kind]
        rng.shuffle(dst)
        for i, j in zip(src, dst):
            mapping[i] = j
    return mapping


def clause_counts(sys, gold, restarts=10, seed=0):
    """(matched, system clauses, gold clauses) of the best variable renaming found.

    Duplicate clauses are counted once.  The search is a steepest-ascent hill
    climb over typed variable mappings, started once from a profile-based
    guess and ``restarts`` times from seeded random mappings.
    """
    sys_idx, gold_idx = _ClauseIndex(sys), _ClauseIndex(gold)
    gold_keys = set(gold_idx.clauses)
    n_sys, n_gold = len(sys_idx.clauses), len(gold_idx.clauses)
    if n_sys == 0 or n_gold == 0:
        return 0, n_sys, n_gold
    rng = random.Random(seed)
    ceiling = min(n_sys, n_gold)
    best, _ = _hill_climb(sys_idx, gold_idx, _smart_start(sys_idx, gold_idx), gold_keys)
    for _ in range(restarts):
        if best >= ceiling:
            break
        score, _ = _hill_climb(sys_idx, gold_idx, _random_start(sys_idx, gold_idx, rng), gold_keys)
        best = max(best, score)
    return best, n_sys, n_gold


def clause_match(sys, gold, restarts=10, seed=0):
    """Clause-level F1 between two clausal DRSs under the best renaming found."""
    matched, n_sys, n_gold = clause_counts(sys, gold, restarts, seed)
    return fscore(matched, n_sys, n_gold)[2]
