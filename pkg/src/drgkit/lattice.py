"""Hypernym lattice over WordNet-style concept symbols (``lemma.pos.NN``).

Only needed by encodings that label referent nodes with their most specific
concept.  The bundled ``hypernyms.tsv`` covers the concepts of the shipped
fixtures; point ``--hypernyms`` (or ``DRGKIT_HYPERNYMS``) at a larger file
extracted from WordNet for real corpora.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .exceptions import CyclicHypernymy, MalformedLine

__all__ = ["ConceptLattice", "load", "most_specific"]


class ConceptLattice:
    """Acyclic hypernym relation with its transitive closure precomputed."""

    def __init__(self, edges=()):
        self.parents = {}
        for child, parent in edges:
            self.parents.setdefault(child, set()).add(parent)
            self.parents.setdefault(parent, set())
        self._ancestors = self._close()

    @property
    def concepts(self):
        return frozenset(self.parents)

    @property
    def hypernym_edges(self):
        return frozenset((c, p) for c, ps in self.parents.items() for p in ps)

    def _close(self):
        # iterative DFS with colouring so deep WordNet chains don't hit the recursion limit
        ancestors = {}
        state = {}
        for root in sorted(self.parents):
            if root in ancestors:
                continue
            stack = [(root, iter(sorted(self.parents[root])))]
            state[root] = "open"
            path = [root]
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    acc = set()
                    for p in self.parents[node]:
                        acc.add(p)
                        acc |= ancestors[p]
                    ancestors[node] = frozenset(acc)
                    state[node] = "done"
                    stack.pop()
                    path.pop()
                elif state.get(nxt) == "open":
                    raise CyclicHypernymy(path[path.index(nxt):] + [nxt])
                elif nxt not in ancestors:
                    state[nxt] = "open"
                    stack.append((nxt, iter(sorted(self.parents[nxt]))))
                    path.append(nxt)
        return ancestors

    def ancestors(self, concept):
        """Strict hypernyms of ``concept`` (empty for unknown concepts)."""
        return self._ancestors.get(concept, frozenset())

    def is_hypernym(self, hyper, hypo):
        """Reflexive-transitive hypernymy test."""
        return hyper == hypo or hyper in self.ancestors(hypo)

    def most_specific(self, concepts):
        return most_specific(concepts, self)

    @classmethod
    def load(cls, path=None):
        """Read a ``child<TAB>parent`` file; ``None`` loads the bundled one."""
        if path is None:
            text = resources.files("drgkit.data").joinpath("hypernyms.tsv").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        edges = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = [p.strip() for p in body.split("\t")]
            if len(parts) != 2 or not all(parts):
                raise MalformedLine(line_no, line)
            edges.append((parts[0], parts[1]))
        return cls(edges)

    def __repr__(self):
        return f"ConceptLattice({len(self.parents)} concepts, {len(self.hypernym_edges)} edges)"


def load(path=None):
    return ConceptLattice.load(path)


def most_specific(concepts, lattice):
    """Return the member of ``concepts`` that every other member generalizes.

    Returns ``None`` when no such member exists, e.g. for two concepts that
    are not related by hypernymy.  Duplicates are ignored.
    """
    distinct = set(concepts)
    if not distinct:
        raise ValueError("most_specific needs at least one concept")
    for c in distinct:
        anc = lattice.ancestors(c)
        if all(o == c or o in anc for o in distinct):
            return c
    return None
