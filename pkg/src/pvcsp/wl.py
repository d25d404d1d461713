"""Factor graphs, iterated-degree colour refinement, and the equivalences built on it.

A colour encoding at round ``k+1`` is the canonical one-level string
``label|S>c;S>c;...`` over the sorted multiset of (edge label, neighbour
colour at round ``k``); the colour itself is the SHA-256 digest of that
string.  Chaining digests keeps encodings linear in size while remaining
injective: every digest is checked against a table of preimages and a
collision is a hard error.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field

from .arith import format_ext
from .errors import InternalError
from .model import check_similar, _require_instance

VARIABLE = "var"
CONSTRAINT = "con"


@dataclass(frozen=True)
class FactorGraph:
    """Labelled bipartite graph of an instance.

    Vertices ``0..n-1`` are variables (empty label), the rest constraints
    labelled ``(symbol, weight)``.  ``adj[x]`` lists ``(neighbour, S)`` where
    ``S`` is the frozenset of 1-based positions the variable occupies.
    """

    keys: tuple  # ("var", name) or ("con", symbol, names)
    labels: tuple  # None for variables, (symbol, weight) for constraints
    adj: tuple
    n_variables: int
    part: tuple = ()  # source index per vertex, for disjoint unions

    @property
    def n_vertices(self):
        return len(self.keys)

    @property
    def n_constraints(self):
        return len(self.keys) - self.n_variables

    def is_variable(self, x):
        return self.labels[x] is None

    def edges(self):
        out = []
        for x in range(self.n_variables):
            for y, s in self.adj[x]:
                out.append((x, y, s))
        return out

    def components(self):
        seen = [False] * self.n_vertices
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                x = stack.pop()
                comp.append(x)
                for y, _ in self.adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            comps.append(sorted(comp))
        return comps


def factor_graph(I) -> FactorGraph:
    _require_instance(I)
    keys = [(VARIABLE, v) for v in I.universe]
    labels = [None] * len(I.universe)
    adj = [[] for _ in I.universe]
    for r, scope, w in I.constraints():
        c = len(keys)
        keys.append((CONSTRAINT, r, I.names(scope)))
        labels.append((r, w))
        adj.append([])
        positions = {}
        for i, v in enumerate(scope, 1):
            positions.setdefault(v, []).append(i)
        for v, pos in positions.items():
            s = frozenset(pos)
            adj[v].append((c, s))
            adj[c].append((v, s))
    return FactorGraph(
        tuple(keys),
        tuple(labels),
        tuple(tuple(a) for a in adj),
        len(I.universe),
        tuple([0] * len(keys)),
    )


def disjoint_union_graph(*graphs) -> FactorGraph:
    """Disjoint union with variables first (in part order), then constraints."""
    order = []
    for p, G in enumerate(graphs):
        order.extend((p, x) for x in range(G.n_variables))
    for p, G in enumerate(graphs):
        order.extend((p, x) for x in range(G.n_variables, G.n_vertices))
    new = {key: i for i, key in enumerate(order)}
    keys, labels, adj, part = [], [], [], []
    for p, x in order:
        G = graphs[p]
        keys.append((p,) + G.keys[x])
        labels.append(G.labels[x])
        adj.append(tuple((new[(p, y)], s) for y, s in G.adj[x]))
        part.append(p)
    return FactorGraph(
        tuple(keys),
        tuple(labels),
        tuple(adj),
        sum(G.n_variables for G in graphs),
        tuple(part),
    )


# -- encodings -------------------------------------------------------------


def label_string(label):
    if label is None:
        return "V"
    r, w = label
    return f"C:{r}:{format_ext(w)}"


def edge_string(s):
    return ",".join(str(i) for i in sorted(s))


def digest(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def initial_string(label):
    return label_string(label)


def round_string(label, neighbour_colours):
    """One-level canonical string from own label and ``[(S, colour), ...]``."""
    items = sorted(f"{edge_string(s)}>{c}" for s, c in neighbour_colours)
    return label_string(label) + "|" + ";".join(items)


class EncodingTable:
    """Digest -> preimage registry that turns hash collisions into errors."""

    def __init__(self):
        self._pre = {}

    def encode(self, text):
        d = digest(text)
        prev = self._pre.setdefault(d, text)
        if prev != text:
            raise InternalError(f"digest collision between {prev!r} and {text!r}")
        return d

    def preimage(self, d):
        return self._pre[d]


@dataclass
class ColorPartition:
    """Stabilised colour classes of a factor graph.

    ``colors[x]`` is an integer class id, ``encodings[c]`` the canonical
    digest of class ``c``; ``rounds`` is the first round whose partition
    equals the next one; ``history[k]`` the class ids after round ``k``.
    """

    graph: FactorGraph
    colors: list
    encodings: list
    rounds: int
    history: list
    strings: list = field(default_factory=list)  # per-vertex one-level strings

    def encoding(self, x):
        return self.encodings[self.colors[x]]

    def classes(self):
        out = {}
        for x, c in enumerate(self.colors):
            out.setdefault(c, []).append(x)
        return [out[c] for c in sorted(out)]

    def to_json(self):
        return {
            "rounds": self.rounds,
            "vertices": {_key_text(k): self.colors[x] for x, k in enumerate(self.graph.keys)},
            "colors": {str(c): e for c, e in enumerate(self.encodings)},
        }


def _key_text(key):
    if key[0] == VARIABLE:
        return str(key[1])
    if key[0] == CONSTRAINT:
        return f"{key[1]}({','.join(key[2])})"
    return f"{key[0]}/" + _key_text(key[1:])


def _intern(codes):
    distinct = sorted(set(codes))
    ids = {c: i for i, c in enumerate(distinct)}
    return [ids[c] for c in codes], distinct


def refine(G: FactorGraph, table=None) -> ColorPartition:
    """Run colour refinement until the partition stops changing."""
    table = table or EncodingTable()
    strings = [initial_string(lab) for lab in G.labels]
    codes = [table.encode(s) for s in strings]
    ids, distinct = _intern(codes)
    history = [ids]
    rounds = 0
    while True:
        new_strings = [
            round_string(G.labels[x], [(s, codes[y]) for y, s in G.adj[x]])
            for x in range(G.n_vertices)
        ]
        new_codes = [table.encode(s) for s in new_strings]
        new_ids, new_distinct = _intern(new_codes)
        if len(new_distinct) == len(distinct):
            break
        codes, ids, distinct, strings = new_codes, new_ids, new_distinct, new_strings
        history.append(ids)
        rounds += 1
        if rounds > G.n_vertices:
            raise InternalError("refinement failed to stabilise within the vertex bound")
    return ColorPartition(G, ids, distinct, rounds, history, strings)


def _joint(I, J):
    check_similar(I, J)
    G = disjoint_union_graph(factor_graph(I), factor_graph(J))
    return G, refine(G)


def equiv1(I, J) -> bool:
    """Same iterated-degree multiset over variables (joint refinement)."""
    G, P = _joint(I, J)
    left, right = Counter(), Counter()
    for x in range(G.n_variables):
        (left if G.part[x] == 0 else right)[P.colors[x]] += 1
    return left == right


def weak_congruent(I, J) -> bool:
    """``|J| * degrees(I) == |I| * degrees(J)`` under joint refinement."""
    G, P = _joint(I, J)
    left, right = Counter(), Counter()
    for x in range(G.n_vertices):
        (left if G.part[x] == 0 else right)[P.colors[x]] += 1
    nI, nJ = len(I.universe), len(J.universe)
    return {c: nJ * k for c, k in left.items()} == {c: nI * k for c, k in right.items()}


def degree_sequence(I) -> Counter:
    """Multiset of stabilised colour encodings over all vertices of ``G(I)``."""
    P = refine(factor_graph(I))
    return Counter(P.encoding(x) for x in range(P.graph.n_vertices))


def color_classes(I):
    """``(graph, partition)`` for a single instance."""
    G = factor_graph(I)
    return G, refine(G)
