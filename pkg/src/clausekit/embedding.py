"""Symbol-anonymous clause graphs and fixed message-passing embeddings.

The graph has term nodes (shared subterms), clause nodes and symbol nodes.
Node features carry only the node class, arity and conjecture flag, so a
consistent renaming of symbols produces an isomorphic graph.  Message passing
is computed so that every node's value depends only on the multiset of its
neighbours' values (neighbour sums are taken over per-coordinate sorted
values, and matrix products use a fixed accumulation order).  Isomorphic
graphs therefore give bit-identical embeddings.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from clausekit import _kernels
from clausekit.logic import term_depth

TERM_VAR, TERM_FUNC, TERM_ATOM, CLAUSE, SYM_FUNC, SYM_PRED = range(6)
NODE_CLASSES = 6
ARITY_BUCKETS = 5

# directed typed edges; each undirected relation appears in both directions
EDGE_TYPES = (
    "arg_up",  # subterm -> parent term
    "arg_down",  # parent term -> subterm
    "pos_up",  # atom -> clause, positive occurrence
    "pos_down",  # clause -> atom
    "neg_up",
    "neg_down",
    "sym_occ",  # symbol -> term headed by it
    "occ_sym",  # term -> its head symbol
)
FEATURES = NODE_CLASSES + ARITY_BUCKETS + 1


@dataclass(frozen=True)
class EmbedderConfig:
    layers: int = 3
    d: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.layers < 1 or self.d < 2:
            raise ValueError("need layers >= 1 and d >= 2")


@dataclass
class ClauseGraph:
    node_class: list = field(default_factory=list)
    arity: list = field(default_factory=list)
    conjecture: list = field(default_factory=list)
    edges: dict = field(default_factory=lambda: {t: [] for t in EDGE_TYPES})
    clause_nodes: list = field(default_factory=list)

    @property
    def num_nodes(self):
        return len(self.node_class)

    def count(self, *classes):
        return sum(1 for c in self.node_class if c in classes)

    def _node(self, cls, arity, conj=False):
        self.node_class.append(cls)
        self.arity.append(arity)
        self.conjecture.append(conj)
        return len(self.node_class) - 1

    def _link(self, up, down, child, parent):
        self.edges[up].append((child, parent))
        self.edges[down].append((parent, child))


def build_clause_graph(clauses, conjecture=()):
    """Shared-subterm graph over ``clauses`` followed by ``conjecture``.

    Ground subterms are shared across all clauses; subterms containing
    variables are shared within their clause only.  ``clause_nodes`` lists the
    clause node of each input clause in order (clauses, then conjecture).
    """
    g = ClauseGraph()
    terms = {}
    symbols = {}

    def symbol(name, arity, kind):
        key = (name, kind)
        if key not in symbols:
            symbols[key] = g._node(kind, arity)
        return symbols[key]

    def term(t, scope, is_atom):
        if type(t) is int:
            key = (scope, t)
            if key not in terms:
                terms[key] = g._node(TERM_VAR, 0)
            return terms[key]
        ground = _is_ground(t)
        key = (None, t, is_atom) if ground else (scope, t, is_atom)
        if key in terms:
            return terms[key]
        node = g._node(TERM_ATOM if is_atom else TERM_FUNC, len(t) - 1)
        terms[key] = node
        g._link("occ_sym", "sym_occ", node, symbol(t[0], len(t) - 1, SYM_PRED if is_atom else SYM_FUNC))
        for a in t[1:]:
            g._link("arg_up", "arg_down", term(a, scope, False), node)
        return node

    everything = [(c, False) for c in clauses] + [(c, True) for c in conjecture]
    for scope, (c, conj) in enumerate(everything):
        cnode = g._node(CLAUSE, len(c.literals), conj)
        g.clause_nodes.append(cnode)
        for positive, atom in c.literals:
            anode = term(atom, scope, True)
            if positive:
                g._link("pos_up", "pos_down", anode, cnode)
            else:
                g._link("neg_up", "neg_down", anode, cnode)
    return g


def _is_ground(t):
    if type(t) is int:
        return False
    return all(_is_ground(a) for a in t[1:])


def initial_features(g):
    x = np.zeros((g.num_nodes, FEATURES))
    idx = np.arange(g.num_nodes)
    x[idx, np.asarray(g.node_class, dtype=int)] = 1.0
    x[idx, NODE_CLASSES + np.minimum(np.asarray(g.arity, dtype=int), ARITY_BUCKETS - 1)] = 1.0
    x[:, -1] = np.asarray(g.conjecture, dtype=float)
    return x


@functools.lru_cache(maxsize=8)
def embedder_weights(cfg, in_dim=FEATURES):
    """Fixed random weights for ``cfg``: input projection and per-layer maps.

    Cached per config; the arrays are read-only.
    """
    rng = np.random.default_rng(cfg.seed)
    proj = rng.standard_normal((in_dim, cfg.d)) / np.sqrt(in_dim)
    layers = []
    # He scale per term keeps activations near unit size through the layers
    scale = np.sqrt(2.0 / cfg.d)
    for _ in range(cfg.layers):
        self_w = rng.standard_normal((cfg.d, cfg.d)) * scale
        edge_w = {t: rng.standard_normal((cfg.d, cfg.d)) * scale for t in EDGE_TYPES}
        layers.append((self_w, edge_w))
    for w in [proj] + [m for s, e in layers for m in (s, *e.values())]:
        w.setflags(write=False)
    return proj, layers


def ordered_matmul(x, w):
    """``x @ w`` accumulated in a fixed order so each row depends only on itself."""
    return _kernels.ordered_matmul(x, w)


def neighbour_mean(h, pairs, n):
    """Mean of ``h[src]`` over incoming ``(src, dst)`` pairs, order-invariant."""
    out = np.zeros((n, h.shape[1]))
    if not pairs:
        return out
    arr = np.asarray(pairs, dtype=np.int64)
    order = np.argsort(arr[:, 1], kind="stable")
    src, dst = arr[order, 0], arr[order, 1]
    targets, starts, counts = np.unique(dst, return_index=True, return_counts=True)
    sums = _kernels.segment_sorted_sums(h[src], starts, counts)
    out[targets] = sums / counts[:, None]
    return out


def embed(g, cfg=EmbedderConfig(), return_all=False):
    """Clause-node embeddings, one row per entry of ``g.clause_nodes``."""
    proj, layers = embedder_weights(cfg)
    h = ordered_matmul(initial_features(g), proj)
    n = g.num_nodes
    for self_w, edge_w in layers:
        acc = ordered_matmul(h, self_w)
        for t in EDGE_TYPES:
            if g.edges[t]:
                acc = acc + ordered_matmul(neighbour_mean(h, g.edges[t], n), edge_w[t])
        h = np.maximum(acc, 0.0)
    if return_all:
        return h
    return h[np.asarray(g.clause_nodes, dtype=int)] if g.clause_nodes else np.zeros((0, cfg.d))


def embed_clauses(clauses, conjecture=(), cfg=EmbedderConfig()):
    """Embed ``clauses`` jointly with ``conjecture``; returns (clause rows, conjecture rows)."""
    g = build_clause_graph(clauses, conjecture)
    e = embed(g, cfg)
    return e[: len(clauses)], e[len(clauses) :]


def feature_embed(c, d=32):
    """Hand-crafted count features, padded or truncated to ``d``.

    Layout: literal count, positive count, negative count, maximum atom depth,
    distinct variables, distinct symbols, then symbol occurrences bucketed by
    arity 0, 1, 2, 3, 4+.
    """
    lits = c.literals
    pos = sum(1 for s, _ in lits if s)
    depth = max((term_depth(a) for _, a in lits), default=0)
    variables = set()
    symbols = set()
    hist = [0] * ARITY_BUCKETS
    stack = [a for _, a in lits]
    while stack:
        t = stack.pop()
        if type(t) is int:
            variables.add(t)
            continue
        symbols.add((t[0], len(t) - 1))
        hist[min(len(t) - 1, ARITY_BUCKETS - 1)] += 1
        stack.extend(t[1:])
    feats = [len(lits), pos, len(lits) - pos, depth, len(variables), len(symbols), *hist]
    out = np.zeros(d)
    m = min(d, len(feats))
    out[:m] = feats[:m]
    return out
