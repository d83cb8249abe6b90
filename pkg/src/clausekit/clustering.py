"""Splitting clause sets into (possibly overlapping) components.

Points are rows of a real matrix (clause embeddings or rows of the
interaction matrix).  Graphs are built from the interaction matrix with
``sigmoid`` edge weights and clustered by modularity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from clausekit import _kernels
from clausekit.scorer import sigmoid


@dataclass
class Clustering:
    clusters: list
    overlapping: bool = False
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.clusters)

    def labels(self, n):
        """Cluster index per vertex (first cluster wins when overlapping)."""
        out = np.full(n, -1, dtype=int)
        for c, members in enumerate(self.clusters):
            for v in members:
                if out[v] < 0:
                    out[v] = c
        return out

    def relabel(self, ids):
        return Clustering([[ids[v] for v in c] for c in self.clusters], self.overlapping, dict(self.info))

    def to_json(self):
        return {"clusters": [list(map(_plain, c)) for c in self.clusters], "overlapping": self.overlapping}


def _plain(x):
    return x.item() if hasattr(x, "item") else x


def _canonical(groups):
    groups = [sorted(g) for g in groups if len(g)]
    return sorted(groups, key=lambda g: g[0])


# -- k-means ------------------------------------------------------------------


@dataclass
class KMeansResult:
    clustering: Clustering
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float


def _sqdist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)


def _kmeanspp(X, k, rng):
    centers = [X[rng.integers(len(X))]]
    for _ in range(1, k):
        d2 = _sqdist(X, np.asarray(centers)).min(axis=1)
        total = d2.sum()
        if total <= 0:
            centers.append(X[rng.integers(len(X))])
        else:
            centers.append(X[rng.choice(len(X), p=d2 / total)])
    return np.asarray(centers, dtype=float)


def _repair_empty(X, C, labels, k):
    """Give every empty cluster the farthest point of a cluster that can spare one."""
    for c in range(k):
        if np.any(labels == c):
            continue
        sizes = np.bincount(labels, minlength=k)
        d2 = _sqdist(X, C)[np.arange(len(X)), labels]
        d2[sizes[labels] < 2] = -1.0
        labels[int(d2.argmax())] = c
    return labels


def _lloyd(X, C, max_iter):
    k = len(C)
    labels = None
    for _ in range(max_iter):
        new_labels = _repair_empty(X, C, _sqdist(X, C).argmin(axis=1), k)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        C = np.array([X[labels == c].mean(axis=0) for c in range(k)])
    return labels, C


def _hartigan(X, labels, k, max_sweeps=100):
    """Single-point moves that strictly lower the objective, until none remain.

    Moving ``x`` from ``a`` to ``b`` changes the objective by
    ``n_b/(n_b+1)|x-m_b|^2 - n_a/(n_a-1)|x-m_a|^2``.
    """
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k).astype(float)
    C = np.array([X[labels == c].mean(axis=0) for c in range(k)])
    for _ in range(max_sweeps):
        moved = False
        for i in range(len(X)):
            a = labels[i]
            if counts[a] < 2:
                continue
            d2 = ((C - X[i]) ** 2).sum(axis=1)
            cost = counts / (counts + 1) * d2
            cost[a] = counts[a] / (counts[a] - 1) * d2[a]
            b = int(cost.argmin())
            if b == a or cost[b] >= cost[a] * (1 - 1e-12):
                continue
            C[a] = (C[a] * counts[a] - X[i]) / (counts[a] - 1)
            C[b] = (C[b] * counts[b] + X[i]) / (counts[b] + 1)
            counts[a] -= 1
            counts[b] += 1
            labels[i] = b
            moved = True
        if not moved:
            break
    return labels


def kmeans(points, k, seed=0, max_iter=300, n_init=20):
    """Lloyd's algorithm from k-means++ seeds, refined by single-point moves.

    The best of ``n_init`` restarts is kept.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if not 1 <= k <= len(X):
        raise ValueError(f"k={k} must be between 1 and the number of points ({len(X)})")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, _ = _lloyd(X, _kmeanspp(X, k, rng), max_iter)
        labels = _hartigan(X, labels, k)
        C = np.array([X[labels == c].mean(axis=0) for c in range(k)])
        inertia = float(((X - C[labels]) ** 2).sum())
        if best is None or inertia < best[2] - 1e-12:
            best = (labels, C, inertia)
    labels, C, inertia = best
    groups = [np.flatnonzero(labels == c).tolist() for c in range(k)]
    keep = [c for c in range(k) if groups[c]]
    clustering = Clustering([groups[c] for c in keep])
    return KMeansResult(clustering, C[keep], labels, inertia)


def kmeans_objective(points, labels):
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    labels = np.asarray(labels)
    total = 0.0
    for c in np.unique(labels):
        part = X[labels == c]
        total += float(((part - part.mean(axis=0)) ** 2).sum())
    return total


# -- fuzzy c-means -----------------------------------------------------------


@dataclass
class FCMResult:
    U: np.ndarray
    centers: np.ndarray
    objective: list


def fcm_memberships(X, centers, m):
    """Membership matrix for fixed centers; a point on a center belongs to it fully."""
    d = np.sqrt(_sqdist(X, centers))
    U = np.zeros_like(d)
    zero = d <= 1e-300
    exact = zero.any(axis=1)
    if exact.any():
        U[exact] = zero[exact] / zero[exact].sum(axis=1, keepdims=True)
    rest = ~exact
    if rest.any():
        inv = d[rest] ** (-2.0 / (m - 1.0))
        U[rest] = inv / inv.sum(axis=1, keepdims=True)
    return U


def fcm_objective(X, U, centers, m):
    return float(((U**m) * _sqdist(X, centers)).sum())


def fuzzy_cmeans(points, k, m=2.0, seed=0, max_iter=500, tol=1e-10):
    """Standard FCM alternating updates from a seeded random membership."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if not 1 <= k <= len(X):
        raise ValueError(f"k={k} must be between 1 and the number of points ({len(X)})")
    if m <= 1:
        raise ValueError("fuzzifier m must exceed 1")
    rng = np.random.default_rng(seed)
    U = rng.random((len(X), k))
    U /= U.sum(axis=1, keepdims=True)
    trace = []
    centers = None
    for _ in range(max_iter):
        W = U**m
        centers = (W.T @ X) / W.sum(axis=0)[:, None]
        U_new = fcm_memberships(X, centers, m)
        trace.append(fcm_objective(X, U_new, centers, m))
        delta = np.abs(U_new - U).max()
        U = U_new
        if delta < tol:
            break
    return FCMResult(U, centers, trace)


def soft_clusters(U, cutoff):
    """Each point joins every cluster with membership >= cutoff and its argmax cluster."""
    if not 0 < cutoff <= 1:
        raise ValueError("cutoff must be in (0, 1]")
    U = np.asarray(U, dtype=float)
    best = U.argmax(axis=1)
    groups = []
    for c in range(U.shape[1]):
        members = np.flatnonzero((U[:, c] >= cutoff) | (best == c)).tolist()
        if members:
            groups.append(members)
    return Clustering(groups, overlapping=True)


# -- graphs -------------------------------------------------------------------


@dataclass
class WeightedGraph:
    n: int
    edges: dict = field(default_factory=dict)  # (i, j) with i < j -> weight

    def add_edge(self, i, j, w):
        if i == j:
            raise ValueError("self-loops are not allowed")
        if w < 0 or not math.isfinite(w):
            raise ValueError("weights must be finite and non-negative")
        self.edges[(min(i, j), max(i, j))] = float(w)

    @property
    def total_weight(self):
        return sum(self.edges.values())

    def degrees(self):
        deg = np.zeros(self.n)
        for (i, j), w in self.edges.items():
            deg[i] += w
            deg[j] += w
        return deg

    def csr(self):
        nbrs = [[] for _ in range(self.n)]
        for (i, j), w in sorted(self.edges.items()):
            nbrs[i].append((j, w))
            nbrs[j].append((i, w))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in nbrs])
        indices = np.array([j for row in nbrs for j, _ in row], dtype=np.int64)
        weights = np.array([w for row in nbrs for _, w in row], dtype=float)
        return indptr, indices, weights

    def induced(self, vertices):
        """Subgraph on ``vertices`` (relabelled 0..len-1 in the given order)."""
        pos = {v: k for k, v in enumerate(vertices)}
        sub = WeightedGraph(len(vertices))
        for (i, j), w in self.edges.items():
            if i in pos and j in pos:
                sub.add_edge(pos[i], pos[j], w)
        return sub

    def write_edgelist(self, fh, labels=None):
        for (i, j), w in sorted(self.edges.items()):
            a, b = (labels[i], labels[j]) if labels is not None else (i, j)
            fh.write(f"{a} {b} {w!r}\n")

    @classmethod
    def read_edgelist(cls, fh, n=None):
        edges = []
        for line in fh:
            if line.strip():
                a, b, w = line.split()
                edges.append((int(a), int(b), float(w)))
        size = n if n is not None else 1 + max((max(a, b) for a, b, _ in edges), default=-1)
        g = cls(size)
        for a, b, w in edges:
            g.add_edge(a, b, w)
        return g


def graph_from_L(L, edge_threshold=0.5):
    """Edges ``(i, j)`` weighted ``sigmoid(L[i, j])`` where that weight >= threshold."""
    L = np.asarray(L, dtype=float)
    P = sigmoid(L)
    g = WeightedGraph(len(L))
    iu, ju = np.triu_indices(len(L), k=1)
    for i, j in zip(iu.tolist(), ju.tolist()):
        if P[i, j] >= edge_threshold:
            g.add_edge(i, j, P[i, j])
    return g


def modularity(g, clusters):
    """Newman modularity of a partition of ``g``'s vertices."""
    total = g.total_weight
    if total <= 0:
        return 0.0
    comm = np.full(g.n, -1, dtype=int)
    for c, members in enumerate(clusters):
        for v in members:
            comm[v] = c
    w_in = np.zeros(len(clusters))
    for (i, j), w in g.edges.items():
        if comm[i] == comm[j]:
            w_in[comm[i]] += w
    deg = g.degrees()
    q = 0.0
    for c, members in enumerate(clusters):
        dc = float(deg[list(members)].sum())
        q += w_in[c] / total - (dc / (2.0 * total)) ** 2
    return float(q)


def _aggregate(indptr, indices, weights, comm, k):
    """Community graph (with self-loops) as CSR over ``k`` nodes."""
    acc = {}
    for i in range(len(indptr) - 1):
        ci = comm[i]
        for p in range(indptr[i], indptr[i + 1]):
            key = (ci, comm[indices[p]])
            acc[key] = acc.get(key, 0.0) + weights[p]
    rows = [[] for _ in range(k)]
    for (a, b), w in sorted(acc.items()):
        rows[a].append((b, w))
    new_ptr = np.zeros(k + 1, dtype=np.int64)
    new_ptr[1:] = np.cumsum([len(r) for r in rows])
    new_idx = np.array([b for r in rows for b, _ in r], dtype=np.int64)
    new_w = np.array([w for r in rows for _, w in r], dtype=float)
    return new_ptr, new_idx, new_w


def _merge_to(g, groups, target_k):
    """Merge cluster pairs with the largest modularity gain until <= target_k."""
    total = g.total_weight
    deg = g.degrees()
    groups = [list(x) for x in groups]
    while len(groups) > target_k:
        comm = {}
        for c, members in enumerate(groups):
            for v in members:
                comm[v] = c
        between = {}
        for (i, j), w in g.edges.items():
            a, b = comm[i], comm[j]
            if a != b:
                key = (min(a, b), max(a, b))
                between[key] = between.get(key, 0.0) + w
        tot = [float(deg[m].sum()) for m in groups]
        best, best_gain = None, -math.inf
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                if total > 0:
                    gain = between.get((a, b), 0.0) / total - 2.0 * (tot[a] / (2 * total)) * (tot[b] / (2 * total))
                else:
                    gain = 0.0
                if gain > best_gain + 1e-15:
                    best, best_gain = (a, b), gain
        a, b = best
        groups[a] = groups[a] + groups[b]
        del groups[b]
    return groups


def louvain(g, seed=0, target_k=None, kernels=None):
    """Louvain modularity clustering.

    Vertex-move passes in a seeded order alternate with graph aggregation
    until no vertex moves.  ``target_k`` is a soft cap enforced afterwards by
    merging the cluster pairs whose union loses the least modularity.
    ``info["modularity"]`` records Q before the first pass and after each.
    """
    kern = kernels or _kernels
    if g.n == 0:
        return Clustering([], info={"modularity": [0.0]})
    rng = np.random.default_rng(seed)
    indptr, indices, weights = g.csr()
    degree = np.zeros(g.n)
    np.add.at(degree, np.repeat(np.arange(g.n), np.diff(indptr)), weights)
    m2 = float(weights.sum())
    member = np.arange(g.n)  # original vertex -> current node
    trace = [modularity(g, [[v] for v in range(g.n)])]
    if m2 > 0:
        while True:
            k = len(indptr) - 1
            comm = np.arange(k, dtype=np.int64)
            tot = degree.astype(float).copy()
            order = rng.permutation(k).astype(np.int64)
            moves = kern.louvain_local_moves(indptr, indices, weights, degree, order, comm, tot, m2)
            if moves == 0:
                break
            _, comm = np.unique(comm, return_inverse=True)
            k_new = int(comm.max()) + 1
            member = comm[member]
            trace.append(modularity(g, _groups(member, k_new)))
            indptr, indices, weights = _aggregate(indptr, indices, weights, comm, k_new)
            degree = np.zeros(k_new)
            np.add.at(degree, np.repeat(np.arange(k_new), np.diff(indptr)), weights)
            if k_new == k:
                break
    groups = _groups(member, int(member.max()) + 1)
    if target_k is not None and len(groups) > target_k:
        groups = _merge_to(g, groups, target_k)
    groups = _canonical(groups)
    return Clustering(groups, info={"modularity": trace, "Q": modularity(g, groups)})


def _groups(member, k):
    groups = [[] for _ in range(k)]
    for v, c in enumerate(member):
        groups[c].append(v)
    return [x for x in groups if x]


def overlap_by_hubs(g, hub_fraction, seed=0, target_k=None):
    """Remove the highest weighted-degree vertices, cluster the rest, add hubs everywhere."""
    if not 0 <= hub_fraction <= 0.5:
        raise ValueError("hub_fraction must be in [0, 0.5]")
    h = int(math.floor(hub_fraction * g.n + 1e-9))
    if h == 0:
        return louvain(g, seed, target_k)
    deg = g.degrees()
    ranked = sorted(range(g.n), key=lambda v: (-deg[v], v))
    hubs = sorted(ranked[:h])
    rest = sorted(ranked[h:])
    if not rest:
        return Clustering([hubs], overlapping=True, info={"hubs": hubs})
    base = louvain(g.induced(rest), seed, target_k)
    groups = [sorted([rest[v] for v in c] + hubs) for c in base.clusters]
    return Clustering(groups, overlapping=True, info={"hubs": hubs})


# -- clause-level front end ---------------------------------------------------

METHODS = ("kmeans", "fcm", "graph", "hubs")


@dataclass(frozen=True)
class ClusterSpec:
    method: str = "graph"
    k: int = 2
    representation: str = "rows"  # rows of L or raw embeddings
    edge_threshold: float = 0.5
    target_k: int | None = 4
    fuzzifier: float = 2.0
    cutoff: float = 0.3
    hub_fraction: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown clustering method {self.method!r}")


def cluster_matrix(E, L, spec):
    """Cluster rows given embeddings ``E`` and interaction matrix ``L``."""
    n = len(L)
    if spec.method in ("kmeans", "fcm"):
        X = np.asarray(L if spec.representation == "rows" else E, dtype=float)
        k = min(spec.k, n)
        if spec.method == "kmeans":
            return kmeans(X, k, spec.seed).clustering
        return soft_clusters(fuzzy_cmeans(X, k, spec.fuzzifier, spec.seed).U, spec.cutoff)
    g = graph_from_L(L, spec.edge_threshold)
    if spec.method == "graph":
        return louvain(g, spec.seed, spec.target_k)
    return overlap_by_hubs(g, spec.hub_fraction, spec.seed, spec.target_k)


def cluster_clauses(clauses, params, spec, conjecture=()):
    """Split ``clauses`` into lists of clauses using the trained head ``params``."""
    from clausekit.embedding import embed_clauses
    from clausekit.scorer import interaction_matrix

    if len(clauses) < 2:
        return [list(clauses)]
    E, _ = embed_clauses(clauses, conjecture, params.embedder)
    L = interaction_matrix(E, params)
    clustering = cluster_matrix(E, L, spec)
    return [[clauses[v] for v in c] for c in clustering.clusters]


def save_clustering(clustering, path):
    with open(path, "w") as fh:
        json.dump(clustering.to_json(), fh)
