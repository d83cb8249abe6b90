"""The given-clause loop.

Generated clauses are kept in a passive queue; each iteration selects one,
discards it if it is a tautology or forward-subsumed by a processed clause,
and otherwise adds it to the processed set and generates every factor of it
and every binary resolvent with processed clauses (itself included).
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from clausekit.derivation import DerivationGraph
from clausekit.logic import factor, is_tautology, resolve, subsumes


class Status(str, Enum):
    UNSATISFIABLE = "Unsatisfiable"
    SATISFIABLE = "Satisfiable"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


# one clause per second of wall-clock budget at this nominal rate
NOMINAL_RATE = 50


@dataclass(frozen=True)
class SaturationLimit:
    max_processed: int

    def __post_init__(self):
        if self.max_processed < 1:
            raise ValueError("processed-clause limit must be >= 1")

    @classmethod
    def from_budget(cls, seconds, rate=NOMINAL_RATE):
        """Deterministic stand-in for a wall-clock budget."""
        return cls(max(1, int(round(seconds * rate))))

    @classmethod
    def parse(cls, text):
        """``500`` (processed clauses) or ``60s`` (budget)."""
        text = str(text).strip()
        if text.endswith("s"):
            return cls.from_budget(float(text[:-1]))
        return cls(int(text))


@dataclass(frozen=True)
class AgeWeight:
    """Alternate ``age`` oldest-first picks with ``weight`` lightest-first picks.

    ``jitter`` adds seeded uniform noise to clause weights.
    """

    age: int = 1
    weight: int = 4
    jitter: float = 0.0

    def __post_init__(self):
        if self.age < 0 or self.weight < 0 or self.age + self.weight == 0:
            raise ValueError("ratios must be non-negative and not both zero")


@dataclass(frozen=True)
class Scored:
    """Batched contextual ranking by a trained head.

    Unevaluated clauses wait until ``query_size`` of them are collected (or
    the scored queue runs dry) and are then ranked together with the first
    ``context_size`` processed clauses and the conjecture.  One age pick is
    made per ``score_picks`` score picks.
    """

    head: object
    context_size: int = 64
    query_size: int = 32
    age_picks: int = 1
    score_picks: int = 9
    refresh_context: bool = False

    def __post_init__(self):
        if self.context_size < 1 or self.query_size < 1:
            raise ValueError("context and query sizes must be >= 1")
        if self.age_picks < 0 or self.score_picks < 0 or self.age_picks + self.score_picks == 0:
            raise ValueError("ratios must be non-negative and not both zero")


@dataclass
class SaturationOutcome:
    status: Status
    processed: list
    derivation: DerivationGraph | None = None
    empty_id: int | None = None
    generated: int = 0
    pick_log: list = field(default_factory=list)

    @property
    def proof(self):
        return self.derivation.proof() if self.derivation is not None and self.empty_id is not None else None


# -- selection queues -----------------------------------------------------------


class _AgeWeightQueue:
    def __init__(self, sel, seed):
        self.sel = sel
        self.rng = np.random.default_rng(seed)
        self.by_age = []
        self.by_weight = []
        self.taken = set()
        self.tick = 0
        self.size = 0

    def push(self, c):
        w = float(c.weight)
        if self.sel.jitter:
            w += self.sel.jitter * float(self.rng.random())
        heapq.heappush(self.by_age, (c.id, c))
        heapq.heappush(self.by_weight, (w, c.id, c))
        self.size += 1

    def _pop(self, heap):
        while heap:
            item = heapq.heappop(heap)
            c = item[-1]
            if c.id not in self.taken:
                self.taken.add(c.id)
                self.size -= 1
                return c
        return None

    def pop(self):
        if self.size == 0:
            return None, None
        period = self.sel.age + self.sel.weight
        use_age = (self.tick % period) < self.sel.age
        self.tick += 1
        return self._pop(self.by_age if use_age else self.by_weight), ("age" if use_age else "weight")

    def processed(self, c):
        pass


class _ScoredQueue:
    def __init__(self, sel, conjecture):
        self.sel = sel
        self.conjecture = list(conjecture)
        self.context = []
        self.pending = []
        self.by_age = []
        self.by_score = []
        self.taken = set()
        self.scored = set()
        self.tick = 0
        self.size = 0
        self.batches = []

    def push(self, c):
        heapq.heappush(self.by_age, (c.id, c))
        self.pending.append(c)
        self.size += 1

    def processed(self, c):
        if len(self.context) < self.sel.context_size:
            self.context.append(c)
        elif self.sel.refresh_context:
            self.context = self.context[1:] + [c]

    def _flush(self):
        live = [c for c in self.pending if c.id not in self.taken]
        self.pending = []
        q = self.sel.query_size
        for start in range(0, len(live), q):
            batch = live[start : start + q]
            scores = rank_batch(batch, self.context, self.conjecture, self.sel.head)
            self.batches.append([(c.id, float(s)) for c, s in zip(batch, scores)])
            for c, s in zip(batch, scores):
                # higher score first, older clause on ties
                heapq.heappush(self.by_score, (-float(s), c.id, c))
                self.scored.add(c.id)

    def _pop(self, heap):
        while heap:
            c = heapq.heappop(heap)[-1]
            if c.id not in self.taken:
                self.taken.add(c.id)
                self.scored.discard(c.id)
                self.size -= 1
                return c
        return None

    def pop(self):
        if self.size == 0:
            return None, None
        period = self.sel.age_picks + self.sel.score_picks
        use_age = (self.tick % period) < self.sel.age_picks
        self.tick += 1
        if use_age:
            return self._pop(self.by_age), "age"
        if self.pending and (not self.scored or len(self.pending) >= self.sel.query_size):
            self._flush()
        c = self._pop(self.by_score)
        if c is None:
            return self._pop(self.by_age), "age"
        return c, "score"


def rank_batch(query, context, conjecture, head):
    """Score each query clause in the joint context of processed and conjecture clauses."""
    from clausekit.embedding import build_clause_graph, embed
    from clausekit.premise import pool_conjecture
    from clausekit.scorer import score_pairs

    if not query:
        raise ValueError("empty query")
    if head.embedder.d != head.d:
        raise ValueError("head and embedder dimensions differ")
    g = build_clause_graph(list(query) + list(context), conjecture)
    e = embed(g, head.embedder)
    q = e[: len(query)]
    conj = e[len(query) + len(context) :]
    pool = pool_conjecture(conj) if len(conj) else e.mean(axis=0)
    return score_pairs(q, np.broadcast_to(pool, q.shape), head)


# -- the loop -------------------------------------------------------------------


class _Processed:
    """Processed clauses with a (predicate, sign) literal index."""

    def __init__(self):
        self.clauses = []
        self.index = {}

    def add(self, c):
        self.clauses.append(c)
        for k, (sign, atom) in enumerate(c.literals):
            self.index.setdefault((atom[0], len(atom), sign), []).append((c, k))

    def partners(self, sign, atom):
        return self.index.get((atom[0], len(atom), not sign), ())

    def subsumes(self, c):
        heads = {(s, a[0]) for s, a in c.literals}
        for p in self.clauses:
            if len(p) <= len(c) and all((s, a[0]) in heads for s, a in p.literals) and subsumes(p, c):
                return True
        return False


def conjecture_of(clauses):
    return [c for c in clauses if c.origin.role == "negated_conjecture"]


def saturate(S, limit, sel=AgeWeight(), seed=0, graph=None, conjecture=None, log_picks=False):
    """Run the given-clause loop on ``S``.

    Clauses of ``S`` must already carry ids.  When ``graph`` is given, new
    clauses are recorded in it (so proofs may reach back through earlier
    runs); otherwise a fresh graph is started from ``S``.
    """
    if isinstance(limit, int):
        limit = SaturationLimit(limit)
    S = list(S)
    if not S:
        raise ValueError("saturate needs a nonempty clause set")
    if graph is None:
        graph = DerivationGraph()
    for c in S:
        if c.id is None:
            raise ValueError("input clauses must carry ids")
        if c.id not in graph.nodes:
            graph.add(c)
    if conjecture is None:
        conjecture = conjecture_of(S)

    queue = _ScoredQueue(sel, conjecture) if isinstance(sel, Scored) else _AgeWeightQueue(sel, seed)
    seen = set()
    for c in sorted({c.id: c for c in S}.values(), key=lambda c: c.id):
        if c.is_empty:
            return SaturationOutcome(Status.UNSATISFIABLE, [], graph, c.id)
        if c.literals not in seen:
            seen.add(c.literals)
            queue.push(c)

    processed = _Processed()
    picks = []
    generated = 0

    def unsat(empty):
        stored = graph.new(empty)
        graph.empty_id = stored.id
        return SaturationOutcome(Status.UNSATISFIABLE, processed.clauses, graph, stored.id, generated, picks)

    while True:
        if queue.size == 0:
            return SaturationOutcome(Status.SATISFIABLE, processed.clauses, graph, None, generated, picks)
        if len(processed.clauses) >= limit.max_processed:
            return SaturationOutcome(Status.UNKNOWN, processed.clauses, graph, None, generated, picks)
        given, how = queue.pop()
        if given is None:
            continue
        if is_tautology(given) or processed.subsumes(given):
            continue
        processed.add(given)
        queue.processed(given)
        if log_picks:
            picks.append((given.id, how))

        new = []
        lits = given.literals
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                f = factor(given, i, j)
                if f is not None:
                    new.append(f)
        for i, (sign, atom) in enumerate(lits):
            for partner, j in list(processed.partners(sign, atom)):
                r = resolve(given, partner, i, j)
                if r is not None:
                    new.append(r)
        for c in new:
            generated += 1
            if c.is_empty:
                return unsat(c)
            if c.literals in seen or is_tautology(c):
                continue
            seen.add(c.literals)
            queue.push(graph.new(c))


def dump_processed(fh, clauses):
    for k, c in enumerate(clauses):
        fh.write(json.dumps({"index": k, "id": c.id, "clause": str(c)}) + "\n")
