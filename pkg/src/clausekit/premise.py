"""Conjecture-relative clause selection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from clausekit.embedding import embed_clauses
from clausekit.scorer import score_pairs, sigmoid

TOPK = "topk"
THRESHOLD = "threshold"
FRACTION = "fraction"

# probabilities used for the four merge-step selections
DEFAULT_THRESHOLDS = (0.25, 0.5, 0.75, 0.9)


@dataclass(frozen=True)
class SelectionPolicy:
    mode: str
    value: float
    always_include_conjecture: bool = True

    def __post_init__(self):
        if self.mode == TOPK and self.value < 0:
            raise ValueError("k must be non-negative")
        if self.mode == FRACTION and not 0 < self.value <= 1:
            raise ValueError("fraction must be in (0, 1]")
        if self.mode not in (TOPK, THRESHOLD, FRACTION):
            raise ValueError(f"unknown selection mode {self.mode!r}")

    @classmethod
    def top_k(cls, k, **kw):
        return cls(TOPK, int(k), **kw)

    @classmethod
    def threshold(cls, t, **kw):
        return cls(THRESHOLD, float(t), **kw)

    @classmethod
    def top_fraction(cls, f, **kw):
        return cls(FRACTION, float(f), **kw)

    @classmethod
    def parse(cls, text):
        """``top:K``, ``thr:T`` or ``frac:F``."""
        kind, _, val = text.partition(":")
        return {"top": cls.top_k, "thr": cls.threshold, "frac": cls.top_fraction}[kind](float(val))


def pool_conjecture(embeddings):
    """Coordinate-wise mean of the conjecture clause embeddings."""
    e = np.asarray(embeddings, dtype=float)
    if e.ndim != 2 or e.shape[0] == 0:
        raise ValueError("need at least one conjecture embedding")
    return e.mean(axis=0)


def score_clauses(L, neg_conj, params):
    """Logit of each clause of ``L`` against the pooled conjecture."""
    if not L:
        return np.zeros(0)
    E, C = embed_clauses(L, neg_conj, params.embedder)
    pool = pool_conjecture(C) if len(C) else E.mean(axis=0)
    return score_pairs(E, np.broadcast_to(pool, E.shape), params)


def _dedupe(clauses):
    seen = {}
    for c in clauses:
        seen.setdefault(c, c)
    return list(seen.values())


def premise_select(L, neg_conj, params, policy, return_scores=False):
    """Select from ``L`` by ``policy``, then add ``neg_conj``.

    Ranking is by descending logit with ties broken by smaller clause id.
    Thresholds apply to ``sigmoid(logit)``.
    """
    L = _dedupe(L)
    if not L:
        raise ValueError("nothing to select from")
    logits = score_clauses(L, neg_conj, params)
    ranked = sorted(range(len(L)), key=lambda k: (-logits[k], L[k].id if L[k].id is not None else k))
    if policy.mode == TOPK:
        keep = ranked[: int(policy.value)]
    elif policy.mode == FRACTION:
        keep = ranked[: math.ceil(policy.value * len(L))]
    else:
        probs = sigmoid(logits)
        keep = [k for k in ranked if probs[k] >= policy.value]
    selected = [L[k] for k in keep]
    if policy.always_include_conjecture:
        selected = _dedupe(selected + list(neg_conj))
    if return_scores:
        return selected, logits
    return selected


def dump_scores(fh, clauses, logits):
    probs = sigmoid(logits)
    for c, l, p in zip(clauses, logits, probs):
        fh.write(json.dumps({"id": c.id, "clause": str(c), "logit": float(l), "prob": float(p)}) + "\n")
