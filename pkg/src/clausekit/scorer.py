"""Pairwise clause-interaction scoring and its training.

Two heads map clause embeddings ``c`` through an affine layer ``u = W c + beta``:

* architecture 1: ``l(i, j) = <u_i, u_j> / sqrt(n)`` with ``W`` of shape (n, d);
* architecture 2: ``l(i, j) = <u_i, reverse(u_j)> / sqrt(n)`` with ``W`` of
  shape (2n, d).

Both are symmetric bilinear forms in the embeddings, see :func:`to_bilinear`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from clausekit.embedding import EmbedderConfig

EPS = 1e-12


class TrainingDiverged(FloatingPointError):
    def __init__(self, step, loss):
        super().__init__(f"training diverged at step {step} (loss {loss})")
        self.step = step


@dataclass
class ScorerParams:
    arch: int
    W: np.ndarray
    beta: np.ndarray
    n: int
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)

    def __post_init__(self):
        if self.arch not in (1, 2):
            raise ValueError(f"unknown architecture {self.arch}")
        self.W = np.asarray(self.W, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        out = self.n if self.arch == 1 else 2 * self.n
        if self.W.shape[0] != out or self.beta.shape != (out,):
            raise ValueError(f"architecture {self.arch} with n={self.n} needs W with {out} rows and matching beta")
        if self.embedder.d != self.W.shape[1]:
            raise ValueError(f"head expects d={self.W.shape[1]} but embedder produces d={self.embedder.d}")

    @property
    def d(self):
        return self.W.shape[1]

    def to_json(self):
        return {
            "arch": self.arch,
            "n": self.n,
            "d": self.d,
            "W": self.W.ravel().tolist(),
            "beta": self.beta.tolist(),
            "embedder": {"layers": self.embedder.layers, "d": self.embedder.d, "seed": self.embedder.seed},
        }

    @classmethod
    def from_json(cls, obj):
        emb = EmbedderConfig(**obj["embedder"])
        rows = obj["n"] if obj["arch"] == 1 else 2 * obj["n"]
        W = np.asarray(obj["W"], dtype=float).reshape(rows, obj["d"])
        return cls(obj["arch"], W, np.asarray(obj["beta"], dtype=float), obj["n"], emb)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def init_params(arch=1, d=32, n=16, seed=0, scale=0.1, embedder=None):
    rng = np.random.default_rng(seed)
    rows = n if arch == 1 else 2 * n
    embedder = embedder or EmbedderConfig(d=d)
    return ScorerParams(arch, rng.standard_normal((rows, d)) * scale, np.zeros(rows), n, embedder)


def _check_dim(p, *vectors):
    for v in vectors:
        if np.shape(v)[-1] != p.d:
            raise ValueError(f"embedding dimension {np.shape(v)[-1]} does not match head dimension {p.d}")


def _pair_dot(p, ui, uj):
    """Row-wise score of affine outputs; exactly symmetric in (ui, uj)."""
    if p.arch == 1:
        prod = ui * uj
    else:
        n = p.n
        # pair term k with 2n-1-k so that swapping arguments is exact
        prod = ui[..., :n] * uj[..., ::-1][..., :n] + uj[..., :n] * ui[..., ::-1][..., :n]
    return prod.sum(axis=-1) / math.sqrt(p.n)


def score_pair(ci, cj, p):
    """Logit ``l(i, j)`` for one pair of embeddings."""
    _check_dim(p, ci, cj)
    ui = p.W @ np.asarray(ci, dtype=float) + p.beta
    uj = p.W @ np.asarray(cj, dtype=float) + p.beta
    return float(_pair_dot(p, ui, uj))


def score_pairs(Ei, Ej, p):
    """Vectorized :func:`score_pair` over matching rows of ``Ei`` and ``Ej``."""
    _check_dim(p, Ei, Ej)
    Ui = np.asarray(Ei, dtype=float) @ p.W.T + p.beta
    Uj = np.asarray(Ej, dtype=float) @ p.W.T + p.beta
    return _pair_dot(p, Ui, Uj)


@dataclass
class BilinearForm:
    A: np.ndarray
    v: np.ndarray
    b: float
    psd: bool

    def evaluate(self, ci, cj):
        ci = np.asarray(ci, dtype=float)
        cj = np.asarray(cj, dtype=float)
        return float(ci @ self.A @ cj + self.v @ (ci + cj) + self.b)


def reversal(m):
    return np.eye(m)[::-1]


def to_bilinear(p):
    """Equivalent ``c_i^T A c_j + v^T (c_i + c_j) + b``.

    ``psd`` is True for architecture 1, where ``A = W^T W / sqrt(n)``.
    """
    root = math.sqrt(p.n)
    if p.arch == 1:
        A = p.W.T @ p.W / root
        v = p.W.T @ p.beta / root
        b = float(p.beta @ p.beta) / root
    else:
        R = reversal(2 * p.n)
        A = p.W.T @ R @ p.W / root
        v = p.W.T @ R @ p.beta / root
        b = float(p.beta @ R @ p.beta) / root
    A = (A + A.T) / 2
    return BilinearForm(A, v, b, p.arch == 1)


def interaction_matrix(E, p):
    """Symmetric matrix of all pairwise logits over the rows of ``E``."""
    E = np.asarray(E, dtype=float)
    if E.shape[0] < 2:
        raise ValueError("need at least two embeddings")
    _check_dim(p, E)
    U = E @ p.W.T + p.beta
    if p.arch == 1:
        L = U @ U.T
    else:
        L = U @ U[:, ::-1].T
    L = L / math.sqrt(p.n)
    return (L + L.T) / 2


# -- training pairs ----------------------------------------------------------


@dataclass(frozen=True, order=True)
class LabeledPair:
    i: int
    j: int
    label: bool


def extract_pairs(d):
    """Parent pairs of every recorded inference, labelled by proof membership.

    Resolution contributes its two parents; factoring contributes the
    self-pair of its parent.  A pair is positive when any inference from it
    produced a proof clause.
    """
    from clausekit.logic import FACTOR, RESOLVE

    proof = d.proof_ids
    if not proof:
        raise ValueError("derivation contains no proof")
    labels = {}
    for cid in sorted(d.nodes):
        o = d.nodes[cid].origin
        if o.rule == RESOLVE:
            a, b = o.parents
        elif o.rule == FACTOR:
            a = b = o.parents[0]
        else:
            continue
        key = (min(a, b), max(a, b))
        labels[key] = labels.get(key, False) or cid in proof
    return [LabeledPair(i, j, y) for (i, j), y in sorted(labels.items())]


def subsample_negatives(pairs, ratio=4, seed=0):
    """Keep all positives and at most ``ratio`` times as many negatives."""
    pos = [p for p in pairs if p.label]
    neg = [p for p in pairs if not p.label]
    cap = ratio * len(pos)
    if len(neg) > cap:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(len(neg), size=cap, replace=False))
        neg = [neg[k] for k in keep]
    return sorted(pos + neg)


# -- loss and gradient --------------------------------------------------------


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))


def _pair_arrays(E, pairs):
    if isinstance(E, dict):
        Ei = np.array([E[p.i] for p in pairs], dtype=float)
        Ej = np.array([E[p.j] for p in pairs], dtype=float)
    else:
        E = np.asarray(E, dtype=float)
        Ei = E[[p.i for p in pairs]]
        Ej = E[[p.j for p in pairs]]
    y = np.array([1.0 if p.label else 0.0 for p in pairs])
    return Ei, Ej, y


def _bce(logits, y):
    s = np.clip(sigmoid(logits), EPS, 1.0 - EPS)
    return float(np.mean(-(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))))


def bce_loss(p, E, pairs):
    """Mean binary cross-entropy of ``sigmoid(l)`` against the pair labels.

    ``E`` is an array indexed by the pairs' ``i``/``j`` or a mapping from
    clause id to embedding.
    """
    if not pairs:
        raise ValueError("no pairs")
    Ei, Ej, y = _pair_arrays(E, pairs)
    return _bce(score_pairs(Ei, Ej, p), y)


def loss_and_grad(p, Ei, Ej, y, l2=0.0):
    """Loss and analytic gradients with respect to ``W`` and ``beta``."""
    Ui = Ei @ p.W.T + p.beta
    Uj = Ej @ p.W.T + p.beta
    logits = _pair_dot(p, Ui, Uj)
    loss = _bce(logits, y) + 0.5 * l2 * float(np.sum(p.W * p.W))
    s = sigmoid(logits)
    # derivative of the clipped loss vanishes where the clip is active
    active = (s > EPS) & (s < 1.0 - EPS)
    g = np.where(active, s - y, 0.0) / len(y) / math.sqrt(p.n)
    if p.arch == 1:
        Gi, Gj = Uj, Ui
    else:
        Gi, Gj = Uj[:, ::-1], Ui[:, ::-1]
    # dl/du_i = Gi, dl/du_j = Gj (scaled by g)
    gW = (g[:, None] * Gi).T @ Ei + (g[:, None] * Gj).T @ Ej + l2 * p.W
    gb = (g[:, None] * (Gi + Gj)).sum(axis=0)
    return loss, gW, gb


@dataclass
class TrainConfig:
    lr: float = 0.02
    epochs: int = 50
    batch: int = 64
    seed: int = 0
    l2: float = 0.0
    arch: int = 2
    n: int = 16
    init_scale: float = 0.1


@dataclass
class TrainResult:
    params: ScorerParams
    losses: list


def train(pairs, E, cfg=TrainConfig(), init=None, embedder=None):
    """Minibatch SGD on :func:`bce_loss`.

    ``losses`` holds the full-data loss before training and after each epoch.
    """
    pos = sum(1 for p in pairs if p.label)
    if pos == 0 or pos == len(pairs):
        raise ValueError("training needs at least one positive and one negative pair")
    Ei, Ej, y = _pair_arrays(E, pairs)
    d = Ei.shape[1]
    embedder = embedder or EmbedderConfig(d=d)
    params = init or init_params(cfg.arch, d, cfg.n, cfg.seed, cfg.init_scale, embedder)
    params = ScorerParams(params.arch, params.W.copy(), params.beta.copy(), params.n, params.embedder)
    rng = np.random.default_rng(cfg.seed)
    losses = [loss_and_grad(params, Ei, Ej, y, cfg.l2)[0]]
    step = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(len(y))
        for start in range(0, len(y), cfg.batch):
            idx = order[start : start + cfg.batch]
            loss, gW, gb = loss_and_grad(params, Ei[idx], Ej[idx], y[idx], cfg.l2)
            step += 1
            if not np.isfinite(loss) or not (np.all(np.isfinite(gW)) and np.all(np.isfinite(gb))):
                raise TrainingDiverged(step, loss)
            params.W -= cfg.lr * gW
            params.beta -= cfg.lr * gb
        epoch_loss = loss_and_grad(params, Ei, Ej, y, cfg.l2)[0]
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(step, epoch_loss)
        losses.append(epoch_loss)
    return TrainResult(params, losses)


def auc(scores, labels):
    """Area under the ROC curve via the rank statistic (ties count half)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    pos = scores[labels]
    neg = scores[~labels]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("need both classes")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (len(pos) * len(neg)))
