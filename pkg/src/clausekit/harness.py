"""Benchmark runs, training-data extraction and result tables."""

from __future__ import annotations

import glob
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from clausekit.derivation import DerivationGraph, verify_derivation
from clausekit.embedding import embed_clauses
from clausekit.orchestrator import PASS_THROUGH, LeapfrogSchedule, SplitMergeConfig, leapfrog, split_merge
from clausekit.premise import SelectionPolicy
from clausekit.saturation import AgeWeight, SaturationLimit, Scored, Status, dump_processed, saturate
from clausekit.scorer import LabeledPair, ScorerParams, TrainConfig, extract_pairs, subsample_negatives, train
from clausekit.tptp import read_problem

MODEL_ENV = "CLAUSEKIT_MODEL"


@dataclass
class RunRecord:
    problem: str
    strategy: str
    status: str
    processed: int
    wall_time: float
    proof_path: str | None = None

    def __post_init__(self):
        Status(self.status)
        if (self.proof_path is not None) != (self.status == Status.UNSATISFIABLE.value):
            raise ValueError("proof path is present exactly for Unsatisfiable runs")


# -- strategies ------------------------------------------------------------------


@dataclass(frozen=True)
class Strategy:
    """A named way of attacking one problem.

    Text form: ``prove:LIMIT``, ``leapfrog:L1,L2,...[@POLICY]`` or
    ``splitmerge:LIMITxITERS[@POLICY]``, where ``POLICY`` is ``top:K``,
    ``thr:T`` or ``frac:F``.  Leapfrogging without a policy passes all
    processed clauses through.
    """

    kind: str
    limits: tuple
    iterations: int
    policy: str | None = None
    jitter: float = 0.0

    @classmethod
    def parse(cls, text):
        kind, _, rest = text.partition(":")
        rest, _, policy = rest.partition("@")
        policy = policy or None
        if kind == "prove":
            return cls(kind, (int(rest or 1000),), 1)
        if kind == "leapfrog":
            limits = tuple(rest.split(",")) if rest else ("300", "500", "60s")
            return cls(kind, limits, len(limits), policy)
        if kind == "splitmerge":
            limit, _, iters = (rest or "1000x3").partition("x")
            return cls(kind, (limit,), int(iters or 3), policy or "thr:0.5")
        raise ValueError(f"unknown strategy {text!r}")

    @property
    def name(self):
        if self.kind == "prove":
            return f"prove:{self.limits[0]}"
        if self.kind == "leapfrog":
            return f"leapfrog:{','.join(map(str, self.limits))}" + (f"@{self.policy}" if self.policy else "")
        return f"splitmerge:{self.limits[0]}x{self.iterations}@{self.policy}"

    @property
    def needs_model(self):
        return self.kind == "splitmerge" or self.policy is not None


def run_strategy(problem, strategy, seed=0, scorer=None, selector=None, cluster_spec=None):
    """Returns ``(status, processed_count, proof_graph_or_None)``."""
    sel = selector or AgeWeight(jitter=strategy.jitter)
    if strategy.needs_model and scorer is None:
        raise ValueError(f"strategy {strategy.name} needs a trained model")
    if strategy.kind == "prove":
        out = saturate(problem.clauses, SaturationLimit.parse(strategy.limits[0]), sel, seed)
        return out.status, len(out.processed), out.proof
    if strategy.kind == "leapfrog":
        policy = SelectionPolicy.parse(strategy.policy) if strategy.policy else PASS_THROUGH
        sched = LeapfrogSchedule(list(strategy.limits), strategy.iterations, policy)
        res = leapfrog(problem, sched, sel, scorer, seed)
    else:
        from clausekit.clustering import ClusterSpec, cluster_clauses

        spec = cluster_spec or ClusterSpec(seed=seed)
        cfg = SplitMergeConfig(
            SaturationLimit.parse(strategy.limits[0]),
            strategy.iterations,
            lambda cl: cluster_clauses(cl, scorer, spec, problem.neg_conjecture),
            SelectionPolicy.parse(strategy.policy),
        )
        res = split_merge(problem, cfg, sel, scorer, seed)
    processed = sum(r["processed"] for r in res.trace if r["phase"] != "merge")
    return res.status, processed, res.proof


def _safe(name):
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def _bench_one(args):
    path, strategy_text, seed, model_path, proof_dir = args
    problem = read_problem(path)
    strategy = Strategy.parse(strategy_text)
    scorer = ScorerParams.load(model_path) if (model_path and strategy.needs_model) else None
    t0 = time.perf_counter()
    status, processed, proof = run_strategy(problem, strategy, seed, scorer)
    wall = time.perf_counter() - t0
    pid = os.path.splitext(os.path.basename(path))[0]
    proof_path = None
    if status == Status.UNSATISFIABLE:
        os.makedirs(proof_dir, exist_ok=True)
        proof_path = os.path.join(proof_dir, f"{_safe(pid)}__{_safe(strategy.name)}.jsonl")
        proof.save(proof_path)
    return RunRecord(pid, strategy.name, str(status), processed, round(wall, 6), proof_path)


def problem_files(target):
    if os.path.isdir(target):
        return sorted(glob.glob(os.path.join(target, "*.p")))
    return [target]


def bench(paths, strategies, seed=0, model_path=None, proof_dir="proofs", workers=1):
    """One :class:`RunRecord` per problem x strategy, in input order."""
    jobs = [(p, s if isinstance(s, str) else s.name, seed, model_path, proof_dir) for p in paths for s in strategies]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_bench_one, jobs))
    return [_bench_one(j) for j in jobs]


def save_records(records, path):
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(asdict(r)) + "\n")


def load_records(path):
    with open(path) as fh:
        return [RunRecord(**json.loads(line)) for line in fh if line.strip()]


# -- report -----------------------------------------------------------------------


def report(records, baseline, challenger):
    """Solved counts, union and problems added by ``challenger`` over ``baseline``."""
    strategies = {r.strategy for r in records}
    for s in (baseline, challenger):
        if s not in strategies:
            raise KeyError(f"unknown strategy {s!r}")
    solved = {}
    for r in records:
        if r.status == Status.UNSATISFIABLE.value:
            solved.setdefault(r.strategy, set()).add(r.problem)
    base = solved.get(baseline, set())
    chal = solved.get(challenger, set())
    return {
        "baseline": baseline,
        "challenger": challenger,
        "problems": len({r.problem for r in records}),
        "solved_baseline": len(base),
        "solved_challenger": len(chal),
        "union": len(base | chal),
        "added": len(chal - base),
        "added_problems": sorted(chal - base),
    }


def format_report(rep):
    cols = [
        ("baseline", rep["baseline"]),
        ("challenger", rep["challenger"]),
        ("solved-baseline", rep["solved_baseline"]),
        ("solved-challenger", rep["solved_challenger"]),
        ("union", rep["union"]),
        ("added-by-challenger", rep["added"]),
    ]
    widths = [max(len(h), len(str(v))) for h, v in cols]
    head = "  ".join(h.ljust(w) for (h, _), w in zip(cols, widths))
    row = "  ".join(str(v).ljust(w) for (_, v), w in zip(cols, widths))
    return head + "\n" + row


# -- training data ----------------------------------------------------------------


def extract_training(problems, limit, out_dir, seed=0, selector=None):
    """Saturate each ``(id, problem)`` with ``limit`` processed clauses.

    Solved problems yield ``<id>.derivation.jsonl`` and ``<id>.pairs.jsonl``;
    unsolved ones yield ``<id>.processed.jsonl``.  Returns a summary dict.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    summary = {"solved": [], "unsolved": [], "positive_pairs": 0, "pairs": 0}
    for pid, problem in problems:
        out = saturate(problem.clauses, SaturationLimit(limit), selector or AgeWeight(), seed)
        base = os.path.join(out_dir, _safe(pid))
        if out.status == Status.UNSATISFIABLE:
            out.derivation.save(base + ".derivation.jsonl")
            pairs = extract_pairs(out.derivation)
            with open(base + ".pairs.jsonl", "w") as fh:
                for p in pairs:
                    fh.write(json.dumps({"problem": pid, "i": p.i, "j": p.j, "label": int(p.label)}) + "\n")
            summary["solved"].append(pid)
            summary["pairs"] += len(pairs)
            summary["positive_pairs"] += sum(p.label for p in pairs)
        else:
            with open(base + ".processed.jsonl", "w") as fh:
                dump_processed(fh, out.processed[:limit])
            summary["unsolved"].append(pid)
    return summary


def load_pairs(path):
    with open(path) as fh:
        return [LabeledPair(r["i"], r["j"], bool(r["label"])) for r in map(json.loads, filter(str.strip, fh))]


def corpus_arrays(corpus_dir, embedder, neg_ratio=4, seed=0):
    """Stack embeddings and re-indexed pairs of every solved problem in a corpus."""
    rows = []
    pairs = []
    offset = 0
    for deriv_path in sorted(glob.glob(os.path.join(corpus_dir, "*.derivation.jsonl"))):
        d = DerivationGraph.load(deriv_path)
        raw = load_pairs(deriv_path.replace(".derivation.jsonl", ".pairs.jsonl"))
        raw = subsample_negatives(raw, neg_ratio, seed)
        ids = sorted({p.i for p in raw} | {p.j for p in raw})
        if not ids:
            continue
        conj = [c for c in d.nodes.values() if c.origin.role == "negated_conjecture"]
        E, _ = embed_clauses([d.nodes[i] for i in ids], conj, embedder)
        pos = {cid: offset + k for k, cid in enumerate(ids)}
        rows.append(E)
        pairs += [LabeledPair(pos[p.i], pos[p.j], p.label) for p in raw]
        offset += len(ids)
    if not rows:
        raise ValueError(f"no solved problems in {corpus_dir}")
    return np.vstack(rows), pairs


def train_from_corpus(corpus_dir, cfg=TrainConfig(), embedder=None):
    from clausekit.embedding import EmbedderConfig

    embedder = embedder or EmbedderConfig()
    E, pairs = corpus_arrays(corpus_dir, embedder, seed=cfg.seed)
    return train(pairs, E, cfg, embedder=embedder)


def verify_records(records, problems_by_id=None):
    """Check every proof file referenced by ``records``; returns the failures."""
    bad = []
    for r in records:
        if r.proof_path:
            try:
                inputs = problems_by_id[r.problem].clauses if problems_by_id else None
                verify_derivation(DerivationGraph.load(r.proof_path), inputs=inputs)
            except ValueError as exc:
                bad.append((r, str(exc)))
    return bad


def default_model_path():
    return os.environ.get(MODEL_ENV)


__all__ = [
    "RunRecord",
    "Strategy",
    "Scored",
    "bench",
    "report",
    "format_report",
    "extract_training",
    "train_from_corpus",
    "run_strategy",
]
