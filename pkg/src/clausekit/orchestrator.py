"""Leapfrogging and split-and-merge proof search.

Both drivers iterate limited saturation runs.  Between runs the processed
clauses are either re-selected against the negated conjecture (leapfrogging)
or split into components that are saturated separately and then merged by
the same selection (split and merge).  All runs record into one derivation
graph, so a refutation found in a late run can be traced back to the input
clauses.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

from clausekit.derivation import DerivationGraph, verify_derivation
from clausekit.premise import SelectionPolicy, premise_select
from clausekit.saturation import AgeWeight, SaturationLimit, Status, saturate

log = logging.getLogger(__name__)

PASS_THROUGH = "pass"


@dataclass
class LeapfrogSchedule:
    """Per-iteration limits; the last limit repeats once the list runs out.

    ``selection`` is a :class:`SelectionPolicy`, or ``PASS_THROUGH`` to feed
    all processed clauses to the next run.
    """

    limits: list = field(default_factory=lambda: [SaturationLimit(300), SaturationLimit(500), SaturationLimit.from_budget(60)])
    iteration_limit: int = 3
    selection: object = PASS_THROUGH
    carry_initial: bool = False

    def __post_init__(self):
        if not self.limits:
            raise ValueError("schedule needs at least one limit")
        if self.iteration_limit < 1:
            raise ValueError("iteration_limit must be >= 1")
        self.limits = [x if isinstance(x, SaturationLimit) else SaturationLimit.parse(x) for x in self.limits]

    def limit(self, i):
        return self.limits[min(i, len(self.limits) - 1)]


@dataclass
class SplitMergeConfig:
    saturation_limit: SaturationLimit = field(default_factory=lambda: SaturationLimit(1000))
    iteration_limit: int = 3
    clusterer: object = None  # callable(list[Clause]) -> list[list[Clause]]
    merge_policy: SelectionPolicy = field(default_factory=lambda: SelectionPolicy.threshold(0.5))
    component_conjecture: bool = False

    def __post_init__(self):
        if self.iteration_limit < 1:
            raise ValueError("iteration_limit must be >= 1")
        if isinstance(self.saturation_limit, (int, str)):
            self.saturation_limit = SaturationLimit.parse(self.saturation_limit)


@dataclass
class FinalResult:
    status: Status
    proof: DerivationGraph | None = None
    trace: list = field(default_factory=list)
    saturate_calls: int = 0
    iterations: int = 0
    inputs: list = field(default_factory=list)  # S_i per iteration, as id lists

    def write_trace(self, fh):
        for rec in self.trace:
            fh.write(json.dumps(rec) + "\n")

    @property
    def szs(self):
        return f"SZS status {self.status.value}"


def _union(*groups):
    out = {}
    for group in groups:
        for c in group:
            out.setdefault(c, c)
    return list(out.values())


class _Run:
    """Shared bookkeeping for one orchestrated search."""

    def __init__(self, problem, sel, seed, saturate_fn):
        self.problem = problem
        self.sel = sel
        self.seed = seed
        self.saturate_fn = saturate_fn
        self.graph = DerivationGraph.from_problem(problem)
        self.result = FinalResult(Status.UNKNOWN)
        self.t0 = time.perf_counter()

    def saturate(self, S, limit, iteration, phase, component=None):
        self.result.saturate_calls += 1
        out = self.saturate_fn(S, limit, self.sel, self.seed + self.result.saturate_calls, self.graph)
        self.result.trace.append(
            {
                "iteration": iteration,
                "phase": phase,
                "component": component,
                "status": str(out.status),
                "input": len(S),
                "processed": len(out.processed),
                "elapsed": round(time.perf_counter() - self.t0, 6),
            }
        )
        return out

    def finish(self, status, outcome=None, iteration=0):
        self.result.status = Status(status)
        self.result.iterations = iteration + 1
        if status == Status.UNSATISFIABLE and outcome is not None and outcome.derivation is not None:
            proof = outcome.derivation.proof()
            verify_derivation(proof, inputs=self.problem.clauses)
            self.result.proof = proof
        return self.result

    def select(self, L, policy):
        neg = self.problem.neg_conjecture
        if policy == PASS_THROUGH:
            return _union(L)
        if not L:
            return []
        return premise_select(L, neg, self.scorer, policy)


def leapfrog(problem, sched=None, sel=AgeWeight(), scorer=None, seed=0, saturate_fn=saturate):
    """Leapfrogging search.

    Iteration ``i`` saturates ``S_i`` under ``sched.limit(i)``.  A refutation
    ends the search; saturation is reported only from the first run (later
    inputs are selections, so their saturation proves nothing); otherwise the
    processed clauses are re-selected, the negated conjecture is added back,
    and the next run starts.
    """
    sched = sched or LeapfrogSchedule()
    if sched.selection != PASS_THROUGH and scorer is None:
        raise ValueError("premise selection needs a trained scorer")
    run = _Run(problem, sel, seed, saturate_fn)
    run.scorer = scorer
    S0 = problem.clauses
    S = S0
    for i in range(sched.iteration_limit):
        run.result.inputs.append([c.id for c in S])
        out = run.saturate(S, sched.limit(i), i, "saturate")
        if out.status == Status.UNSATISFIABLE:
            return run.finish(Status.UNSATISFIABLE, out, i)
        if out.status == Status.SATISFIABLE:
            return run.finish(Status.SATISFIABLE if i == 0 else Status.UNKNOWN, None, i)
        S = run.select(list(out.processed), sched.selection)
        S = _union(S, problem.neg_conjecture, S0 if sched.carry_initial else ())
    return run.finish(Status.UNKNOWN, None, sched.iteration_limit - 1)


def split_merge(problem, cfg=None, sel=AgeWeight(), scorer=None, seed=0, saturate_fn=saturate):
    """Split-and-merge search.

    After an inconclusive run on ``S_i`` the processed clauses are split into
    components by ``cfg.clusterer``; each component is saturated on its own.
    A refutation inside any component ends the search (the lowest component
    index is reported).  A component that saturates says nothing about the
    whole problem and counts as inconclusive.  Otherwise the union of the
    components' processed clauses is re-selected to form ``S_{i+1}``.
    """
    cfg = cfg or SplitMergeConfig()
    if scorer is None:
        raise ValueError("split and merge needs a trained scorer for the merge step")
    clusterer = cfg.clusterer
    if clusterer is None:
        from clausekit.clustering import ClusterSpec, cluster_clauses

        spec = ClusterSpec()

        def clusterer(clauses):
            return cluster_clauses(clauses, scorer, spec, problem.neg_conjecture)

    run = _Run(problem, sel, seed, saturate_fn)
    run.scorer = scorer
    S = problem.clauses
    for i in range(cfg.iteration_limit):
        run.result.inputs.append([c.id for c in S])
        out = run.saturate(S, cfg.saturation_limit, i, "saturate")
        if out.status == Status.UNSATISFIABLE:
            return run.finish(Status.UNSATISFIABLE, out, i)
        if out.status == Status.SATISFIABLE:
            return run.finish(Status.SATISFIABLE if i == 0 else Status.UNKNOWN, None, i)
        components = clusterer(list(out.processed))
        merged = []
        for j, comp in enumerate(components):
            if not comp:
                log.warning("iteration %d: clusterer produced an empty component %d, skipped", i, j)
                continue
            if cfg.component_conjecture:
                comp = _union(comp, problem.neg_conjecture)
            sub = run.saturate(comp, cfg.saturation_limit, i, "component", j)
            if sub.status == Status.UNSATISFIABLE:
                return run.finish(Status.UNSATISFIABLE, sub, i)
            merged.extend(sub.processed)
        S = _union(run.select(_union(merged), cfg.merge_policy), problem.neg_conjecture)
        run.result.trace.append(
            {"iteration": i, "phase": "merge", "component": None, "status": None, "input": len(merged), "processed": len(S)}
        )
    return run.finish(Status.UNKNOWN, None, cfg.iteration_limit - 1)
