"""Command-line interface.

Exit codes: 0 when the run ends Unsatisfiable or Satisfiable (or matches
``--expect``), 1 otherwise, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from clausekit.saturation import AgeWeight, SaturationLimit, Scored, Status

log = logging.getLogger("clausekit")


def _model(args, required=False):
    from clausekit.harness import default_model_path
    from clausekit.scorer import ScorerParams

    path = getattr(args, "model", None) or default_model_path()
    if path is None:
        if required:
            raise SystemExit("error: a trained model is required (--model or $CLAUSEKIT_MODEL)")
        return None
    return ScorerParams.load(path)


def _selector(args):
    if args.selector == "scored":
        head = _model(args, required=True)
        return Scored(head, context_size=args.context_size, query_size=args.query_size)
    return AgeWeight(jitter=args.jitter)


def _exit(status, expect):
    if expect is not None:
        return 0 if status.value == expect else 1
    return 1 if status == Status.UNKNOWN else 0


def _read_clause_dump(path):
    """Clauses from a processed-clause dump (JSON lines with id and clause)."""
    from clausekit.logic import Origin
    from clausekit.tptp import parse_clause

    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                c = parse_clause(rec["clause"])
                out.append(c.with_id(rec["id"], Origin.input(rec.get("role", "axiom"))))
    return out


# -- subcommands -----------------------------------------------------------------


def cmd_prove(args):
    from clausekit.saturation import dump_processed, saturate
    from clausekit.tptp import read_problem

    problem = read_problem(args.problem)
    out = saturate(problem.clauses, SaturationLimit(args.processed_limit), _selector(args), args.seed)
    if args.proof_out and out.status == Status.UNSATISFIABLE:
        out.proof.save(args.proof_out)
    if args.derivation_out:
        out.derivation.save(args.derivation_out)
    if args.processed_out:
        with open(args.processed_out, "w") as fh:
            dump_processed(fh, out.processed)
    if args.json:
        print(json.dumps({"status": out.status.value, "processed": len(out.processed), "generated": out.generated}))
    print(f"SZS status {out.status.value}")
    return _exit(out.status, args.expect)


def cmd_leapfrog(args):
    from clausekit.orchestrator import PASS_THROUGH, LeapfrogSchedule, leapfrog
    from clausekit.premise import SelectionPolicy
    from clausekit.tptp import read_problem

    problem = read_problem(args.problem)
    policy = SelectionPolicy.parse(args.select) if args.select else PASS_THROUGH
    limits = args.schedule.split(",")
    sched = LeapfrogSchedule(limits, args.iterations or len(limits), policy, args.carry_initial)
    scorer = _model(args, required=policy != PASS_THROUGH)
    res = leapfrog(problem, sched, _selector(args), scorer, args.seed)
    return _finish_orchestrated(res, args)


def cmd_splitmerge(args):
    from clausekit.clustering import ClusterSpec, cluster_clauses
    from clausekit.orchestrator import SplitMergeConfig, split_merge
    from clausekit.premise import DEFAULT_THRESHOLDS, SelectionPolicy
    from clausekit.tptp import read_problem

    problem = read_problem(args.problem)
    scorer = _model(args, required=True)
    spec = ClusterSpec(
        args.cluster_method, args.k, args.representation, args.edge_threshold, args.target_k, seed=args.seed
    )

    def clusterer(clauses):
        return cluster_clauses(clauses, scorer, spec, problem.neg_conjecture)

    policies = [SelectionPolicy.parse(args.merge_policy)]
    if args.four_thresholds:
        policies = [SelectionPolicy.threshold(t) for t in DEFAULT_THRESHOLDS]
    res = None
    for policy in policies:
        cfg = SplitMergeConfig(SaturationLimit(args.processed_limit), args.iterations, clusterer, policy)
        res = split_merge(problem, cfg, _selector(args), scorer, args.seed)
        if res.status != Status.UNKNOWN:
            break
    return _finish_orchestrated(res, args)


def _finish_orchestrated(res, args):
    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            res.write_trace(fh)
    if args.proof_out and res.proof is not None:
        res.proof.save(args.proof_out)
    if args.json:
        print(json.dumps({"status": res.status.value, "saturate_calls": res.saturate_calls, "iterations": res.iterations}))
    print(res.szs)
    return _exit(res.status, args.expect)


def cmd_verify(args):
    from clausekit.derivation import DerivationError, DerivationGraph, verify_derivation
    from clausekit.tptp import read_problem

    try:
        d = DerivationGraph.load(args.proof)
        inputs = read_problem(args.problem).clauses if args.problem else None
        v = verify_derivation(d, inputs=inputs)
    except (DerivationError, ValueError) as exc:
        print(f"invalid: {exc}")
        return 1
    print(f"verified: empty clause {v.empty_id}, {len(v.proof_ids)} proof clauses, {v.checked_steps} steps")
    return 0


def cmd_extract(args):
    from clausekit.harness import extract_training, problem_files
    from clausekit.tptp import read_problem

    paths = [p for target in args.problems for p in problem_files(target)]
    problems = [(os.path.splitext(os.path.basename(p))[0], read_problem(p)) for p in paths]
    summary = extract_training(problems, args.limit, args.out, args.seed)
    print(json.dumps({k: (len(v) if isinstance(v, list) else v) for k, v in summary.items()}))
    return 0


def cmd_train(args):
    from clausekit.embedding import EmbedderConfig
    from clausekit.harness import train_from_corpus
    from clausekit.scorer import TrainConfig

    cfg = TrainConfig(args.lr, args.epochs, args.batch, args.seed, args.l2, args.arch, args.n)
    emb = EmbedderConfig(args.layers, args.d, args.embedder_seed)
    result = train_from_corpus(args.corpus, cfg, emb)
    result.params.save(args.out)
    print(json.dumps({"initial_loss": result.losses[0], "final_loss": result.losses[-1], "out": args.out}))
    return 0


def cmd_embed(args):
    from clausekit.embedding import EmbedderConfig, embed_clauses
    from clausekit.tptp import read_problem

    if args.problem.endswith(".jsonl"):
        clauses = _read_clause_dump(args.problem)
        conj = []
    else:
        problem = read_problem(args.problem)
        clauses, conj = problem.axioms, problem.neg_conjecture
        clauses = clauses + conj
    model = _model(args)
    cfg = model.embedder if model else EmbedderConfig(args.layers, args.d, args.embedder_seed)
    E, _ = embed_clauses(clauses, conj, cfg)
    with open(args.out, "w") as fh:
        json.dump({str(c.id): row.tolist() for c, row in zip(clauses, E)}, fh)
    return 0


def cmd_cluster(args):
    from clausekit.clustering import ClusterSpec, cluster_matrix, graph_from_L, save_clustering
    from clausekit.scorer import interaction_matrix

    with open(args.embeddings) as fh:
        emb = json.load(fh)
    ids = sorted(emb, key=int)
    E = np.array([emb[i] for i in ids], dtype=float)
    scorer = _model(args, required=True)
    L = interaction_matrix(E, scorer)
    spec = ClusterSpec(
        args.method,
        args.k,
        args.representation,
        args.edge_threshold,
        args.target_k,
        args.fuzzifier,
        args.cutoff,
        args.hub_fraction,
        args.seed,
    )
    clustering = cluster_matrix(E, L, spec).relabel([int(i) for i in ids])
    save_clustering(clustering, args.out)
    if args.edges_out:
        with open(args.edges_out, "w") as fh:
            graph_from_L(L, args.edge_threshold).write_edgelist(fh, [int(i) for i in ids])
    print(json.dumps({"clusters": [len(c) for c in clustering.clusters], "overlapping": clustering.overlapping}))
    return 0


def cmd_select(args):
    from clausekit.premise import SelectionPolicy, dump_scores, premise_select, score_clauses
    from clausekit.tptp import format_clause_tptp, read_problem

    problem = read_problem(args.problem)
    scorer = _model(args, required=True)
    L = _read_clause_dump(args.processed) if args.processed else problem.axioms
    selected = premise_select(L, problem.neg_conjecture, scorer, SelectionPolicy.parse(args.policy))
    if args.scores_out:
        with open(args.scores_out, "w") as fh:
            dump_scores(fh, L, score_clauses(L, problem.neg_conjecture, scorer))
    lines = [format_clause_tptp(c, role=c.origin.role or "axiom") for c in selected]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args):
    from clausekit.harness import bench, problem_files, save_records

    paths = problem_files(args.problems)
    model = args.model or os.environ.get("CLAUSEKIT_MODEL")
    proof_dir = args.proof_dir or os.path.join(os.path.dirname(os.path.abspath(args.out)), "proofs")
    records = bench(paths, args.strategy, args.seed, model, proof_dir, args.workers)
    save_records(records, args.out)
    if args.json:
        print(json.dumps({"records": len(records), "out": args.out}))
    else:
        print(f"{len(records)} run records written to {args.out}")
    return 0


def cmd_report(args):
    from clausekit.harness import format_report, load_records, report

    rep = report(load_records(args.records), args.baseline, args.challenger)
    print(json.dumps(rep) if args.json else format_report(rep))
    return 0


def cmd_generate(args):
    from clausekit.generators import FAMILIES, write_suite

    families = tuple(args.families.split(",")) if args.families else FAMILIES
    paths = write_suite(args.out, args.count, args.seed, args.difficulty, families)
    print(f"{len(paths)} problems written to {args.out}")
    return 0


# -- parser ------------------------------------------------------------------------


def _add_selector_flags(p):
    p.add_argument("--selector", choices=("age", "scored"), default="age")
    p.add_argument("--context-size", type=int, default=64)
    p.add_argument("--query-size", type=int, default=32)
    p.add_argument("--jitter", type=float, default=0.0, help="seeded noise on clause weights")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", help="scorer parameters (JSON); default $CLAUSEKIT_MODEL")


def _add_run_flags(p):
    p.add_argument("--expect", choices=[s.value for s in Status])
    p.add_argument("--proof-out")
    p.add_argument("--json", action="store_true")


def _add_embedder_flags(p):
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("-d", type=int, default=32)
    p.add_argument("--embedder-seed", type=int, default=0)


def _add_cluster_flags(p):
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--representation", choices=("rows", "embedding"), default="rows")
    p.add_argument("--edge-threshold", type=float, default=0.5)
    p.add_argument("--target-k", type=int, default=4)


def build_parser():
    parser = argparse.ArgumentParser(prog="clausekit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="single saturation run")
    p.add_argument("problem")
    p.add_argument("--processed-limit", type=int, default=1000)
    p.add_argument("--processed-out")
    p.add_argument("--derivation-out")
    _add_selector_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("leapfrog", help="iterated saturation with re-selection")
    p.add_argument("problem")
    p.add_argument("--schedule", default="300,500,60s", help="comma-separated limits; 'Ns' is a budget")
    p.add_argument("--iterations", type=int)
    p.add_argument("--select", help="top:K, thr:T or frac:F; default passes all processed clauses")
    p.add_argument("--carry-initial", action="store_true")
    p.add_argument("--trace-out")
    _add_selector_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_leapfrog)

    p = sub.add_parser("splitmerge", help="component splitting and merging")
    p.add_argument("problem")
    p.add_argument("--processed-limit", type=int, default=1000)
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--cluster-method", choices=("kmeans", "fcm", "graph", "hubs"), default="graph")
    p.add_argument("--merge-policy", default="thr:0.5")
    p.add_argument("--four-thresholds", action="store_true", help="try the four default merge thresholds in turn")
    p.add_argument("--trace-out")
    _add_cluster_flags(p)
    _add_selector_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_splitmerge)

    p = sub.add_parser("verify", help="check a derivation file")
    p.add_argument("proof")
    p.add_argument("--problem", help="also check input leaves against this problem")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("extract-training", help="derivations and labelled pairs from solved problems")
    p.add_argument("problems", nargs="+")
    p.add_argument("--limit", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train-scorer", help="fit the interaction head on a training corpus")
    p.add_argument("corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--arch", type=int, choices=(1, 2), default=2)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_embedder_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="export clause embeddings as JSON keyed by clause id")
    p.add_argument("problem", help="TPTP file or processed-clause dump (.jsonl)")
    p.add_argument("--out", required=True)
    p.add_argument("--model")
    _add_embedder_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cluster", help="cluster clauses from exported embeddings")
    p.add_argument("embeddings")
    p.add_argument("--out", required=True)
    p.add_argument("--edges-out")
    p.add_argument("--method", choices=("kmeans", "fcm", "graph", "hubs"), default="graph")
    p.add_argument("--fuzzifier", type=float, default=2.0)
    p.add_argument("--cutoff", type=float, default=0.3)
    p.add_argument("--hub-fraction", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model")
    _add_cluster_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("select", help="premise selection over clauses")
    p.add_argument("problem")
    p.add_argument("--processed", help="processed-clause dump to select from (default: the axioms)")
    p.add_argument("--policy", default="top:32")
    p.add_argument("--scores-out")
    p.add_argument("--out")
    p.add_argument("--model")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bench", help="run strategies over a problem directory")
    p.add_argument("problems")
    p.add_argument("--strategy", action="append", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--proof-dir")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="union and complementarity table")
    p.add_argument("records")
    p.add_argument("--baseline", required=True)
    p.add_argument("--challenger", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("generate", help="write a generated benchmark suite")
    p.add_argument("out")
    p.add_argument("--count", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--difficulty", type=float, default=1.0)
    p.add_argument("--families", help="comma-separated subset of pigeon,coloring,group,chain")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
