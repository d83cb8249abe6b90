import dataclasses
import glob
import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clausekit.derivation import DerivationGraph
from clausekit.generators import FAMILIES, generate_suite, write_suite
from clausekit.harness import (
    RunRecord,
    Strategy,
    bench,
    corpus_arrays,
    extract_training,
    format_report,
    load_records,
    problem_files,
    report,
    run_strategy,
    save_records,
    train_from_corpus,
    verify_records,
)
from clausekit.embedding import EmbedderConfig
from clausekit.logic import FACTOR, RESOLVE
from clausekit.saturation import Status
from clausekit.scorer import TrainConfig, init_params
from clausekit.tptp import parse_tptp_cnf, read_problem

STATUS = [s.value for s in Status]


def rec(problem, strategy, status, proof="x.jsonl"):
    return RunRecord(problem, strategy, status, 1, 0.0, proof if status == "Unsatisfiable" else None)


def test_run_record_invariant():
    rec("a", "s", "Unsatisfiable")
    with pytest.raises(ValueError):
        RunRecord("a", "s", "Unsatisfiable", 1, 0.0, None)
    with pytest.raises(ValueError):
        RunRecord("a", "s", "Unknown", 1, 0.0, "p.jsonl")
    with pytest.raises(ValueError):
        RunRecord("a", "s", "Timeout", 1, 0.0)


@pytest.mark.parametrize(
    "text, name",
    [
        ("prove:150", "prove:150"),
        ("prove", "prove:1000"),
        ("leapfrog:300,500,60s", "leapfrog:300,500,60s"),
        ("leapfrog:150,150@top:30", "leapfrog:150,150@top:30"),
        ("splitmerge:1000x3", "splitmerge:1000x3@thr:0.5"),
        ("splitmerge:200x2@thr:0.75", "splitmerge:200x2@thr:0.75"),
    ],
)
def test_strategy_parse_and_name(text, name):
    s = Strategy.parse(text)
    assert s.name == name and Strategy.parse(s.name) == s


def test_strategy_errors():
    with pytest.raises(ValueError):
        Strategy.parse("portfolio:3")
    assert Strategy.parse("leapfrog:1,2").iterations == 2
    assert not Strategy.parse("leapfrog:1,2").needs_model
    assert Strategy.parse("leapfrog:1,2@top:3").needs_model
    problem = parse_tptp_cnf("cnf(a, axiom, p). cnf(b, negated_conjecture, ~p).")
    with pytest.raises(ValueError):
        run_strategy(problem, Strategy.parse("splitmerge:10x1"))


# -- report ------------------------------------------------------------------------------


def test_report_examples():
    records = [
        rec("a", "base", "Unsatisfiable"),
        rec("b", "base", "Unsatisfiable"),
        rec("c", "base", "Unknown"),
        rec("a", "lf", "Unknown"),
        rec("b", "lf", "Unsatisfiable"),
        rec("c", "lf", "Unsatisfiable"),
    ]
    r = report(records, "base", "lf")
    assert (r["union"], r["added"], r["added_problems"]) == (3, 1, ["c"])
    assert report(records, "lf", "lf")["added"] == 0
    text = format_report(r)
    assert "union" in text and text.splitlines()[1].split()[-2:] == ["3", "1"]
    with pytest.raises(KeyError):
        report(records, "base", "other")


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.sampled_from(["b", "c"]), st.sampled_from(STATUS)), min_size=2))
def test_report_matches_set_algebra(rows):
    rows = list({(p, s): st_ for p, s, st_ in rows}.items())
    records = [rec(str(p), s, status) for (p, s), status in rows]
    if {r.strategy for r in records} != {"b", "c"}:
        return
    r = report(records, "b", "c")
    solved = {s: {x.problem for x in records if x.strategy == s and x.status == "Unsatisfiable"} for s in "bc"}
    assert r["union"] == len(solved["b"] | solved["c"]) >= max(r["solved_baseline"], r["solved_challenger"])
    assert r["added"] == len(solved["c"] - solved["b"])


# -- bench -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def suite_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("suite")
    write_suite(str(d), 8, seed=4, difficulty=0.6)
    return str(d)


def test_bench_record_per_problem_and_strategy(suite_dir, tmp_path):
    paths = problem_files(suite_dir)
    strategies = ["prove:60", "leapfrog:20,60"]
    records = bench(paths, strategies, proof_dir=str(tmp_path / "proofs"))
    assert len(records) == len(glob.glob(os.path.join(suite_dir, "*.p"))) * len(strategies) == 16
    assert [(r.problem, r.strategy) for r in records][:2] == [
        (os.path.basename(paths[0])[:-2], "prove:60"),
        (os.path.basename(paths[0])[:-2], "leapfrog:20,60"),
    ]
    solved = [r for r in records if r.status == "Unsatisfiable"]
    assert solved and all(os.path.exists(r.proof_path) for r in solved)
    problems = {os.path.basename(p)[:-2]: read_problem(p) for p in paths}
    assert verify_records(records, problems) == []
    path = tmp_path / "runs.jsonl"
    save_records(records, path)
    assert load_records(path) == records


def _strip_time(records):
    return [dataclasses.replace(r, wall_time=0.0) for r in records]


def test_bench_is_reproducible_and_parallel_safe(suite_dir, tmp_path):
    paths = problem_files(suite_dir)[:4]
    a = bench(paths, ["prove:40"], seed=3, proof_dir=str(tmp_path / "a"))
    b = bench(paths, ["prove:40"], seed=3, proof_dir=str(tmp_path / "a"))
    c = bench(paths, ["prove:40"], seed=3, proof_dir=str(tmp_path / "a"), workers=2)
    assert _strip_time(a) == _strip_time(b) == _strip_time(c)


def test_verify_records_reports_broken_proofs(suite_dir, tmp_path):
    records = bench(problem_files(suite_dir), ["prove:60"], proof_dir=str(tmp_path))
    solved = next(r for r in records if r.proof_path)
    lines = open(solved.proof_path).read().splitlines()
    rows = [json.loads(x) for x in lines]
    victim = next(r for r in rows if r.get("parents"))
    victim["parents"] = [victim["parents"][0], victim["parents"][0]]
    with open(solved.proof_path, "w") as fh:
        fh.write("\n".join(json.dumps(r) for r in rows) + "\n")
    bad = verify_records([solved])
    assert len(bad) == 1 and bad[0][0] == solved


# -- training data -----------------------------------------------------------------------


def test_extract_training_outputs(tmp_path):
    easy = parse_tptp_cnf("cnf(a, axiom, p | q). cnf(b, axiom, ~q). cnf(g, negated_conjecture, ~p).")
    chain = "cnf(t, axiom, ~less(X,Y) | ~less(Y,Z) | less(X,Z)).\n"
    chain += "".join(f"cnf(s{i}, axiom, less(k{i},k{i + 1})).\n" for i in range(10))
    hard = parse_tptp_cnf(chain + "cnf(g, negated_conjecture, ~less(k0,k10)).")
    tiny = parse_tptp_cnf("cnf(a, axiom, p(a)). cnf(g, negated_conjecture, ~q).")
    summary = extract_training([("easy", easy), ("hard", hard), ("tiny", tiny)], 7, str(tmp_path))
    assert summary["solved"] == ["easy"] and summary["unsolved"] == ["hard", "tiny"]
    assert summary["positive_pairs"] >= 1
    assert os.path.exists(tmp_path / "easy.derivation.jsonl")
    hard_lines = open(tmp_path / "hard.processed.jsonl").read().splitlines()
    tiny_lines = open(tmp_path / "tiny.processed.jsonl").read().splitlines()
    assert len(hard_lines) == 7 and len(tiny_lines) == 2
    with pytest.raises(ValueError):
        extract_training([("easy", easy)], 0, str(tmp_path))


def test_positive_pairs_match_proof_edge_scan(tmp_path):
    problems = [(n, parse_tptp_cnf(t, n)) for n, t in generate_suite(10, seed=6, difficulty=0.6)]
    summary = extract_training(problems, 150, str(tmp_path))
    assert len(summary["solved"]) >= 4
    independent = 0
    for pid in summary["solved"]:
        d = DerivationGraph.load(tmp_path / f"{pid}.derivation.jsonl")
        proof = d.proof_ids
        keys = set()
        for cid in proof:
            o = d[cid].origin
            if o.rule in (RESOLVE, FACTOR):
                keys.add(tuple(sorted(o.parents * (2 if o.rule == FACTOR else 1))))
        independent += len(keys)
    assert summary["positive_pairs"] == independent


def test_train_from_corpus(tmp_path):
    problems = [(n, parse_tptp_cnf(t, n)) for n, t in generate_suite(8, seed=6, difficulty=0.6)]
    extract_training(problems, 150, str(tmp_path))
    emb = EmbedderConfig()
    E, pairs = corpus_arrays(str(tmp_path), emb)
    assert E.shape[1] == 32 and max(max(p.i, p.j) for p in pairs) < len(E)
    pos = sum(p.label for p in pairs)
    assert 0 < pos and len(pairs) - pos <= 4 * pos * len(glob.glob(str(tmp_path / "*.pairs.jsonl")))
    r = train_from_corpus(str(tmp_path), TrainConfig(epochs=10), emb)
    assert r.losses[-1] < r.losses[0]
    with pytest.raises(ValueError):
        corpus_arrays(str(tmp_path / "missing"), emb)


# -- generators --------------------------------------------------------------------------


def test_generated_suite_parses_and_is_seeded():
    a = generate_suite(12, seed=2)
    assert a == generate_suite(12, seed=2) and a != generate_suite(12, seed=3)
    assert [n.split("_")[0] for n, _ in a[:4]] == list(FAMILIES)
    for name, text in a:
        p = parse_tptp_cnf(text, name)
        assert p.neg_conjecture and p.axioms


def test_pigeonhole_is_refuted():
    from clausekit.generators import pigeonhole
    from clausekit.saturation import saturate

    o = saturate(parse_tptp_cnf(pigeonhole(2)).clauses, 500)
    assert o.status == Status.UNSATISFIABLE


def test_run_strategy_with_model():
    problem = parse_tptp_cnf(generate_suite(3, seed=1, difficulty=0.5)[2][1])
    head = init_params(arch=2, d=32, n=8, seed=0, scale=0.5)
    for text in ("leapfrog:20,40@top:10", "splitmerge:20x2"):
        status, processed, proof = run_strategy(problem, Strategy.parse(text), scorer=head)
        assert processed >= 1 and (proof is not None) == (status == Status.UNSATISFIABLE)
    assert np.isfinite(processed)
