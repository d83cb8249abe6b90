"""Time the pure-Python kernels against the compiled ones.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Micro-benchmarks call each kernel directly on fixed seeded workloads.  The
end-to-end rows run the prover and the embedder in a subprocess, once with
``CLAUSEKIT_PURE=1`` and once without.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from clausekit import _kernels
from clausekit.clustering import WeightedGraph

FUNCS = {"f": 1, "g": 2, "h": 3, "a": 0, "b": 0, "c": 0}


def term(rng, depth, nvars=4):
    if depth == 0 or rng.random() < 0.3:
        if nvars and rng.random() < 0.5:
            return int(rng.integers(nvars))
        return (str(rng.choice(["a", "b", "c"])),)
    name = str(rng.choice(["f", "g", "h"]))
    return (name, *[term(rng, depth - 1, nvars) for _ in range(FUNCS[name])])


def literal(rng):
    return (bool(rng.integers(2)), ("p", term(rng, 2), term(rng, 2)))


def unify_workload(k):
    rng = np.random.default_rng(0)
    pairs = [(term(rng, 4), term(rng, 4)) for _ in range(400)]

    def run():
        for a, b in pairs:
            s = k.unify(a, b, {})
            if s is not None:
                k.apply(a, s)

    return run


def match_workload(k):
    rng = np.random.default_rng(1)
    pairs = [(term(rng, 3), term(rng, 4, nvars=0)) for _ in range(400)]

    def run():
        for a, b in pairs:
            k.match(a, b, {})

    return run


def subsumption_workload(k):
    rng = np.random.default_rng(2)
    pairs = [
        (tuple(literal(rng) for _ in range(2)), tuple(literal(rng) for _ in range(5))) for _ in range(300)
    ]

    def run():
        for a, b in pairs:
            k.subsumes_literals(a, b)

    return run


def louvain_workload(k):
    rng = np.random.default_rng(3)
    g = WeightedGraph(400)
    for i in range(400):
        for j in rng.choice(400, size=8, replace=False).tolist():
            if i != j:
                g.add_edge(i, j, float(rng.uniform(0.1, 1.0)))
    indptr, indices, weights = g.csr()
    degree = g.degrees()
    order = rng.permutation(g.n).astype(np.int64)

    def run():
        comm = np.arange(g.n, dtype=np.int64)
        k.louvain_local_moves(indptr, indices, weights, degree, order, comm, degree.copy(), float(weights.sum()))

    return run


def matmul_workload(k):
    rng = np.random.default_rng(4)
    x = rng.standard_normal((2000, 32))
    w = rng.standard_normal((32, 32))
    return lambda: k.ordered_matmul(x, w)


def segment_workload(k):
    rng = np.random.default_rng(5)
    counts = rng.integers(1, 6, size=1500)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    vals = rng.standard_normal((int(counts.sum()), 32))
    return lambda: k.segment_sorted_sums(vals, starts, counts)


WORKLOADS = [
    ("unify+apply (400 pairs)", unify_workload),
    ("match (400 pairs)", match_workload),
    ("subsumption (300 clause pairs)", subsumption_workload),
    ("louvain moves (400 vertices)", louvain_workload),
    ("ordered matmul (2000x32 @ 32x32)", matmul_workload),
    ("segment sorted sums (1500 segments)", segment_workload),
]

END_TO_END = {
    "prove 12 generated problems": (
        "from clausekit.generators import generate_suite\n"
        "from clausekit.tptp import parse_tptp_cnf\n"
        "from clausekit.saturation import saturate\n"
        "for n, t in generate_suite(12, seed=7, difficulty=1.0):\n"
        "    saturate(parse_tptp_cnf(t, n).clauses, 300)\n"
    ),
    "embed 400 clauses": (
        "import numpy as np\n"
        "from clausekit.generators import generate_suite\n"
        "from clausekit.tptp import parse_tptp_cnf\n"
        "from clausekit.embedding import embed_clauses\n"
        "cl = [c for n, t in generate_suite(40, seed=7) for c in parse_tptp_cnf(t, n).clauses][:400]\n"
        "embed_clauses(cl)\n"
    ),
}


def best_time(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def end_to_end(snippet, pure, repeat):
    env = dict(os.environ)
    if pure:
        env["CLAUSEKIT_PURE"] = "1"
    else:
        env.pop("CLAUSEKIT_PURE", None)
    code = "import time\n_t0 = time.perf_counter()\n" + snippet + "print(time.perf_counter() - _t0)\n"
    times = []
    for _ in range(repeat):
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        times.append(float(out.stdout.split()[-1]))
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the rows to this file")
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)

    backends = {k.BACKEND: k for k in _kernels.backends()}
    if "cython" not in backends:
        print("compiled extension not built; only the pure backend is available", file=sys.stderr)
    rows = []
    for name, make in WORKLOADS:
        row = {"workload": name}
        for label, k in backends.items():
            row[label] = best_time(make(k), args.repeat)
        rows.append(row)
    if not args.skip_end_to_end and "cython" in backends:
        for name, snippet in END_TO_END.items():
            reps = max(1, args.repeat // 2)
            rows.append({"workload": name, "python": end_to_end(snippet, True, reps), "cython": end_to_end(snippet, False, reps)})

    width = max(len(r["workload"]) for r in rows)
    print(f"{'workload':<{width}}  {'python s':>10}  {'cython s':>10}  {'speedup':>8}")
    for r in rows:
        py = r.get("python")
        cy = r.get("cython")
        speed = f"{py / cy:7.1f}x" if cy else "      -"
        print(f"{r['workload']:<{width}}  {py:10.4f}  {cy if cy else float('nan'):10.4f}  {speed}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
