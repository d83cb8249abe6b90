import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "benchmarks"))

import bench_kernels  # noqa: E402

from clausekit import _kernels  # noqa: E402


def test_benchmark_runs_every_kernel_on_every_backend(tmp_path, capsys):
    out = tmp_path / "rows.json"
    bench_kernels.main(["--repeat", "1", "--skip-end-to-end", "--json", str(out)])
    rows = json.loads(out.read_text())
    labels = {k.BACKEND for k in _kernels.backends()}
    assert len(rows) == len(bench_kernels.WORKLOADS)
    assert all(labels <= set(r) and all(r[b] > 0 for b in labels) for r in rows)
    assert "speedup" in capsys.readouterr().out


def test_backends_agree_on_benchmark_workloads():
    results = []
    for k in _kernels.backends():
        rng_terms = bench_kernels.np.random.default_rng(0)
        pairs = [(bench_kernels.term(rng_terms, 4), bench_kernels.term(rng_terms, 4)) for _ in range(200)]
        results.append([k.unify(a, b, {}) for a, b in pairs])
    assert all(r == results[0] for r in results)
