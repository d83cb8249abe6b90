"""Generated TPTP CNF benchmark problems.

Families: pigeonhole, graph colouring, group theory in product-predicate
form, and ordering chains with distractor facts.  ``difficulty`` scales each
family's size parameter.
"""

from __future__ import annotations

import os

import numpy as np

FAMILIES = ("pigeon", "coloring", "group", "chain")


def _cnf(name, role, lits):
    return f"cnf({name}, {role}, ({' | '.join(lits) if lits else '$false'}))."


def pigeonhole(holes):
    """``holes + 1`` pigeons in ``holes`` holes; unsatisfiable."""
    lines = []
    for i in range(holes + 1):
        lines.append(_cnf(f"pigeon_{i}", "negated_conjecture", [f"p_{i}_{k}" for k in range(holes)]))
    for k in range(holes):
        for i in range(holes + 1):
            for j in range(i + 1, holes + 1):
                lines.append(_cnf(f"hole_{k}_{i}_{j}", "axiom", [f"~p_{i}_{k}", f"~p_{j}_{k}"]))
    return "\n".join(lines) + "\n"


def coloring(vertices, edge_prob, colors, rng):
    """Random graph colouring; satisfiable or not depending on the draw."""
    lines = []
    for v in range(vertices):
        lines.append(_cnf(f"color_{v}", "negated_conjecture", [f"c_{v}_{k}" for k in range(colors)]))
    for u in range(vertices):
        for v in range(u + 1, vertices):
            if rng.random() < edge_prob:
                for k in range(colors):
                    lines.append(_cnf(f"edge_{u}_{v}_{k}", "axiom", [f"~c_{u}_{k}", f"~c_{v}_{k}"]))
    return "\n".join(lines) + "\n"


GROUP_AXIOMS = [
    ("closure", ["product(X,Y,multiply(X,Y))"]),
    ("left_identity", ["product(identity,X,X)"]),
    ("left_inverse", ["product(inverse(X),X,identity)"]),
    ("assoc_1", ["~product(X,Y,U)", "~product(Y,Z,V)", "~product(U,Z,W)", "product(X,V,W)"]),
    ("assoc_2", ["~product(X,Y,U)", "~product(Y,Z,V)", "~product(X,V,W)", "product(U,Z,W)"]),
]


def _word(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return str(rng.choice(["a", "b", "c"]))
    if rng.random() < 0.25:
        return f"inverse({_word(rng, depth - 1)})"
    return f"multiply({_word(rng, depth - 1)},{_word(rng, depth - 1)})"


def group(depth, rng):
    """Product-predicate group axioms and one goal of a provable shape.

    Goals are instances of ``inverse(x) * (x * y) = y`` and
    ``e * (x * y) = x * y`` with random words ``x`` and ``y``, or the
    harder right identity ``x * e = x``.
    """
    x = _word(rng, depth)
    y = _word(rng, depth)
    kind = int(rng.integers(3))
    if kind == 0:
        goal = f"~product(inverse({x}),multiply({x},{y}),{y})"
    elif kind == 1:
        goal = f"~product(identity,multiply({x},{y}),multiply({x},{y}))"
    else:
        goal = f"~product({x},identity,{x})"
    lines = [_cnf(n, "axiom", lits) for n, lits in GROUP_AXIOMS]
    lines.append(_cnf("goal", "negated_conjecture", [goal]))
    return "\n".join(lines) + "\n"


def chain(length, distractors, rng):
    """Transitive ``less`` over a chain of constants plus random extra facts."""
    lines = [_cnf("trans", "axiom", ["~less(X,Y)", "~less(Y,Z)", "less(X,Z)"])]
    for i in range(length):
        lines.append(_cnf(f"step_{i}", "axiom", [f"less(k{i},k{i + 1})"]))
    for t in range(distractors):
        a, b = sorted(rng.choice(length + 5, size=2, replace=False).tolist())
        lines.append(_cnf(f"noise_{t}", "axiom", [f"less(d{a},d{b})"]))
    lines.append(_cnf("goal", "negated_conjecture", [f"~less(k0,k{length})"]))
    return "\n".join(lines) + "\n"


def generate_suite(count, seed=0, difficulty=1.0, families=FAMILIES):
    """``count`` problems as a list of ``(name, text)``, cycling through families."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        fam = families[k % len(families)]
        if fam == "pigeon":
            holes = 1 + int(rng.integers(1, max(2, round(3 * difficulty))))
            text = pigeonhole(holes)
        elif fam == "coloring":
            n = 3 + int(rng.integers(0, max(1, round(4 * difficulty))))
            text = coloring(n, 0.6, 2 + int(rng.integers(0, 2)), rng)
        elif fam == "group":
            text = group(max(0, int(rng.integers(0, max(1, round(2 * difficulty)) + 1))), rng)
        else:
            length = 2 + int(rng.integers(0, max(1, round(8 * difficulty))))
            text = chain(length, int(rng.integers(0, max(1, round(6 * difficulty)))), rng)
        out.append((f"{fam}_{k:04d}", text))
    return out


def write_suite(directory, count, seed=0, difficulty=1.0, families=FAMILIES):
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, text in generate_suite(count, seed, difficulty, families):
        path = os.path.join(directory, name + ".p")
        with open(path, "w") as fh:
            fh.write(text)
        paths.append(path)
    return paths
