"""Pure-Python hot kernels.

Terms are encoded as plain Python values: a variable is a non-negative
``int``; an application is a tuple ``(functor, arg1, ..., argN)``.  A literal
is ``(positive, atom)``.  The compiled module ``_speedups`` implements the
same functions with the same semantics.
"""

import numpy as np

BACKEND = "python"


def walk(t, subst):
    while type(t) is int and t in subst:
        t = subst[t]
    return t


def occurs(v, t, subst):
    stack = [t]
    while stack:
        t = walk(stack.pop(), subst)
        if type(t) is int:
            if t == v:
                return True
        else:
            stack.extend(t[1:])
    return False


def unify(a, b, subst):
    """Return an extension of ``subst`` unifying ``a`` and ``b``, or None.

    ``subst`` is triangular (bindings may refer to bound variables) and is
    not mutated.
    """
    s = dict(subst)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, s)
        y = walk(y, s)
        if type(x) is int:
            if x == y:
                continue
            if occurs(x, y, s):
                return None
            s[x] = y
        elif type(y) is int:
            if occurs(y, x, s):
                return None
            s[y] = x
        else:
            if x[0] != y[0] or len(x) != len(y):
                return None
            stack.extend(zip(x[1:], y[1:]))
    return s


def apply(t, subst):
    if type(t) is int:
        if t in subst:
            return apply(subst[t], subst)
        return t
    if len(t) == 1:
        return t
    return (t[0],) + tuple([apply(a, subst) for a in t[1:]])


def match(pattern, target, subst):
    """One-way matching: bind variables of ``pattern`` only.

    Variables occurring in ``target`` are treated as opaque constants.
    """
    s = dict(subst)
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if type(p) is int:
            bound = s.get(p)
            if bound is None:
                s[p] = t
            elif bound != t:
                return None
        elif type(t) is int or p[0] != t[0] or len(p) != len(t):
            return None
        else:
            stack.extend(zip(p[1:], t[1:]))
    return s


def _subsume_search(lits1, lits2, k, used, subst):
    if k == len(lits1):
        return True
    sign, atom = lits1[k]
    head = atom[0]
    for idx in range(len(lits2)):
        if used[idx]:
            continue
        sign2, atom2 = lits2[idx]
        if sign2 != sign or atom2[0] != head:
            continue
        s2 = match(atom, atom2, subst)
        if s2 is not None:
            used[idx] = True
            if _subsume_search(lits1, lits2, k + 1, used, s2):
                return True
            used[idx] = False
    return False


def subsumes_literals(lits1, lits2):
    """True iff some substitution maps ``lits1`` into ``lits2`` as a sub-multiset."""
    if len(lits1) > len(lits2):
        return False
    return _subsume_search(lits1, lits2, 0, [False] * len(lits2), {})


def louvain_local_moves(indptr, indices, weights, degree, order, comm, tot, m2):
    """Greedy vertex moves for one Louvain level, in place.

    ``comm`` and ``tot`` (community degree totals) are updated.  Each
    accepted move strictly increases modularity.  Returns the move count.
    """
    n = len(order)
    moves = 0
    improved = True
    while improved:
        improved = False
        for pos in range(n):
            i = int(order[pos])
            ci = int(comm[i])
            ki = float(degree[i])
            links = {}
            for p in range(int(indptr[i]), int(indptr[i + 1])):
                j = int(indices[p])
                if j == i:
                    continue
                cj = int(comm[j])
                links[cj] = links.get(cj, 0.0) + float(weights[p])
            tot[ci] -= ki
            best = ci
            best_gain = links.get(ci, 0.0) - tot[ci] * ki / m2
            for c in links:
                gain = links[c] - tot[c] * ki / m2
                if gain > best_gain + 1e-12:
                    best = c
                    best_gain = gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moves += 1
                improved = True
    return moves


def ordered_matmul(x, w):
    """``x @ w`` accumulated over the inner index in ascending order.

    Every output entry depends only on its own row of ``x``, unlike BLAS,
    whose blocking may vary with the matrix shape.
    """
    out = np.zeros((x.shape[0], w.shape[1]))
    for k in range(x.shape[1]):
        out += x[:, k : k + 1] * w[k]
    return out


def segment_sorted_sums(vals, starts, counts):
    """Per-column sums of consecutive row segments, each summed in ascending order.

    Segment ``s`` covers rows ``starts[s] : starts[s] + counts[s]``.  Sorting
    first makes each sum depend only on the multiset of values.
    """
    seg = np.repeat(np.arange(len(starts)), counts)
    ordered = np.empty_like(vals)
    for col in range(vals.shape[1]):
        perm = np.lexsort((vals[:, col], seg))
        ordered[:, col] = vals[perm, col]
    # sequential accumulation, one position of every live segment at a time
    starts = np.asarray(starts)
    counts = np.asarray(counts)
    out = ordered[starts].copy()
    for pos in range(1, int(counts.max(initial=0))):
        live = counts > pos
        out[live] += ordered[starts[live] + pos]
    return out
