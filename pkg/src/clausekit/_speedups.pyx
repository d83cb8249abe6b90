# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels; semantics identical to ``_purekernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport free, malloc, qsort

BACKEND = "cython"


cpdef object walk(object t, dict subst):
    while type(t) is int and t in subst:
        t = subst[t]
    return t


cpdef bint occurs(object v, object t, dict subst):
    cdef list stack = [t]
    cdef tuple app
    while stack:
        t = walk(stack.pop(), subst)
        if type(t) is int:
            if t == v:
                return True
        else:
            app = <tuple>t
            stack.extend(app[1:])
    return False


cpdef object unify(object a, object b, dict subst):
    cdef dict s = dict(subst)
    cdef list stack = [(a, b)]
    cdef tuple tx, ty
    cdef Py_ssize_t k, n
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
            tx = <tuple>x
            ty = <tuple>y
            n = len(tx)
            if n != len(ty) or tx[0] != ty[0]:
                return None
            for k in range(n - 1, 0, -1):
                stack.append((tx[k], ty[k]))
    return s


cpdef object apply(object t, dict subst):
    cdef tuple app
    cdef Py_ssize_t k, n
    cdef list out
    if type(t) is int:
        if t in subst:
            return apply(subst[t], subst)
        return t
    app = <tuple>t
    n = len(app)
    if n == 1:
        return app
    out = [app[0]]
    for k in range(1, n):
        out.append(apply(app[k], subst))
    return tuple(out)


cpdef object match(object pattern, object target, dict subst):
    cdef dict s = dict(subst)
    cdef list stack = [(pattern, target)]
    cdef tuple tp, tt
    cdef Py_ssize_t k, n
    while stack:
        p, t = stack.pop()
        if type(p) is int:
            bound = s.get(p)
            if bound is None:
                s[p] = t
            elif bound != t:
                return None
        elif type(t) is int:
            return None
        else:
            tp = <tuple>p
            tt = <tuple>t
            n = len(tp)
            if n != len(tt) or tp[0] != tt[0]:
                return None
            for k in range(n - 1, 0, -1):
                stack.append((tp[k], tt[k]))
    return s


cdef bint _subsume_search(tuple lits1, tuple lits2, Py_ssize_t k, list used, dict subst):
    cdef Py_ssize_t idx, n2
    cdef tuple lit, lit2, atom, atom2
    if k == len(lits1):
        return True
    lit = <tuple>lits1[k]
    sign = lit[0]
    atom = <tuple>lit[1]
    head = atom[0]
    n2 = len(lits2)
    for idx in range(n2):
        if used[idx]:
            continue
        lit2 = <tuple>lits2[idx]
        if lit2[0] != sign:
            continue
        atom2 = <tuple>lit2[1]
        if atom2[0] != head:
            continue
        s2 = match(atom, atom2, subst)
        if s2 is not None:
            used[idx] = True
            if _subsume_search(lits1, lits2, k + 1, used, <dict>s2):
                return True
            used[idx] = False
    return False


cpdef bint subsumes_literals(tuple lits1, tuple lits2):
    if len(lits1) > len(lits2):
        return False
    return _subsume_search(lits1, lits2, 0, [False] * len(lits2), {})


def louvain_local_moves(indptr, indices, weights, degree, order, comm, tot, double m2):
    cdef cnp.int64_t[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int64_t[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[:] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[:] deg = np.ascontiguousarray(degree, dtype=np.float64)
    cdef cnp.int64_t[:] od = np.ascontiguousarray(order, dtype=np.int64)
    cdef cnp.int64_t[:] cm = comm
    cdef double[:] tt = tot
    cdef Py_ssize_t n = od.shape[0]
    cdef Py_ssize_t ncomm = tt.shape[0]
    cdef double[:] links = np.zeros(ncomm, dtype=np.float64)
    cdef cnp.int64_t[:] seen = np.full(ncomm, -1, dtype=np.int64)
    cdef cnp.int64_t[:] touched = np.zeros(ncomm, dtype=np.int64)
    cdef Py_ssize_t ntouched, pos, p, q, i, j, c, ci, best
    cdef double ki, gain, best_gain, own
    cdef long moves = 0
    cdef bint improved = True
    while improved:
        improved = False
        for pos in range(n):
            i = od[pos]
            ci = cm[i]
            ki = deg[i]
            ntouched = 0
            for p in range(ip[i], ip[i + 1]):
                j = ix[p]
                if j == i:
                    continue
                c = cm[j]
                if seen[c] == -1:
                    seen[c] = -2
                    links[c] = 0.0
                    touched[ntouched] = c
                    ntouched += 1
                links[c] += w[p]
            tt[ci] -= ki
            own = links[ci] if seen[ci] == -2 else 0.0
            best = ci
            best_gain = own - tt[ci] * ki / m2
            for q in range(ntouched):
                c = touched[q]
                gain = links[c] - tt[c] * ki / m2
                if gain > best_gain + 1e-12:
                    best = c
                    best_gain = gain
            for q in range(ntouched):
                seen[touched[q]] = -1
            tt[best] += ki
            if best != ci:
                cm[i] = best
                moves += 1
                improved = True
    return moves



def ordered_matmul(x, w):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], m = xv.shape[1], p = wv.shape[1]
    out = np.zeros((n, p))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j, k
    cdef double xik
    for i in range(n):
        for k in range(m):
            xik = xv[i, k]
            for j in range(p):
                ov[i, j] = ov[i, j] + xik * wv[k, j]
    return out


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*>a)[0]
    cdef double y = (<const double*>b)[0]
    return (x > y) - (x < y)


def segment_sorted_sums(vals, starts, counts):
    cdef const double[:, ::1] v = np.ascontiguousarray(vals, dtype=np.float64)
    cdef const long long[::1] st = np.ascontiguousarray(starts, dtype=np.int64)
    cdef const long long[::1] ct = np.ascontiguousarray(counts, dtype=np.int64)
    cdef Py_ssize_t nseg = st.shape[0], d = v.shape[1]
    out = np.empty((nseg, d))
    cdef double[:, ::1] ov = out
    cdef long long longest = 0
    cdef Py_ssize_t s, c, r
    for s in range(nseg):
        if ct[s] > longest:
            longest = ct[s]
    cdef double* buf = <double*>malloc(max(longest, 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double acc
    try:
        for s in range(nseg):
            for c in range(d):
                for r in range(ct[s]):
                    buf[r] = v[st[s] + r, c]
                qsort(buf, ct[s], sizeof(double), _cmp_double)
                acc = buf[0]
                for r in range(1, ct[s]):
                    acc = acc + buf[r]
                ov[s, c] = acc
    finally:
        free(buf)
    return out
