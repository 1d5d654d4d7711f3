# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the combinatorial inner loops.

Every public function here has a pure-Python twin in :mod:`biresolve._pykernels`
with an identical signature and identical (deterministic) output.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, calloc
from libc.string cimport memset
from libc.time cimport clock, clock_t, CLOCKS_PER_SEC

cnp.import_array()

cdef enum:
    MAXV = 32
    C_FOUND = 0
    C_NONE = 1
    C_TIMEOUT = 2

FOUND = C_FOUND
NONE = C_NONE
TIMEOUT = C_TIMEOUT


# ---------------------------------------------------------------------------
# subamalgamation search
# ---------------------------------------------------------------------------

cdef struct SearchState:
    int ng
    int nh
    int le
    long *ag          # ng x ng
    long *ah          # nh x nh
    long *rowsum      # ng x nh : sum_{assigned j, phi(j)=J} a[i][j]
    long *colsum      # nh x ng : sum_{assigned i, phi(i)=I} a[i][j]
    long *gout
    long *gin
    long *hout
    long *hin
    int *phi
    long nodes
    double deadline   # in clock ticks; <0 disables
    int timed_out


cdef int _assign(SearchState *s, int v, int k) noexcept nogil:
    """Assign v -> k, update partial sums; return 0 if a bound is exceeded."""
    cdef int i, ng = s.ng, nh = s.nh, ok = 1
    cdef long a
    s.phi[v] = k
    for i in range(v + 1):
        # row i gains column v
        a = s.ag[i * ng + v]
        if a:
            s.rowsum[i * nh + k] += a
            if s.rowsum[i * nh + k] > s.ah[s.phi[i] * nh + k]:
                ok = 0
            s.colsum[s.phi[i] * ng + v] += a
            if s.colsum[s.phi[i] * ng + v] > s.ah[s.phi[i] * nh + k]:
                ok = 0
        if i == v:
            continue
        # row v gains column i
        a = s.ag[v * ng + i]
        if a:
            s.rowsum[v * nh + s.phi[i]] += a
            if s.rowsum[v * nh + s.phi[i]] > s.ah[k * nh + s.phi[i]]:
                ok = 0
            s.colsum[k * ng + i] += a
            if s.colsum[k * ng + i] > s.ah[k * nh + s.phi[i]]:
                ok = 0
    return ok


cdef void _unassign(SearchState *s, int v) noexcept nogil:
    cdef int i, ng = s.ng, nh = s.nh, k = s.phi[v]
    cdef long a
    for i in range(v + 1):
        a = s.ag[i * ng + v]
        if a:
            s.rowsum[i * nh + k] -= a
            s.colsum[s.phi[i] * ng + v] -= a
        if i == v:
            continue
        a = s.ag[v * ng + i]
        if a:
            s.rowsum[v * nh + s.phi[i]] -= a
            s.colsum[k * ng + i] -= a
    s.phi[v] = -1


cdef int _leaf_ok(SearchState *s) noexcept nogil:
    cdef int i, j, I, ng = s.ng, nh = s.nh
    if s.le:
        return 1
    for i in range(ng):
        for I in range(nh):
            if s.rowsum[i * nh + I] != s.ah[s.phi[i] * nh + I]:
                return 0
    for I in range(nh):
        for j in range(ng):
            if s.colsum[I * ng + j] != s.ah[I * nh + s.phi[j]]:
                return 0
    return 1


cdef int _dfs(SearchState *s, int v) noexcept nogil:
    cdef int k, ok
    if v == s.ng:
        return _leaf_ok(s)
    s.nodes += 1
    if s.deadline >= 0 and (s.nodes & 4095) == 0:
        if <double>clock() > s.deadline:
            s.timed_out = 1
            return 0
    for k in range(s.nh):
        if s.le:
            if s.gout[v] > s.hout[k] or s.gin[v] > s.hin[k]:
                continue
        else:
            if s.gout[v] != s.hout[k] or s.gin[v] != s.hin[k]:
                continue
        ok = _assign(s, v, k)
        if ok and _dfs(s, v + 1):
            return 1
        _unassign(s, v)
        if s.timed_out:
            return 0
    return 0


cdef int _search(long *ag, int ng, long *ah, int nh, int le, double deadline,
                 int *phi_out) noexcept nogil:
    """Return FOUND/NONE/TIMEOUT and write the vertex map into phi_out."""
    cdef SearchState s
    cdef int i, j, res
    s.ng = ng
    s.nh = nh
    s.le = le
    s.ag = ag
    s.ah = ah
    s.rowsum = <long *>calloc(ng * nh + 1, sizeof(long))
    s.colsum = <long *>calloc(ng * nh + 1, sizeof(long))
    s.gout = <long *>calloc(ng + 1, sizeof(long))
    s.gin = <long *>calloc(ng + 1, sizeof(long))
    s.hout = <long *>calloc(nh + 1, sizeof(long))
    s.hin = <long *>calloc(nh + 1, sizeof(long))
    s.phi = phi_out
    s.nodes = 0
    s.deadline = deadline
    s.timed_out = 0
    for i in range(ng):
        phi_out[i] = -1
        for j in range(ng):
            s.gout[i] += ag[i * ng + j]
            s.gin[j] += ag[i * ng + j]
    for i in range(nh):
        for j in range(nh):
            s.hout[i] += ah[i * nh + j]
            s.hin[j] += ah[i * nh + j]
    if ng == 0:
        res = C_FOUND
    elif nh == 0:
        res = C_NONE
    elif _dfs(&s, 0):
        res = C_FOUND
    elif s.timed_out:
        res = C_TIMEOUT
    else:
        res = C_NONE
    free(s.rowsum)
    free(s.colsum)
    free(s.gout)
    free(s.gin)
    free(s.hout)
    free(s.hin)
    return res


def search_subamalgamation(ag, ah, bint le, timeout=None):
    """Depth-first search for a vertex map whose matrix satisfies the relations.

    Returns ``(status, vertex_map)`` with status one of FOUND, NONE, TIMEOUT.
    """
    cdef cnp.ndarray[long, ndim=2, mode="c"] g = np.ascontiguousarray(ag, dtype=np.int_)
    cdef cnp.ndarray[long, ndim=2, mode="c"] h = np.ascontiguousarray(ah, dtype=np.int_)
    cdef int ng = g.shape[0], nh = h.shape[0]
    cdef cnp.ndarray[int, ndim=1, mode="c"] phi = np.full(max(ng, 1), -1, dtype=np.intc)
    cdef double deadline = -1.0
    if timeout is not None:
        deadline = <double>clock() + float(timeout) * CLOCKS_PER_SEC
    status = _search(&g[0, 0] if ng else NULL, ng, &h[0, 0] if nh else NULL, nh,
                     le, deadline, &phi[0])
    if status == FOUND:
        return FOUND, [int(phi[i]) for i in range(ng)]
    return status, None


# ---------------------------------------------------------------------------
# brute-force homomorphism oracle
# ---------------------------------------------------------------------------

cdef struct OracleState:
    int ng
    int nh
    int covering
    int nedges
    int maxb
    long *ag
    long *ah
    int *esrc
    int *edst
    int *phi
    int *img          # chosen parallel index per G-edge
    char *out_used    # ng x nh x maxb  (source i, target class J, index l)
    char *in_used     # ng x nh x maxb  (target j, source class I, index l)


cdef int _edge_dfs(OracleState *s, int k) noexcept nogil:
    cdef int i, j, I, J, l, lo, b, slot_o, slot_i
    if k == s.nedges:
        return 1
    i = s.esrc[k]
    j = s.edst[k]
    I = s.phi[i]
    J = s.phi[j]
    b = s.ah[I * s.nh + J]
    lo = 0
    # parallel G-edges are interchangeable: keep their images nondecreasing
    if k > 0 and s.esrc[k - 1] == i and s.edst[k - 1] == j:
        lo = s.img[k - 1]
    for l in range(lo, b):
        slot_o = (i * s.nh + J) * s.maxb + l
        slot_i = (j * s.nh + I) * s.maxb + l
        if s.out_used[slot_o] or s.in_used[slot_i]:
            continue
        s.out_used[slot_o] = 1
        s.in_used[slot_i] = 1
        s.img[k] = l
        if _edge_dfs(s, k + 1):
            return 1
        s.out_used[slot_o] = 0
        s.in_used[slot_i] = 0
    return 0


cdef int _oracle(long *ag, int ng, long *ah, int nh, int covering) noexcept nogil:
    cdef OracleState s
    cdef int i, j, m, k, found = 0, nedges = 0, maxb = 1, carry
    cdef long *gout
    cdef long *gin
    cdef long *hout
    cdef long *hin
    if ng == 0:
        return 1
    if nh == 0:
        return 0
    for i in range(ng):
        for j in range(ng):
            nedges += ag[i * ng + j]
    for i in range(nh * nh):
        if ah[i] > maxb:
            maxb = ah[i]
    s.ng = ng
    s.nh = nh
    s.covering = covering
    s.nedges = nedges
    s.maxb = maxb
    s.ag = ag
    s.ah = ah
    s.esrc = <int *>malloc((nedges + 1) * sizeof(int))
    s.edst = <int *>malloc((nedges + 1) * sizeof(int))
    s.img = <int *>malloc((nedges + 1) * sizeof(int))
    s.phi = <int *>calloc(ng, sizeof(int))
    s.out_used = <char *>malloc(ng * nh * maxb + 1)
    s.in_used = <char *>malloc(ng * nh * maxb + 1)
    gout = <long *>calloc(ng, sizeof(long))
    gin = <long *>calloc(ng, sizeof(long))
    hout = <long *>calloc(nh, sizeof(long))
    hin = <long *>calloc(nh, sizeof(long))
    k = 0
    for i in range(ng):
        for j in range(ng):
            gout[i] += ag[i * ng + j]
            gin[j] += ag[i * ng + j]
            for m in range(ag[i * ng + j]):
                s.esrc[k] = i
                s.edst[k] = j
                k += 1
    for i in range(nh):
        for j in range(nh):
            hout[i] += ah[i * nh + j]
            hin[j] += ah[i * nh + j]
    # odometer over all vertex maps
    while True:
        carry = 1
        if covering:
            # bijectivity needs equal cardinalities at every vertex
            for i in range(ng):
                if gout[i] != hout[s.phi[i]] or gin[i] != hin[s.phi[i]]:
                    carry = 0
                    break
        if carry:
            memset(s.out_used, 0, ng * nh * maxb)
            memset(s.in_used, 0, ng * nh * maxb)
            if _edge_dfs(&s, 0):
                found = 1
                break
        i = ng - 1
        while i >= 0:
            s.phi[i] += 1
            if s.phi[i] < nh:
                break
            s.phi[i] = 0
            i -= 1
        if i < 0:
            break
    free(s.esrc)
    free(s.edst)
    free(s.img)
    free(s.phi)
    free(s.out_used)
    free(s.in_used)
    free(gout)
    free(gin)
    free(hout)
    free(hin)
    return found


def homomorphism_exists(ag, ah, bint covering):
    """Enumerate every homomorphism between the matrix graphs; report if one is
    bi-covering (``covering``) or bi-resolving."""
    cdef cnp.ndarray[long, ndim=2, mode="c"] g = np.ascontiguousarray(ag, dtype=np.int_)
    cdef cnp.ndarray[long, ndim=2, mode="c"] h = np.ascontiguousarray(ah, dtype=np.int_)
    cdef int ng = g.shape[0], nh = h.shape[0]
    return bool(_oracle(&g[0, 0] if ng else NULL, ng, &h[0, 0] if nh else NULL, nh,
                        covering))


def family_agreement(gmats, hmats, bint le):
    """Run search and oracle on every pair of the two families.

    ``gmats``/``hmats`` are sequences of square integer matrices. Returns
    ``(maps, disagreements)`` where ``maps`` is an int8 array of shape
    ``(len(gmats), len(hmats), maxn)`` holding each found vertex map (-1 padded,
    all -1 when no witness), and ``disagreements`` lists index pairs where the
    search and the oracle differ.
    """
    cdef Py_ssize_t a, b
    cdef int i, ng, nh, st, ex, maxn = 0
    cdef int phi[MAXV]
    gl = [np.ascontiguousarray(m, dtype=np.int_) for m in gmats]
    hl = [np.ascontiguousarray(m, dtype=np.int_) for m in hmats]
    for m in gl:
        maxn = max(maxn, m.shape[0])
    maps = np.full((len(gl), len(hl), max(maxn, 1)), -1, dtype=np.int8)
    cdef signed char[:, :, ::1] mv = maps
    cdef long[:, ::1] gv
    cdef long[:, ::1] hv
    bad = []
    for a in range(len(gl)):
        gv = gl[a]
        ng = gv.shape[0]
        for b in range(len(hl)):
            hv = hl[b]
            nh = hv.shape[0]
            st = _search(&gv[0, 0], ng, &hv[0, 0], nh, le, -1.0, phi)
            ex = _oracle(&gv[0, 0], ng, &hv[0, 0], nh, 0 if le else 1)
            if (st == C_FOUND) != (ex == 1):
                bad.append((a, b))
            if st == C_FOUND:
                for i in range(ng):
                    mv[a, b, i] = phi[i]
    return maps, bad


# ---------------------------------------------------------------------------
# permutation decomposition and padding
# ---------------------------------------------------------------------------

cdef int _augment(int u, long *a, int n, int *match_col, char *seen, int first_col) noexcept nogil:
    """Kuhn augmenting path from row u over columns >= 0 (rows < first_col fixed)."""
    cdef int c
    for c in range(n):
        if a[u * n + c] > 0 and not seen[c]:
            seen[c] = 1
            if match_col[c] < 0 or (match_col[c] >= first_col and
                                    _augment(match_col[c], a, n, match_col, seen, first_col)):
                match_col[c] = u
                return 1
    return 0


cdef int _has_completion(long *a, int n, int row, int *fixed_col, int *match_col,
                         char *seen) noexcept nogil:
    """Can rows >= row be perfectly matched into columns not fixed by rows < row?"""
    cdef int c, u
    for c in range(n):
        match_col[c] = -1
    for u in range(row):
        match_col[fixed_col[u]] = u
    for u in range(row, n):
        memset(seen, 0, n)
        for c in range(n):
            if match_col[c] >= 0 and match_col[c] < row:
                seen[c] = 1
        if not _augment(u, a, n, match_col, seen, row):
            return 0
    return 1


def decompose_permutations(mat, int r):
    """Split a balanced matrix into ``r`` permutations, lexicographically least
    perfect matching first. Returns ``r`` lists of column indices."""
    cdef int n = len(mat), k, u, c, placed
    out = []
    if n == 0:
        return [[] for _ in range(r)]
    cdef long *a = <long *>malloc(n * n * sizeof(long))
    cdef int *fixed_col = <int *>malloc(n * sizeof(int))
    cdef int *match_col = <int *>malloc(n * sizeof(int))
    cdef char *seen = <char *>malloc(n)
    try:
        for u in range(n):
            row = mat[u]
            for c in range(n):
                a[u * n + c] = row[c]
        for k in range(r):
            for u in range(n):
                placed = 0
                for c in range(n):
                    if a[u * n + c] <= 0 or _col_used(fixed_col, u, c):
                        continue
                    fixed_col[u] = c
                    if _has_completion(a, n, u + 1, fixed_col, match_col, seen):
                        placed = 1
                        break
                if not placed:
                    raise ValueError("matrix has no perfect matching in its support")
            out.append([fixed_col[u] for u in range(n)])
            for u in range(n):
                a[u * n + fixed_col[u]] -= 1
    finally:
        free(a)
        free(fixed_col)
        free(match_col)
        free(seen)
    return out


cdef int _col_used(int *fixed_col, int upto, int c) noexcept nogil:
    cdef int u
    for u in range(upto):
        if fixed_col[u] == c:
            return 1
    return 0


def pad_to_balanced(mat, long b):
    """Greedy padding: add 1 at the least (row, col) with both sums deficient.

    Returns ``(padded, additions)``: nested lists, additions as (row, col) cells.
    """
    a = [list(row) for row in mat]
    cdef int n = len(a), i, j
    rs = [sum(row) for row in a]
    cs = [sum(a[i][j] for i in range(n)) for j in range(n)]
    adds = []
    i = 0
    while i < n:
        if rs[i] >= b:
            i += 1
            continue
        for j in range(n):
            if cs[j] < b:
                break
        else:
            raise ValueError("row deficient but no column deficient")
        a[i][j] += 1
        rs[i] += 1
        cs[j] += 1
        adds.append((i, j))
    return a, adds
