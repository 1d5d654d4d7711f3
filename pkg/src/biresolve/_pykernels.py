"""Pure-Python twins of the compiled kernels in ``_ckernels.pyx``.

Same signatures, same outputs; used when the extension is not built or when
``BIRESOLVE_PURE=1`` is set.
"""

from __future__ import annotations

import time

import numpy as np

FOUND = 0
NONE = 1
TIMEOUT = 2


class _Timeout(Exception):
    pass


def search_subamalgamation(ag, ah, le, timeout=None):
    ag = np.asarray(ag, dtype=np.int64).tolist()
    ah = np.asarray(ah, dtype=np.int64).tolist()
    ng, nh = len(ag), len(ah)
    if ng == 0:
        return FOUND, []
    if nh == 0:
        return NONE, None
    gout = [sum(r) for r in ag]
    gin = [sum(ag[i][j] for i in range(ng)) for j in range(ng)]
    hout = [sum(r) for r in ah]
    hin = [sum(ah[i][j] for i in range(nh)) for j in range(nh)]
    rowsum = [[0] * nh for _ in range(ng)]
    colsum = [[0] * ng for _ in range(nh)]
    phi = [-1] * ng
    deadline = None if timeout is None else time.monotonic() + timeout
    nodes = 0

    def assign(v, k):
        phi[v] = k
        ok = True
        for i in range(v + 1):
            a = ag[i][v]
            if a:
                rowsum[i][k] += a
                colsum[phi[i]][v] += a
                bound = ah[phi[i]][k]
                if rowsum[i][k] > bound or colsum[phi[i]][v] > bound:
                    ok = False
            if i == v:
                continue
            a = ag[v][i]
            if a:
                rowsum[v][phi[i]] += a
                colsum[k][i] += a
                bound = ah[k][phi[i]]
                if rowsum[v][phi[i]] > bound or colsum[k][i] > bound:
                    ok = False
        return ok

    def unassign(v):
        k = phi[v]
        for i in range(v + 1):
            a = ag[i][v]
            if a:
                rowsum[i][k] -= a
                colsum[phi[i]][v] -= a
            if i == v:
                continue
            a = ag[v][i]
            if a:
                rowsum[v][phi[i]] -= a
                colsum[k][i] -= a
        phi[v] = -1

    def leaf_ok():
        if le:
            return True
        for i in range(ng):
            for big_i in range(nh):
                if rowsum[i][big_i] != ah[phi[i]][big_i]:
                    return False
        for big_i in range(nh):
            for j in range(ng):
                if colsum[big_i][j] != ah[big_i][phi[j]]:
                    return False
        return True

    def dfs(v):
        nonlocal nodes
        if v == ng:
            return leaf_ok()
        nodes += 1
        if deadline is not None and nodes % 4096 == 0 and time.monotonic() > deadline:
            raise _Timeout
        for k in range(nh):
            if le:
                if gout[v] > hout[k] or gin[v] > hin[k]:
                    continue
            elif gout[v] != hout[k] or gin[v] != hin[k]:
                continue
            ok = assign(v, k)
            if ok and dfs(v + 1):
                return True
            unassign(v)
        return False

    try:
        if dfs(0):
            return FOUND, list(phi)
    except _Timeout:
        return TIMEOUT, None
    return NONE, None


def homomorphism_exists(ag, ah, covering):
    ag = np.asarray(ag, dtype=np.int64).tolist()
    ah = np.asarray(ah, dtype=np.int64).tolist()
    ng, nh = len(ag), len(ah)
    if ng == 0:
        return True
    if nh == 0:
        return False
    edges = [(i, j) for i in range(ng) for j in range(ng) for _ in range(ag[i][j])]
    gout = [sum(r) for r in ag]
    gin = [sum(ag[i][j] for i in range(ng)) for j in range(ng)]
    hout = [sum(r) for r in ah]
    hin = [sum(ah[i][j] for i in range(nh)) for j in range(nh)]
    img = [0] * len(edges)

    def edge_dfs(k, phi, out_used, in_used):
        if k == len(edges):
            return True
        i, j = edges[k]
        big_i, big_j = phi[i], phi[j]
        lo = img[k - 1] if k > 0 and edges[k - 1] == (i, j) else 0
        for l in range(lo, ah[big_i][big_j]):
            ko, ki = (i, big_j, l), (j, big_i, l)
            if ko in out_used or ki in in_used:
                continue
            out_used.add(ko)
            in_used.add(ki)
            img[k] = l
            if edge_dfs(k + 1, phi, out_used, in_used):
                return True
            out_used.discard(ko)
            in_used.discard(ki)
        return False

    phi = [0] * ng
    while True:
        feasible = True
        if covering:
            feasible = all(gout[i] == hout[phi[i]] and gin[i] == hin[phi[i]] for i in range(ng))
        if feasible and edge_dfs(0, phi, set(), set()):
            return True
        i = ng - 1
        while i >= 0:
            phi[i] += 1
            if phi[i] < nh:
                break
            phi[i] = 0
            i -= 1
        if i < 0:
            return False


def family_agreement(gmats, hmats, le):
    gl = [np.asarray(m, dtype=np.int64) for m in gmats]
    hl = [np.asarray(m, dtype=np.int64) for m in hmats]
    maxn = max((m.shape[0] for m in gl), default=1)
    maps = np.full((len(gl), len(hl), max(maxn, 1)), -1, dtype=np.int8)
    bad = []
    for a, g in enumerate(gl):
        for b, h in enumerate(hl):
            st, phi = search_subamalgamation(g, h, le)
            ex = homomorphism_exists(g, h, not le)
            if (st == FOUND) != ex:
                bad.append((a, b))
            if st == FOUND:
                maps[a, b, : len(phi)] = phi
    return maps, bad


def _has_completion(a, n, row, fixed_col):
    match_col = [-1] * n
    for u in range(row):
        match_col[fixed_col[u]] = u

    def augment(u, seen):
        for c in range(n):
            if a[u][c] > 0 and c not in seen:
                seen.add(c)
                owner = match_col[c]
                if owner < 0 or (owner >= row and augment(owner, seen)):
                    match_col[c] = u
                    return True
        return False

    for u in range(row, n):
        seen = {c for c in range(n) if 0 <= match_col[c] < row}
        if not augment(u, seen):
            return False
    return True


def decompose_permutations(mat, r):
    a = [[int(x) for x in row] for row in mat]
    n = len(a)
    out = [[0] * n for _ in range(r)]
    for k in range(r):
        fixed_col = [0] * n
        for u in range(n):
            for c in range(n):
                if a[u][c] <= 0 or c in fixed_col[:u]:
                    continue
                fixed_col[u] = c
                if _has_completion(a, n, u + 1, fixed_col):
                    break
            else:
                raise ValueError("matrix has no perfect matching in its support")
        for u in range(n):
            out[k][u] = fixed_col[u]
            a[u][fixed_col[u]] -= 1
    return out


def pad_to_balanced(mat, b):
    a = [[int(x) for x in row] for row in mat]
    n = len(a)
    rs = [sum(row) for row in a]
    cs = [sum(a[i][j] for i in range(n)) for j in range(n)]
    adds = []
    i = 0
    while i < n:
        if rs[i] >= b:
            i += 1
            continue
        j = next((j for j in range(n) if cs[j] < b), None)
        if j is None:
            raise ValueError("row deficient but no column deficient")
        a[i][j] += 1
        rs[i] += 1
        cs[j] += 1
        adds.append((i, j))
    return a, adds
