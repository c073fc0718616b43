# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: PageRank power iteration and Bron-Kerbosch cliques.

Same contracts as ontoforge._kernels._pure. Graphs are passed as plain
Python adjacency lists and converted to flat C arrays / bitsets here, so the
caller never depends on the backend in use.
"""

from libc.stdlib cimport calloc, free, malloc


def pagerank(object out_edges, double damping, double tolerance, int max_iterations):
    cdef Py_ssize_t n = len(out_edges)
    if n == 0:
        raise ValueError("pagerank kernel requires a non-empty graph")

    # CSR layout of out-edges.
    cdef Py_ssize_t m = 0
    for targets in out_edges:
        m += len(targets)
    cdef Py_ssize_t *indptr = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *indices = <Py_ssize_t *> malloc((m if m > 0 else 1) * sizeof(Py_ssize_t))
    cdef double *score = <double *> malloc(n * sizeof(double))
    cdef double *nxt = <double *> malloc(n * sizeof(double))
    if indptr == NULL or indices == NULL or score == NULL or nxt == NULL:
        free(indptr); free(indices); free(score); free(nxt)
        raise MemoryError()

    cdef Py_ssize_t i, j, k = 0
    indptr[0] = 0
    for i in range(n):
        for t in out_edges[i]:
            indices[k] = <Py_ssize_t> t
            k += 1
        indptr[i + 1] = k

    cdef double teleport = (1.0 - damping) / n
    cdef double dangling, base, share, delta, total
    cdef Py_ssize_t deg
    cdef int iterations = 0
    cdef bint converged = False

    for i in range(n):
        score[i] = 1.0 / n

    try:
        while iterations < max_iterations:
            iterations += 1
            dangling = 0.0
            for i in range(n):
                if indptr[i + 1] == indptr[i]:
                    dangling += score[i]
            base = teleport + damping * dangling / n
            for i in range(n):
                nxt[i] = base
            for i in range(n):
                deg = indptr[i + 1] - indptr[i]
                if deg > 0:
                    share = damping * score[i] / deg
                    for j in range(indptr[i], indptr[i + 1]):
                        nxt[indices[j]] += share
            delta = 0.0
            for i in range(n):
                delta += abs(nxt[i] - score[i])
                score[i] = nxt[i]
            if delta < tolerance:
                converged = True
                break
        total = 0.0
        for i in range(n):
            total += score[i]
        result = [score[i] / total for i in range(n)]
    finally:
        free(indptr); free(indices); free(score); free(nxt)
    return result, iterations, converged


cdef inline bint bit_get(unsigned long long *row, Py_ssize_t v):
    return (row[v >> 6] >> (v & 63)) & 1ULL


cdef inline void bit_set(unsigned long long *row, Py_ssize_t v):
    row[v >> 6] |= 1ULL << (v & 63)


cdef inline void bit_clear(unsigned long long *row, Py_ssize_t v):
    row[v >> 6] &= ~(1ULL << (v & 63))


cdef inline Py_ssize_t _popcount(unsigned long long x):
    cdef Py_ssize_t total = 0
    while x:
        x &= x - 1
        total += 1
    return total


cdef int expand(unsigned long long *adj, Py_ssize_t n, Py_ssize_t words,
                unsigned long long *clique, unsigned long long *candidates,
                unsigned long long *excluded, list found) except -1:
    cdef Py_ssize_t i, v, pivot = -1
    cdef Py_ssize_t best = -1, cnt
    cdef bint empty_p = True, empty_x = True
    for i in range(words):
        if candidates[i] != 0:
            empty_p = False
        if excluded[i] != 0:
            empty_x = False
    if empty_p and empty_x:
        members = []
        for v in range(n):
            if bit_get(clique, v):
                members.append(v)
        found.append(tuple(members))
        return 0

    # Pivot: vertex of P|X with the most neighbors inside P.
    for v in range(n):
        if bit_get(candidates, v) or bit_get(excluded, v):
            cnt = 0
            for i in range(words):
                cnt += _popcount(candidates[i] & adj[v * words + i])
            if cnt > best:
                best = cnt
                pivot = v

    cdef unsigned long long *sub_p
    cdef unsigned long long *sub_x
    for v in range(n):
        if bit_get(candidates, v) and not bit_get(adj + pivot * words, v):
            sub_p = <unsigned long long *> malloc(words * sizeof(unsigned long long))
            sub_x = <unsigned long long *> malloc(words * sizeof(unsigned long long))
            if sub_p == NULL or sub_x == NULL:
                free(sub_p); free(sub_x)
                raise MemoryError()
            for i in range(words):
                sub_p[i] = candidates[i] & adj[v * words + i]
                sub_x[i] = excluded[i] & adj[v * words + i]
            bit_set(clique, v)
            try:
                expand(adj, n, words, clique, sub_p, sub_x, found)
            finally:
                bit_clear(clique, v)
                free(sub_p); free(sub_x)
            bit_clear(candidates, v)
            bit_set(excluded, v)
    return 0


def maximal_cliques(object neighbors):
    """All maximal cliques (singletons included) as sorted vertex tuples."""
    cdef Py_ssize_t n = len(neighbors)
    if n == 0:
        return []
    cdef Py_ssize_t words = (n + 63) >> 6
    cdef list found = []
    cdef unsigned long long *adj = <unsigned long long *> calloc(n * words, sizeof(unsigned long long))
    cdef unsigned long long *clique = <unsigned long long *> calloc(words, sizeof(unsigned long long))
    cdef unsigned long long *candidates = <unsigned long long *> calloc(words, sizeof(unsigned long long))
    cdef unsigned long long *excluded = <unsigned long long *> calloc(words, sizeof(unsigned long long))
    if adj == NULL or clique == NULL or candidates == NULL or excluded == NULL:
        free(adj); free(clique); free(candidates); free(excluded)
        raise MemoryError()

    cdef Py_ssize_t i, t
    try:
        for i in range(n):
            for target in neighbors[i]:
                t = <Py_ssize_t> target
                bit_set(adj + i * words, t)
                bit_set(adj + t * words, i)
            bit_clear(adj + i * words, i)
        for i in range(n):
            bit_set(candidates, i)
        expand(adj, n, words, clique, candidates, excluded, found)
        return found
    finally:
        free(adj); free(clique); free(candidates); free(excluded)
